"""Development server with the chat UI mounted when a bundle exists.

Equivalent to `surveybot serve --ui-dir frontend/dist` plus sensible dev
defaults; production deployments should use the console script directly.
"""

from __future__ import annotations

import sys
from pathlib import Path

from surveybot.cli import main

ROOT = Path(__file__).resolve().parent.parent


def run() -> int:
    ui_dir = ROOT.parent / "frontend" / "dist"
    argv = ["serve", "--db", str(ROOT / "surveybot.sqlite3")]
    if ui_dir.is_dir():
        argv += ["--ui-dir", str(ui_dir)]
    return main(argv + sys.argv[1:])


if __name__ == "__main__":
    sys.exit(run())
