"""Regenerate the frozen happy-path transcripts in tests/transcripts/.

Run only when the default flow or catalogs intentionally change; the test
suite replays the committed files and treats any drift as a regression.

Four scripts: one per locale with employed=no (identical answers, so the
persisted records must match except for the language flag), plus an
English employed=yes script that exercises the competency questionnaire
and its feedback.
"""

from __future__ import annotations

import socket
import sys
from pathlib import Path

from surveybot import sim
from surveybot.config import load_default_config
from surveybot.gateway.app import GatewaySettings, ServerHandle, create_app

OUT_DIR = Path(__file__).resolve().parent.parent / "tests" / "transcripts"

TIPI_ANSWERS = ["5", "3", "6", "2", "7", "4", "5", "3", "6", "2"]
COMPETENCY_ANSWERS = [str(i % 5 + 1) for i in range(26)]
SUS_ANSWERS = ["4", "2", "5", "1", "4", "2", "5", "3", "4", "2"]
META_ANSWERS = ["29", "4", "1", "2"]  # age, it skills, immigrant=yes, device=mobile

LANG_DIGIT = {"pl": "1", "uk": "2", "en": "3"}


def free_port() -> int:
    with socket.socket() as sock:
        sock.bind(("127.0.0.1", 0))
        return sock.getsockname()[1]


def conversation_inputs(locale: str, employed: bool) -> list[tuple[str, bool]]:
    """(text to send, emit batch-end marker after this batch) pairs."""
    steps: list[tuple[str, bool]] = [("hello", True), (LANG_DIGIT[locale], True)]
    steps += [(a, False) for a in TIPI_ANSWERS[:-1]] + [(TIPI_ANSWERS[-1], False)]
    # the employment answer's batch proves the gate: competency questions
    # appear iff employed
    steps.append(("1" if employed else "2", True))
    if employed:
        steps += [(a, False) for a in COMPETENCY_ANSWERS]
    steps += [(a, False) for a in SUS_ANSWERS]
    steps += [(a, False) for a in META_ANSWERS[:-1]]
    steps.append((META_ANSWERS[-1], True))
    return steps


def record_script(base_url: str, locale: str, employed: bool, user_id: str) -> str:
    client = sim.LoopbackClient(base_url, user_id)
    lines = [
        "# frozen happy-path transcript; regenerate via scripts/generate_golden_transcripts.py",
        "@user auto",
        f"@locale {locale}",
    ]
    try:
        for text, mark_end in conversation_inputs(locale, employed):
            client.send(text)
            lines.append(f"> {text}")
            for message in client.drain(first_wait=10.0, quiet=0.2):
                lines.append(f"< {sim.escape_text(message.text)}")
            if mark_end:
                lines.append("=")
        lines.append("!finalized")
    finally:
        client.close()
    return "\n".join(lines) + "\n"


def main() -> int:
    OUT_DIR.mkdir(parents=True, exist_ok=True)
    app = create_app(
        config=load_default_config(), settings=GatewaySettings(send_delay_s=0.0)
    )
    handle = ServerHandle(app, port=free_port())
    handle.start()
    try:
        jobs = [("pl", False), ("uk", False), ("en", False), ("en", True)]
        for locale, employed in jobs:
            suffix = "_employed" if employed else ""
            name = f"happy_{locale}{suffix}.txt"
            text = record_script(
                handle.base_url, locale, employed, f"golden-{locale}{suffix}"
            )
            (OUT_DIR / name).write_text(text, encoding="utf-8")
            print(f"wrote {OUT_DIR / name}")
    finally:
        handle.stop()
    return 0


if __name__ == "__main__":
    sys.exit(main())
