"""Command line entry point.

Subcommands:

    serve               run the HTTP gateway
    sim run SCRIPT      replay a transcript against a running gateway
    sim chat            interactive terminal conversation
    sim load            concurrent scripted clients
    analytics report    text/CSV report from an exported CSV
    analytics ttest     two-group Student t from summary statistics
    export              dump a storage file to the canonical CSV
"""

from __future__ import annotations

import argparse
import sys

import httpx

from . import analytics, sim
from .config import ConfigError, load_config
from .storage import RecordStore, StorageError


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="surveybot")
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="run the HTTP gateway")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8080)
    serve.add_argument("--db", default="surveybot.sqlite3")
    serve.add_argument("--flow", default=None, help="flow definition file")
    serve.add_argument("--catalog-dir", default=None, help="locale catalog directory")
    serve.add_argument("--verify-token", default="change-me")
    serve.add_argument("--app-secret", default="change-me")
    serve.add_argument("--page-token", default="", help="platform token; empty = mock profiles")
    serve.add_argument("--profile-fixtures", default=None, help="JSON file for mock profiles")
    serve.add_argument("--delay-ms", type=int, default=None, help="override send delay")
    serve.add_argument("--ui-dir", default=None, help="static chat UI bundle to mount at /ui")

    simp = sub.add_parser("sim", help="simulator")
    sim_sub = simp.add_subparsers(dest="sim_command", required=True)

    sim_run = sim_sub.add_parser("run", help="replay a transcript script")
    sim_run.add_argument("script")
    sim_run.add_argument("--url", default="http://127.0.0.1:8080")
    sim_run.add_argument("--user", default=None)
    sim_run.add_argument("--timeout", type=float, default=10.0)

    sim_chat = sim_sub.add_parser("chat", help="interactive conversation")
    sim_chat.add_argument("--url", default="http://127.0.0.1:8080")
    sim_chat.add_argument("--user", default=None)
    sim_chat.add_argument("--locale-hint", default=None, choices=["pl", "uk", "en"])

    sim_load = sim_sub.add_parser("load", help="concurrent scripted clients")
    sim_load.add_argument("--clients", type=int, default=5)
    sim_load.add_argument("--script", required=True)
    sim_load.add_argument("--url", default="http://127.0.0.1:8080")
    sim_load.add_argument("--timeout", type=float, default=20.0)

    ana = sub.add_parser("analytics", help="evaluation reports")
    ana_sub = ana.add_subparsers(dest="analytics_command", required=True)

    report = ana_sub.add_parser("report", help="summaries from an exported CSV")
    report.add_argument("--csv", required=True, help="export produced by the storage module")
    report.add_argument("--format", choices=["text", "csv"], default="text")
    report.add_argument("--out", default=None, help="write here instead of stdout")

    ttest = ana_sub.add_parser("ttest", help="independent two-group Student t")
    ttest.add_argument("--n1", type=int, required=True)
    ttest.add_argument("--mean1", type=float, required=True)
    ttest.add_argument("--sd1", type=float, required=True)
    ttest.add_argument("--n2", type=int, required=True)
    ttest.add_argument("--mean2", type=float, required=True)
    ttest.add_argument("--sd2", type=float, required=True)

    export = sub.add_parser("export", help="dump storage to the canonical CSV")
    export.add_argument("--db", required=True)
    export.add_argument("--out", default=None, help="write here instead of stdout")

    return parser


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .gateway.app import GatewaySettings, create_app

    try:
        config = load_config(flow_path=args.flow, catalog_dir=args.catalog_dir)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    settings = GatewaySettings(
        verify_token=args.verify_token,
        app_secret=args.app_secret,
        page_token=args.page_token,
        db_path=args.db,
        send_delay_s=(args.delay_ms / 1000.0) if args.delay_ms is not None else None,
        ui_dir=args.ui_dir,
        profile_fixtures=args.profile_fixtures,
    )
    app = create_app(config=config, settings=settings)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def _cmd_sim(args: argparse.Namespace) -> int:
    try:
        if args.sim_command == "run":
            result = sim.run_script(args.script, args.url, user=args.user, timeout=args.timeout)
            print(sim.format_result(result))
            return 0 if result.passed else 1
        if args.sim_command == "chat":
            return sim.interactive(args.url, user=args.user, locale_hint=args.locale_hint)
        if args.sim_command == "load":
            results = sim.run_load(
                args.script, args.url, clients=args.clients, timeout=args.timeout
            )
            for result in results:
                print(sim.format_result(result))
            passed = sum(1 for r in results if r.passed)
            print(f"{passed}/{len(results)} clients passed")
            return 0 if passed == len(results) else 1
    except sim.ScriptError as exc:
        print(f"script error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"script error: {exc}", file=sys.stderr)
        return 2
    except httpx.HTTPError as exc:
        print(f"connection error: {exc}", file=sys.stderr)
        return 2
    return 2


def _write_out(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
    else:
        with open(out, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)


def _cmd_analytics(args: argparse.Namespace) -> int:
    if args.analytics_command == "report":
        try:
            with open(args.csv, encoding="utf-8", newline="") as handle:
                records = analytics_records(handle.read())
        except OSError as exc:
            print(f"error: cannot read {args.csv}: {exc}", file=sys.stderr)
            return 2
        if args.format == "text":
            _write_out(analytics.render_text_report(records), args.out)
        else:
            _write_out(analytics.render_csv_report(records), args.out)
        return 0
    if args.analytics_command == "ttest":
        try:
            result = analytics.student_t_independent(
                analytics.GroupStats(n=args.n1, mean=args.mean1, sd=args.sd1),
                analytics.GroupStats(n=args.n2, mean=args.mean2, sd=args.sd2),
            )
        except analytics.AnalyticsError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
        verdict = "significant" if result.significant_at_05 else "not significant"
        print(f"t({result.df}) = {result.t:.3f}; {verdict} at 0.05 (two-tailed)")
        return 0
    return 2


def analytics_records(csv_text: str) -> list[dict]:
    from .storage import csv_to_records

    return csv_to_records(csv_text)


def _cmd_export(args: argparse.Namespace) -> int:
    try:
        store = RecordStore(args.db)
        text = store.export_csv()
    except StorageError as exc:
        print(f"storage error: {exc}", file=sys.stderr)
        return 2
    _write_out(text, args.out)
    return 0


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "serve":
        return _cmd_serve(args)
    if args.command == "sim":
        return _cmd_sim(args)
    if args.command == "analytics":
        return _cmd_analytics(args)
    if args.command == "export":
        return _cmd_export(args)
    return 2


if __name__ == "__main__":
    sys.exit(main())
