"""Headless command line for the engine.

Environment: MHN_DATA_DIR (default ./mhn_data), MHN_BIND_ADDR (serve),
MHN_CONFIG (key = value overrides).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from ..config import load_config


def _engine(args):
    from .engine import Engine
    data_dir = Path(args.data_dir or os.environ.get("MHN_DATA_DIR", "mhn_data"))
    cfg = load_config(os.environ.get("MHN_CONFIG") or None)
    return Engine(data_dir, cfg)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="mhn",
                                     description="mental health navigator engine")
    parser.add_argument("--data-dir", default=None, help="engine data directory")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("serve", help="run the HTTP API")
    p.add_argument("--bind", default=None, help="host:port")

    p = sub.add_parser("ingest", help="process a raw data directory")
    p.add_argument("raw_dir", nargs="?", default=None)
    p.add_argument("--subject", action="append", default=None)

    p = sub.add_parser("estimate", help="print the latest state for a subject")
    p.add_argument("subject")

    p = sub.add_parser("screen", help="run the depression screen")
    p.add_argument("subject")
    p.add_argument("--day", default=None, help="ISO day ending the window")

    p = sub.add_parser("plan", help="plan a guidance route")
    p.add_argument("subject")
    p.add_argument("--target", default="healthy")
    p.add_argument("--provider-approved", action="store_true")
    p.add_argument("--dry-run", action="store_true")

    p = sub.add_parser("regime", help="print detected mood phases")
    p.add_argument("subject")

    p = sub.add_parser("alerts", help="list open alerts")

    p = sub.add_parser("verify-replay", help="journal replay determinism check")

    args = parser.parse_args(argv)

    try:
        return _dispatch(args)
    except (ValueError, KeyError, LookupError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _dispatch(args) -> int:
    if args.command == "serve":
        import uvicorn
        from .api import create_app
        engine = _engine(args)
        bind = args.bind or os.environ.get("MHN_BIND_ADDR", "127.0.0.1:8787")
        host, _, port = bind.partition(":")
        uvicorn.run(create_app(engine), host=host, port=int(port or 8787))
        return 0

    engine = _engine(args)

    if args.command == "ingest":
        days = engine.ingest_dir(args.raw_dir, args.subject)
        print(f"processed {days} subject-days; "
              f"{len(engine.open_alerts())} open alerts")
        return 0

    if args.command == "estimate":
        state = engine.latest_state(args.subject)
        if state is None:
            print(f"no state for {args.subject}", file=sys.stderr)
            return 1
        print(json.dumps(state, indent=1, sort_keys=True))
        return 0

    if args.command == "screen":
        screen = engine.screen_at(args.subject, args.day)
        print(json.dumps(screen.to_json(), indent=1, sort_keys=True))
        return 0

    if args.command == "plan":
        if args.subject not in engine.goals:
            engine.goal_action(args.subject,
                               {"create": True, "target": args.target,
                                "proposed_by": "individual"})
            engine.goal_action(args.subject, {"action": "provider_agree",
                                              "note": "headless consensus"})
        plan = engine.make_plan(args.subject, {
            "dry_run": args.dry_run,
            "constraints": {"provider_approved": args.provider_approved}})
        print(json.dumps(plan.to_json(), indent=1, sort_keys=True))
        return 0

    if args.command == "regime":
        phases = engine.regime(args.subject)
        for phase, start, end in phases:
            print(f"{phase}\tdays {start}..{end - 1}")
        return 0

    if args.command == "alerts":
        for alert in engine.open_alerts():
            print(json.dumps(alert.to_json(), sort_keys=True))
        return 0

    if args.command == "verify-replay":
        from .engine import Engine
        before = engine.state_hash()
        replayed = Engine.replay_journal(engine.data_dir, engine.cfg)
        after = replayed.state_hash()
        print(f"before: {before}\nafter:  {after}")
        print("MATCH" if before == after else "MISMATCH")
        return 0 if before == after else 1

    return 2


if __name__ == "__main__":
    raise SystemExit(main())
