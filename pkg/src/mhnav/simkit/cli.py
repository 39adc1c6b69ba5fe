"""Command line for the synthetic cohort toolkit."""

from __future__ import annotations

import argparse


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="simkit",
                                     description="synthetic cohort generator/replayer")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="emit a cohort data directory + ledger")
    p.add_argument("--config", default=None, help="cohort config JSON")
    p.add_argument("--april-like", action="store_true",
                   help="use the default planted poor-mood scenario")
    p.add_argument("--out", required=True)

    p = sub.add_parser("replay", help="replay a data directory into a sink")
    p.add_argument("--data", required=True)
    p.add_argument("--speed", type=float, default=0.0,
                   help="0 = as fast as possible; otherwise a time multiplier")
    p.add_argument("--target", required=True,
                   help="directory path or http(s) ingest endpoint")

    args = parser.parse_args(argv)

    if args.command == "generate":
        from .generate import april_like_config, generate, load_cohort_config
        if args.config:
            cfg = load_cohort_config(args.config)
        elif args.april_like:
            cfg = april_like_config()
        else:
            from .generate import CohortConfig
            cfg = CohortConfig()
        ledger = generate(cfg, args.out)
        n_days = sum(len(s["days"]) for s in ledger["subjects"].values())
        print(f"generated {len(ledger['subjects'])} subjects, {n_days} subject-days "
              f"under {args.out}")
        return 0

    if args.command == "replay":
        from .replay import directory_sink, http_sink, replay
        if args.target.startswith("http://") or args.target.startswith("https://"):
            sink = http_sink(args.target)
        else:
            sink = directory_sink(args.target)
        n = replay(args.data, args.speed, sink)
        print(f"delivered {n} batches")
        return 0

    return 2


if __name__ == "__main__":
    raise SystemExit(main())
