"""End-to-end demo: synthesize a 60-day cohort with a planted poor-mood
block, run it through the engine, and print what a provider would see.

    python3 scripts/run_demo.py [--workdir /tmp/mhnav_demo] [--days 60]
"""

import argparse
import json
import shutil
import tempfile
import time
from pathlib import Path

from mhnav.service.engine import Engine
from mhnav.simkit.generate import april_like_config, generate


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--workdir", default=None)
    parser.add_argument("--days", type=int, default=60)
    parser.add_argument("--subjects", type=int, default=1)
    parser.add_argument("--seed", type=int, default=42)
    args = parser.parse_args()

    workdir = Path(args.workdir or tempfile.mkdtemp(prefix="mhnav_demo_"))
    if workdir.exists() and args.workdir:
        shutil.rmtree(workdir, ignore_errors=True)
    print(f"workdir: {workdir}")

    t0 = time.time()
    cfg = april_like_config(subjects=args.subjects, days=args.days, seed=args.seed)
    generate(cfg, workdir / "raw")
    print(f"generated {args.subjects} subject(s) x {args.days} days "
          f"in {time.time() - t0:.1f}s")

    t0 = time.time()
    engine = Engine(workdir / "engine")
    n = engine.ingest_dir(workdir / "raw")
    print(f"processed {n} subject-days in {time.time() - t0:.1f}s\n")

    subject = "s01"
    days = sorted(engine.daily[subject])

    print("= daily features (every 6th day) =")
    for d in days[::6]:
        row = engine.daily[subject][d]
        print(f"  {d}  mood {row['mean_positive'] or 0:5.1f}/{row['mean_negative'] or 0:5.1f}"
              f"  sleep {row['sleep_score']:5.1f}  rmssd {row['rmssd'] or 0:5.1f}"
              f"  steps {row['steps'] or 0:7.0f}  home {row['home_minutes'] or 0:6.0f}")

    print("\n= mood phases =")
    for phase, s, e in engine.regime(subject):
        print(f"  {phase:12s} days {s:2d}..{e - 1}")

    print("\n= depression screen =")
    for idx in (21, 44, len(days) - 1):
        screen = engine.screen_at(subject, days[idx])
        print(f"  day {idx:2d} ({days[idx]}): score {screen.score:2d} [{screen.band}]")

    print("\n= latest state =")
    state = engine.latest_state(subject)
    for dim, value in state["dims"].items():
        print(f"  {dim:22s} {value:.3f}")
    print(f"  regions: {state['regions']}")

    print("\n= guidance =")
    engine.goal_action(subject, {"create": True, "target": "healthy"})
    engine.goal_action(subject, {"action": "provider_agree"})
    plan = engine.make_plan(subject, {"dry_run": True})
    if plan.steps:
        for step in plan.steps:
            print(f"  week {step['start_week']:2d}: {step['intervention_id']} "
                  f"for {step['weeks']} week(s)")
        print(f"  total cost {plan.total_cost}")
    else:
        print("  already inside the goal region; nothing to do")

    print("\n= open alerts =")
    for alert in engine.open_alerts():
        print(f"  {alert.kind:24s} {json.dumps(alert.payload)}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
