"""Record real service responses as dashboard test fixtures.

Builds a small synthetic cohort, runs the engine, exercises the API exactly
the way the dashboard does, and freezes every response body under
tests/fixtures/.  Re-run after changing the engine's wire format.

    python3 scripts/record_fixtures.py
"""

import json
import shutil
import tempfile
from pathlib import Path

from fastapi.testclient import TestClient

from mhnav.service.api import create_app
from mhnav.service.engine import Engine
from mhnav.simkit.generate import april_like_config, generate

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures"
HEADERS = {"Authorization": "Bearer provider-token"}


def dump(name: str, payload) -> None:
    FIXTURES.mkdir(parents=True, exist_ok=True)
    (FIXTURES / f"{name}.json").write_text(json.dumps(payload, indent=1,
                                                      sort_keys=True))
    print(f"recorded {name}.json")


def main() -> int:
    workdir = Path(tempfile.mkdtemp(prefix="mhnav_fixtures_"))
    try:
        # end the recording inside the poor-mood block so the planner has a
        # real route to propose
        cfg = april_like_config(subjects=1, days=34, seed=42,
                                poor_start=22, poor_len=12)
        generate(cfg, workdir / "raw")
        engine = Engine(workdir / "engine")
        engine.ingest_dir(workdir / "raw")
        client = TestClient(create_app(engine))

        dump("subjects", client.get("/subjects", headers=HEADERS).json())
        dump("timeline", client.get("/subjects/s01/timeline",
                                    headers=HEADERS).json())
        dump("state", client.get("/subjects/s01/state", headers=HEADERS).json())

        r = client.post("/subjects/s01/goals", headers=HEADERS,
                        json={"create": True, "target": "healthy",
                              "proposed_by": "provider"})
        dump("goal_proposed", r.json())
        r = client.post("/subjects/s01/goals", headers=HEADERS,
                        json={"action": "provider_agree",
                              "version": r.json()["version"]})
        dump("goal_consensus", r.json())
        r = client.post("/subjects/s01/goals", headers=HEADERS,
                        json={"action": "provider_agree"})
        dump("goal_illegal", {"status": r.status_code, "body": r.json()})

        preview = client.post("/subjects/s01/guidance", headers=HEADERS,
                              json={"dry_run": True})
        dump("plan_preview", preview.json())
        committed = client.post("/subjects/s01/guidance", headers=HEADERS, json={})
        dump("plan_committed", committed.json())
        dump("plan_get", client.get("/subjects/s01/plan", headers=HEADERS).json())

        alerts = client.get("/alerts?state=open", headers=HEADERS).json()
        dump("alerts_open", alerts)
        if alerts:
            acked = client.post(f"/alerts/{alerts[0]['id']}/ack", headers=HEADERS)
            dump("alert_acked", acked.json())
            dump("alerts_after_ack",
                 client.get("/alerts?state=open", headers=HEADERS).json())
        return 0
    finally:
        shutil.rmtree(workdir, ignore_errors=True)


if __name__ == "__main__":
    raise SystemExit(main())
