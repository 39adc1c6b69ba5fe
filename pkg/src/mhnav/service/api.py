"""HTTP+JSON API over the engine: the only mutation path for goals, guidance
and alerts, plus the replay ingest target.

Authentication is a static bearer token per session: the provider token sees
the whole panel; a subject token (``subject-<id>-token``) is scoped to its own
resources.  Mutations carry optimistic version numbers; stale writes get 409.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

from fastapi import Depends, FastAPI, Header, HTTPException, Query

from ..chronicle import UnknownSubject
from ..timeutil import day_bounds
from ..estimator import InsufficientData as ScreenInsufficient
from ..estimator import TooShort as RegimeTooShort
from ..navigator import IllegalTransition, NoConsensusGoal, NoRoute
from .engine import Engine, VersionConflict


@dataclass
class Session:
    role: str              # provider | individual
    subject: str | None    # scope for individuals


def create_app(engine: Engine) -> FastAPI:
    app = FastAPI(title="mental health navigator", version="0.1.0")
    provider_token = os.environ.get("MHN_PROVIDER_TOKEN", "provider-token")

    def session(authorization: str = Header(default="")) -> Session:
        token = authorization.removeprefix("Bearer ").strip()
        if token == provider_token:
            return Session(role="provider", subject=None)
        if token.startswith("subject-") and token.endswith("-token"):
            return Session(role="individual",
                           subject=token[len("subject-"):-len("-token")])
        raise HTTPException(status_code=403, detail="unknown token")

    def check_scope(ses: Session, subject: str) -> None:
        if ses.role == "individual" and ses.subject != subject:
            raise HTTPException(status_code=403, detail="subject scope violation")

    @app.get("/subjects")
    def subjects(ses: Session = Depends(session)):
        known = sorted(set(engine.daily) | set(engine.chronicle.subjects()))
        if ses.role == "individual":
            known = [s for s in known if s == ses.subject]
        out = []
        for s in known:
            state = engine.latest_state(s)
            out.append({"subject": s,
                        "days": len(engine.daily.get(s, {})),
                        "latest_state": state,
                        "open_alerts": sum(1 for a in engine.open_alerts()
                                           if a.subject == s)})
        return out

    @app.get("/subjects/{subject}/timeline")
    def timeline(subject: str, ses: Session = Depends(session),
                 from_ms: int | None = Query(default=None, alias="from"),
                 to_ms: int | None = Query(default=None, alias="to")):
        check_scope(ses, subject)
        rows = engine.daily.get(subject)
        if not rows:
            raise HTTPException(status_code=404, detail="unknown subject")

        def in_range(day_iso: str) -> bool:
            from datetime import date as _date
            start, end = day_bounds(_date.fromisoformat(day_iso), engine.tz(subject))
            return (from_ms is None or end > from_ms) and \
                   (to_ms is None or start < to_ms)

        days = [d for d in sorted(rows) if in_range(d)]
        daily = [rows[d] for d in days]
        summaries = []
        for d in days:
            from datetime import date as _date
            try:
                summaries.append(engine.chronicle.daily_summary(
                    subject, _date.fromisoformat(d), engine.tz(subject)).to_json())
            except UnknownSubject:
                break
        try:
            events = engine.chronicle.query_window(
                subject, from_ms if from_ms is not None else 0,
                to_ms if to_ms is not None else 2**62)
            event_rows = [e.to_json() for e in events]
        except UnknownSubject:
            event_rows = []
        return {"subject": subject, "daily": daily, "summaries": summaries,
                "events": event_rows}

    @app.get("/subjects/{subject}/state")
    def state(subject: str, ses: Session = Depends(session),
              from_ms: int | None = Query(default=None, alias="from"),
              to_ms: int | None = Query(default=None, alias="to")):
        check_scope(ses, subject)
        latest = engine.latest_state(subject)
        if latest is None:
            raise HTTPException(status_code=404, detail="no state for subject")
        out = dict(latest)
        try:
            out["screen"] = engine.screen_at(subject).to_json()
        except (ScreenInsufficient, ValueError):
            out["screen"] = None
        try:
            out["regime"] = [list(r) for r in engine.regime(subject)]
        except RegimeTooShort:
            out["regime"] = None
        out["space"] = engine.space.to_json()
        out["history"] = [
            r for r in engine.states.get(subject, [])
            if (from_ms is None or r["timestamp"] >= from_ms)
            and (to_ms is None or r["timestamp"] < to_ms)]
        return out

    @app.get("/subjects/{subject}/plan")
    def get_plan(subject: str, ses: Session = Depends(session)):
        check_scope(ses, subject)
        plan = engine.plans.get(subject)
        if plan is None:
            raise HTTPException(status_code=404, detail="no plan")
        return plan.to_json()

    @app.get("/subjects/{subject}/goal")
    def get_goal(subject: str, ses: Session = Depends(session)):
        check_scope(ses, subject)
        goal = engine.goals.get(subject)
        if goal is None:
            raise HTTPException(status_code=404, detail="no goal")
        return goal.to_json()

    @app.post("/subjects/{subject}/goals")
    def post_goal(subject: str, body: dict, ses: Session = Depends(session)):
        check_scope(ses, subject)
        if not body.get("create") and "action" not in body:
            raise HTTPException(status_code=400, detail="need create or action")
        provider_only = {"provider_agree", "provider_diverge"}
        if body.get("action") in provider_only and ses.role != "provider":
            raise HTTPException(status_code=403, detail="provider action")
        try:
            goal = engine.goal_action(subject, body)
        except KeyError:
            raise HTTPException(status_code=404, detail="no goal to update") from None
        except VersionConflict as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from None
        except IllegalTransition as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from None
        return goal.to_json()

    @app.post("/subjects/{subject}/guidance")
    def post_guidance(subject: str, body: dict, ses: Session = Depends(session)):
        check_scope(ses, subject)
        try:
            plan = engine.make_plan(subject, body)
        except KeyError as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from None
        except NoConsensusGoal as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from None
        except NoRoute as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from None
        except (TypeError, ValueError) as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from None
        return plan.to_json()

    @app.get("/subjects/{subject}/feedback")
    def feedback(subject: str, ses: Session = Depends(session)):
        check_scope(ses, subject)
        try:
            return engine.check_plan(subject)
        except KeyError:
            raise HTTPException(status_code=404, detail="no plan") from None

    @app.get("/subjects/{subject}/recommendations")
    def recommendations(subject: str, ses: Session = Depends(session)):
        check_scope(ses, subject)
        try:
            return engine.recommendations(subject)
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from None

    @app.get("/alerts")
    def alerts(ses: Session = Depends(session), state: str = "open"):
        out = engine.open_alerts() if state == "open" else \
            sorted(engine.alerts.values(), key=lambda a: (a.created_at, a.id))
        if ses.role == "individual":
            out = [a for a in out if a.subject == ses.subject]
        return [a.to_json() for a in out]

    @app.post("/alerts/{alert_id}/ack")
    def ack(alert_id: str, ses: Session = Depends(session)):
        if ses.role != "provider":
            raise HTTPException(status_code=403, detail="provider only")
        try:
            return engine.ack_alert(alert_id).to_json()
        except KeyError:
            raise HTTPException(status_code=404, detail="unknown alert") from None

    @app.post("/ingest")
    def ingest(body: dict, ses: Session = Depends(session)):
        for key in ("subject", "channel", "timestamps", "values"):
            if key not in body:
                raise HTTPException(status_code=400, detail=f"missing {key}")
        check_scope(ses, body["subject"])
        try:
            path = engine.upload_batch(body["subject"], body["channel"],
                                       body["timestamps"], body["values"])
        except (ValueError, KeyError) as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from None
        return {"stored": str(path)}

    return app
