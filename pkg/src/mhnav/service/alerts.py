"""Alert rules: screen-band escalations, sustained high stress, plan drift.

A screen_band_increase fires once per upward crossing of the personalized
alert boundary and stays deduplicated until the band falls back below it.
Sustained high stress fires once per run of consecutive high-stress windows
reaching the configured length.  Acknowledgment is terminal.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..config import AlertConfig
from ..personal import SCREEN_BANDS

ALERT_KINDS = ("screen_band_increase", "sustained_high_stress", "plan_drift")


@dataclass
class Alert:
    id: str
    subject: str
    kind: str
    created_at: int
    payload: dict = field(default_factory=dict)
    state: str = "open"          # open | acknowledged

    def acknowledge(self) -> None:
        self.state = "acknowledged"

    def to_json(self) -> dict:
        return {"id": self.id, "subject": self.subject, "kind": self.kind,
                "created_at": self.created_at, "payload": self.payload,
                "state": self.state}

    @classmethod
    def from_json(cls, obj: dict) -> "Alert":
        return cls(id=obj["id"], subject=obj["subject"], kind=obj["kind"],
                   created_at=int(obj["created_at"]), payload=dict(obj.get("payload", {})),
                   state=obj.get("state", "open"))


def band_index(band: str) -> int:
    return SCREEN_BANDS.index(band)


def count_upward_crossings(bands: list[str], boundary: str) -> int:
    """Number of transitions from below the boundary band to at or above it."""
    b = band_index(boundary)
    count = 0
    above = False
    for band in bands:
        now = band_index(band) >= b
        if now and not above:
            count += 1
        above = now
    return count


def screen_crossing_alerts(subject: str, day_bands: list[tuple[str, str]],
                           boundary: str,
                           timestamps: dict[str, int] | None = None) -> list[Alert]:
    """One alert per upward crossing of the boundary in a (day, band) series."""
    b = band_index(boundary)
    alerts = []
    above = False
    for day, band in day_bands:
        now = band_index(band) >= b
        if now and not above:
            ts = (timestamps or {}).get(day, 0)
            alerts.append(Alert(id=f"{subject}-screen-{day}", subject=subject,
                                kind="screen_band_increase", created_at=ts,
                                payload={"day": day, "band": band,
                                         "boundary": boundary}))
        above = now
    return alerts


def sustained_stress_alerts(subject: str, windows: list[dict],
                            cfg: AlertConfig | None = None) -> list[Alert]:
    """One alert per maximal run of >= N consecutive high-stress windows."""
    cfg = cfg or AlertConfig()
    alerts = []
    run_start = None
    run_len = 0
    for w in windows:
        if w.get("stress_level") == "high":
            if run_start is None:
                run_start = w
            run_len += 1
            if run_len == cfg.sustained_stress_windows:
                alerts.append(Alert(
                    id=f"{subject}-stress-{run_start['start_ms']}", subject=subject,
                    kind="sustained_high_stress", created_at=int(w["end_ms"]),
                    payload={"since_ms": int(run_start["start_ms"]),
                             "windows": run_len}))
        else:
            run_start, run_len = None, 0
    return alerts


def plan_drift_alert(subject: str, drift_weeks: list[int], at_ms: int) -> Alert:
    return Alert(id=f"{subject}-drift-{at_ms}", subject=subject, kind="plan_drift",
                 created_at=at_ms, payload={"drift_weeks": drift_weeks})
