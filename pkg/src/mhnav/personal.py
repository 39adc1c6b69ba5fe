"""Per-individual model: incremental metric baselines (overall and per local
timeband for heart rate), profile context with history flags, personalized
alert thresholds, and a prompt-timing model learned from response history.

Threshold adjustments encode directional clinical priors (a person after
heart surgery is more stress-vulnerable; family mood-disorder history lowers
the screening alert boundary).  Adjustments may only ever make alerts MORE
sensitive; the rule loader rejects anything that would delay an alert.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from zoneinfo import ZoneInfo

import numpy as np

from .config import AlertConfig, EmaConfig
from .timeutil import local_hour, timeband

METRICS = ("rmssd", "lf_hf", "hr", "sleep_score", "steps", "home_minutes",
           "respiration", "arousal_frac")

SCREEN_BANDS = ("minimal", "mild", "moderate", "severe")

#: recent per-metric history kept for percentile anchors (e.g. steps p90)
HISTORY_CAP = 30


class UnknownMetric(KeyError):
    pass


class InsufficientBaseline(ValueError):
    pass


class InsufficientHistory(ValueError):
    pass


@dataclass
class _Welford:
    count: int = 0
    mean: float = 0.0
    m2: float = 0.0

    def update(self, value: float) -> None:
        self.count += 1
        delta = value - self.mean
        self.mean += delta / self.count
        self.m2 += delta * (value - self.mean)

    @property
    def variance(self) -> float:
        return self.m2 / self.count if self.count else 0.0

    @property
    def std(self) -> float:
        return math.sqrt(self.variance)


@dataclass
class PersonalBaseline:
    subject: str
    stats: dict[str, _Welford] = field(default_factory=dict)
    timeband_hr: dict[str, _Welford] = field(default_factory=dict)
    history: dict[str, list[float]] = field(default_factory=dict)

    def update(self, metric: str, value: float, timestamp_ms: int | None = None,
               tz: str = "UTC") -> None:
        if metric not in METRICS:
            raise UnknownMetric(metric)
        if not math.isfinite(value):
            raise ValueError(f"non-finite value for {metric}")
        self.stats.setdefault(metric, _Welford()).update(value)
        hist = self.history.setdefault(metric, [])
        hist.append(value)
        del hist[:-HISTORY_CAP]
        if metric == "hr" and timestamp_ms is not None:
            band = timeband(timestamp_ms, tz)
            self.timeband_hr.setdefault(band, _Welford()).update(value)

    def count(self, metric: str) -> int:
        return self.stats[metric].count if metric in self.stats else 0

    def mean(self, metric: str) -> float:
        return self.stats[metric].mean

    def std(self, metric: str) -> float:
        return self.stats[metric].std

    def z(self, metric: str, value: float) -> float:
        """Z-score vs the personal baseline; 0 when the baseline has no spread."""
        if metric not in self.stats or self.stats[metric].count == 0:
            raise InsufficientBaseline(f"no baseline for {metric}")
        std = self.stats[metric].std
        return (value - self.stats[metric].mean) / std if std > 0 else 0.0

    def percentile(self, metric: str, q: float) -> float:
        hist = self.history.get(metric, [])
        if not hist:
            raise InsufficientBaseline(f"no history for {metric}")
        return float(np.percentile(hist, q))

    def timeband_mean(self, band: str) -> float | None:
        w = self.timeband_hr.get(band)
        return w.mean if w is not None and w.count >= 3 else None

    def to_json(self) -> dict:
        return {
            "subject": self.subject,
            "stats": {m: [w.count, w.mean, w.m2] for m, w in self.stats.items()},
            "timeband_hr": {b: [w.count, w.mean, w.m2]
                            for b, w in self.timeband_hr.items()},
            "history": self.history,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "PersonalBaseline":
        b = cls(subject=obj["subject"])
        for m, (c, mean, m2) in obj.get("stats", {}).items():
            b.stats[m] = _Welford(c, mean, m2)
        for band, (c, mean, m2) in obj.get("timeband_hr", {}).items():
            b.timeband_hr[band] = _Welford(c, mean, m2)
        b.history = {m: list(v) for m, v in obj.get("history", {}).items()}
        return b


def update_baseline(baseline: PersonalBaseline, metric: str, value: float,
                    timestamp_ms: int | None = None, tz: str = "UTC") -> PersonalBaseline:
    baseline.update(metric, value, timestamp_ms, tz)
    return baseline


@dataclass
class ProfileContext:
    subject: str
    flags: dict[str, bool] = field(default_factory=dict)
    age_band: str = ""
    timezone: str = "UTC"
    risk_notes: str = ""

    def __post_init__(self):
        ZoneInfo(self.timezone)  # raises on an invalid IANA name

    def to_json(self) -> dict:
        return {"subject": self.subject, "flags": self.flags, "age_band": self.age_band,
                "timezone": self.timezone, "risk_notes": self.risk_notes}

    @classmethod
    def from_json(cls, obj: dict) -> "ProfileContext":
        return cls(subject=obj["subject"], flags=dict(obj.get("flags", {})),
                   age_band=obj.get("age_band", ""), timezone=obj.get("timezone", "UTC"),
                   risk_notes=obj.get("risk_notes", ""))


@dataclass(frozen=True)
class AdjustmentRule:
    flag: str
    target: str   # "stress_z" or "screen_band"
    delta: float

    def __post_init__(self):
        if self.target not in ("stress_z", "screen_band"):
            raise ValueError(f"unknown rule target {self.target!r}")
        if self.delta > 0:
            raise ValueError("adjustments may only increase sensitivity (delta <= 0)")


DEFAULT_RULES = (
    AdjustmentRule("cardiac_surgery", "stress_z", -0.5),
    AdjustmentRule("family_bipolar_history", "screen_band", -1),
    AdjustmentRule("family_depression_history", "screen_band", -1),
)


def load_rule_table(path: str | Path) -> tuple[AdjustmentRule, ...]:
    """CSV columns: flag,target_threshold,delta."""
    rules = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            rules.append(AdjustmentRule(row["flag"].strip(),
                                        row["target_threshold"].strip(),
                                        float(row["delta"])))
    return tuple(rules)


@dataclass
class ThresholdSet:
    anchors: dict[str, tuple[float, float]]   # metric -> (mean, std)
    stress_alert_z: float
    screen_alert_band: str

    def to_json(self) -> dict:
        return {"anchors": {m: list(v) for m, v in self.anchors.items()},
                "stress_alert_z": self.stress_alert_z,
                "screen_alert_band": self.screen_alert_band}


def personalize_thresholds(baseline: PersonalBaseline, context: ProfileContext,
                           rules: tuple[AdjustmentRule, ...] = DEFAULT_RULES,
                           alert_cfg: AlertConfig | None = None) -> ThresholdSet:
    alert_cfg = alert_cfg or AlertConfig()
    anchors = {m: (w.mean, w.std) for m, w in baseline.stats.items() if w.count >= 3}
    if not anchors:
        raise InsufficientBaseline("need at least 3 days of history for some metric")
    stress_z = alert_cfg.stress_alert_z
    band_idx = SCREEN_BANDS.index(alert_cfg.screen_alert_band)
    for rule in rules:
        if context.flags.get(rule.flag):
            if rule.target == "stress_z":
                stress_z += rule.delta
            else:
                band_idx = max(1, band_idx + int(rule.delta))
    return ThresholdSet(anchors=anchors, stress_alert_z=stress_z,
                        screen_alert_band=SCREEN_BANDS[band_idx])


@dataclass
class PromptOutcome:
    scheduled_at_ms: int
    answered: bool


@dataclass
class PromptWeights:
    """Per-hour sampling weights over the waking window; strictly positive,
    sum to 1 over the window."""
    hour_weights: dict[int, float]

    def as_array(self) -> np.ndarray:
        w = np.zeros(24)
        for h, v in self.hour_weights.items():
            w[h] = v
        return w


def ema_timing_model(history: list[PromptOutcome], tz: str = "UTC",
                     cfg: EmaConfig | None = None) -> PromptWeights:
    """Laplace-smoothed per-hour response rates turned into sampling weights."""
    cfg = cfg or EmaConfig()
    days = {outcome.scheduled_at_ms // 86_400_000 for outcome in history}
    if len(days) < 14:
        raise InsufficientHistory(f"{len(days)} days of history, need >= 14")
    scheduled = {h: 0 for h in range(cfg.waking_start_hour, cfg.waking_end_hour)}
    answered = dict(scheduled)
    for outcome in history:
        h = local_hour(outcome.scheduled_at_ms, tz)
        if h in scheduled:
            scheduled[h] += 1
            answered[h] += int(outcome.answered)
    rates = {h: (answered[h] + 1.0) / (scheduled[h] + 1.0) for h in scheduled}
    total = sum(rates.values())
    return PromptWeights({h: r / total for h, r in rates.items()})
