"""Mental-health state estimation.

A window of physiology, chronicle statistics and momentary mood maps onto a
point in a multi-dimensional unit-interval state space (valence, arousal,
biological stress, behavioral activity, social engagement; further dimensions
attach without schema change).  Labeled boxes in that space mark healthy and
disorder regions.  A 14-day composite screen on a 0-63 scale with the
conventional band cutoffs tracks depressive burden (a monitoring signal, not
a diagnosis), and a hysteresis detector over a daily composite index splits a
history into well-being and poor-mood phases.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .config import EstimatorConfig
from .ema import DailyMood
from .personal import PersonalBaseline
from .physio.hrv import HrvFeatures
from .physio.stress import StressAssessment

logger = logging.getLogger(__name__)

DIMENSIONS = ("emotional_valence", "emotional_arousal", "biological_stress",
              "behavioral_activity", "social_engagement")

SCREEN_BANDS = (("minimal", 0, 13), ("mild", 14, 19), ("moderate", 20, 28),
                ("severe", 29, 63))


class NoInputs(ValueError):
    pass


class DimensionMismatch(ValueError):
    pass


class InsufficientData(ValueError):
    pass


class TooShort(ValueError):
    pass


def clamp01(x: float, what: str = "") -> float:
    if x < 0.0 or x > 1.0:
        if what:
            logger.debug("clamping %s=%.4f into [0,1]", what, x)
        return 0.0 if x < 0.0 else 1.0
    return x


@dataclass
class StateVector:
    dims: dict[str, float]
    confidence: dict[str, float]
    timestamp: int

    def __post_init__(self):
        for name, v in self.dims.items():
            if not (0.0 <= v <= 1.0):
                raise ValueError(f"{name}={v} outside [0,1]")

    def to_json(self) -> dict:
        return {"dims": self.dims, "confidence": self.confidence,
                "timestamp": self.timestamp}

    @classmethod
    def from_json(cls, obj: dict) -> "StateVector":
        return cls(dims=dict(obj["dims"]), confidence=dict(obj.get("confidence", {})),
                   timestamp=int(obj.get("timestamp", 0)))


@dataclass(frozen=True)
class Region:
    label: str
    bounds: dict[str, tuple[float, float]]
    kind: str = "neutral"    # healthy | disorder | neutral

    def __post_init__(self):
        for dim, (lo, hi) in self.bounds.items():
            if not (0.0 <= lo <= hi <= 1.0):
                raise ValueError(f"region {self.label}: bad bounds for {dim}")
        if self.kind not in ("healthy", "disorder", "neutral"):
            raise ValueError(f"region {self.label}: bad kind {self.kind!r}")

    def contains(self, dims: dict[str, float]) -> bool:
        for dim, (lo, hi) in self.bounds.items():
            v = dims.get(dim)
            if v is None or not (lo <= v <= hi):
                return False
        return True

    def to_json(self) -> dict:
        return {"label": self.label, "kind": self.kind,
                "bounds": {d: list(b) for d, b in self.bounds.items()}}


@dataclass
class StateSpace:
    dimensions: list[str]
    regions: list[Region]
    grid_resolution: int = 10

    def __post_init__(self):
        if self.grid_resolution < 2:
            raise ValueError("grid resolution must be >= 2")
        labels = [r.label for r in self.regions]
        if len(set(labels)) != len(labels):
            raise ValueError("region labels must be unique")

    def region(self, label: str) -> Region:
        for r in self.regions:
            if r.label == label:
                return r
        raise KeyError(label)

    def to_json(self) -> dict:
        return {"dimensions": self.dimensions, "grid_resolution": self.grid_resolution,
                "regions": [r.to_json() for r in self.regions]}

    @classmethod
    def from_json(cls, obj: dict) -> "StateSpace":
        return cls(dimensions=list(obj["dimensions"]),
                   regions=[Region(r["label"],
                                   {d: tuple(b) for d, b in r["bounds"].items()},
                                   r.get("kind", "neutral"))
                            for r in obj["regions"]],
                   grid_resolution=int(obj.get("grid_resolution", 10)))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=1))

    @classmethod
    def load(cls, path: str | Path) -> "StateSpace":
        return cls.from_json(json.loads(Path(path).read_text()))


def default_state_space() -> StateSpace:
    return StateSpace(
        dimensions=list(DIMENSIONS),
        regions=[
            Region("healthy", {"emotional_valence": (0.35, 1.0),
                               "biological_stress": (0.0, 0.5)}, "healthy"),
            Region("chronic_stress", {"biological_stress": (0.7, 1.0)}, "disorder"),
            Region("depressive", {"emotional_valence": (0.0, 0.3),
                                  "behavioral_activity": (0.0, 0.4)}, "disorder"),
        ])


def demo_state_space_2d() -> StateSpace:
    """Two-dimensional projection over the emotional factors."""
    return StateSpace(
        dimensions=["emotional_valence", "emotional_arousal"],
        regions=[
            Region("healthy", {"emotional_valence": (0.4, 1.0),
                               "emotional_arousal": (0.2, 0.8)}, "healthy"),
            Region("chronic_stress", {"emotional_valence": (0.0, 0.35),
                                      "emotional_arousal": (0.6, 1.0)}, "disorder"),
            Region("depressive", {"emotional_valence": (0.0, 0.3),
                                  "emotional_arousal": (0.0, 0.35)}, "disorder"),
        ])


@dataclass
class StateInputs:
    """One estimation window's worth of evidence; anything may be absent."""
    timestamp: int
    mood: DailyMood | None = None
    hrv: HrvFeatures | None = None
    stress: StressAssessment | None = None
    steps: float | None = None
    home_minutes: float | None = None
    comm_minutes: float = 0.0
    chronicle_coverage: float = 0.0
    physio_coverage: float = 0.0


def estimate_state(inputs: StateInputs, baseline: PersonalBaseline,
                   cfg: EstimatorConfig | None = None) -> StateVector:
    cfg = cfg or EstimatorConfig()
    has_physio = inputs.hrv is not None or inputs.stress is not None
    if inputs.mood is None and not has_physio:
        raise NoInputs("need at least mood or physiology")
    dims: dict[str, float] = {}
    conf: dict[str, float] = {}

    if inputs.mood is not None:
        pa, na = inputs.mood.mean_positive, inputs.mood.mean_negative
        dims["emotional_valence"] = pa / (pa + na) if pa + na > 0 else 0.5
        conf["emotional_valence"] = inputs.mood.response_rate

    if (inputs.hrv is not None and math.isfinite(inputs.hrv.lf_hf_ratio)
            and baseline.count("lf_hf") > 0):
        z = baseline.z("lf_hf", inputs.hrv.lf_hf_ratio)
        dims["emotional_arousal"] = clamp01(0.5 + cfg.arousal_gain * z,
                                            "emotional_arousal")
        conf["emotional_arousal"] = inputs.physio_coverage

    if inputs.stress is not None:
        dims["biological_stress"] = clamp01(inputs.stress.score, "biological_stress")
        conf["biological_stress"] = inputs.physio_coverage

    if inputs.steps is not None and baseline.history.get("steps"):
        p90 = baseline.percentile("steps", 90)
        dims["behavioral_activity"] = \
            clamp01(inputs.steps / p90, "behavioral_activity") if p90 > 0 else 0.0
        conf["behavioral_activity"] = 1.0

    if inputs.home_minutes is not None:
        away = clamp01(1.0 - inputs.home_minutes / 1440.0, "social_engagement")
        comm = clamp01(inputs.comm_minutes / cfg.comm_norm_min, "social_engagement")
        dims["social_engagement"] = 0.5 * away + 0.5 * comm
        conf["social_engagement"] = inputs.chronicle_coverage

    if not dims:
        raise NoInputs("inputs present but nothing estimable")
    return StateVector(dims=dims, confidence=conf, timestamp=inputs.timestamp)


def classify_regions(state: StateVector, space: StateSpace) -> list[str]:
    """Labels of every region containing the state on that region's own
    dimensions, boundary-inclusive; [] marks an unlabeled zone."""
    extra = set(state.dims) - set(space.dimensions)
    if extra:
        raise DimensionMismatch(f"state dims {sorted(extra)} not in the space")
    out = []
    for region in space.regions:
        if set(region.bounds) <= set(state.dims) and region.contains(state.dims):
            out.append(region.label)
    return out


@dataclass
class DepressionScreen:
    score: int
    band: str
    window_days: int
    contributors: dict[str, float]

    def to_json(self) -> dict:
        return {"score": self.score, "band": self.band,
                "window_days": self.window_days, "contributors": self.contributors}


def screen_band(score: int) -> str:
    for name, lo, hi in SCREEN_BANDS:
        if lo <= score <= hi:
            return name
    raise ValueError(f"score {score} outside 0..63")


def _deficit(z: float, squash: float) -> float:
    return clamp01(z / squash)


def screen_depression(daily: list["DailyFeatures"], baseline: PersonalBaseline,
                      cfg: EstimatorConfig | None = None) -> DepressionScreen:
    """Composite over a 14-day window: negative-affect load plus sleep,
    activity and isolation deficits, each squashed from a personal z-score."""
    cfg = cfg or EstimatorConfig()
    window = daily[-cfg.screen_window_days:]
    with_data = [d for d in window if d.has_data()]
    if len(with_data) < cfg.screen_min_days:
        raise InsufficientData(
            f"{len(with_data)} of {cfg.screen_window_days} days have data, "
            f"need >= {cfg.screen_min_days}")

    terms: dict[str, float] = {}
    na = [d.mean_negative for d in with_data if d.mean_negative is not None]
    terms["negative_affect"] = float(np.mean(na)) / 100.0 if na else 0.0

    def z_term(name, values, metric, flip):
        vals = [v for v in values if v is not None]
        if not vals or baseline.count(metric) < 3 or baseline.std(metric) <= 0:
            terms[name] = 0.0
            return
        z = (float(np.mean(vals)) - baseline.mean(metric)) / baseline.std(metric)
        terms[name] = _deficit(-z if flip else z, cfg.z_squash)

    z_term("sleep_deficit", [d.sleep_score for d in with_data], "sleep_score", flip=True)
    z_term("activity_deficit", [d.steps for d in with_data], "steps", flip=True)
    z_term("isolation", [d.home_minutes for d in with_data], "home_minutes", flip=False)

    score = int(round(63.0 * float(np.mean(list(terms.values())))))
    return DepressionScreen(score=score, band=screen_band(score),
                            window_days=cfg.screen_window_days, contributors=terms)


@dataclass
class DailyFeatures:
    """One day of fused features; None marks a missing channel."""
    day: str
    mean_positive: float | None = None
    mean_negative: float | None = None
    response_rate: float = 0.0
    rmssd: float | None = None
    rmssd_rest: float | None = None
    hr: float | None = None
    hr_rest: float | None = None
    lf_hf: float | None = None
    respiration: float | None = None
    stress: float | None = None
    arousal_frac: float | None = None
    sleep_score: float | None = None
    steps: float | None = None
    home_minutes: float | None = None
    unknown_minutes: float | None = None
    comm_minutes: float = 0.0
    coverage: float = 0.0
    physio_windows: int = 0

    def has_data(self) -> bool:
        return any(v is not None for v in
                   (self.mean_negative, self.sleep_score, self.steps, self.home_minutes))

    def to_json(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}

    @classmethod
    def from_json(cls, obj: dict) -> "DailyFeatures":
        return cls(**{k: obj.get(k) for k in cls.__dataclass_fields__
                      if k in obj or k == "day"})


# --------------------------------------------------------------------------
# regime detection
# --------------------------------------------------------------------------

def _zscore(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    std = x.std()
    return (x - x.mean()) / std if std > 0 else np.zeros_like(x)


def _moving_average(x: np.ndarray, w: int) -> np.ndarray:
    """Centered moving average with shrinking edge windows."""
    half = w // 2
    csum = np.concatenate([[0.0], np.cumsum(x)])
    n = len(x)
    lo = np.maximum(0, np.arange(n) - half)
    hi = np.minimum(n, np.arange(n) + half + 1)
    return (csum[hi] - csum[lo]) / (hi - lo)


def detect_regime(daily: list[DailyFeatures],
                  cfg: EstimatorConfig | None = None) -> list[tuple[str, int, int]]:
    """Split >= 28 days into well_being / poor_mood phases.

    Composite daily index: mean of per-feature z-scores, signed so higher
    means worse ( +(NA-PA), -sleep, -rmssd, -steps, +home ).  The 7-day
    centered moving average is thresholded at zero with +-hysteresis, and
    phases shorter than the minimum are merged into their longer neighbour.
    Returns (phase, start_day, end_day) with end exclusive.
    """
    cfg = cfg or EstimatorConfig()
    n = len(daily)
    if n < 28:
        raise TooShort(f"{n} days, need >= 28")

    def series(getter, sign):
        vals = np.array([getter(d) if getter(d) is not None else np.nan for d in daily])
        if np.isnan(vals).all():
            return np.zeros(n)
        # missing days take the series mean, i.e. z = 0
        vals = np.where(np.isnan(vals), np.nanmean(vals), vals)
        return sign * _zscore(vals)

    parts = [
        series(lambda d: None if d.mean_negative is None or d.mean_positive is None
               else d.mean_negative - d.mean_positive, +1.0),
        series(lambda d: d.sleep_score, -1.0),
        series(lambda d: d.rmssd, -1.0),
        series(lambda d: d.steps, -1.0),
        series(lambda d: d.home_minutes, +1.0),
    ]
    index = np.mean(parts, axis=0)
    ma = _moving_average(index, cfg.regime_ma_days)

    h = cfg.regime_hysteresis
    labels = np.empty(n, dtype=object)
    state = "poor_mood" if ma[0] > 0 else "well_being"   # tie goes to well_being
    for t in range(n):
        if ma[t] > h:
            state = "poor_mood"
        elif ma[t] < -h:
            state = "well_being"
        labels[t] = state

    runs = _runs(labels)
    runs = _merge_short_runs(runs, cfg.regime_min_phase_days)
    return [(phase, s, e) for phase, s, e in runs]


def _runs(labels: np.ndarray) -> list[tuple[str, int, int]]:
    runs = []
    start = 0
    for t in range(1, len(labels)):
        if labels[t] != labels[t - 1]:
            runs.append((labels[start], start, t))
            start = t
    runs.append((labels[start], start, len(labels)))
    return runs


def _merge_short_runs(runs: list[tuple[str, int, int]], min_len: int):
    runs = list(runs)
    while len(runs) > 1:
        lengths = [e - s for _, s, e in runs]
        idx = min(range(len(runs)), key=lambda i: (lengths[i], i))
        if lengths[idx] >= min_len:
            break
        left = runs[idx - 1] if idx > 0 else None
        right = runs[idx + 1] if idx + 1 < len(runs) else None
        if left is not None and (right is None or
                                 (left[2] - left[1]) >= (right[2] - right[1])):
            merged = (left[0], left[1], runs[idx][2])
            runs[idx - 1:idx + 1] = [merged]
        else:
            merged = (right[0], runs[idx][1], right[2])
            runs[idx:idx + 2] = [merged]
        # adjacent same-phase runs collapse
        out = [runs[0]]
        for phase, s, e in runs[1:]:
            if out[-1][0] == phase:
                out[-1] = (phase, out[-1][1], e)
            else:
                out.append((phase, s, e))
        runs = out
    return runs
