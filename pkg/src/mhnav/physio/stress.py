"""Personalized stress score.

Each available marker is expressed as a z-score against the subject's own
baseline, signed so that higher always means more stressed: heart-rate
variability is flipped (low RMSSD associates with stress), LF/HF balance,
skin-conductance arousal time and respiration elevation enter positively.
The score is the logistic of the mean z, so all-at-baseline lands exactly at
0.5 and the fixed 0.33 / 0.66 cuts split low / medium / high.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..config import PhysioConfig
from ..personal import InsufficientBaseline, PersonalBaseline


@dataclass
class StressAssessment:
    score: float
    level: str                      # low | medium | high
    contributors: dict[str, float]  # signed z-scores

    def to_json(self) -> dict:
        return {"score": self.score, "level": self.level,
                "contributors": self.contributors}


_MIN_BASELINE_DAYS = 3

#: marker -> (baseline metric, sign applied to the z-score)
_CONTRIBUTORS = {
    "rmssd": ("rmssd", -1.0),
    "lf_hf": ("lf_hf", +1.0),
    "arousal_frac": ("arousal_frac", +1.0),
    "respiration": ("respiration", +1.0),
}


def stress_score(markers: dict[str, float], baseline: PersonalBaseline,
                 cfg: PhysioConfig | None = None) -> StressAssessment:
    """markers: any of rmssd (ms), lf_hf, arousal_frac (0..1), respiration (bpm)."""
    cfg = cfg or PhysioConfig()
    contributors: dict[str, float] = {}
    for name, value in markers.items():
        if name not in _CONTRIBUTORS:
            raise KeyError(f"unknown stress marker {name!r}")
        if value is None or not math.isfinite(value):
            continue
        metric, sign = _CONTRIBUTORS[name]
        if baseline.count(metric) < _MIN_BASELINE_DAYS:
            raise InsufficientBaseline(
                f"{metric}: {baseline.count(metric)} days of baseline, need "
                f">= {_MIN_BASELINE_DAYS}")
        contributors[name] = sign * baseline.z(metric, value)
    if not contributors:
        raise InsufficientBaseline("no stress markers available")
    mean_z = sum(contributors.values()) / len(contributors)
    score = 1.0 / (1.0 + math.exp(-mean_z))
    if score < cfg.stress_low_cut:
        level = "low"
    elif score < cfg.stress_high_cut:
        level = "medium"
    else:
        level = "high"
    return StressAssessment(score=score, level=level, contributors=contributors)
