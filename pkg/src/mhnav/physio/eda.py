"""Four-state segmentation of the skin-conductance signal.

A stimulus-response cycle runs normal -> arousal (sustained conductance rise)
-> peak (plateau at the local maximum) -> relax (decay back toward baseline)
-> normal.  A renewed rise during the plateau re-enters arousal (repeated
peaks); a rise during relax is absorbed until the signal has recovered to
baseline, which keeps every emitted sequence inside the cycle grammar.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.ndimage import uniform_filter1d

from ..config import PhysioConfig
from ..ingest import SampleBatch
from .beats import RateTooLow, _sample_rate


class EdaState(str, Enum):
    NORMAL = "normal"
    AROUSAL = "arousal"
    PEAK = "peak"
    RELAX = "relax"


_ALLOWED = {
    (EdaState.NORMAL, EdaState.AROUSAL),
    (EdaState.AROUSAL, EdaState.PEAK),
    (EdaState.PEAK, EdaState.AROUSAL),
    (EdaState.PEAK, EdaState.RELAX),
    (EdaState.RELAX, EdaState.NORMAL),
}


@dataclass
class EdaSegmentation:
    segments: list[tuple[EdaState, int, int]]
    baseline: float

    @property
    def cycle_count(self) -> int:
        return sum(1 for state, _, _ in self.segments if state is EdaState.AROUSAL)

    @property
    def arousal_fraction(self) -> float:
        total = self.segments[-1][2] - self.segments[0][1] if self.segments else 0
        if total <= 0:
            return 0.0
        hot = sum(e - s for state, s, e in self.segments
                  if state in (EdaState.AROUSAL, EdaState.PEAK))
        return hot / total

    def states(self) -> list[EdaState]:
        return [state for state, _, _ in self.segments]

    def to_json(self) -> dict:
        return {"baseline": self.baseline,
                "segments": [{"state": st.value, "start_ms": s, "end_ms": e}
                             for st, s, e in self.segments]}


def validate_segmentation(seg: EdaSegmentation, span: tuple[int, int] | None = None) -> None:
    """Raise if segments do not tile the span or break the cycle grammar."""
    if not seg.segments:
        raise ValueError("empty segmentation")
    for (st_a, _, end_a), (st_b, start_b, _) in zip(seg.segments, seg.segments[1:]):
        if end_a != start_b:
            raise ValueError(f"segments not contiguous at {end_a} != {start_b}")
        if (st_a, st_b) not in _ALLOWED:
            raise ValueError(f"illegal transition {st_a.value} -> {st_b.value}")
    if span is not None:
        if seg.segments[0][1] != span[0] or seg.segments[-1][2] != span[1]:
            raise ValueError("segments do not cover the input span")


def eda_segment(gsr: SampleBatch, baseline: float,
                cfg: PhysioConfig | None = None) -> EdaSegmentation:
    cfg = cfg or PhysioConfig()
    rate = _sample_rate(gsr)
    if rate < cfg.eda_min_rate_hz:
        raise RateTooLow(f"gsr rate {rate:.2f} Hz below {cfg.eda_min_rate_hz} Hz")
    if baseline <= 0:
        raise ValueError("baseline must be positive")
    if len(gsr) < 2:
        raise ValueError("need at least two samples")

    times = gsr.timestamps
    smooth_n = max(1, int(round(cfg.eda_smooth_s * rate)))
    smoothed = uniform_filter1d(gsr.values, size=smooth_n, mode="nearest")
    slope = np.gradient(smoothed, times / 1000.0)  # microsiemens per second

    # mark maximal runs of slope > theta_rise that last >= eda_min_rise_s
    rising = slope > cfg.eda_theta_rise
    sustained = np.zeros(len(times), dtype=bool)
    i = 0
    while i < len(times):
        if rising[i]:
            j = i
            while j + 1 < len(times) and rising[j + 1]:
                j += 1
            if times[j] - times[i] >= cfg.eda_min_rise_s * 1000.0 - 0.5:
                sustained[i:j + 1] = True
            i = j + 1
        else:
            i += 1

    near_base = np.abs(smoothed - baseline) <= cfg.eda_epsilon * baseline
    states = np.empty(len(times), dtype=object)
    state = EdaState.NORMAL
    for k in range(len(times)):
        if state is EdaState.NORMAL and sustained[k]:
            state = EdaState.AROUSAL
        elif state is EdaState.AROUSAL and slope[k] <= cfg.eda_theta_flat:
            state = EdaState.PEAK
        elif state is EdaState.PEAK:
            if sustained[k]:
                state = EdaState.AROUSAL
            elif slope[k] < -cfg.eda_theta_flat:
                state = EdaState.RELAX
        elif state is EdaState.RELAX and near_base[k]:
            state = EdaState.NORMAL
        states[k] = state

    segments: list[tuple[EdaState, int, int]] = []
    run_start = 0
    for k in range(1, len(times)):
        if states[k] is not states[k - 1]:
            segments.append((states[run_start], int(times[run_start]), int(times[k])))
            run_start = k
    if not segments or times[run_start] < times[-1]:
        segments.append((states[run_start], int(times[run_start]), int(times[-1])))
    seg = EdaSegmentation(segments=segments, baseline=baseline)
    validate_segmentation(seg, span=(int(times[0]), int(times[-1])))
    return seg
