"""Pulse-wave beat detection.

Beats are local maxima of the PPG above an adaptive threshold (rolling median
plus half the rolling interquartile range over a 10 s window) separated by at
least a 333 ms refractory period.  Interbeat intervals outside the plausible
[250, 3000] ms range are dropped and counted, never interpolated.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import percentile_filter
from scipy.signal import find_peaks

from ..config import PhysioConfig
from ..ingest import SampleBatch


class TooShort(ValueError):
    pass


class RateTooLow(ValueError):
    pass


@dataclass
class IbiSeries:
    """Accepted beat times plus the valid intervals between adjacent beats.

    ``ibis[k]`` ends at ``ibi_times[k]``; for clean data ``ibi_times`` is just
    ``beat_times[1:]`` and ``ibis[k] == beat_times[k+1] - beat_times[k]``.
    Dropped (out-of-range) intervals leave a break: the two neighbours are not
    treated as successive by downstream difference statistics.
    """

    beat_times: np.ndarray
    ibis: np.ndarray
    ibi_times: np.ndarray
    dropped: int = 0

    def __post_init__(self):
        self.beat_times = np.asarray(self.beat_times, dtype=np.float64)
        self.ibis = np.asarray(self.ibis, dtype=np.float64)
        self.ibi_times = np.asarray(self.ibi_times, dtype=np.float64)
        if len(self.ibis) != len(self.ibi_times):
            raise ValueError("ibis and ibi_times must be parallel")

    def __len__(self):
        return len(self.ibis)

    @classmethod
    def from_beats(cls, beat_times: np.ndarray,
                   ibi_min: float = 250.0, ibi_max: float = 3000.0) -> "IbiSeries":
        beat_times = np.asarray(beat_times, dtype=np.float64)
        if len(beat_times) < 2:
            return cls(beat_times, np.empty(0), np.empty(0), dropped=0)
        raw = np.diff(beat_times)
        ok = (raw >= ibi_min) & (raw <= ibi_max)
        return cls(beat_times, raw[ok], beat_times[1:][ok], dropped=int((~ok).sum()))

    def successive_pairs(self) -> np.ndarray:
        """Differences between genuinely adjacent intervals (no break between)."""
        if len(self.ibis) < 2:
            return np.empty(0)
        starts = self.ibi_times - self.ibis
        adjacent = np.isclose(starts[1:], self.ibi_times[:-1])
        return np.diff(self.ibis)[adjacent]


def _sample_rate(ppg: SampleBatch) -> float:
    """Effective rate from the actual sample spacing; the descriptor's nominal
    rate is only a fallback for single-sample batches."""
    if len(ppg) > 1:
        return 1000.0 / float(np.median(np.diff(ppg.timestamps)))
    return ppg.descriptor.nominal_rate_hz


def detect_beats(ppg: SampleBatch, cfg: PhysioConfig | None = None) -> IbiSeries:
    cfg = cfg or PhysioConfig()
    rate = _sample_rate(ppg)
    if rate < cfg.min_ppg_rate_hz:
        raise RateTooLow(f"ppg rate {rate:.1f} Hz below {cfg.min_ppg_rate_hz} Hz")
    if len(ppg) < cfg.beat_threshold_window_s * rate:
        raise TooShort(f"need at least {cfg.beat_threshold_window_s} s of signal")

    x = ppg.values
    win = int(round(cfg.beat_threshold_window_s * rate)) | 1  # odd-sized window
    med = percentile_filter(x, 50, size=win, mode="nearest")
    q1 = percentile_filter(x, 25, size=win, mode="nearest")
    q3 = percentile_filter(x, 75, size=win, mode="nearest")
    threshold = med + cfg.beat_threshold_iqr_gain * (q3 - q1)

    refractory = max(1, int(np.ceil(cfg.beat_refractory_ms / 1000.0 * rate)))
    peaks, _ = find_peaks(x, height=threshold, distance=refractory)
    beat_times = ppg.timestamps[peaks].astype(np.float64)
    return IbiSeries.from_beats(beat_times, cfg.ibi_min_ms, cfg.ibi_max_ms)
