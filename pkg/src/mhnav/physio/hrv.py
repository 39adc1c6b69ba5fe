"""Time- and frequency-domain heart-rate-variability features.

Time domain: mean HR, SDNN (population std of intervals), RMSSD (root mean
square of successive differences).  Frequency domain: the interval tachogram
is linearly interpolated onto a uniform 4 Hz series, mean-removed, and a
Welch-averaged periodogram (64 s Hann segments, 50% overlap) is integrated
over the low-frequency [0.04, 0.15) Hz and high-frequency [0.15, 0.40) Hz
bands.  The LF/HF ratio proxies sympathetic/parasympathetic balance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import welch

from ..config import PhysioConfig
from .beats import IbiSeries

NAN = float("nan")


class TooFewBeats(ValueError):
    pass


class WindowTooShort(ValueError):
    pass


@dataclass
class HrvFeatures:
    window: tuple[float, float]
    mean_hr: float = NAN
    sdnn: float = NAN
    rmssd: float = NAN
    lf_power: float = NAN
    hf_power: float = NAN
    lf_hf_ratio: float = NAN

    def merged(self, other: "HrvFeatures") -> "HrvFeatures":
        out = HrvFeatures(self.window)
        for name in ("mean_hr", "sdnn", "rmssd", "lf_power", "hf_power", "lf_hf_ratio"):
            a, b = getattr(self, name), getattr(other, name)
            setattr(out, name, b if math.isnan(a) else a)
        return out

    def to_json(self) -> dict:
        return {
            "window_start_ms": self.window[0], "window_end_ms": self.window[1],
            "mean_hr": self.mean_hr, "sdnn": self.sdnn, "rmssd": self.rmssd,
            "lf_power": self.lf_power, "hf_power": self.hf_power,
            "lf_hf_ratio": self.lf_hf_ratio,
        }


def _window_slice(ibi: IbiSeries, window: tuple[float, float]):
    lo, hi = window
    sel = (ibi.ibi_times >= lo) & (ibi.ibi_times < hi)
    return ibi.ibis[sel], ibi.ibi_times[sel]


def hrv_time_domain(ibi: IbiSeries, window: tuple[float, float],
                    cfg: PhysioConfig | None = None) -> HrvFeatures:
    ibis, times = _window_slice(ibi, window)
    if len(ibis) < 2:
        raise TooFewBeats(f"{len(ibis)} intervals in window, need >= 2")
    out = HrvFeatures(window)
    out.mean_hr = 60_000.0 / float(np.mean(ibis))
    out.sdnn = float(np.std(ibis))
    starts = times - ibis
    adjacent = np.isclose(starts[1:], times[:-1])
    diffs = np.diff(ibis)[adjacent]
    out.rmssd = float(np.sqrt(np.mean(diffs ** 2))) if len(diffs) else 0.0
    return out


def tachogram(ibis: np.ndarray, times: np.ndarray, fs: float) -> np.ndarray:
    """Uniformly resampled, mean-removed interval series in ms."""
    t0, t1 = times[0], times[-1]
    n = max(2, int((t1 - t0) / 1000.0 * fs) + 1)
    grid = t0 + np.arange(n) * (1000.0 / fs)
    series = np.interp(grid, times, ibis)
    return series - series.mean()


def band_power(freqs: np.ndarray, psd: np.ndarray, band: tuple[float, float]) -> float:
    """Rectangle-rule integral of the PSD over [band[0], band[1])."""
    df = freqs[1] - freqs[0]
    sel = (freqs >= band[0]) & (freqs < band[1])
    return float(np.sum(psd[sel]) * df)


def hrv_frequency_domain(ibi: IbiSeries, window: tuple[float, float],
                         cfg: PhysioConfig | None = None) -> HrvFeatures:
    cfg = cfg or PhysioConfig()
    if window[1] - window[0] < 120_000:
        raise WindowTooShort("frequency-domain window must span at least 120 s")
    ibis, times = _window_slice(ibi, window)
    if len(ibis) < 60:
        raise TooFewBeats(f"{len(ibis)} intervals in window, need >= 60")

    fs = cfg.tachogram_hz
    series = tachogram(ibis, times, fs)
    nperseg = min(len(series), int(cfg.welch_segment_s * fs))
    freqs, psd = welch(series, fs=fs, window="hann", nperseg=nperseg,
                       noverlap=int(nperseg * cfg.welch_overlap), detrend=False)
    out = HrvFeatures(window)
    out.lf_power = band_power(freqs, psd, cfg.lf_band)
    out.hf_power = band_power(freqs, psd, cfg.hf_band)
    out.lf_hf_ratio = out.lf_power / out.hf_power if out.hf_power > 0 else NAN
    return out
