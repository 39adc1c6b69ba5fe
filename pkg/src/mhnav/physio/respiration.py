"""Respiration rate from the pulse waveform, two independent routes.

Route A reads the slow amplitude modulation of the pulse peaks (the upper
envelope); route B reads respiratory sinus arrhythmia, the breathing-locked
speeding/slowing of the heart visible in the interval tachogram.  Both look
for a dominant spectral component in the 0.1-0.5 Hz breathing band; A is the
returned value, B the cross-check.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import welch

from ..config import PhysioConfig
from ..ingest import SampleBatch
from .beats import IbiSeries, TooShort
from .hrv import tachogram


class NoDominantFrequency(ValueError):
    pass


@dataclass
class RespirationEstimate:
    breaths_per_min: float
    method: str                  # "amplitude"
    cross_check_bpm: float
    cross_check_method: str      # "sinus_arrhythmia"

    def to_json(self) -> dict:
        return {
            "breaths_per_min": self.breaths_per_min, "method": self.method,
            "cross_check_bpm": self.cross_check_bpm,
            "cross_check_method": self.cross_check_method,
        }


def _dominant_frequency(series: np.ndarray, fs: float, band: tuple[float, float],
                        peak_over_median: float) -> float:
    if len(series) < 8 or np.var(series) < 1e-12 * max(1.0, np.mean(series) ** 2):
        raise NoDominantFrequency("signal has no variability in the breathing band")
    series = series - series.mean()
    nperseg = min(len(series), 256)
    freqs, psd = welch(series, fs=fs, window="hann", nperseg=nperseg,
                       noverlap=nperseg // 2, nfft=4096, detrend=False)
    sel = (freqs >= band[0]) & (freqs <= band[1])
    band_psd = psd[sel]
    peak = float(band_psd.max())
    median = float(np.median(band_psd))
    if peak <= 0 or peak < peak_over_median * median:
        raise NoDominantFrequency(
            f"band peak {peak:.3g} below {peak_over_median}x band median {median:.3g}")
    return float(freqs[sel][int(band_psd.argmax())])


def respiration_rate(ppg: SampleBatch, ibi: IbiSeries,
                     cfg: PhysioConfig | None = None) -> RespirationEstimate:
    cfg = cfg or PhysioConfig()
    if len(ppg) < 2 or ppg.timestamps[-1] - ppg.timestamps[0] < 60_000:
        raise TooShort("need at least 60 s of signal")
    if len(ibi.beat_times) < 4:
        raise NoDominantFrequency("too few beats for an envelope")

    fs = cfg.tachogram_hz
    # route A: pulse amplitude envelope sampled at the beats
    peak_idx = np.searchsorted(ppg.timestamps, ibi.beat_times.astype(np.int64))
    peak_idx = np.clip(peak_idx, 0, len(ppg) - 1)
    amplitudes = ppg.values[peak_idx].astype(np.float64)
    t0, t1 = ibi.beat_times[0], ibi.beat_times[-1]
    n = max(2, int((t1 - t0) / 1000.0 * fs) + 1)
    grid = t0 + np.arange(n) * (1000.0 / fs)
    envelope = np.interp(grid, ibi.beat_times, amplitudes)
    freq_a = _dominant_frequency(envelope, fs, cfg.resp_band, cfg.resp_peak_over_median)

    # route B: respiratory sinus arrhythmia in the tachogram
    try:
        series = tachogram(ibi.ibis, ibi.ibi_times, fs)
        freq_b = _dominant_frequency(series, fs, cfg.resp_band, cfg.resp_peak_over_median)
        bpm_b = freq_b * 60.0
    except NoDominantFrequency:
        bpm_b = float("nan")

    return RespirationEstimate(breaths_per_min=freq_a * 60.0, method="amplitude",
                               cross_check_bpm=bpm_b,
                               cross_check_method="sinus_arrhythmia")
