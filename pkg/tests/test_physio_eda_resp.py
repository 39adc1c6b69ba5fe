"""Skin-conductance segmentation grammar and respiration extraction."""

import math

import numpy as np
import pytest

from mhnav.config import PhysioConfig
from mhnav.ingest import CHANNEL_DESCRIPTORS, Channel, SampleBatch
from mhnav.physio import (EdaState, IbiSeries, NoDominantFrequency, detect_beats,
                          eda_segment, respiration_rate, validate_segmentation)
from mhnav.physio.beats import RateTooLow

GSR = CHANNEL_DESCRIPTORS[Channel.GSR]
PPG = CHANNEL_DESCRIPTORS[Channel.PPG]

N, A, P, R = EdaState.NORMAL, EdaState.AROUSAL, EdaState.PEAK, EdaState.RELAX


def gsr_batch(values, rate=8.0, t0=0):
    ts = t0 + (np.arange(len(values)) * (1000.0 / rate)).astype(np.int64)
    return SampleBatch("s01", GSR, ts, np.asarray(values, dtype=float))


def stimulus_wave(onsets_s, duration_s, rate=8.0, baseline=2.0, amp=0.5,
                  rise=3.0, plateau=2.0, tau=8.0):
    t = np.arange(int(duration_s * rate)) / rate
    x = np.full(len(t), baseline)
    for onset in onsets_s:
        u = t - onset
        ramp = np.clip(u / rise, 0, 1) * amp
        dec = np.where(u > rise + plateau,
                       amp * np.exp(-(u - rise - plateau) / tau) - amp, 0.0)
        x += np.where(u > 0, ramp + dec, 0.0)
    return gsr_batch(x, rate)


class TestEdaSegmentation:
    def test_constant_at_baseline_single_normal(self):
        seg = eda_segment(gsr_batch(np.full(400, 2.0)), baseline=2.0)
        assert seg.states() == [N]

    def test_single_stimulus_full_cycle(self):
        seg = eda_segment(stimulus_wave([20.0], 120.0), baseline=2.0)
        assert seg.states() == [N, A, P, R, N]

    def test_two_stimuli_two_cycles(self):
        seg = eda_segment(stimulus_wave([20.0, 80.0], 160.0), baseline=2.0)
        assert seg.states() == [N, A, P, R, N, A, P, R, N]
        assert seg.cycle_count == 2

    def test_rate_too_low(self):
        with pytest.raises(RateTooLow):
            eda_segment(gsr_batch(np.full(50, 2.0), rate=2.0), baseline=2.0)

    def test_random_trains_tile_and_respect_grammar(self):
        rng = np.random.default_rng(99)
        for trial in range(100):
            k = int(rng.integers(0, 4))
            duration = 240.0
            onsets, t_next = [], 15.0
            for _ in range(k):
                t_next += float(rng.uniform(0, 25))
                if t_next > duration - 60:
                    break
                onsets.append(t_next)
                t_next += 60.0
            batch = stimulus_wave(onsets, duration,
                                  amp=float(rng.uniform(0.3, 0.8)),
                                  tau=float(rng.uniform(5, 10)))
            seg = eda_segment(batch, baseline=2.0)
            validate_segmentation(seg, span=(int(batch.timestamps[0]),
                                             int(batch.timestamps[-1])))
            assert seg.cycle_count == len(onsets)

    def test_arousal_fraction_monotone_in_stimulus_count(self):
        one = eda_segment(stimulus_wave([30.0], 300.0), baseline=2.0)
        three = eda_segment(stimulus_wave([30.0, 120.0, 210.0], 300.0), baseline=2.0)
        assert three.arousal_fraction > one.arousal_fraction


def modulated_ppg(mod_hz, duration_s=120.0, rate=25.0, depth=0.3, ibi_mod=None):
    """Pulse train whose amplitudes (and optionally intervals) breathe."""
    beats = [400.0]
    while beats[-1] < duration_s * 1000:
        t = beats[-1]
        ibi = 1000.0
        if ibi_mod is not None:
            ibi += ibi_mod * math.sin(2 * math.pi * mod_hz * t / 1000.0)
        beats.append(t + ibi)
    beats = np.array(beats[:-1])
    n = int(duration_s * rate)
    grid = np.arange(n) * (1000.0 / rate)
    x = np.zeros(n)
    for b in beats:
        amp = 1.0 + depth * math.sin(2 * math.pi * mod_hz * b / 1000.0)
        lo = np.searchsorted(grid, b - 240)
        hi = np.searchsorted(grid, b + 240)
        x[lo:hi] += amp * np.exp(-0.5 * ((grid[lo:hi] - b) / 60.0) ** 2)
    return SampleBatch("s01", PPG, grid.astype(np.int64), x)


class TestRespiration:
    def test_quarter_hz_modulation_reads_15(self):
        batch = modulated_ppg(0.25, ibi_mod=40.0)
        ibi = detect_beats(batch)
        est = respiration_rate(batch, ibi)
        assert est.breaths_per_min == pytest.approx(15.0, abs=1.0)
        assert est.cross_check_bpm == pytest.approx(15.0, abs=1.0)

    def test_point_two_hz_modulation_reads_12(self):
        batch = modulated_ppg(0.20, ibi_mod=40.0)
        ibi = detect_beats(batch)
        est = respiration_rate(batch, ibi)
        assert est.breaths_per_min == pytest.approx(12.0, abs=1.0)
        assert est.cross_check_bpm == pytest.approx(12.0, abs=1.0)

    def test_unmodulated_train_has_no_dominant_frequency(self):
        batch = modulated_ppg(0.25, depth=0.0)
        ibi = detect_beats(batch)
        with pytest.raises(NoDominantFrequency):
            respiration_rate(batch, ibi)

    def test_too_short(self):
        from mhnav.physio.beats import TooShort
        batch = modulated_ppg(0.25, duration_s=30.0, ibi_mod=40.0)
        ibi = IbiSeries.from_beats(np.arange(10) * 1000.0)
        with pytest.raises(TooShort):
            respiration_rate(batch, ibi)
