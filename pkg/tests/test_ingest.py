import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mhnav.config import IngestConfig
from mhnav.ingest import (CHANNEL_DESCRIPTORS, Channel, EmptyInput, FormatError,
                          NonMonotonicTime, SampleBatch, StreamDescriptor,
                          UnitMismatch, align_resample, parse_stream, write_stream)

HR = CHANNEL_DESCRIPTORS[Channel.HR]
PPG = CHANNEL_DESCRIPTORS[Channel.PPG]


def batch(ts, vals, descriptor=PPG, subject="s01"):
    return SampleBatch(subject, descriptor,
                       np.asarray(ts, dtype=np.int64), np.asarray(vals, dtype=float))


class TestParse:
    def test_empty_file(self, tmp_path):
        p = tmp_path / "s01" / "2021-01-01" / "ppg.csv"
        p.parent.mkdir(parents=True)
        p.write_text("ts_ms,value\n")
        b = parse_stream(p, PPG)
        assert len(b) == 0 and b.subject == "s01"

    def test_backwards_timestamp_located(self, tmp_path):
        p = tmp_path / "hr.csv"
        rows = [f"{t},60" for t in [0, 1000, 2000, 3000, 4000, 3500, 6000]]
        p.write_text("ts_ms,value\n" + "\n".join(rows) + "\n")
        with pytest.raises(NonMonotonicTime) as err:
            parse_stream(p, HR)
        assert err.value.line == 7

    def test_bad_field_count_located(self, tmp_path):
        p = tmp_path / "hr.csv"
        p.write_text("ts_ms,value\n0,60\n1000,60,extra\n")
        with pytest.raises(FormatError) as err:
            parse_stream(p, HR)
        assert err.value.line == 3

    def test_nan_rejected(self, tmp_path):
        p = tmp_path / "hr.csv"
        p.write_text("ts_ms,value\n0,60\n1000,nan\n")
        with pytest.raises(FormatError) as err:
            parse_stream(p, HR)
        assert err.value.line == 3

    def test_unit_mismatch(self, tmp_path):
        p = tmp_path / "hr.csv"
        p.write_text("ts_ms,value:microsiemens\n0,60\n")
        with pytest.raises(UnitMismatch):
            parse_stream(p, HR)

    def test_bad_header(self, tmp_path):
        p = tmp_path / "hr.csv"
        p.write_text("time,bpm\n0,60\n")
        with pytest.raises(FormatError) as err:
            parse_stream(p, HR)
        assert err.value.line == 1

    def test_round_trip_identity(self, tmp_path):
        rng = np.random.default_rng(7)
        ts = np.cumsum(rng.integers(1, 100, size=500)).astype(np.int64)
        vals = np.round(rng.normal(size=500), 6)
        b = batch(ts, vals)
        path = tmp_path / "s01" / "2021-01-01" / "ppg.csv"
        write_stream(path, b, "%.6f")
        again = parse_stream(path, PPG)
        np.testing.assert_array_equal(again.timestamps, ts)
        np.testing.assert_allclose(again.values, vals, atol=1e-12)


class TestAlign:
    def test_empty_input(self):
        with pytest.raises(EmptyInput):
            align_resample([], 1000)

    def test_identity_on_own_grid(self):
        ts = np.arange(0, 60_000, 1000)
        vals = np.sin(ts / 5000.0)
        f = align_resample([batch(ts, vals, StreamDescriptor(Channel.HR, 1.0))], 1000)
        np.testing.assert_allclose(f.channels["hr"], vals, atol=1e-12)
        assert f.present["hr"].all()

    def test_linear_ramp_midpoints(self):
        ts = np.arange(0, 10_000, 1000)
        vals = ts / 1000.0
        f = align_resample([batch(ts, vals, StreamDescriptor(Channel.HR, 1.0))], 500)
        mids = f.channels["hr"][1::2]
        np.testing.assert_allclose(mids, np.arange(9) + 0.5, atol=1e-12)

    def test_mask_positions_match_gap_oracle(self):
        rng = np.random.default_rng(11)
        for _ in range(10):
            n = 120
            keep = np.sort(rng.choice(np.arange(n), size=60, replace=False))
            ts = keep.astype(np.int64) * 1000
            vals = np.cumsum(rng.normal(size=60))
            desc = StreamDescriptor(Channel.GSR, 1.0)
            cfg = IngestConfig()
            f = align_resample([batch(ts, vals, desc)], 500, cfg)
            grid = f.times
            # oracle: brute-force nearest-sample distance
            for i, t in enumerate(grid):
                d = np.min(np.abs(ts - t))
                assert f.present["gsr"][i] == (d <= cfg.gap_factor * 1000.0), i

    def test_event_channel_carry_forward(self):
        desc = CHANNEL_DESCRIPTORS[Channel.STEPS]
        ts = np.array([0, 60_000, 120_000])
        vals = np.array([5.0, 7.0, 9.0])
        f = align_resample([batch(ts, vals, desc)], 30_000)
        np.testing.assert_allclose(f.channels["steps"], [5, 5, 7, 7, 9])
        # beyond the carry-forward window the channel is masked absent
        ts2 = np.array([0, 1_000_000])
        f2 = align_resample([batch(ts2, np.array([5.0, 6.0]), desc)], 100_000)
        assert not f2.present["steps"][4]   # 400 s after the last observation

    def test_mixed_subjects_rejected(self):
        b1 = batch([0, 1000], [1, 2], subject="a")
        b2 = batch([0, 1000], [1, 2], subject="b")
        with pytest.raises(ValueError):
            align_resample([b1, b2], 1000)

    def test_masked_fraction_monotone_as_grid_refines(self):
        # 1 Hz signal with a 30 s hole; finer grids see proportionally more gap
        ts = np.concatenate([np.arange(0, 60), np.arange(90, 150)]) * 1000
        vals = np.ones(len(ts))
        desc = StreamDescriptor(Channel.GSR, 1.0)
        fractions = []
        for period in (1000, 500, 250, 125):
            f = align_resample([batch(ts.astype(np.int64), vals, desc)], period)
            fractions.append(1.0 - f.present["gsr"].mean())
        assert all(a <= b + 1e-12 for a, b in zip(fractions, fractions[1:]))


class TestBatchInvariants:
    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.integers(min_value=0, max_value=10**9), min_size=2,
                    max_size=40, unique=True))
    def test_strictly_increasing_required(self, ts):
        ts = sorted(ts)
        b = batch(ts, np.zeros(len(ts)))
        assert len(b) == len(ts)
        with pytest.raises(Exception):
            batch(list(reversed(ts)), np.zeros(len(ts)))

    def test_nonfinite_rejected(self):
        with pytest.raises(ValueError):
            batch([0, 1], [1.0, np.inf])
