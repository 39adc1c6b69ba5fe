"""Generator determinism, ledger couplings, replay ordering."""

import json

import numpy as np
import pytest

from mhnav.chronicle import ActivityLabel
from mhnav.ingest import CHANNEL_DESCRIPTORS, Channel, SampleBatch, parse_stream
from mhnav.simkit import (CohortConfig, InvalidConfig, LayoutError, april_like_config,
                          generate, load_cohort_config, replay)
from mhnav.simkit.generate import (_day_schedule, _fill_gaps, _poor_day,
                                   _well_weekday, _well_weekend, corpus_hash,
                                   PhaseParams)
from mhnav.simkit.replay import directory_sink


@pytest.fixture(scope="module")
def tiny_corpus(tmp_path_factory):
    out = tmp_path_factory.mktemp("cohort")
    cfg = CohortConfig(subjects=1, days=2, seed=7, window_hours=[3, 15])
    ledger = generate(cfg, out)
    return out, ledger


class TestConfig:
    def test_validation_rejects_bad_tiling(self):
        cfg = CohortConfig(subjects=1, days=10,
                           regimes=[[("well_being", 0, 4), ("poor_mood", 5, 5)]])
        with pytest.raises(InvalidConfig):
            cfg.validate()

    def test_unknown_phase_rejected(self):
        cfg = CohortConfig(subjects=1, days=2, regimes=[[("manic", 0, 2)]])
        with pytest.raises(InvalidConfig):
            cfg.validate()

    def test_round_trip_via_json(self, tmp_path):
        cfg = april_like_config(subjects=2, days=60, seed=5)
        path = tmp_path / "cohort.json"
        path.write_text(json.dumps(cfg.to_json()))
        again = load_cohort_config(path)
        assert again.to_json() == cfg.to_json()


class TestTemplates:
    @pytest.mark.parametrize("maker,wakes", [
        (_well_weekday, (415, 462, 540, 585)),
        (_well_weekend, (470, 520, 550)),
        (_poor_day, (415, 448, 480)),
    ])
    def test_contiguous_and_context_separated(self, maker, wakes):
        for wake in wakes:
            blocks = _fill_gaps(maker(wake))
            assert blocks[0].start_min == 0 and blocks[-1].end_min == 1440
            for a, b in zip(blocks, blocks[1:]):
                assert a.end_min == b.start_min
                assert (a.motion, a.location, a.screen) != \
                       (b.motion, b.location, b.screen), (a.label, b.label)
            assert not any(b.label is ActivityLabel.UNKNOWN for b in blocks
                           if maker is not _poor_day)

    def test_every_day_has_three_meals(self):
        rng = np.random.default_rng(0)
        for weekday in range(7):
            for template in ("well", "poor"):
                blocks = _day_schedule(template, weekday, PhaseParams(), rng)
                assert sum(1 for b in blocks if b.meal) == 3


class TestDeterminism:
    def test_same_seed_byte_identical(self, tmp_path):
        cfg = CohortConfig(subjects=1, days=1, seed=42, window_hours=[3])
        generate(cfg, tmp_path / "a")
        generate(cfg, tmp_path / "b")
        assert corpus_hash(tmp_path / "a") == corpus_hash(tmp_path / "b")

    def test_different_seed_differs(self, tmp_path):
        generate(CohortConfig(subjects=1, days=1, seed=1, window_hours=[3]),
                 tmp_path / "a")
        generate(CohortConfig(subjects=1, days=1, seed=2, window_hours=[3]),
                 tmp_path / "b")
        assert corpus_hash(tmp_path / "a") != corpus_hash(tmp_path / "b")


class TestLedgerCouplings:
    def test_poor_mood_lowers_rmssd_and_sleep(self, tmp_path):
        cfg = CohortConfig(
            subjects=1, days=14, seed=11, window_hours=[15],
            regimes=[[("well_being", 0, 7), ("poor_mood", 7, 7)]])
        ledger = generate(cfg, tmp_path)
        sub = ledger["subjects"]["s01"]

        def window_rmssd(w):
            ibis = np.diff(w["beats_ms"])
            return float(np.sqrt(np.mean(np.diff(ibis) ** 2)))

        rmssd = [window_rmssd(w) for w in sub["windows"]]
        well, poor = np.mean(rmssd[:7]), np.mean(rmssd[7:])
        assert poor < well
        sleep = [d["sleep_minutes"] for d in sub["days"]]
        assert np.mean(sleep[7:]) < np.mean(sleep[:7])
        na = [d["na_mean"] for d in sub["days"]]
        assert np.mean(na[7:]) > np.mean(na[:7])

    def test_streams_match_ledger_daily_totals(self, tiny_corpus):
        out, ledger = tiny_corpus
        day = ledger["subjects"]["s01"]["days"][0]
        steps = parse_stream(out / "s01" / day["date"] / "steps.csv",
                             CHANNEL_DESCRIPTORS[Channel.STEPS])
        assert steps.values.sum() == day["steps_total"]
        gps = parse_stream(out / "s01" / day["date"] / "gps_class.csv",
                           CHANNEL_DESCRIPTORS[Channel.GPS_CLASS])
        assert (gps.values == 1).sum() == day["home_minutes"]

    def test_all_streams_valid_batches(self, tiny_corpus):
        out, ledger = tiny_corpus
        day = ledger["subjects"]["s01"]["days"][0]["date"]
        for channel in Channel:
            if channel is Channel.EMA:
                continue
            path = out / "s01" / day / f"{channel.value}.csv"
            batch = parse_stream(path, CHANNEL_DESCRIPTORS[channel])
            assert len(batch) > 0
            assert np.all(np.diff(batch.timestamps) > 0)
            assert np.all(np.isfinite(batch.values))


class TestReplay:
    def test_empty_directory_clean_termination(self, tmp_path):
        seen = []
        assert replay(tmp_path, 0, seen.append) == 0
        assert seen == []

    def test_batches_in_timestamp_order(self, tiny_corpus):
        out, _ = tiny_corpus
        starts = []
        replay(out, 0, lambda b: starts.append(int(b.timestamps[0])))
        assert starts == sorted(starts)
        assert len(starts) > 0

    def test_directory_sink_round_trips(self, tiny_corpus, tmp_path):
        out, _ = tiny_corpus
        sink = directory_sink(tmp_path / "copy")
        n = replay(out, 0, sink, channels={"hr", "steps"})
        assert n == 4  # 2 days x 2 channels
        src = parse_stream(out / "s01" / "2021-01-04" / "hr.csv",
                           CHANNEL_DESCRIPTORS[Channel.HR])
        dst = parse_stream(tmp_path / "copy" / "s01" / "2021-01-04" / "hr.csv",
                           CHANNEL_DESCRIPTORS[Channel.HR])
        np.testing.assert_array_equal(src.timestamps, dst.timestamps)
        np.testing.assert_allclose(src.values, dst.values, atol=1e-6)

    def test_bad_layout_raises(self, tmp_path):
        (tmp_path / "s01" / "not-a-date").mkdir(parents=True)
        with pytest.raises(LayoutError):
            replay(tmp_path, 0, lambda b: None)
