import numpy as np
import pytest
from datetime import date

from mhnav.config import EmaConfig
from mhnav.ema import (DuplicateResponse, EmaLog, EmaResponse, Expired, NoData,
                       WindowTooSmall, parse_ema_csv, schedule_prompts)
from mhnav.timeutil import MS_PER_HOUR, MS_PER_MIN, day_bounds

DAY = date(2021, 3, 1)


class TestScheduling:
    def test_one_momentary_plus_end_of_day(self):
        cfg = EmaConfig(prompts_per_day=1)
        prompts = schedule_prompts("s01", DAY, seed=1, cfg=cfg)
        kinds = [p.kind for p in prompts]
        assert kinds == ["momentary", "end_of_day"]

    def test_same_seed_identical(self):
        a = schedule_prompts("s01", DAY, seed=42)
        b = schedule_prompts("s01", DAY, seed=42)
        assert [(p.scheduled_at, p.kind) for p in a] == \
               [(p.scheduled_at, p.kind) for p in b]

    def test_different_seed_differs(self):
        a = schedule_prompts("s01", DAY, seed=1)
        b = schedule_prompts("s01", DAY, seed=2)
        assert [p.scheduled_at for p in a] != [p.scheduled_at for p in b]

    def test_separation_holds_over_many_seeds(self):
        cfg = EmaConfig()
        day_start, _ = day_bounds(DAY)
        w0 = day_start + cfg.waking_start_hour * MS_PER_HOUR
        w1 = day_start + cfg.waking_end_hour * MS_PER_HOUR
        for seed in range(1000):
            prompts = [p for p in schedule_prompts("s01", DAY, seed=seed, cfg=cfg)
                       if p.kind == "momentary"]
            times = sorted(p.scheduled_at for p in prompts)
            assert len(times) == 4
            assert all(w0 <= t < w1 for t in times)
            gaps = np.diff(times)
            assert (gaps >= cfg.min_separation_min * MS_PER_MIN).all()

    def test_window_too_small(self):
        cfg = EmaConfig(prompts_per_day=10, waking_start_hour=9, waking_end_hour=12)
        with pytest.raises(WindowTooSmall):
            schedule_prompts("s01", DAY, seed=1, cfg=cfg)

    def test_expiry_after_schedule(self):
        for p in schedule_prompts("s01", DAY, seed=5):
            assert p.expiry > p.scheduled_at


class TestResponses:
    def make_log(self):
        log = EmaLog()
        prompts = schedule_prompts("s01", DAY, seed=3)
        log.add_prompts(prompts)
        return log, prompts

    def test_on_time_response_counts(self):
        log, prompts = self.make_log()
        p = prompts[0]
        log.record_response(EmaResponse(p.prompt_id, p.scheduled_at + 60_000, 60, 20))
        mood = log.daily_mood("s01", DAY)
        assert mood.response_rate == pytest.approx(1 / len(prompts))

    def test_late_response_expired_and_missed(self):
        log, prompts = self.make_log()
        p = prompts[0]
        with pytest.raises(Expired):
            log.record_response(EmaResponse(p.prompt_id, p.expiry + 1, 60, 20))
        assert p.prompt_id in log.missed

    def test_duplicate_rejected(self):
        log, prompts = self.make_log()
        p = prompts[0]
        log.record_response(EmaResponse(p.prompt_id, p.scheduled_at + 1, 60, 20))
        with pytest.raises(DuplicateResponse):
            log.record_response(EmaResponse(p.prompt_id, p.scheduled_at + 2, 61, 21))

    def test_affect_bounds(self):
        with pytest.raises(ValueError):
            EmaResponse("x", 0, 101, 0)
        with pytest.raises(ValueError):
            EmaResponse("x", 0, 0, -1)


class TestDailyMood:
    def test_means(self):
        log, prompts = TestResponses().make_log()
        for p, (pa, na) in zip(prompts[:2], [(60, 20), (70, 30)]):
            log.record_response(EmaResponse(p.prompt_id, p.scheduled_at + 1, pa, na))
        mood = log.daily_mood("s01", DAY)
        assert mood.mean_positive == 65.0
        assert mood.mean_negative == 25.0

    def test_zero_answered_raises_nodata(self):
        log, _ = TestResponses().make_log()
        with pytest.raises(NoData):
            log.daily_mood("s01", DAY)
        assert log.response_rate("s01", DAY) == 0.0


class TestEmaCsv:
    def test_round_trip_with_missed_rows(self, tmp_path):
        path = tmp_path / "ema.csv"
        path.write_text(
            "ts_ms,prompt_kind,positive,negative,free_text\n"
            "1000,momentary,60,20,\n"
            "2000,momentary,-1,-1,\n"
            '3000,end_of_day,70,30,"a day, with a comma"\n')
        log = parse_ema_csv(path, "s01")
        assert len(log.prompts) == 3
        assert len(log.responses) == 2
        assert len(log.missed) == 1
        texts = [r.free_text for r in log.responses.values()]
        assert "a day, with a comma" in texts
