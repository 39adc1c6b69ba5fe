"""Seeded synthetic cohort generation.

Every day is a contiguous 5-minute-aligned schedule of activity blocks, each
with a motion class, a location and optional screen use; channels are derived
from the schedule:

  ppg        pulse trains inside the sampled physiology windows, interbeat
             intervals modulated by a high-frequency (breathing-locked) and a
             low-frequency sinusoid, amplitudes modulated at the breathing rate
  gsr        baseline with stimulus-response cycles (more under poor mood)
  accel_mag  10 s samples, noise spread per motion class
  hr         per-minute heart rate with night dip, movement and meal bumps
  steps      hourly counts tied to movement blocks
  gps_class  per-minute location codes
  screen_on  per-minute screen state
  ema        answered and missed prompt rows (missed rows carry -1 affects)

The ledger records exactly what was planted: block events, daily regime
labels, meal times, per-window beat times and daily totals.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field
from datetime import date, timedelta
from pathlib import Path

import numpy as np

from ..chronicle import ActivityLabel
from ..ingest import CHANNEL_DESCRIPTORS, GPS_CLASS_CODES, Channel, SampleBatch
from ..timeutil import MS_PER_MIN

_A = ActivityLabel


class InvalidConfig(ValueError):
    pass


@dataclass
class PhaseParams:
    hr_base: float = 62.0
    hf_depth_ms: float = 45.0     # breathing-locked interbeat modulation
    lf_depth_ms: float = 15.0
    resp_hz: float = 0.25
    sleep_minutes: float = 462.0
    sleep_std: float = 12.0
    weekend_sleep_bonus: float = 60.0
    steps_ambient: float = 2100.0
    steps_std: float = 600.0
    pa_mean: float = 65.0
    na_mean: float = 25.0
    affect_std: float = 6.0
    response_rate: float = 0.95
    gsr_stimuli_per_window: int = 1
    template: str = "well"        # well | poor


def _default_phases() -> dict:
    # poor-mood deltas sit near one baseline sigma so a 14-day window lands in
    # the moderate screen band rather than saturating the deficit terms
    return {
        "well_being": PhaseParams(),
        "poor_mood": PhaseParams(
            hr_base=68.0, hf_depth_ms=16.0, lf_depth_ms=20.0, resp_hz=0.30,
            sleep_minutes=448.0, weekend_sleep_bonus=0.0,
            steps_ambient=6800.0, steps_std=900.0, pa_mean=40.0, na_mean=45.0,
            response_rate=0.8, gsr_stimuli_per_window=3, template="poor"),
    }


@dataclass
class CohortConfig:
    subjects: int = 1
    days: int = 14
    seed: int = 42
    start_day: str = "2021-01-04"   # a Monday
    timezone: str = "UTC"
    regimes: list[list] = field(default_factory=list)  # per subject [(phase, start, len)]
    phases: dict = field(default_factory=_default_phases)
    window_hours: list[int] = field(default_factory=lambda: list(range(0, 24, 2)))
    window_minutes: int = 15
    ppg_rate_hz: float = 25.0
    gsr_rate_hz: float = 4.0

    def subject_ids(self) -> list[str]:
        return [f"s{i + 1:02d}" for i in range(self.subjects)]

    def regime_plan(self, subject_index: int) -> list[tuple[str, int, int]]:
        if self.regimes:
            plan = self.regimes[subject_index % len(self.regimes)]
            return [tuple(p) for p in plan]
        return [("well_being", 0, self.days)]

    def validate(self) -> None:
        if self.subjects < 1 or self.days < 1:
            raise InvalidConfig("need at least one subject and one day")
        for phase in self.phases.values():
            for name in ("hr_base", "sleep_minutes", "steps_ambient", "pa_mean",
                         "na_mean"):
                if getattr(phase, name) <= 0:
                    raise InvalidConfig(f"phase parameter {name} must be positive")
        for i in range(self.subjects):
            plan = self.regime_plan(i)
            covered = 0
            for phase, start, length in plan:
                if phase not in self.phases:
                    raise InvalidConfig(f"unknown phase {phase!r}")
                if start != covered or length < 1:
                    raise InvalidConfig("regime phases must tile [0, days)")
                covered += length
            if covered != self.days:
                raise InvalidConfig("regime phases must tile [0, days)")

    def to_json(self) -> dict:
        out = asdict(self)
        out["phases"] = {k: asdict(v) for k, v in self.phases.items()}
        out["regimes"] = [[list(p) for p in plan] for plan in self.regimes]
        return out


def april_like_config(subjects: int = 5, days: int = 60, seed: int = 42,
                      poor_start: int = 30, poor_len: int = 20) -> CohortConfig:
    """Default scenario: a planted poor-mood block inside a well-being span,
    echoing an intake-normal to moderately-depressed arc.  The block shrinks
    to fit short cohorts."""
    poor_start = min(poor_start, max(1, days - 1))
    poor_len = min(poor_len, days - poor_start)
    plan = [("well_being", 0, poor_start), ("poor_mood", poor_start, poor_len),
            ("well_being", poor_start + poor_len, days - poor_start - poor_len)]
    regimes = [[p for p in plan if p[2] > 0]]
    cfg = CohortConfig(subjects=subjects, days=days, seed=seed, regimes=regimes,
                       window_hours=[3, 15])
    return cfg


def load_cohort_config(path: str | Path) -> CohortConfig:
    obj = json.loads(Path(path).read_text())
    phases = {k: PhaseParams(**v) for k, v in obj.pop("phases", {}).items()} \
        or _default_phases()
    cfg = CohortConfig(**{k: v for k, v in obj.items()
                          if k in CohortConfig.__dataclass_fields__ and k != "phases"})
    cfg.phases = phases
    cfg.validate()
    return cfg


# ---------------------------------------------------------------------------
# day schedules
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Block:
    label: ActivityLabel
    start_min: int
    end_min: int
    location: str          # home | work | restaurant | outdoors | commute | unknown
    motion: str            # still | walking | running
    screen: bool = False
    meal: bool = False


def _well_weekday(wake: int) -> list[Block]:
    """Office day; every adjacent pair differs in motion, location or screen
    so run segmentation recovers the exact block boundaries."""
    b = Block
    return [
        b(_A.SLEEPING, 0, wake, "home", "still"),
        b(_A.PREPARING_FOOD, wake, wake + 10, "home", "walking"),
        b(_A.EATING, wake + 10, wake + 35, "home", "still", meal=True),
        b(_A.COMMUTING, wake + 35, wake + 65, "commute", "walking"),
        b(_A.WORKING, wake + 65, 720, "work", "still"),
        b(_A.EATING, 720, 750, "restaurant", "still", meal=True),
        b(_A.WALKING, 750, 780, "outdoors", "walking"),
        b(_A.WORKING, 780, 1020, "work", "still"),
        b(_A.COMMUTING, 1020, 1050, "commute", "walking"),
        b(_A.RUNNING, 1050, 1080, "outdoors", "running"),
        b(_A.PREPARING_FOOD, 1080, 1110, "home", "walking"),
        b(_A.EATING, 1110, 1140, "home", "still", meal=True),
        b(_A.PREPARING_FOOD, 1140, 1150, "home", "walking"),
        b(_A.WATCHING_TV, 1150, 1270, "home", "still"),
        b(_A.REMOTE_COMMUNICATION, 1270, 1274, "home", "still", screen=True),
        b(_A.RELAXING, 1274, 1315, "home", "still"),
        b(_A.ON_THE_SMARTPHONE, 1315, 1355, "home", "still", screen=True),
        b(_A.USING_TOILET, 1355, 1359, "home", "walking"),
        b(_A.RELAXING, 1359, 1400, "home", "still"),
        b(_A.ON_THE_SMARTPHONE, 1400, 1440, "home", "still", screen=True),
    ]


def _well_weekend(wake: int) -> list[Block]:
    b = Block
    return [
        b(_A.SLEEPING, 0, wake, "home", "still"),
        b(_A.PREPARING_FOOD, wake, wake + 10, "home", "walking"),
        b(_A.EATING, wake + 10, wake + 40, "home", "still", meal=True),
        b(_A.HOUSEWORK, wake + 40, wake + 100, "home", "walking"),
        b(_A.RELAXING, wake + 100, wake + 140, "home", "still"),
        b(_A.ON_THE_SMARTPHONE, wake + 140, wake + 180, "home", "still", screen=True),
        b(_A.WALKING, wake + 180, 745, "outdoors", "walking"),
        b(_A.EATING, 745, 775, "home", "still", meal=True),
        b(_A.PREPARING_FOOD, 775, 785, "home", "walking"),
        b(_A.WATCHING_TV, 785, 910, "home", "still"),
        b(_A.USING_TOILET, 910, 914, "home", "walking"),
        b(_A.ON_THE_SMARTPHONE, 914, 954, "home", "still", screen=True),
        b(_A.RELAXING, 954, 995, "home", "still"),
        b(_A.WALKING, 995, 1085, "outdoors", "walking"),
        b(_A.SOCIALIZING, 1085, 1125, "outdoors", "still"),
        b(_A.WALKING, 1125, 1145, "outdoors", "walking"),
        b(_A.EATING, 1145, 1175, "home", "still", meal=True),
        b(_A.PREPARING_FOOD, 1175, 1185, "home", "walking"),
        b(_A.WATCHING_TV, 1185, 1320, "home", "still"),
        b(_A.ON_THE_SMARTPHONE, 1320, 1360, "home", "still", screen=True),
        b(_A.RELAXING, 1360, 1400, "home", "still"),
        b(_A.USING_TOILET, 1400, 1404, "home", "walking"),
        b(_A.ON_THE_SMARTPHONE, 1404, 1440, "home", "still", screen=True),
    ]


def _poor_day(wake: int) -> list[Block]:
    """Housebound day: one short walk, a long unknown-location stretch, screen
    sessions; the unknown block absorbs the wake-time slack."""
    b = Block
    return [
        b(_A.SLEEPING, 0, wake, "home", "still"),
        b(_A.PREPARING_FOOD, wake, wake + 10, "home", "walking"),
        b(_A.EATING, wake + 10, wake + 35, "home", "still", meal=True),
        b(_A.ON_THE_SMARTPHONE, wake + 35, wake + 75, "home", "still", screen=True),
        b(_A.RELAXING, wake + 75, wake + 115, "home", "still"),
        b(_A.ON_THE_SMARTPHONE, wake + 115, wake + 155, "home", "still", screen=True),
        b(_A.WALKING, wake + 155, wake + 195, "outdoors", "walking"),
        b(_A.EATING, wake + 195, wake + 220, "home", "still", meal=True),
        b(_A.ON_THE_SMARTPHONE, wake + 220, wake + 260, "home", "still", screen=True),
        b(_A.RELAXING, wake + 260, wake + 300, "home", "still"),
        b(_A.STILL, wake + 300, 1030, "unknown", "still"),
        b(_A.ON_THE_SMARTPHONE, 1030, 1070, "home", "still", screen=True),
        b(_A.USING_TOILET, 1070, 1074, "home", "walking"),
        b(_A.RELAXING, 1074, 1100, "home", "still"),
        b(_A.PREPARING_FOOD, 1100, 1110, "home", "walking"),
        b(_A.EATING, 1110, 1135, "home", "still", meal=True),
        b(_A.PREPARING_FOOD, 1135, 1145, "home", "walking"),
        b(_A.WATCHING_TV, 1145, 1285, "home", "still"),
        b(_A.ON_THE_SMARTPHONE, 1285, 1325, "home", "still", screen=True),
        b(_A.RELAXING, 1325, 1365, "home", "still"),
        b(_A.USING_TOILET, 1365, 1369, "home", "walking"),
        b(_A.ON_THE_SMARTPHONE, 1369, 1409, "home", "still", screen=True),
        b(_A.RELAXING, 1409, 1440, "home", "still"),
    ]


def _fill_gaps(blocks: list[Block]) -> list[Block]:
    """Drop degenerate blocks; unlabelled gaps (safety net, the shipped
    templates are contiguous) inherit home/still context."""
    out: list[Block] = []
    cursor = 0
    for blk in blocks:
        if blk.end_min <= blk.start_min:
            continue
        if blk.start_min > cursor:
            out.append(Block(_A.UNKNOWN, cursor, blk.start_min, "home", "still"))
        out.append(blk)
        cursor = blk.end_min
    if cursor < 1440:
        out.append(Block(_A.UNKNOWN, cursor, 1440, "home", "still"))
    return out


def _day_schedule(template: str, weekday: int, params: PhaseParams,
                  rng: np.random.Generator) -> list[Block]:
    sleep = params.sleep_minutes + rng.normal(0, params.sleep_std)
    weekend = template == "well" and weekday >= 5
    if weekend:
        sleep += params.weekend_sleep_bonus
    wake = int(round(sleep / 5.0)) * 5
    # template-specific caps keep the fixed afternoon anchors reachable
    cap = 480 if template == "poor" else 550 if weekend else 585
    wake = min(max(wake, 300), cap)
    if template == "poor":
        return _fill_gaps(_poor_day(wake))
    if weekend:
        return _fill_gaps(_well_weekend(wake))
    return _fill_gaps(_well_weekday(wake))


_MOTION_SIGMA = {"still": 0.01, "walking": 0.12, "running": 0.6}
# light movement barely lifts heart rate so the postprandial rise stays visible
_MOTION_HR = {"still": 0.0, "walking": 3.0, "running": 20.0}
_MEAL_HR_BUMP = 9.0
_MOTION_STEPS_PER_MIN = {"still": 0.0, "walking": 30.0, "running": 120.0}


def _block_at(blocks: list[Block], minute: int) -> Block:
    for blk in blocks:
        if blk.start_min <= minute < blk.end_min:
            return blk
    return blocks[-1]


# ---------------------------------------------------------------------------
# channel synthesis
# ---------------------------------------------------------------------------

def synth_ppg_window(t0_ms: int, duration_s: float, rate_hz: float, hr_bpm: float,
                     hf_depth_ms: float, lf_depth_ms: float, rsa_hz: float,
                     resp_hz: float, rng: np.random.Generator,
                     lf_hz: float = 0.08, resp_depth: float = 0.25,
                     pulse_sigma_ms: float = 60.0,
                     jitter_ms: float = 1.5) -> tuple[SampleBatch, np.ndarray]:
    """One pulse-train window; returns (batch, true beat times in ms)."""
    beats = []
    t = float(t0_ms) + 200.0
    end = t0_ms + duration_s * 1000.0
    while t < end:
        beats.append(t)
        rel = (t - t0_ms) / 1000.0
        ibi = (60_000.0 / hr_bpm
               + hf_depth_ms * np.sin(2 * np.pi * rsa_hz * rel)
               + lf_depth_ms * np.sin(2 * np.pi * lf_hz * rel)
               + rng.normal(0.0, jitter_ms))
        t += max(300.0, ibi)
    beats = np.array(beats)
    n = int(duration_s * rate_hz)
    grid = t0_ms + np.arange(n) * (1000.0 / rate_hz)
    x = np.zeros(n)
    half = 4.0 * pulse_sigma_ms
    for b in beats:
        amp = 1.0 + resp_depth * np.sin(2 * np.pi * resp_hz * (b - t0_ms) / 1000.0)
        lo = int(np.searchsorted(grid, b - half))
        hi = int(np.searchsorted(grid, b + half))
        seg = grid[lo:hi]
        x[lo:hi] += amp * np.exp(-0.5 * ((seg - b) / pulse_sigma_ms) ** 2)
    x += rng.normal(0.0, 0.003, size=n)
    batch = SampleBatch("", CHANNEL_DESCRIPTORS[Channel.PPG],
                        np.round(grid).astype(np.int64), x)
    return batch, beats


def synth_gsr_window(t0_ms: int, duration_s: float, rate_hz: float, n_stimuli: int,
                     rng: np.random.Generator, baseline: float = 2.0,
                     amplitude: float = 0.5) -> SampleBatch:
    n = int(duration_s * rate_hz)
    grid = t0_ms + np.arange(n) * (1000.0 / rate_hz)
    x = np.full(n, baseline)
    rel = (grid - t0_ms) / 1000.0
    for i in range(n_stimuli):
        onset = (i + 0.6) * duration_s / (n_stimuli + 1) + rng.uniform(-5, 5)
        amp = amplitude * rng.uniform(0.8, 1.2)
        rise, plateau, tau = 3.0, 2.0, 8.0
        u = rel - onset
        ramp = np.clip(u / rise, 0.0, 1.0) * amp
        decay_start = rise + plateau
        dec = np.where(u > decay_start, amp * np.exp(-(u - decay_start) / tau) - amp, 0.0)
        x += np.where(u > 0, ramp + dec, 0.0)
    x += rng.normal(0.0, 0.001, size=n)
    return SampleBatch("", CHANNEL_DESCRIPTORS[Channel.GSR],
                       np.round(grid).astype(np.int64), x)


@dataclass
class _DayTruth:
    date: str
    regime: str
    sleep_minutes: float
    steps_total: float
    home_minutes: float
    unknown_minutes: float
    pa_mean: float | None
    na_mean: float | None
    meals_ms: list[int]
    events: list[list]


def _synth_day(subject: str, day: date, day_start_ms: int, blocks: list[Block],
               params: PhaseParams, cfg: CohortConfig, rng: np.random.Generator,
               out_dir: Path) -> tuple[_DayTruth, list[dict]]:
    """Emit all channel CSVs for one subject-day; returns truth + window info."""
    from ..ingest import write_stream

    day_dir = out_dir / subject / day.isoformat()
    minute_ms = day_start_ms + np.arange(1440, dtype=np.int64) * MS_PER_MIN
    per_min_block = [_block_at(blocks, m) for m in range(1440)]

    # hr: base + night dip while sleeping + movement + meal bumps
    hr = np.full(1440, params.hr_base)
    for m, blk in enumerate(per_min_block):
        if blk.label is _A.SLEEPING:
            hr[m] -= 6.0
        hr[m] += _MOTION_HR[blk.motion]
    for blk in blocks:
        if blk.meal:
            lo, hi = blk.start_min, min(1440, blk.start_min + 25)
            hr[lo:hi] += _MEAL_HR_BUMP
    hr += rng.normal(0.0, 0.5, size=1440)
    write_stream(day_dir / "hr.csv",
                 SampleBatch(subject, CHANNEL_DESCRIPTORS[Channel.HR], minute_ms, hr),
                 "%.2f")

    # gps_class / screen_on per minute
    gps = np.array([GPS_CLASS_CODES[blk.location] for blk in per_min_block],
                   dtype=np.float64)
    write_stream(day_dir / "gps_class.csv",
                 SampleBatch(subject, CHANNEL_DESCRIPTORS[Channel.GPS_CLASS],
                             minute_ms, gps), "%.0f")
    screen = np.array([1.0 if blk.screen else 0.0 for blk in per_min_block])
    write_stream(day_dir / "screen_on.csv",
                 SampleBatch(subject, CHANNEL_DESCRIPTORS[Channel.SCREEN_ON],
                             minute_ms, screen), "%.0f")

    # accel magnitude every 4 s; spread encodes the motion class
    n_acc = 21_600
    acc_t = day_start_ms + np.arange(n_acc, dtype=np.int64) * 4_000
    sigma = np.array([_MOTION_SIGMA[per_min_block[min(1439, (4 * k) // 60)].motion]
                      for k in range(n_acc)])
    acc = 1.0 + rng.normal(0.0, 1.0, size=n_acc) * sigma
    write_stream(day_dir / "accel_mag.csv",
                 SampleBatch(subject, CHANNEL_DESCRIPTORS[Channel.ACCEL_MAG],
                             acc_t, acc), "%.4f")

    # steps per hour: movement blocks dominate, ambient fills the rest
    per_min_steps = np.zeros(1440)
    waking = [m for m, blk in enumerate(per_min_block) if blk.label is not _A.SLEEPING]
    for m, blk in enumerate(per_min_block):
        per_min_steps[m] = _MOTION_STEPS_PER_MIN[blk.motion]
    ambient = max(0.0, params.steps_ambient + rng.normal(0.0, params.steps_std))
    if waking:
        per_min_steps[waking] += ambient / len(waking)
    hourly = per_min_steps.reshape(24, 60).sum(axis=1)
    hourly = np.floor(hourly)
    hour_t = day_start_ms + (np.arange(24, dtype=np.int64) + 1) * 3_600_000 - 1
    write_stream(day_dir / "steps.csv",
                 SampleBatch(subject, CHANNEL_DESCRIPTORS[Channel.STEPS],
                             hour_t, hourly), "%.0f")

    # physiology windows: ppg + gsr
    windows = []
    ppg_ts, ppg_v = [], []
    gsr_ts, gsr_v = [], []
    for h in cfg.window_hours:
        w0 = day_start_ms + h * 3_600_000
        blk = per_min_block[min(1439, h * 60)]
        hr_now = float(hr[min(1439, h * 60)])
        ppg, beats = synth_ppg_window(w0, cfg.window_minutes * 60, cfg.ppg_rate_hz,
                                      hr_now, params.hf_depth_ms, params.lf_depth_ms,
                                      params.resp_hz, params.resp_hz, rng)
        gsr = synth_gsr_window(w0, cfg.window_minutes * 60, cfg.gsr_rate_hz,
                               params.gsr_stimuli_per_window, rng)
        ppg_ts.append(ppg.timestamps); ppg_v.append(ppg.values)
        gsr_ts.append(gsr.timestamps); gsr_v.append(gsr.values)
        windows.append({"start_ms": int(w0),
                        "end_ms": int(w0 + cfg.window_minutes * 60_000),
                        "resting": blk.label is _A.SLEEPING,
                        "beats_ms": [round(float(b), 2) for b in beats]})
    write_stream(day_dir / "ppg.csv",
                 SampleBatch(subject, CHANNEL_DESCRIPTORS[Channel.PPG],
                             np.concatenate(ppg_ts), np.concatenate(ppg_v)), "%.5f")
    write_stream(day_dir / "gsr.csv",
                 SampleBatch(subject, CHANNEL_DESCRIPTORS[Channel.GSR],
                             np.concatenate(gsr_ts), np.concatenate(gsr_v)), "%.5f")

    # ema prompts: 4 momentary + end of day; missed rows carry -1 affects
    from ..config import EmaConfig
    from ..ema import schedule_prompts
    ema_seed = int(rng.integers(0, 2**31 - 1))
    prompts = schedule_prompts(subject, day, ema_seed, EmaConfig(), cfg.timezone)
    rows, pa_vals, na_vals = [], [], []
    for p in prompts:
        answered = rng.random() < params.response_rate
        if answered:
            pa = int(np.clip(round(params.pa_mean + rng.normal(0, params.affect_std)),
                             0, 100))
            na = int(np.clip(round(params.na_mean + rng.normal(0, params.affect_std)),
                             0, 100))
            ts = p.scheduled_at + int(rng.uniform(0, 15) * MS_PER_MIN)
            text = ""
            if p.kind == "end_of_day" and day.weekday() == 6:
                text = "weekly reflection: " + ("a heavy week" if params.template ==
                                                "poor" else "a steady week")
            rows.append((ts, p.kind, pa, na, text))
            pa_vals.append(pa); na_vals.append(na)
        else:
            rows.append((p.scheduled_at, p.kind, -1, -1, ""))
    rows.sort(key=lambda r: r[0])
    import csv as _csv
    day_dir.mkdir(parents=True, exist_ok=True)
    with (day_dir / "ema.csv").open("w", newline="") as fh:
        w = _csv.writer(fh, quoting=_csv.QUOTE_MINIMAL)
        w.writerow(["ts_ms", "prompt_kind", "positive", "negative", "free_text"])
        for r in rows:
            w.writerow(r)

    home_min = float(sum(1 for blk in per_min_block if blk.location == "home"))
    unknown_min = float(sum(1 for blk in per_min_block if blk.location == "unknown"))
    sleep_min = float(sum(1 for blk in per_min_block if blk.label is _A.SLEEPING))
    truth = _DayTruth(
        date=day.isoformat(),
        regime="",
        sleep_minutes=sleep_min,
        steps_total=float(hourly.sum()),
        home_minutes=home_min,
        unknown_minutes=unknown_min,
        pa_mean=float(np.mean(pa_vals)) if pa_vals else None,
        na_mean=float(np.mean(na_vals)) if na_vals else None,
        meals_ms=[int(day_start_ms + blk.start_min * MS_PER_MIN)
                  for blk in blocks if blk.meal],
        events=[[blk.label.value, int(day_start_ms + blk.start_min * MS_PER_MIN),
                 int(day_start_ms + blk.end_min * MS_PER_MIN), blk.location]
                for blk in blocks if blk.label is not _A.UNKNOWN],
    )
    return truth, windows


def generate(cfg: CohortConfig, out_dir: str | Path) -> dict:
    """Emit the cohort raw-data directory and return the ground-truth ledger
    (also written to <out_dir>/ledger.json)."""
    cfg.validate()
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    root_seq = np.random.SeedSequence(cfg.seed)
    subject_seqs = root_seq.spawn(cfg.subjects)
    start = date.fromisoformat(cfg.start_day)
    ledger: dict = {"config": cfg.to_json(), "subjects": {}}

    for si, subject in enumerate(cfg.subject_ids()):
        rng = np.random.default_rng(subject_seqs[si])
        plan = cfg.regime_plan(si)
        day_phase: list[str] = []
        for phase, s, length in plan:
            day_phase.extend([phase] * length)
        days_truth, windows_all = [], []
        for di in range(cfg.days):
            day = start + timedelta(days=di)
            day_start_ms = int(np.datetime64(day.isoformat()).astype("datetime64[ms]")
                               .astype(np.int64))
            params = cfg.phases[day_phase[di]]
            blocks = _day_schedule(params.template, day.weekday(), params, rng)
            truth, windows = _synth_day(subject, day, day_start_ms, blocks, params,
                                        cfg, rng, out_dir)
            truth.regime = day_phase[di]
            days_truth.append(asdict(truth))
            windows_all.extend(windows)
        ledger["subjects"][subject] = {
            "regime": day_phase,
            "days": days_truth,
            "windows": windows_all,
        }

    (out_dir / "ledger.json").write_text(json.dumps(ledger, sort_keys=True))
    return ledger


def corpus_hash(out_dir: str | Path) -> str:
    """Stable content hash over every generated file."""
    h = hashlib.sha256()
    for path in sorted(Path(out_dir).rglob("*")):
        if path.is_file():
            h.update(str(path.relative_to(out_dir)).encode())
            h.update(path.read_bytes())
    return h.hexdigest()
