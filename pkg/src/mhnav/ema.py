"""Momentary self-report stream: prompt scheduling, response recording and
daily mood aggregation.

Momentary prompts land at seeded-random times inside the waking window with a
minimum separation; an end-of-day prompt closes the window.  Two 0-100 affect
sliders (positive, negative) mirror the two mood lines a provider sees.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import date

import numpy as np

from .config import EmaConfig
from .personal import PromptWeights
from .timeutil import MS_PER_HOUR, MS_PER_MIN, day_bounds


class WindowTooSmall(ValueError):
    pass


class Expired(ValueError):
    pass


class DuplicateResponse(ValueError):
    pass


class UnknownPrompt(KeyError):
    pass


class NoData(LookupError):
    pass


@dataclass(frozen=True)
class EmaPrompt:
    prompt_id: str
    subject: str
    scheduled_at: int
    kind: str               # momentary | end_of_day
    expiry: int

    def to_json(self) -> dict:
        return {"prompt_id": self.prompt_id, "subject": self.subject,
                "scheduled_at": self.scheduled_at, "kind": self.kind,
                "expiry": self.expiry}


@dataclass(frozen=True)
class EmaResponse:
    prompt_id: str
    answered_at: int
    positive_affect: int
    negative_affect: int
    free_text: str = ""

    def __post_init__(self):
        if not (0 <= self.positive_affect <= 100 and 0 <= self.negative_affect <= 100):
            raise ValueError("affect sliders are 0..100")


@dataclass
class DailyMood:
    day: date
    mean_positive: float
    mean_negative: float
    response_rate: float

    def to_json(self) -> dict:
        return {"day": self.day.isoformat(), "mean_positive": self.mean_positive,
                "mean_negative": self.mean_negative,
                "response_rate": self.response_rate}


def schedule_prompts(subject: str, day: date, seed: int,
                     cfg: EmaConfig | None = None, tz: str = "UTC",
                     weights: PromptWeights | None = None) -> list[EmaPrompt]:
    """k momentary prompts plus one end-of-day prompt, deterministic per seed.

    Uniform scheduling draws spacings directly; a learned per-hour weight
    profile switches to seeded rejection sampling under the same separation
    constraint.
    """
    cfg = cfg or EmaConfig()
    day_start, _ = day_bounds(day, tz)
    w0 = day_start + cfg.waking_start_hour * MS_PER_HOUR
    w1 = day_start + cfg.waking_end_hour * MS_PER_HOUR
    k = cfg.prompts_per_day
    gap = cfg.min_separation_min * MS_PER_MIN
    if (k - 1) * gap > (w1 - w0):
        raise WindowTooSmall(f"cannot fit {k} prompts {cfg.min_separation_min} min "
                             f"apart in a {(w1 - w0) / MS_PER_HOUR:.1f} h window")
    rng = np.random.default_rng(seed)
    if weights is None:
        slack = (w1 - w0) - (k - 1) * gap
        offsets = np.sort(rng.uniform(0, slack, size=k))
        times = [int(w0 + offsets[i] + i * gap) for i in range(k)]
    else:
        hours = sorted(weights.hour_weights)
        probs = np.array([weights.hour_weights[h] for h in hours])
        probs = probs / probs.sum()
        times = None
        for _ in range(10_000):
            hs = rng.choice(hours, size=k, p=probs)
            cand = np.sort(day_start + hs * MS_PER_HOUR
                           + rng.uniform(0, MS_PER_HOUR, size=k))
            if k < 2 or np.all(np.diff(cand) >= gap):
                times = [int(t) for t in cand]
                break
        if times is None:
            raise WindowTooSmall("could not satisfy prompt separation under weights")
    prompts = [EmaPrompt(prompt_id=f"{subject}-{day.isoformat()}-m{i}", subject=subject,
                         scheduled_at=t, kind="momentary",
                         expiry=t + int(cfg.momentary_expiry_min * MS_PER_MIN))
               for i, t in enumerate(times)]
    prompts.append(EmaPrompt(prompt_id=f"{subject}-{day.isoformat()}-eod",
                             subject=subject, scheduled_at=w1, kind="end_of_day",
                             expiry=w1 + int(cfg.end_of_day_expiry_min * MS_PER_MIN)))
    return prompts


@dataclass
class EmaLog:
    """Per-subject prompt/response ledger."""
    prompts: dict[str, EmaPrompt] = field(default_factory=dict)
    responses: dict[str, EmaResponse] = field(default_factory=dict)
    missed: set[str] = field(default_factory=set)

    def add_prompts(self, prompts: list[EmaPrompt]) -> None:
        for p in prompts:
            self.prompts[p.prompt_id] = p

    def record_response(self, response: EmaResponse) -> EmaResponse:
        prompt = self.prompts.get(response.prompt_id)
        if prompt is None:
            raise UnknownPrompt(response.prompt_id)
        if response.prompt_id in self.responses:
            raise DuplicateResponse(response.prompt_id)
        if response.answered_at > prompt.expiry:
            self.missed.add(response.prompt_id)
            raise Expired(f"{response.prompt_id} expired at {prompt.expiry}")
        self.responses[response.prompt_id] = response
        return response

    def daily_mood(self, subject: str, day: date, tz: str = "UTC") -> DailyMood:
        day_start, day_end = day_bounds(day, tz)
        scheduled = [p for p in self.prompts.values()
                     if p.subject == subject and day_start <= p.scheduled_at < day_end]
        if not scheduled:
            raise NoData(f"no prompts scheduled for {subject} on {day}")
        answered = [self.responses[p.prompt_id] for p in scheduled
                    if p.prompt_id in self.responses]
        if not answered:
            raise NoData(f"zero of {len(scheduled)} prompts answered")
        return DailyMood(
            day=day,
            mean_positive=float(np.mean([r.positive_affect for r in answered])),
            mean_negative=float(np.mean([r.negative_affect for r in answered])),
            response_rate=len(answered) / len(scheduled),
        )

    def response_rate(self, subject: str, day: date, tz: str = "UTC") -> float:
        day_start, day_end = day_bounds(day, tz)
        scheduled = [p for p in self.prompts.values()
                     if p.subject == subject and day_start <= p.scheduled_at < day_end]
        if not scheduled:
            return 0.0
        answered = sum(1 for p in scheduled if p.prompt_id in self.responses)
        return answered / len(scheduled)


def parse_ema_csv(path, subject: str) -> EmaLog:
    """Read one day's subjective-stream file into a log.

    Columns: ts_ms, prompt_kind, positive, negative, free_text (quoted).
    Rows with -1 affects are prompts that were scheduled but never answered.
    """
    import csv

    log = EmaLog()
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["ts_ms", "prompt_kind", "positive", "negative", "free_text"]:
            raise ValueError(f"{path}: bad ema header {header}")
        for i, row in enumerate(reader):
            ts, kind, pos, neg = int(row[0]), row[1], int(row[2]), int(row[3])
            text = row[4] if len(row) > 4 else ""
            pid = f"{subject}-{ts}-{i}"
            prompt = EmaPrompt(prompt_id=pid, subject=subject, scheduled_at=ts,
                               kind=kind, expiry=ts + 6 * MS_PER_HOUR)
            log.add_prompts([prompt])
            if pos >= 0 and neg >= 0:
                log.record_response(EmaResponse(prompt_id=pid, answered_at=ts,
                                                positive_affect=pos,
                                                negative_affect=neg, free_text=text))
            else:
                log.missed.add(pid)
    return log
