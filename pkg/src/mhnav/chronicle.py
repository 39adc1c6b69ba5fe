"""Per-subject append-only life-event chronicle.

Events are labeled with one of the 24 daily activities (plus Unknown), carry
attribute tags and a confidence, and are persisted as one JSON object per
line.  Same-label overlaps are rejected; different-label overlaps are allowed
because concurrent heterogeneous activities are real (walking while on the
smartphone).
"""

from __future__ import annotations

import json
import re
import threading
from bisect import bisect_left, insort
from dataclasses import dataclass, field
from datetime import date
from enum import Enum
from pathlib import Path

import numpy as np

from .ingest import AlignedFrame
from .timeutil import MS_PER_DAY, MS_PER_MIN, day_bounds

SUBJECT_RE = re.compile(r"^[A-Za-z0-9_-]{1,64}$")


class ActivityLabel(str, Enum):
    STILL = "Still"
    WALKING = "Walking"
    RUNNING = "Running"
    CYCLING = "Cycling"
    DRIVING = "Driving"
    DIRECT_COMMUNICATION = "Direct communication"
    REMOTE_COMMUNICATION = "Remote communication"
    ON_THE_SMARTPHONE = "On the smartphone"
    WORKING = "Working"
    COMMUTING = "Commuting"
    EXERCISING = "Exercising"
    RELIGIOUS_EVENT = "Religious event"
    SHOPPING = "Shopping"
    EATING = "Eating"
    USING_TOILET = "Using toilet"
    HOME_EVENT = "Home event"
    WATCHING_TV = "Watching TV"
    PREPARING_FOOD = "Preparing food"
    SOCIALIZING = "Socializing"
    HOUSEWORK = "Housework"
    INTIMATE_RELATIONS = "Intimate relations"
    RELAXING = "Relaxing"
    TAKING_A_BREAK = "Taking a break"
    SLEEPING = "Sleeping"
    UNKNOWN = "Unknown"


#: fixed enumeration order used for every deterministic tie-break
ACTIVITY_ORDER = {label: i for i, label in enumerate(ActivityLabel)}

EVENT_SOURCES = ("rule", "fca", "manual", "synthetic")


class InvalidEvent(ValueError):
    pass


class OverlapConflict(ValueError):
    pass


class UnknownSubject(KeyError):
    pass


class UnsortedInput(ValueError):
    pass


@dataclass(frozen=True)
class EventRecord:
    subject: str
    label: ActivityLabel
    start: int
    end: int
    attributes: frozenset[str] = frozenset()
    source: str = "manual"
    confidence: float = 1.0

    def validate(self) -> None:
        if not SUBJECT_RE.match(self.subject):
            raise InvalidEvent(f"bad subject id {self.subject!r}")
        if not isinstance(self.label, ActivityLabel):
            raise InvalidEvent(f"bad label {self.label!r}")
        if self.end <= self.start:
            raise InvalidEvent(f"end {self.end} must be after start {self.start}")
        if self.end - self.start > MS_PER_DAY:
            raise InvalidEvent("event longer than 24 h")
        if not 0.0 <= self.confidence <= 1.0:
            raise InvalidEvent(f"confidence {self.confidence} outside [0,1]")
        if self.source not in EVENT_SOURCES:
            raise InvalidEvent(f"unknown source {self.source!r}")

    def to_json(self) -> dict:
        return {
            "subject": self.subject,
            "label": self.label.value,
            "start_ms": self.start,
            "end_ms": self.end,
            "attributes": sorted(self.attributes),
            "source": self.source,
            "confidence": self.confidence,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "EventRecord":
        return cls(
            subject=obj["subject"],
            label=ActivityLabel(obj["label"]),
            start=int(obj["start_ms"]),
            end=int(obj["end_ms"]),
            attributes=frozenset(obj.get("attributes", ())),
            source=obj.get("source", "manual"),
            confidence=float(obj.get("confidence", 1.0)),
        )


@dataclass
class _SubjectLog:
    events: list[tuple[int, EventRecord]] = field(default_factory=list)  # (seq, event)
    starts: list[tuple[int, int]] = field(default_factory=list)          # (start, idx) sorted
    by_label: dict[ActivityLabel, list[tuple[int, int]]] = field(default_factory=dict)
    next_seq: int = 1


class Chronicle:
    """Append-only store; one writer per subject, snapshot-consistent reads."""

    def __init__(self, root: str | Path | None = None):
        self.root = Path(root) if root is not None else None
        self._logs: dict[str, _SubjectLog] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._day_offsets: dict[str, dict[str, int]] = {}
        if self.root is not None:
            self.root.mkdir(parents=True, exist_ok=True)
            for path in sorted(self.root.glob("*.events.jsonl")):
                self._load(path)

    def _load(self, path: Path) -> None:
        subject = path.name[: -len(".events.jsonl")]
        with path.open() as fh:
            for line in fh:
                line = line.strip()
                if line:
                    self._append_memory(EventRecord.from_json(json.loads(line)))
        self._locks.setdefault(subject, threading.Lock())

    def _log_path(self, subject: str) -> Path:
        return self.root / f"{subject}.events.jsonl"

    def subjects(self) -> list[str]:
        return sorted(self._logs)

    def _append_memory(self, event: EventRecord) -> int:
        log = self._logs.setdefault(event.subject, _SubjectLog())
        idx = len(log.events)
        seq = log.next_seq
        log.events.append((seq, event))
        insort(log.starts, (event.start, idx))
        log.by_label.setdefault(event.label, []).append((event.start, event.end))
        log.by_label[event.label].sort()
        log.next_seq += 1
        return seq

    def append_event(self, event: EventRecord) -> int:
        """Durably append; returns the subject-scoped sequence number."""
        event.validate()
        lock = self._locks.setdefault(event.subject, threading.Lock())
        with lock:
            log = self._logs.get(event.subject)
            if log is not None:
                for s, e in log.by_label.get(event.label, ()):
                    if s < event.end and event.start < e:
                        raise OverlapConflict(
                            f"{event.label.value} [{event.start},{event.end}) overlaps "
                            f"existing [{s},{e}) for {event.subject}")
            if self.root is not None:
                path = self._log_path(event.subject)
                with path.open("a") as fh:
                    offset = fh.tell()
                    fh.write(json.dumps(event.to_json()) + "\n")
                day = date.fromtimestamp(event.start / 1000.0).isoformat()
                self._day_offsets.setdefault(event.subject, {}).setdefault(day, offset)
            return self._append_memory(event)

    def events(self, subject: str) -> list[EventRecord]:
        log = self._require(subject)
        return [ev for _, ev in log.events]

    def _require(self, subject: str) -> _SubjectLog:
        if subject not in self._logs:
            raise UnknownSubject(subject)
        return self._logs[subject]

    def query_window(self, subject: str, from_ms: int, to_ms: int,
                     label_filter: ActivityLabel | None = None) -> list[EventRecord]:
        """Events with non-empty intersection with [from_ms, to_ms), by start."""
        if from_ms >= to_ms:
            raise ValueError("from must be before to")
        log = self._require(subject)
        out = []
        # events are bounded by 24 h, so any intersecting event starts after from - 24 h
        lo = bisect_left(log.starts, (from_ms - MS_PER_DAY, -1))
        for start, idx in log.starts[lo:]:
            if start >= to_ms:
                break
            seq, ev = log.events[idx]
            if ev.end > from_ms:
                out.append((start, seq, ev))
        out.sort(key=lambda t: (t[0], t[1]))
        if label_filter is not None:
            return [ev for _, _, ev in out if ev.label == label_filter]
        return [ev for _, _, ev in out]

    def daily_summary(self, subject: str, day: date, tz: str = "UTC") -> "DailySummary":
        day_start, day_end = day_bounds(day, tz)
        events = self.query_window(subject, day_start, day_end)
        minutes: dict[ActivityLabel, float] = {}
        labeled: list[tuple[int, int]] = []
        for ev in events:
            s, e = max(ev.start, day_start), min(ev.end, day_end)
            minutes[ev.label] = minutes.get(ev.label, 0.0) + (e - s) / MS_PER_MIN
            if ev.label is not ActivityLabel.UNKNOWN:
                labeled.append((s, e))
        covered = _union_ms(labeled)
        return DailySummary(
            subject=subject,
            day=day,
            minutes={k: v for k, v in minutes.items() if k is not ActivityLabel.UNKNOWN},
            unknown_minutes=minutes.get(ActivityLabel.UNKNOWN, 0.0),
            coverage=covered / (day_end - day_start),
        )

    def snapshot(self) -> None:
        """Write the day -> byte-offset index next to each subject log."""
        if self.root is None:
            return
        for subject, offsets in self._day_offsets.items():
            path = self.root / f"{subject}.index.json"
            path.write_text(json.dumps(offsets, indent=1, sort_keys=True))


@dataclass
class DailySummary:
    subject: str
    day: date
    minutes: dict[ActivityLabel, float]
    unknown_minutes: float
    coverage: float

    def to_json(self) -> dict:
        return {
            "subject": self.subject,
            "day": self.day.isoformat(),
            "minutes": {k.value: v for k, v in self.minutes.items()},
            "unknown_minutes": self.unknown_minutes,
            "coverage": self.coverage,
        }


def _union_ms(intervals: list[tuple[int, int]]) -> float:
    if not intervals:
        return 0.0
    intervals = sorted(intervals)
    total = 0
    cur_s, cur_e = intervals[0]
    for s, e in intervals[1:]:
        if s > cur_e:
            total += cur_e - cur_s
            cur_s, cur_e = s, e
        else:
            cur_e = max(cur_e, e)
    return float(total + cur_e - cur_s)


@dataclass
class ChannelStats:
    mean: float
    std: float
    min: float
    max: float
    count: int


@dataclass
class AtomicInterval:
    start: int
    end: int
    granularity: int
    features: dict[str, ChannelStats]
    empty: bool

    def __post_init__(self):
        if self.granularity not in (1, 5):
            raise ValueError("granularity must be 1 or 5 minutes")
        if self.end - self.start != self.granularity * MS_PER_MIN:
            raise ValueError("interval length must equal the granularity")


def segment_atomic(frame: AlignedFrame, granularity_min: int) -> list[AtomicInterval]:
    """Tile the frame span with fixed-size intervals and summarize each channel.

    Masked samples do not contribute to the statistics; an interval with no
    present sample in any channel is flagged empty.
    """
    if granularity_min not in (1, 5):
        raise ValueError("granularity must be 1 or 5 minutes")
    times = frame.times
    if len(times) == 0:
        return []
    if np.any(np.diff(times) <= 0):
        raise UnsortedInput("frame timestamps must be strictly increasing")
    step = granularity_min * MS_PER_MIN
    t0 = int(times[0])
    n_iv = int((int(times[-1]) - t0) // step) + 1
    out: list[AtomicInterval] = []
    for i in range(n_iv):
        s, e = t0 + i * step, t0 + (i + 1) * step
        sel = (times >= s) & (times < e)
        features: dict[str, ChannelStats] = {}
        any_samples = False
        for name, vals in frame.channels.items():
            ok = sel & frame.present[name]
            count = int(np.count_nonzero(ok))
            if count:
                v = vals[ok]
                features[name] = ChannelStats(float(v.mean()), float(v.std()),
                                              float(v.min()), float(v.max()), count)
                any_samples = True
            else:
                features[name] = ChannelStats(float("nan"), float("nan"),
                                              float("nan"), float("nan"), 0)
        out.append(AtomicInterval(s, e, granularity_min, features, empty=not any_samples))
    return out
