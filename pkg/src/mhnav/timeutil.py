"""Epoch-millisecond helpers. All storage is UTC; timebands and day bounds
are local phenomena derived through a per-subject IANA timezone."""

from __future__ import annotations

from datetime import date, datetime, time, timedelta, timezone
from zoneinfo import ZoneInfo

MS_PER_MIN = 60_000
MS_PER_HOUR = 3_600_000
MS_PER_DAY = 86_400_000

TIMEBANDS = ("night", "morning", "afternoon", "evening")


def to_dt(ms: int, tz: str = "UTC") -> datetime:
    return datetime.fromtimestamp(ms / 1000.0, tz=ZoneInfo(tz))


def to_ms(dt: datetime) -> int:
    return int(dt.timestamp() * 1000)


def local_hour(ms: int, tz: str = "UTC") -> int:
    return to_dt(ms, tz).hour


def timeband(ms: int, tz: str = "UTC") -> str:
    """night 00-06, morning 06-12, afternoon 12-18, evening 18-24, local time."""
    return TIMEBANDS[local_hour(ms, tz) // 6]


def day_bounds(day: date, tz: str = "UTC") -> tuple[int, int]:
    """[start, end) epoch-ms of the local calendar day."""
    z = ZoneInfo(tz)
    start = datetime.combine(day, time.min, tzinfo=z)
    end = datetime.combine(day + timedelta(days=1), time.min, tzinfo=z)
    return to_ms(start), to_ms(end)


def day_of(ms: int, tz: str = "UTC") -> date:
    return to_dt(ms, tz).date()


def utc_day_start(ms: int) -> int:
    return (ms // MS_PER_DAY) * MS_PER_DAY


def iso_day(ms: int) -> str:
    return datetime.fromtimestamp(ms / 1000.0, tz=timezone.utc).date().isoformat()
