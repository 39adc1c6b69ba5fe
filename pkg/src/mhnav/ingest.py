"""Gateway layer: parse raw per-channel CSV streams and align them onto a
common timeline.

Wire format is one CSV per subject, day and channel, laid out as
``data/{subject}/{date}/{channel}.csv`` with header ``ts_ms,value``.  The
header may carry a unit annotation (``ts_ms,value:bpm``) which is checked
against the expected descriptor.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from .config import IngestConfig


class Channel(str, Enum):
    PPG = "ppg"
    GSR = "gsr"
    ACCEL_MAG = "accel_mag"
    HR = "hr"
    STEPS = "steps"
    GPS_CLASS = "gps_class"
    SCREEN_ON = "screen_on"
    EMA = "ema"


#: channels whose values are states or counts, never linearly interpolated
STEP_CHANNELS = frozenset({Channel.GPS_CLASS, Channel.SCREEN_ON, Channel.STEPS, Channel.EMA})

#: gps_class categorical codes
GPS_UNKNOWN, GPS_HOME, GPS_WORK, GPS_RESTAURANT, GPS_OUTDOORS, GPS_COMMUTE = range(6)
GPS_CLASS_NAMES = {
    GPS_UNKNOWN: "unknown",
    GPS_HOME: "home",
    GPS_WORK: "work",
    GPS_RESTAURANT: "restaurant",
    GPS_OUTDOORS: "outdoors",
    GPS_COMMUTE: "commute",
}
GPS_CLASS_CODES = {v: k for k, v in GPS_CLASS_NAMES.items()}


class FormatError(ValueError):
    def __init__(self, message, line=None):
        super().__init__(f"line {line}: {message}" if line is not None else message)
        self.line = line


class NonMonotonicTime(FormatError):
    pass


class UnitMismatch(ValueError):
    pass


class EmptyInput(ValueError):
    pass


@dataclass(frozen=True)
class StreamDescriptor:
    channel: Channel
    nominal_rate_hz: float
    units: str = ""

    def __post_init__(self):
        if self.nominal_rate_hz < 0:
            raise ValueError("nominal_rate_hz must be >= 0")


#: canonical per-channel descriptors shared by the simulator and the engine
CHANNEL_DESCRIPTORS: dict[Channel, StreamDescriptor] = {
    Channel.PPG: StreamDescriptor(Channel.PPG, 25.0, "au"),
    Channel.GSR: StreamDescriptor(Channel.GSR, 4.0, "microsiemens"),
    Channel.ACCEL_MAG: StreamDescriptor(Channel.ACCEL_MAG, 0.25, "g"),
    Channel.HR: StreamDescriptor(Channel.HR, 1.0 / 60.0, "bpm"),
    Channel.STEPS: StreamDescriptor(Channel.STEPS, 0.0, "count"),
    Channel.GPS_CLASS: StreamDescriptor(Channel.GPS_CLASS, 1.0 / 60.0, "class"),
    Channel.SCREEN_ON: StreamDescriptor(Channel.SCREEN_ON, 1.0 / 60.0, "bool"),
    Channel.EMA: StreamDescriptor(Channel.EMA, 0.0, "affect"),
}


@dataclass
class SampleBatch:
    subject: str
    descriptor: StreamDescriptor
    timestamps: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.timestamps = np.asarray(self.timestamps, dtype=np.int64)
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.timestamps.shape != self.values.shape:
            raise ValueError("timestamps and values must have the same length")
        if len(self.timestamps) > 1 and not np.all(np.diff(self.timestamps) > 0):
            raise NonMonotonicTime("timestamps must be strictly increasing")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("values must be finite")

    def __len__(self):
        return len(self.timestamps)


@dataclass
class AlignedFrame:
    start: int
    period_ms: int
    channels: dict[str, np.ndarray] = field(default_factory=dict)
    present: dict[str, np.ndarray] = field(default_factory=dict)

    @property
    def n(self) -> int:
        return 0 if not self.channels else len(next(iter(self.channels.values())))

    @property
    def times(self) -> np.ndarray:
        return self.start + np.arange(self.n, dtype=np.int64) * self.period_ms

    @property
    def end(self) -> int:
        return int(self.start + self.n * self.period_ms)


def parse_stream(path: str | Path, expected: StreamDescriptor) -> SampleBatch:
    """Parse one channel CSV into a validated batch.

    Raises FormatError (with line number), NonMonotonicTime or UnitMismatch;
    never returns partially parsed data.  Clean files take a vectorized fast
    path; anything malformed falls back to a line scan that locates the fault.
    """
    path = Path(path)
    subject = path.parent.parent.name if len(path.parts) >= 3 else ""
    with path.open() as fh:
        header = fh.readline().strip()
        if not header:
            return SampleBatch(subject, expected, np.empty(0, np.int64), np.empty(0))
        cols = header.split(",")
        if len(cols) != 2 or cols[0] != "ts_ms" or not cols[1].startswith("value"):
            raise FormatError(f"bad header {header!r}", line=1)
        if ":" in cols[1]:
            units = cols[1].split(":", 1)[1]
            if expected.units and units != expected.units:
                raise UnitMismatch(f"file units {units!r} != expected {expected.units!r}")
        body = fh.read()
    try:
        ts, vals = _parse_body_fast(body)
    except ValueError:
        ts, vals = _parse_body_slow(body)
    if len(ts) > 1:
        drops = np.diff(ts) <= 0
        if drops.any():
            at = int(np.argmax(drops)) + 1
            raise NonMonotonicTime(f"timestamp {ts[at]} not after {ts[at - 1]}",
                                   line=at + 2)
    bad = ~np.isfinite(vals)
    if bad.any():
        raise FormatError("non-finite value", line=int(np.argmax(bad)) + 2)
    return SampleBatch(subject, expected, ts, vals)


def _parse_body_fast(body: str) -> tuple[np.ndarray, np.ndarray]:
    if not body.strip():
        return np.empty(0, np.int64), np.empty(0)
    arr = np.loadtxt(body.splitlines(), delimiter=",", dtype=np.float64, ndmin=2)
    if arr.shape[1] != 2 or np.isnan(arr[:, 0]).any():
        raise ValueError("malformed rows")
    return arr[:, 0].astype(np.int64), arr[:, 1]


def _parse_body_slow(body: str) -> tuple[np.ndarray, np.ndarray]:
    ts, vals = [], []
    for lineno, line in enumerate(body.splitlines(), start=2):
        line = line.strip()
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise FormatError(f"expected 2 fields, got {len(parts)}", line=lineno)
        try:
            ts.append(int(parts[0]))
            vals.append(float(parts[1]))
        except ValueError:
            raise FormatError(f"bad number in {line!r}", line=lineno) from None
    return np.array(ts, dtype=np.int64), np.array(vals, dtype=np.float64)


def write_stream(path: str | Path, batch: SampleBatch, float_fmt: str = "%.6f") -> None:
    """Inverse of parse_stream; used by the simulator and round-trip tests."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    units = batch.descriptor.units
    header = f"ts_ms,value:{units}" if units else "ts_ms,value"
    with path.open("w") as fh:
        fh.write(header + "\n")
        for t, v in zip(batch.timestamps, batch.values):
            fh.write(f"{t},{float_fmt % v}\n")


def _nearest_distance(grid: np.ndarray, samples: np.ndarray) -> np.ndarray:
    """Distance from each grid point to its nearest sample timestamp."""
    idx = np.searchsorted(samples, grid)
    left = np.where(idx > 0, grid - samples[np.maximum(idx - 1, 0)], np.iinfo(np.int64).max)
    right = np.where(idx < len(samples), samples[np.minimum(idx, len(samples) - 1)] - grid,
                     np.iinfo(np.int64).max)
    return np.minimum(left, right)


def align_resample(batches: list[SampleBatch], period_ms: int,
                   cfg: IngestConfig | None = None) -> AlignedFrame:
    """Resample all batches of one subject onto a common grid.

    Continuous channels are linearly interpolated; state/count channels are
    carried forward.  Grid points too far from any real sample are masked
    absent: farther than ``gap_factor`` nominal periods for rated channels,
    or beyond the carry-forward window for event-based ones.
    """
    cfg = cfg or IngestConfig()
    if period_ms < 10:
        raise ValueError("period_ms must be >= 10")
    batches = [b for b in batches if len(b)]
    if not batches:
        raise EmptyInput("no samples to align")
    subjects = {b.subject for b in batches}
    if len(subjects) > 1:
        raise ValueError(f"batches span multiple subjects: {sorted(subjects)}")

    start = min(int(b.timestamps[0]) for b in batches)
    end = max(int(b.timestamps[-1]) for b in batches)
    n = (end - start) // period_ms + 1
    grid = start + np.arange(n, dtype=np.int64) * period_ms

    frame = AlignedFrame(start=start, period_ms=period_ms)
    for b in batches:
        name = b.descriptor.channel.value
        dist = _nearest_distance(grid, b.timestamps)
        if b.descriptor.nominal_rate_hz > 0:
            max_gap = cfg.gap_factor * 1000.0 / b.descriptor.nominal_rate_hz
        else:
            max_gap = cfg.ema_carry_forward_min * 60_000.0

        if b.descriptor.channel in STEP_CHANNELS or b.descriptor.nominal_rate_hz == 0:
            idx = np.searchsorted(b.timestamps, grid, side="right") - 1
            vals = np.where(idx >= 0, b.values[np.maximum(idx, 0)], np.nan)
            behind = np.where(idx >= 0, grid - b.timestamps[np.maximum(idx, 0)],
                              np.iinfo(np.int64).max)
            present = behind <= max_gap
        else:
            vals = np.interp(grid, b.timestamps, b.values)
            present = dist <= max_gap
        vals = np.where(present, vals, np.nan)
        frame.channels[name] = vals
        frame.present[name] = present
    return frame
