"""Replay a generated data directory as an ordered stream of sample batches.

Batches (one per subject, day and channel file) are delivered in global
timestamp order.  A speed multiplier of 0 replays as fast as possible; any
positive value scales recorded time.  The sink is a callable, a target
directory (files are re-emitted into the same layout) or an HTTP ingest
endpoint.
"""

from __future__ import annotations

import json
import re
import time
from pathlib import Path
from typing import Callable

from ..ingest import CHANNEL_DESCRIPTORS, Channel, SampleBatch, parse_stream, write_stream

_DATE_RE = re.compile(r"^\d{4}-\d{2}-\d{2}$")


class LayoutError(ValueError):
    pass


def _iter_files(data_dir: Path):
    for subject_dir in sorted(p for p in data_dir.iterdir() if p.is_dir()):
        for day_dir in sorted(p for p in subject_dir.iterdir() if p.is_dir()):
            if not _DATE_RE.match(day_dir.name):
                raise LayoutError(f"{day_dir} is not a date directory")
            for csv in sorted(day_dir.glob("*.csv")):
                yield subject_dir.name, day_dir.name, csv


def directory_sink(target: str | Path) -> Callable[[SampleBatch], None]:
    target = Path(target)

    def sink(batch: SampleBatch) -> None:
        from datetime import datetime, timezone
        day = datetime.fromtimestamp(batch.timestamps[0] / 1000.0,
                                     tz=timezone.utc).date().isoformat()
        path = target / batch.subject / day / f"{batch.descriptor.channel.value}.csv"
        write_stream(path, batch, "%.6f")
    return sink


def http_sink(base_url: str, token: str = "provider-token") -> Callable[[SampleBatch], None]:
    import httpx

    def sink(batch: SampleBatch) -> None:
        body = {"subject": batch.subject,
                "channel": batch.descriptor.channel.value,
                "timestamps": batch.timestamps.tolist(),
                "values": batch.values.tolist()}
        r = httpx.post(f"{base_url.rstrip('/')}/ingest", json=body,
                       headers={"Authorization": f"Bearer {token}"}, timeout=60.0)
        r.raise_for_status()
    return sink


def replay(data_dir: str | Path, speed: float, sink: Callable[[SampleBatch], None],
           channels: set[str] | None = None) -> int:
    """Deliver every batch in nondecreasing start-timestamp order; returns the
    number of batches delivered."""
    data_dir = Path(data_dir)
    if not data_dir.is_dir():
        raise LayoutError(f"{data_dir} is not a directory")
    batches = []
    for subject, day, csv in _iter_files(data_dir):
        name = csv.stem
        if name == "ema":
            continue  # the subjective stream is consumed from the raw layout
        if channels is not None and name not in channels:
            continue
        try:
            channel = Channel(name)
        except ValueError:
            raise LayoutError(f"unknown channel file {csv}") from None
        batch = parse_stream(csv, CHANNEL_DESCRIPTORS[channel])
        if len(batch) == 0:
            continue
        batch.subject = subject
        batches.append(batch)
    batches.sort(key=lambda b: (int(b.timestamps[0]), b.subject,
                                b.descriptor.channel.value))
    prev_ts = None
    for batch in batches:
        if speed > 0 and prev_ts is not None:
            dt = (int(batch.timestamps[0]) - prev_ts) / 1000.0 / speed
            if dt > 0:
                time.sleep(min(dt, 60.0))
        prev_ts = int(batch.timestamps[0])
        sink(batch)
    return len(batches)
