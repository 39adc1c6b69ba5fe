"""Classify atomic intervals into daily activities and infer complex events.

Each contiguous run of intervals with a stable motion/location context gets a
set of attribute tags (motion class from accelerometer spread, duration
class, majority timeband, location class, heart-rate patterns, screen use).
Classification picks the most specific lattice concept whose intent the run's
attributes satisfy, restricts the candidate activities by where they can
plausibly happen, and breaks ties in the fixed activity-enumeration order.

Sequential rules then lift interval labels into complex events: sustained
movement at home right before eating there is food preparation, and a
stillness period with a postprandial heart-rate rise (or at a restaurant) is
eating even when the interval classifier missed it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..chronicle import (ACTIVITY_ORDER, ActivityLabel, AtomicInterval, Chronicle,
                         EventRecord, OverlapConflict)
from ..config import ActivityConfig
from ..ingest import GPS_CLASS_NAMES, SampleBatch
from ..personal import PersonalBaseline
from ..timeutil import MS_PER_MIN, timeband
from .fca import AttributeTag, ConceptLattice, CrossTable

_A = ActivityLabel

DEFAULT_ATTRIBUTES = [
    AttributeTag("still", "experiential"),
    AttributeTag("walking_motion", "experiential"),
    AttributeTag("running_motion", "experiential"),
    AttributeTag("screen_active", "experiential"),
    AttributeTag("short_duration", "temporal"),
    AttributeTag("medium_duration", "temporal"),
    AttributeTag("long_duration", "temporal"),
    AttributeTag("morning", "temporal"),
    AttributeTag("afternoon", "temporal"),
    AttributeTag("evening", "temporal"),
    AttributeTag("night", "temporal"),
    AttributeTag("home", "spatial"),
    AttributeTag("work", "spatial"),
    AttributeTag("restaurant", "spatial"),
    AttributeTag("outdoors", "spatial"),
    AttributeTag("commute_route", "spatial"),
    AttributeTag("hr_elevated", "physiological"),
    AttributeTag("hr_rise_post", "physiological"),
]

# characteristic signature per activity (minimal, not exhaustive); the lattice
# generalizes from these rows
_SIGNATURES: dict[ActivityLabel, set[str]] = {
    _A.STILL: {"still", "short_duration"},
    _A.WALKING: {"walking_motion", "outdoors"},
    _A.RUNNING: {"running_motion", "outdoors", "hr_elevated"},
    _A.CYCLING: {"running_motion", "commute_route"},
    _A.DRIVING: {"still", "commute_route"},
    _A.DIRECT_COMMUNICATION: {"still", "outdoors", "short_duration"},
    _A.REMOTE_COMMUNICATION: {"still", "screen_active", "short_duration"},
    _A.ON_THE_SMARTPHONE: {"still", "screen_active", "medium_duration"},
    _A.WORKING: {"still", "work", "long_duration"},
    _A.COMMUTING: {"walking_motion", "commute_route"},
    _A.EXERCISING: {"running_motion", "hr_elevated", "medium_duration"},
    _A.RELIGIOUS_EVENT: {"still", "outdoors", "long_duration", "morning"},
    _A.SHOPPING: {"walking_motion", "restaurant"},
    _A.EATING: {"still", "medium_duration", "hr_rise_post"},
    _A.USING_TOILET: {"walking_motion", "short_duration"},
    _A.HOME_EVENT: {"home"},
    _A.WATCHING_TV: {"still", "home", "evening", "long_duration"},
    _A.PREPARING_FOOD: {"walking_motion", "home"},
    _A.SOCIALIZING: {"still", "outdoors", "evening", "medium_duration"},
    _A.HOUSEWORK: {"walking_motion", "home", "long_duration"},
    _A.INTIMATE_RELATIONS: {"still", "home", "night", "short_duration", "hr_elevated"},
    _A.RELAXING: {"still", "home", "medium_duration"},
    _A.TAKING_A_BREAK: {"still", "work", "medium_duration"},
    _A.SLEEPING: {"still", "home", "night", "long_duration"},
}

#: where activities can plausibly happen; locations not listed are unconstrained
LOCATION_PERMITTED: dict[str, set[str]] = {
    "home": {l.value.lower() for l in (
        _A.EATING, _A.USING_TOILET, _A.HOUSEWORK, _A.PREPARING_FOOD, _A.WATCHING_TV,
        _A.SLEEPING, _A.RELAXING, _A.HOME_EVENT, _A.SOCIALIZING, _A.STILL,
        _A.ON_THE_SMARTPHONE, _A.REMOTE_COMMUNICATION, _A.DIRECT_COMMUNICATION,
        _A.INTIMATE_RELATIONS, _A.WALKING)},
    "work": {l.value.lower() for l in (
        _A.USING_TOILET, _A.WORKING, _A.TAKING_A_BREAK, _A.RELAXING, _A.STILL,
        _A.ON_THE_SMARTPHONE, _A.REMOTE_COMMUNICATION, _A.DIRECT_COMMUNICATION,
        _A.WALKING, _A.EATING)},
    # without a place fix only location-agnostic activities stay plausible
    "unknown": {l.value.lower() for l in (
        _A.STILL, _A.WALKING, _A.RUNNING, _A.CYCLING, _A.DRIVING,
        _A.ON_THE_SMARTPHONE, _A.REMOTE_COMMUNICATION)},
}


def default_cross_table() -> CrossTable:
    names = [a.name for a in DEFAULT_ATTRIBUTES]
    objects = [l.value for l in _SIGNATURES]
    relation = [[n in _SIGNATURES[l] for n in names] for l in _SIGNATURES]
    return CrossTable(objects, DEFAULT_ATTRIBUTES, relation)


def golden_subtable() -> CrossTable:
    """The three-activity demonstration table used as a golden test fixture."""
    attrs = [AttributeTag("Walking", "experiential"),
             AttributeTag("Medium time-duration", "temporal"),
             AttributeTag("Work", "spatial")]
    return CrossTable(
        ["Working", "Using Toilet", "Commuting"], attrs,
        [[False, True, True],   # Working: medium duration at work
         [True, False, True],   # Using Toilet: stop-and-go movement at work
         [True, True, False]])  # Commuting: medium-duration movement


class NoCandidates(LookupError):
    pass


@dataclass
class ClassifiedInterval:
    start: int
    end: int
    label: ActivityLabel
    confidence: float
    attributes: frozenset[str]
    ranked: list[tuple[str, float]]


def _enum_rank(name: str) -> int:
    try:
        return ACTIVITY_ORDER[ActivityLabel(_canonical(name))]
    except ValueError:
        return len(ACTIVITY_ORDER)


_CANONICAL = {l.value.lower(): l.value for l in ActivityLabel}


def _canonical(name: str) -> str:
    return _CANONICAL.get(name.lower(), name)


def classify_interval(attributes: frozenset[str] | set[str], lattice: ConceptLattice,
                      location: str | None = None,
                      band: str | None = None) -> list[tuple[str, float]]:
    """Rank candidate activities for one attribute set.

    Concepts whose intent the attributes satisfy are tried from most to least
    specific; the first one with a location-permitted candidate wins.  Empty
    attribute coverage or a fully filtered set yields [("Unknown", 0.0)].
    """
    attrs = frozenset(attributes)
    if band is not None:
        attrs = attrs | {band}
    matching = [c for c in lattice.concepts if c.intent and c.intent <= attrs]
    matching.sort(key=lambda c: (-len(c.intent), len(c.extent),
                                 sorted(_enum_rank(o) for o in c.extent)))
    allowed = LOCATION_PERMITTED.get(location) if location is not None else None
    for concept in matching:
        candidates = sorted(concept.extent, key=_enum_rank)
        if allowed is not None:
            candidates = [c for c in candidates if c.lower() in allowed]
        if candidates:
            confidence = len(concept.intent) / len(attrs) if attrs else 0.0
            return [(c, confidence) for c in candidates]
    return [("Unknown", 0.0)]


# ---------------------------------------------------------------------------
# attribute derivation for interval runs
# ---------------------------------------------------------------------------

def _motion_class(accel_std: float, cfg: ActivityConfig) -> str:
    if not np.isfinite(accel_std) or accel_std < cfg.still_max_g:
        return "still"
    if accel_std < cfg.walking_max_g:
        return "walking_motion"
    return "running_motion"


def _duration_class(minutes: float, cfg: ActivityConfig) -> str:
    if minutes < cfg.short_max_min:
        return "short_duration"
    if minutes < cfg.medium_max_min:
        return "medium_duration"
    return "long_duration"


def _interval_location(iv: AtomicInterval) -> str:
    st = iv.features.get("gps_class")
    if st is None or st.count == 0:
        return "unknown"
    return GPS_CLASS_NAMES.get(int(round(st.mean)), "unknown")


def _mean_hr(hr: SampleBatch | None, start: int, end: int) -> float:
    if hr is None or len(hr) == 0:
        return float("nan")
    sel = (hr.timestamps >= start) & (hr.timestamps < end)
    return float(hr.values[sel].mean()) if sel.any() else float("nan")


def hr_rise_after(hr: SampleBatch | None, at_ms: int,
                  cfg: ActivityConfig | None = None) -> bool:
    """Mean HR in the following window exceeds the preceding one by the
    configured postprandial rise."""
    cfg = cfg or ActivityConfig()
    w = int(cfg.postprandial_window_min * MS_PER_MIN)
    after = _mean_hr(hr, at_ms, at_ms + w)
    before = _mean_hr(hr, at_ms - w, at_ms)
    return (np.isfinite(after) and np.isfinite(before)
            and after - before >= cfg.postprandial_rise_bpm)


@dataclass
class IntervalRun:
    start: int
    end: int
    motion: str
    location: str
    attributes: frozenset[str]


def _interval_screen(iv: AtomicInterval) -> bool:
    st = iv.features.get("screen_on")
    return bool(st is not None and st.count and st.mean >= 0.5)


def derive_interval_attributes(intervals: list[AtomicInterval], tz: str = "UTC",
                               hr: SampleBatch | None = None,
                               baseline: PersonalBaseline | None = None,
                               cfg: ActivityConfig | None = None) -> list[IntervalRun]:
    """Group intervals into runs of constant (motion, location, screen)
    context and tag each run."""
    cfg = cfg or ActivityConfig()
    tagged = []
    for iv in intervals:
        if iv.empty:
            tagged.append((iv, None))
            continue
        accel = iv.features.get("accel_mag")
        motion = _motion_class(accel.std if accel and accel.count else float("nan"), cfg)
        tagged.append((iv, (motion, _interval_location(iv), _interval_screen(iv))))

    # minute-scale intervals: a lone motion flip between agreeing neighbours is
    # estimation noise, not a one-minute activity
    if intervals and intervals[0].granularity == 1:
        for k in range(1, len(tagged) - 1):
            prev, cur, nxt = tagged[k - 1][1], tagged[k][1], tagged[k + 1][1]
            if prev is None or cur is None or nxt is None:
                continue
            if prev[0] == nxt[0] != cur[0] and prev[1:] == cur[1:] == nxt[1:]:
                tagged[k] = (tagged[k][0], (prev[0], cur[1], cur[2]))

    runs: list[IntervalRun] = []
    i = 0
    while i < len(tagged):
        iv, ctx = tagged[i]
        j = i
        while j + 1 < len(tagged) and tagged[j + 1][1] == ctx:
            j += 1
        start, end = tagged[i][0].start, tagged[j][0].end
        if ctx is None:
            runs.append(IntervalRun(start, end, "unknown", "unknown", frozenset()))
            i = j + 1
            continue
        motion, loc, screen = ctx
        minutes = (end - start) / MS_PER_MIN
        # majority timeband over the run, by minutes
        band_minutes: dict[str, float] = {}
        for t in range(start, end, MS_PER_MIN):
            band_minutes[timeband(t, tz)] = band_minutes.get(timeband(t, tz), 0) + 1
        band = max(band_minutes, key=lambda b: (band_minutes[b], b))
        attrs = {motion, _duration_class(minutes, cfg), band}
        if loc != "unknown":
            attrs.add("commute_route" if loc == "commute" else loc)
        if screen:
            attrs.add("screen_active")
        if hr is not None and len(hr):
            run_hr = _mean_hr(hr, start, end)
            # exertion marker: only moving runs can be hr-elevated, otherwise a
            # chronically raised baseline would tag every stillness as exercise
            if motion != "still" and np.isfinite(run_hr) and baseline is not None:
                base = baseline.timeband_mean(band)
                if base is not None and baseline.count("hr") >= 3:
                    if run_hr >= base + cfg.hr_elevated_z * max(baseline.std("hr"), 1e-9):
                        attrs.add("hr_elevated")
            if motion == "still" and hr_rise_after(hr, start, cfg):
                attrs.add("hr_rise_post")
        runs.append(IntervalRun(start, end, motion, loc, frozenset(attrs)))
        i = j + 1
    return runs


def classify_runs(runs: list[IntervalRun], lattice: ConceptLattice,
                  subject: str) -> list[EventRecord]:
    """Turn classified runs into fca-sourced events, skipping unknown runs."""
    events = []
    for run in runs:
        ranked = classify_interval(run.attributes, lattice, location=run.location)
        name, conf = ranked[0]
        label = ActivityLabel(_canonical(name)) if _canonical(name) in _CANONICAL.values() \
            else ActivityLabel.UNKNOWN
        events.append(EventRecord(
            subject=subject, label=label, start=run.start, end=run.end,
            attributes=run.attributes, source="fca", confidence=conf))
    return events


# ---------------------------------------------------------------------------
# complex-event rules
# ---------------------------------------------------------------------------

MOVEMENT_LABELS = {_A.WALKING, _A.RUNNING, _A.EXERCISING, _A.HOUSEWORK,
                   _A.PREPARING_FOOD, _A.HOME_EVENT}


def _at_home(ev: EventRecord) -> bool:
    return "home" in ev.attributes


def recognize_complex(chron: Chronicle, subject: str, day_start: int, day_end: int,
                      hr: SampleBatch | None = None,
                      cfg: ActivityConfig | None = None,
                      append: bool = True) -> list[EventRecord]:
    """Apply the sequential rules over one day of classified events.

    Rule 1: at least prep_min_movement_min contiguous minutes of movement at
    home immediately before eating at home implies food preparation over the
    movement span.  Rule 2: a stillness period at a restaurant, or at home
    with a postprandial heart-rate rise, implies eating.
    """
    cfg = cfg or ActivityConfig()
    events = chron.query_window(subject, day_start, day_end)
    inferred: list[EventRecord] = []

    def emit(label: ActivityLabel, start: int, end: int, attrs: set[str]) -> None:
        inferred.append(EventRecord(subject=subject, label=label, start=start, end=end,
                                    attributes=frozenset(attrs), source="rule",
                                    confidence=0.8))

    # R1: movement at home immediately preceding eating at home
    for ev in events:
        if ev.label is not _A.EATING or not _at_home(ev):
            continue
        window: list[EventRecord] = []
        for prior in reversed([e for e in events if e.end <= ev.start]):
            if prior.label in MOVEMENT_LABELS and _at_home(prior):
                gap_to_next = (window[0].start if window else ev.start) - prior.end
                if gap_to_next <= cfg.prep_max_gap_min * MS_PER_MIN:
                    window.insert(0, prior)
                    continue
            break
        if not window:
            continue
        if ev.start - window[-1].end > cfg.prep_max_gap_min * MS_PER_MIN:
            continue
        span_min = sum(e.end - e.start for e in window) / MS_PER_MIN
        if span_min >= cfg.prep_min_movement_min:
            emit(_A.PREPARING_FOOD, window[0].start, window[-1].end,
                 {"home", "prep_before_meal"})

    # R2: eating refinement from stillness context
    for ev in events:
        if ev.label is not _A.STILL:
            continue
        if "restaurant" in ev.attributes:
            emit(_A.EATING, ev.start, ev.end, {"restaurant", "still_at_restaurant"})
        elif _at_home(ev) and hr_rise_after(hr, ev.start, cfg):
            emit(_A.EATING, ev.start, ev.end, {"home", "postprandial_hr_rise"})

    kept = []
    for ev in inferred:
        if append:
            try:
                chron.append_event(ev)
            except OverlapConflict:
                continue
        kept.append(ev)
    return kept
