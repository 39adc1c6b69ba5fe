"""Processing engine and persistent store.

Owns everything under the data directory:

    raw/        incoming channel CSVs (the gateway hand-off, layout
                {subject}/{date}/{channel}.csv)
    chronicle/  append-only event logs
    features/   per-window physiology and fused per-day features
    states/     estimated state vectors
    records/    profiles, baselines, goals, plans, alerts
    journal.jsonl   every mutating command; replaying it onto the same raw/
                reconstructs identical derived state

Processing one subject-day: parse channels, run the pulse/conductance
pipeline over each physiology window, classify atomic-interval runs into
events, apply the complex-event rules, fold the subjective stream in, fuse a
daily feature row, estimate the state, then update the personal baselines
(always with yesterday's baseline serving today's estimates).
"""

from __future__ import annotations

import hashlib
import json
import math
import os
from datetime import date
from pathlib import Path

import numpy as np

from ..activity import (build_lattice, classify_runs, default_cross_table,
                        derive_interval_attributes, enumerate_concepts,
                        recognize_complex)
from ..chronicle import ActivityLabel, Chronicle, EventRecord, OverlapConflict, segment_atomic
from ..config import EngineConfig, load_config
from ..ema import parse_ema_csv
from ..estimator import (DailyFeatures, DepressionScreen, InsufficientData,
                         StateInputs, StateSpace, StateVector, classify_regions,
                         default_state_space, detect_regime, estimate_state,
                         screen_depression)
from ..ingest import (CHANNEL_DESCRIPTORS, GPS_HOME, GPS_UNKNOWN, Channel,
                      SampleBatch, align_resample, parse_stream, write_stream)
from ..navigator import (Goal, GuidancePlan, PlanConstraints,
                         RecommendationProfile, apply_feedback, default_catalog,
                         load_catalog, plan_route, recommend, save_catalog,
                         update_goal)
from ..personal import (PersonalBaseline, ProfileContext, personalize_thresholds)
from ..physio import (InsufficientBaseline, TooFewBeats, WindowTooShort, detect_beats,
                      eda_segment, hrv_frequency_domain, hrv_time_domain,
                      respiration_rate, stress_score)
from ..physio.beats import RateTooLow, TooShort
from ..physio.respiration import NoDominantFrequency
from ..timeutil import MS_PER_MIN, day_bounds
from .alerts import Alert, plan_drift_alert, screen_crossing_alerts, sustained_stress_alerts

COMM_LABELS = (ActivityLabel.DIRECT_COMMUNICATION, ActivityLabel.REMOTE_COMMUNICATION)


class Engine:
    def __init__(self, data_dir: str | Path, config: EngineConfig | None = None,
                 replaying: bool = False):
        self.data_dir = Path(data_dir)
        self.cfg = config or load_config(os.environ.get("MHN_CONFIG") or None)
        self.replaying = replaying
        for sub in ("raw", "chronicle", "features", "states", "records"):
            (self.data_dir / sub).mkdir(parents=True, exist_ok=True)
        self.chronicle = Chronicle(self.data_dir / "chronicle")
        self.table = default_cross_table()
        self.lattice = build_lattice(enumerate_concepts(self.table))
        space_path = self.data_dir / "state_space.json"
        if not space_path.exists():
            default_state_space().save(space_path)
        demo_path = self.data_dir / "state_space_demo_2d.json"
        if not demo_path.exists():
            from ..estimator import demo_state_space_2d
            demo_state_space_2d().save(demo_path)
        self.space = StateSpace.load(space_path)
        catalog_path = self.data_dir / "catalog.json"
        if not catalog_path.exists():
            save_catalog(default_catalog(), catalog_path)
        self.catalog = load_catalog(catalog_path)

        self.baselines: dict[str, PersonalBaseline] = {}
        self.profiles: dict[str, ProfileContext] = {}
        self.daily: dict[str, dict[str, dict]] = {}      # subject -> day -> row
        self.windows: dict[str, list[dict]] = {}         # subject -> window rows
        self.states: dict[str, list[dict]] = {}          # subject -> state rows
        self.goals: dict[str, Goal] = {}
        self.plans: dict[str, GuidancePlan] = {}
        self.alerts: dict[str, Alert] = {}
        self._load_records()

    # ------------------------------------------------------------------ io

    def _records_path(self, name: str) -> Path:
        return self.data_dir / "records" / f"{name}.json"

    def _load_records(self) -> None:
        rp = self._records_path
        if rp("baselines").exists():
            raw = json.loads(rp("baselines").read_text())
            self.baselines = {s: PersonalBaseline.from_json(o) for s, o in raw.items()}
        if rp("profiles").exists():
            raw = json.loads(rp("profiles").read_text())
            self.profiles = {s: ProfileContext.from_json(o) for s, o in raw.items()}
        if rp("goals").exists():
            raw = json.loads(rp("goals").read_text())
            self.goals = {s: Goal.from_json(o) for s, o in raw.items()}
        if rp("plans").exists():
            raw = json.loads(rp("plans").read_text())
            self.plans = {s: GuidancePlan.from_json(o) for s, o in raw.items()}
        if rp("alerts").exists():
            raw = json.loads(rp("alerts").read_text())
            self.alerts = {k: Alert.from_json(o) for k, o in raw.items()}
        for path in sorted((self.data_dir / "features").glob("*.daily.json")):
            self.daily[path.name.split(".")[0]] = json.loads(path.read_text())
        for path in sorted((self.data_dir / "features").glob("*.windows.jsonl")):
            self.windows[path.name.split(".")[0]] = _read_jsonl(path)
        for path in sorted((self.data_dir / "states").glob("*.jsonl")):
            self.states[path.name.split(".")[0]] = _read_jsonl(path)

    def flush(self) -> None:
        def dump(path: Path, obj) -> None:
            path.write_text(json.dumps(obj, sort_keys=True))
        dump(self._records_path("baselines"),
             {s: b.to_json() for s, b in sorted(self.baselines.items())})
        dump(self._records_path("profiles"),
             {s: p.to_json() for s, p in sorted(self.profiles.items())})
        dump(self._records_path("goals"),
             {s: g.to_json() for s, g in sorted(self.goals.items())})
        dump(self._records_path("plans"),
             {s: p.to_json() for s, p in sorted(self.plans.items())})
        dump(self._records_path("alerts"),
             {k: a.to_json() for k, a in sorted(self.alerts.items())})
        for subject, rows in sorted(self.daily.items()):
            dump(self.data_dir / "features" / f"{subject}.daily.json", rows)
        for subject, rows in sorted(self.windows.items()):
            _write_jsonl(self.data_dir / "features" / f"{subject}.windows.jsonl", rows)
        for subject, rows in sorted(self.states.items()):
            _write_jsonl(self.data_dir / "states" / f"{subject}.jsonl", rows)
        self.chronicle.snapshot()

    def journal(self, entry: dict) -> None:
        if self.replaying:
            return
        with (self.data_dir / "journal.jsonl").open("a") as fh:
            fh.write(json.dumps(entry, sort_keys=True) + "\n")

    def state_hash(self) -> str:
        """Content hash over all derived state (journal and raw excluded)."""
        self.flush()
        h = hashlib.sha256()
        for sub in ("chronicle", "features", "states", "records"):
            base = self.data_dir / sub
            for path in sorted(base.rglob("*")):
                if path.is_file() and not path.name.endswith(".index.json"):
                    h.update(str(path.relative_to(self.data_dir)).encode())
                    h.update(path.read_bytes())
        return h.hexdigest()

    # ------------------------------------------------------------- ingest

    def tz(self, subject: str) -> str:
        prof = self.profiles.get(subject)
        return prof.timezone if prof else "UTC"

    def baseline(self, subject: str) -> PersonalBaseline:
        if subject not in self.baselines:
            self.baselines[subject] = PersonalBaseline(subject)
        return self.baselines[subject]

    def upload_batch(self, subject: str, channel: str, timestamps: list[int],
                     values: list[float]) -> Path:
        """Replay/ingest target: lands one batch in the raw layout."""
        batch = SampleBatch(subject, CHANNEL_DESCRIPTORS[Channel(channel)],
                            np.asarray(timestamps, dtype=np.int64),
                            np.asarray(values, dtype=np.float64))
        day = date.fromtimestamp(batch.timestamps[0] / 1000.0).isoformat()
        path = self.data_dir / "raw" / subject / day / f"{channel}.csv"
        write_stream(path, batch, "%.6f")
        self.journal({"op": "upload", "subject": subject, "day": day,
                      "channel": channel})
        return path

    def ingest_dir(self, raw_dir: str | Path | None = None,
                   subjects: list[str] | None = None) -> int:
        """Process every subject-day under the raw layout; returns day count."""
        raw_dir = Path(raw_dir) if raw_dir is not None else self.data_dir / "raw"
        count = 0
        for subject_dir in sorted(p for p in raw_dir.iterdir() if p.is_dir()):
            subject = subject_dir.name
            if subjects and subject not in subjects:
                continue
            for day_dir in sorted(p for p in subject_dir.iterdir() if p.is_dir()):
                self.process_day(subject, day_dir.name, raw_dir)
                count += 1
        self.journal({"op": "ingest_dir", "raw_dir": str(Path(raw_dir).resolve()),
                      "subjects": subjects})
        self.refresh_alerts()
        self.flush()
        return count

    def _parse_day(self, raw_dir: Path, subject: str, day: str) -> dict[str, SampleBatch]:
        day_dir = raw_dir / subject / day
        out = {}
        for channel in Channel:
            path = day_dir / f"{channel.value}.csv"
            if channel is Channel.EMA or not path.exists():
                continue
            batch = parse_stream(path, CHANNEL_DESCRIPTORS[channel])
            batch.subject = subject
            if len(batch):
                out[channel.value] = batch
        return out

    def process_day(self, subject: str, day_iso: str, raw_dir: Path) -> DailyFeatures:
        day = date.fromisoformat(day_iso)
        tz = self.tz(subject)
        day_start, day_end = day_bounds(day, tz)
        batches = self._parse_day(Path(raw_dir), subject, day_iso)
        baseline = self.baseline(subject)

        events = self._classify_day(subject, batches, baseline)
        hr = batches.get("hr")
        recognize_complex(self.chronicle, subject, day_start, day_end, hr=hr,
                          cfg=self.cfg.activity)

        window_rows = self._physio_windows(subject, batches, day_start, day_end)
        self.windows.setdefault(subject, [])
        known = {w["start_ms"] for w in self.windows[subject]}
        self.windows[subject] += [w for w in window_rows if w["start_ms"] not in known]
        self.windows[subject].sort(key=lambda w: w["start_ms"])

        row = self._daily_row(subject, day, batches, window_rows, Path(raw_dir))
        self.daily.setdefault(subject, {})[day_iso] = row

        self._estimate_day(subject, day, row)
        self._update_baselines(subject, row, window_rows, day_start, tz)
        return DailyFeatures.from_json(row)

    # ---------------------------------------------------- activity events

    def _classify_day(self, subject: str, batches: dict,
                      baseline: PersonalBaseline) -> list[EventRecord]:
        context = [batches[c] for c in ("accel_mag", "gps_class", "screen_on")
                   if c in batches]
        if not context:
            return []
        # the grid matches the accelerometer cadence so spread statistics are
        # computed on real samples; one-minute intervals catch short activities
        frame = align_resample(context, period_ms=4_000, cfg=self.cfg.ingest)
        intervals = segment_atomic(frame, 1)
        runs = derive_interval_attributes(intervals, self.tz(subject),
                                          hr=batches.get("hr"), baseline=baseline,
                                          cfg=self.cfg.activity)
        events = classify_runs(runs, self.lattice, subject)
        kept = []
        for ev in events:
            if ev.label is ActivityLabel.UNKNOWN and ev.confidence == 0 \
                    and ev.end - ev.start < 5 * MS_PER_MIN:
                continue
            try:
                self.chronicle.append_event(ev)
                kept.append(ev)
            except OverlapConflict:
                pass
        return kept

    # ---------------------------------------------------- physio pipeline

    def _ppg_windows(self, ppg: SampleBatch) -> list[tuple[int, int]]:
        """Contiguous bursts split at gaps beyond 2 s."""
        ts = ppg.timestamps
        gaps = np.where(np.diff(ts) > 2000)[0]
        bounds = [0] + (gaps + 1).tolist() + [len(ts)]
        return [(int(ts[a]), int(ts[b - 1]) + 1, a, b)
                for a, b in zip(bounds[:-1], bounds[1:]) if b - a > 1]

    def _physio_windows(self, subject: str, batches: dict, day_start: int,
                        day_end: int) -> list[dict]:
        ppg = batches.get("ppg")
        if ppg is None:
            return []
        gsr = batches.get("gsr")
        sleeping = self.chronicle.query_window(subject, day_start, day_end,
                                               ActivityLabel.SLEEPING) \
            if subject in self.chronicle._logs else []
        rows = []
        for w0, w1, a, b in self._ppg_windows(ppg):
            sub = SampleBatch(subject, ppg.descriptor, ppg.timestamps[a:b],
                              ppg.values[a:b])
            row = {"start_ms": w0, "end_ms": w1, "subject": subject}
            mid = (w0 + w1) // 2
            row["resting"] = any(ev.start <= mid < ev.end for ev in sleeping) or \
                (mid - day_start) < 6 * 3_600_000 and not sleeping
            try:
                ibi = detect_beats(sub, self.cfg.physio)
            except (TooShort, RateTooLow):
                continue
            row["n_beats"] = int(len(ibi.beat_times))
            row["ibi_dropped"] = ibi.dropped
            window = (float(w0), float(w1))
            try:
                td = hrv_time_domain(ibi, window, self.cfg.physio)
                row.update(mean_hr=td.mean_hr, sdnn=td.sdnn, rmssd=td.rmssd)
            except TooFewBeats:
                continue
            try:
                fd = hrv_frequency_domain(ibi, window, self.cfg.physio)
                row.update(lf_power=fd.lf_power, hf_power=fd.hf_power,
                           lf_hf=fd.lf_hf_ratio if math.isfinite(fd.lf_hf_ratio)
                           else None)
            except (TooFewBeats, WindowTooShort):
                pass
            try:
                resp = respiration_rate(sub, ibi, self.cfg.physio)
                row["respiration"] = resp.breaths_per_min
                row["respiration_cross_check"] = resp.cross_check_bpm \
                    if math.isfinite(resp.cross_check_bpm) else None
            except (NoDominantFrequency, TooShort):
                pass
            if gsr is not None:
                sel = (gsr.timestamps >= w0) & (gsr.timestamps < w1)
                if sel.sum() > 8:
                    gsr_sub = SampleBatch(subject, gsr.descriptor,
                                          gsr.timestamps[sel], gsr.values[sel])
                    base = float(np.percentile(gsr_sub.values, 5))
                    try:
                        seg = eda_segment(gsr_sub, max(base, 1e-3), self.cfg.physio)
                        row["eda_cycles"] = seg.cycle_count
                        row["arousal_frac"] = seg.arousal_fraction
                    except (RateTooLow, ValueError):
                        pass
            baseline = self.baseline(subject)
            markers = {k: row.get(k) for k in ("rmssd", "lf_hf", "arousal_frac",
                                               "respiration")}
            markers = {k: v for k, v in markers.items() if v is not None}
            try:
                sa = stress_score(markers, baseline, self.cfg.physio)
                row["stress"] = sa.score
                row["stress_level"] = sa.level
            except (InsufficientBaseline, KeyError):
                pass
            rows.append(row)
        return rows

    # ----------------------------------------------------- daily features

    def _daily_row(self, subject: str, day: date, batches: dict,
                   window_rows: list[dict], raw_dir: Path | None = None) -> dict:
        tz = self.tz(subject)
        row: dict = {"day": day.isoformat()}
        try:
            summary = self.chronicle.daily_summary(subject, day, tz)
            minutes = {k.value: v for k, v in summary.minutes.items()}
            row["coverage"] = summary.coverage
        except KeyError:
            minutes, row["coverage"] = {}, 0.0
        sleep_min = minutes.get(ActivityLabel.SLEEPING.value, 0.0)
        row["sleep_score"] = 100.0 * min(1.0, sleep_min /
                                         self.cfg.estimator.sleep_full_score_min)
        row["comm_minutes"] = sum(minutes.get(l.value, 0.0) for l in COMM_LABELS)

        steps = batches.get("steps")
        row["steps"] = float(steps.values.sum()) if steps is not None else None
        gps = batches.get("gps_class")
        if gps is not None:
            row["home_minutes"] = float((gps.values == GPS_HOME).sum())
            row["unknown_minutes"] = float((gps.values == GPS_UNKNOWN).sum())
        else:
            row["home_minutes"] = row["unknown_minutes"] = None

        ema_path = None
        for root in (raw_dir, self.data_dir / "raw"):
            if root is not None:
                cand = Path(root) / subject / day.isoformat() / "ema.csv"
                if cand.exists():
                    ema_path = cand
                    break
        if ema_path:
            log = parse_ema_csv(ema_path, subject)
            try:
                mood = log.daily_mood(subject, day, tz)
                row.update(mean_positive=mood.mean_positive,
                           mean_negative=mood.mean_negative,
                           response_rate=mood.response_rate)
            except LookupError:
                row.update(mean_positive=None, mean_negative=None, response_rate=0.0)
        else:
            row.update(mean_positive=None, mean_negative=None, response_rate=0.0)

        def agg(key, resting):
            vals = [w[key] for w in window_rows
                    if w.get(key) is not None and w.get("resting") == resting]
            return float(np.mean(vals)) if vals else None

        def first(*vals):
            return next((v for v in vals if v is not None), None)

        row["rmssd"] = first(agg("rmssd", False), agg("rmssd", True))
        row["rmssd_rest"] = agg("rmssd", True)
        row["hr"] = first(agg("mean_hr", False), agg("mean_hr", True))
        row["hr_rest"] = agg("mean_hr", True)
        row["lf_hf"] = first(agg("lf_hf", False), agg("lf_hf", True))
        resp = [w["respiration"] for w in window_rows if w.get("respiration")]
        row["respiration"] = float(np.mean(resp)) if resp else None
        ar = [w["arousal_frac"] for w in window_rows if w.get("arousal_frac") is not None]
        row["arousal_frac"] = float(np.mean(ar)) if ar else None
        st = [w["stress"] for w in window_rows if w.get("stress") is not None]
        row["stress"] = float(np.mean(st)) if st else None
        row["physio_windows"] = len(window_rows)
        return row

    def _estimate_day(self, subject: str, day: date, row: dict) -> None:
        from ..ema import DailyMood
        from ..physio.hrv import HrvFeatures
        from ..physio.stress import StressAssessment
        baseline = self.baseline(subject)
        day_start, day_end = day_bounds(day, self.tz(subject))
        mood = None
        if row.get("mean_positive") is not None:
            mood = DailyMood(day, row["mean_positive"], row["mean_negative"],
                             row.get("response_rate", 0.0))
        hrv = None
        if row.get("lf_hf") is not None and baseline.count("lf_hf") > 0:
            hrv = HrvFeatures(window=(day_start, day_end), lf_hf_ratio=row["lf_hf"])
        stress = None
        if row.get("stress") is not None:
            level = ("low" if row["stress"] < self.cfg.physio.stress_low_cut else
                     "high" if row["stress"] >= self.cfg.physio.stress_high_cut
                     else "medium")
            stress = StressAssessment(score=row["stress"], level=level, contributors={})
        expected = max(1, len(set(self.cfg_window_hours())))
        inputs = StateInputs(
            timestamp=day_end, mood=mood, hrv=hrv, stress=stress,
            steps=row.get("steps"), home_minutes=row.get("home_minutes"),
            comm_minutes=row.get("comm_minutes") or 0.0,
            chronicle_coverage=row.get("coverage", 0.0),
            physio_coverage=min(1.0, row.get("physio_windows", 0) / expected))
        try:
            state = estimate_state(inputs, baseline, self.cfg.estimator)
        except ValueError:
            return
        entry = state.to_json()
        entry["day"] = day.isoformat()
        entry["regions"] = classify_regions(state, self.space)
        rows = self.states.setdefault(subject, [])
        rows[:] = [r for r in rows if r["day"] != entry["day"]]
        rows.append(entry)
        rows.sort(key=lambda r: r["day"])

    def cfg_window_hours(self) -> list[int]:
        return list(range(0, 24, 2))

    def _update_baselines(self, subject: str, row: dict, window_rows: list[dict],
                          day_start: int, tz: str) -> None:
        baseline = self.baseline(subject)
        for metric in ("rmssd", "lf_hf", "sleep_score", "steps", "home_minutes",
                       "respiration", "arousal_frac"):
            v = row.get(metric)
            if v is not None and math.isfinite(v):
                baseline.update(metric, float(v), day_start, tz)
        for w in window_rows:
            if w.get("mean_hr") is not None:
                baseline.update("hr", float(w["mean_hr"]), int(w["start_ms"]), tz)

    # ---------------------------------------------------------- analytics

    def features_table(self, subject: str) -> list[DailyFeatures]:
        rows = self.daily.get(subject, {})
        return [DailyFeatures.from_json(rows[d]) for d in sorted(rows)]

    def latest_state(self, subject: str) -> dict | None:
        rows = self.states.get(subject, [])
        return rows[-1] if rows else None

    def screen_at(self, subject: str, day_iso: str | None = None) -> DepressionScreen:
        """Screen over the 14 days ending at day_iso; the personal anchor is
        rebuilt from the days strictly before the window."""
        rows = self.daily.get(subject, {})
        days = sorted(rows)
        if not days:
            raise InsufficientData(f"no data for {subject}")
        if day_iso is None:
            day_iso = days[-1]
        window_days = [d for d in days if d <= day_iso][-self.cfg.estimator.screen_window_days:]
        history = [d for d in days if d < window_days[0]]
        if len(history) < self.cfg.estimator.screen_min_anchor_days:
            raise InsufficientData(
                f"{len(history)} anchor days before the window, need "
                f">= {self.cfg.estimator.screen_min_anchor_days}")
        anchor = PersonalBaseline(subject)
        for d in history:
            r = rows[d]
            for metric in ("sleep_score", "steps", "home_minutes"):
                if r.get(metric) is not None:
                    anchor.update(metric, float(r[metric]))
        window = [DailyFeatures.from_json(rows[d]) for d in window_days]
        return screen_depression(window, anchor, self.cfg.estimator)

    def screen_series(self, subject: str) -> list[tuple[str, str]]:
        """(day, band) for each day with enough history to screen."""
        rows = self.daily.get(subject, {})
        out = []
        for d in sorted(rows):
            try:
                out.append((d, self.screen_at(subject, d).band))
            except (InsufficientData, ValueError):
                continue
        return out

    def regime(self, subject: str):
        return detect_regime(self.features_table(subject), self.cfg.estimator)

    def recommendation_profile(self, subject: str) -> RecommendationProfile:
        """Fuse estimator outputs and chronicle statistics into the pattern
        inputs the rule table reads."""
        states = self.states.get(subject, [])
        rows = self.daily.get(subject, {})
        engagement = [r["dims"].get("social_engagement") for r in states
                      if "social_engagement" in r["dims"]]
        arousal = [r["dims"].get("emotional_arousal") for r in states
                   if "emotional_arousal" in r["dims"]]
        baseline = self.baseline(subject)
        recent_home = [rows[d]["home_minutes"] for d in sorted(rows)[-7:]
                       if rows[d].get("home_minutes") is not None]
        home_z = 0.0
        if recent_home and baseline.count("home_minutes") >= 3:
            home_z = baseline.z("home_minutes", float(np.mean(recent_home)))
        social_media = conflict = 0
        if subject in self.chronicle._logs:
            for ev in self.chronicle.events(subject):
                social_media += "social_media_arousal" in ev.attributes
                conflict += "conflict" in ev.attributes
        return RecommendationProfile(
            days_observed=len(rows),
            social_engagement=float(np.mean(engagement)) if engagement else 0.5,
            home_time_z=float(home_z),
            social_media_arousal_events=social_media,
            arousal_volatility=float(np.std(arousal)) if arousal else 0.0,
            conflict_events=conflict)

    def recommendations(self, subject: str) -> list[dict]:
        profile = self.recommendation_profile(subject)
        return [{"intervention": spec.to_json(), "rationale": rationale}
                for spec, rationale in recommend(profile, self.catalog,
                                                 self.cfg.navigator)]

    # ------------------------------------------------------------- alerts

    def alert_boundary(self, subject: str) -> str:
        baseline = self.baselines.get(subject)
        profile = self.profiles.get(subject, ProfileContext(subject))
        if baseline is not None:
            try:
                return personalize_thresholds(baseline, profile,
                                              alert_cfg=self.cfg.alerts).screen_alert_band
            except InsufficientBaseline:
                pass
        return self.cfg.alerts.screen_alert_band

    def refresh_alerts(self) -> list[Alert]:
        new: list[Alert] = []
        for subject in sorted(self.daily):
            series = self.screen_series(subject)
            stamps = {}
            for d, _ in series:
                stamps[d] = day_bounds(date.fromisoformat(d), self.tz(subject))[1]
            for alert in screen_crossing_alerts(subject, series,
                                                self.alert_boundary(subject), stamps):
                if alert.id not in self.alerts:
                    self.alerts[alert.id] = alert
                    new.append(alert)
            for alert in sustained_stress_alerts(subject,
                                                 self.windows.get(subject, []),
                                                 self.cfg.alerts):
                if alert.id not in self.alerts:
                    self.alerts[alert.id] = alert
                    new.append(alert)
        return new

    def open_alerts(self) -> list[Alert]:
        return sorted((a for a in self.alerts.values() if a.state == "open"),
                      key=lambda a: (a.created_at, a.id))

    def ack_alert(self, alert_id: str) -> Alert:
        alert = self.alerts[alert_id]
        alert.acknowledge()
        self.journal({"op": "ack_alert", "alert_id": alert_id})
        self.flush()
        return alert

    # ------------------------------------------------------- goals, plans

    def goal_action(self, subject: str, body: dict) -> Goal:
        if body.get("create"):
            goal = Goal(subject=subject, target=body.get("target", "healthy"),
                        proposed_by=body.get("proposed_by", "individual"))
            goal.history.append((int(body.get("now_ms", 0)), "proposed",
                                 body.get("note", "")))
            self.goals[subject] = goal
        else:
            goal = self.goals.get(subject)
            if goal is None:
                raise KeyError(subject)
            expected = body.get("version")
            if expected is not None and expected != goal.version:
                raise VersionConflict(f"goal version {goal.version}, got {expected}")
            update_goal(goal, body["action"], note=body.get("note", ""),
                        now_ms=int(body.get("now_ms", 0)),
                        new_target=body.get("target"))
        self.journal({"op": "goal", "subject": subject, "body": body})
        self.flush()
        return self.goals[subject]

    def make_plan(self, subject: str, body: dict) -> GuidancePlan:
        goal = self.goals.get(subject)
        if goal is None:
            raise KeyError(subject)
        if "manual_plan" in body:
            manual = dict(body["manual_plan"])
            manual.setdefault("subject", subject)
            manual.setdefault("goal_target", goal.target)
            plan = GuidancePlan.from_json(manual)
            plan.created_by = "provider"
        else:
            latest = self.latest_state(subject)
            if latest is None:
                raise KeyError(f"no state for {subject}")
            state = StateVector.from_json(latest)
            constraints = PlanConstraints(**body.get("constraints", {}))
            plan = plan_route(state, goal, self.catalog, self.space, constraints,
                              now_ms=int(body.get("now_ms", latest["timestamp"])))
        if not body.get("dry_run"):
            old = self.plans.get(subject)
            plan.version = (old.version + 1) if old else 1
            self.plans[subject] = plan
            self.journal({"op": "plan", "subject": subject, "body": body})
            self.flush()
        return plan

    def check_plan(self, subject: str) -> dict:
        plan = self.plans.get(subject)
        if plan is None:
            raise KeyError(subject)
        goal = self.goals.get(subject)
        observed = [(r["timestamp"], StateVector.from_json(r))
                    for r in self.states.get(subject, [])
                    if r["timestamp"] >= plan.created_at]
        result = apply_feedback(plan, observed, goal, self.catalog, self.space,
                                cfg=self.cfg.navigator)
        if result.status == "drifted":
            alert = plan_drift_alert(subject, result.drift_weeks,
                                     observed[-1][0] if observed else 0)
            if alert.id not in self.alerts:
                self.alerts[alert.id] = alert
                self.flush()
        return {"status": result.status, "drift_weeks": result.drift_weeks,
                "replan": result.replan.to_json() if result.replan else None}

    # ------------------------------------------------------------ replay

    @classmethod
    def replay_journal(cls, data_dir: str | Path,
                       config: EngineConfig | None = None) -> "Engine":
        """Re-execute the journal onto fresh derived state."""
        import shutil
        data_dir = Path(data_dir)
        journal_path = data_dir / "journal.jsonl"
        entries = []
        if journal_path.exists():
            with journal_path.open() as fh:
                entries = [json.loads(line) for line in fh if line.strip()]
        for sub in ("chronicle", "features", "states", "records"):
            shutil.rmtree(data_dir / sub, ignore_errors=True)
        engine = cls(data_dir, config=config, replaying=True)
        for entry in entries:
            op = entry["op"]
            if op == "ingest_dir":
                engine.ingest_dir(entry["raw_dir"], entry.get("subjects"))
            elif op == "goal":
                engine.goal_action(entry["subject"], entry["body"])
            elif op == "plan":
                engine.make_plan(entry["subject"], entry["body"])
            elif op == "ack_alert":
                engine.ack_alert(entry["alert_id"])
            # upload entries only record raw arrivals; raw/ is kept as-is
        engine.flush()
        return engine


class VersionConflict(ValueError):
    pass


def _read_jsonl(path: Path) -> list:
    with path.open() as fh:
        return [json.loads(line) for line in fh if line.strip()]


def _write_jsonl(path: Path, rows: list) -> None:
    with path.open("w") as fh:
        for row in rows:
            fh.write(json.dumps(row, sort_keys=True) + "\n")
