"""Engine configuration: every tunable constant lives here, grouped per stage.

Values can be overridden from a flat ``key = value`` file using dotted keys,
e.g. ``ingest.period_ms = 250``.  Lines starting with ``#`` are comments.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields, is_dataclass
from pathlib import Path


@dataclass
class IngestConfig:
    period_ms: int = 1000
    gap_factor: float = 2.0          # mask grid points farther than gap_factor * nominal period
    ema_carry_forward_min: float = 5.0


@dataclass
class PhysioConfig:
    lf_band: tuple[float, float] = (0.04, 0.15)
    hf_band: tuple[float, float] = (0.15, 0.40)
    tachogram_hz: float = 4.0
    welch_segment_s: float = 64.0
    welch_overlap: float = 0.5
    min_ppg_rate_hz: float = 25.0
    beat_refractory_ms: float = 333.0
    beat_threshold_window_s: float = 10.0
    beat_threshold_iqr_gain: float = 0.5
    ibi_min_ms: float = 250.0
    ibi_max_ms: float = 3000.0
    resp_band: tuple[float, float] = (0.1, 0.5)
    resp_peak_over_median: float = 2.0
    eda_theta_rise: float = 0.05     # microsiemens per second
    eda_theta_flat: float = 0.01
    eda_epsilon: float = 0.05        # fraction of baseline counted as "at baseline"
    eda_smooth_s: float = 0.5
    eda_min_rise_s: float = 1.0
    eda_min_rate_hz: float = 4.0
    stress_low_cut: float = 0.33
    stress_high_cut: float = 0.66


@dataclass
class ActivityConfig:
    # duration classes: short < 5 min <= medium < 45 min <= long
    short_max_min: float = 5.0
    medium_max_min: float = 45.0
    # per-interval accel-magnitude std thresholds (g)
    still_max_g: float = 0.05
    walking_max_g: float = 0.3
    # complex-event rules
    prep_min_movement_min: float = 5.0
    prep_max_gap_min: float = 5.0
    postprandial_window_min: float = 20.0
    postprandial_rise_bpm: float = 5.0
    hr_elevated_z: float = 1.0


@dataclass
class EmaConfig:
    prompts_per_day: int = 4
    min_separation_min: float = 90.0
    waking_start_hour: int = 9
    waking_end_hour: int = 22
    momentary_expiry_min: float = 30.0
    end_of_day_expiry_min: float = 360.0


@dataclass
class EstimatorConfig:
    grid_resolution: int = 10
    z_squash: float = 3.0            # +-3 sigma maps onto the unit interval
    arousal_gain: float = 0.15
    comm_norm_min: float = 120.0     # communication minutes treated as full engagement
    regime_ma_days: int = 7
    regime_hysteresis: float = 0.25
    regime_min_phase_days: int = 3
    screen_window_days: int = 14
    screen_min_days: int = 10
    screen_min_anchor_days: int = 7   # history needed before the window to anchor z-scores
    sleep_full_score_min: float = 540.0


@dataclass
class NavigatorConfig:
    max_concurrent: int = 2
    max_high_risk: int = 1
    max_weeks: int = 52
    drift_cells: int = 2
    drift_weeks: int = 2
    arousal_volatility_cut: float = 0.2
    low_engagement_cut: float = 0.3
    home_z_cut: float = 1.0


@dataclass
class AlertConfig:
    screen_alert_band: str = "moderate"
    stress_alert_z: float = 2.0
    sustained_stress_windows: int = 6


@dataclass
class EngineConfig:
    ingest: IngestConfig = field(default_factory=IngestConfig)
    physio: PhysioConfig = field(default_factory=PhysioConfig)
    activity: ActivityConfig = field(default_factory=ActivityConfig)
    ema: EmaConfig = field(default_factory=EmaConfig)
    estimator: EstimatorConfig = field(default_factory=EstimatorConfig)
    navigator: NavigatorConfig = field(default_factory=NavigatorConfig)
    alerts: AlertConfig = field(default_factory=AlertConfig)


def _coerce(current, raw: str):
    if isinstance(current, bool):
        return raw.strip().lower() in ("1", "true", "yes", "on")
    if isinstance(current, int):
        return int(raw)
    if isinstance(current, float):
        return float(raw)
    if isinstance(current, tuple):
        parts = [p for p in raw.replace("(", "").replace(")", "").split(",") if p.strip()]
        return tuple(type(c)(p) for c, p in zip(current, parts))
    return raw.strip()


def load_config(path: str | Path | None = None) -> EngineConfig:
    """Build an EngineConfig, applying dotted-key overrides from ``path`` if given."""
    cfg = EngineConfig()
    if path is None:
        return cfg
    text = Path(path).read_text()
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#") or line.startswith("["):
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'key = value'")
        key, raw = line.split("=", 1)
        parts = key.strip().split(".")
        target = cfg
        for p in parts[:-1]:
            if not is_dataclass(target) or p not in {f.name for f in fields(target)}:
                raise KeyError(f"{path}:{lineno}: unknown config group {key.strip()!r}")
            target = getattr(target, p)
        leaf = parts[-1]
        if not is_dataclass(target) or leaf not in {f.name for f in fields(target)}:
            raise KeyError(f"{path}:{lineno}: unknown config key {key.strip()!r}")
        setattr(target, leaf, _coerce(getattr(target, leaf), raw))
    return cfg
