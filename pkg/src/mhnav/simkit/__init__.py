"""Synthetic cohort generator and stream replayer.

Produces seeded multi-day raw sensor directories plus a ground-truth ledger
(activities, regime labels, meal times, beat times) whose qualitative
structure mirrors the case-study arc: well-being phases with more sleep,
higher heart-rate variability, more activity and less home time, and planted
poor-mood blocks with the couplings reversed.
"""

from .generate import (CohortConfig, InvalidConfig, PhaseParams, april_like_config,
                       generate, load_cohort_config)
from .replay import LayoutError, replay

__all__ = ["CohortConfig", "PhaseParams", "InvalidConfig", "generate",
           "april_like_config", "load_cohort_config", "replay", "LayoutError"]
