"""Physiological marker pipeline: PPG beats -> interbeat intervals -> HRV,
respiration from the pulse waveform, four-state skin-conductance segmentation,
and a personalized stress score."""

from .beats import IbiSeries, RateTooLow, TooShort, detect_beats
from .eda import EdaSegmentation, EdaState, eda_segment, validate_segmentation
from .hrv import (HrvFeatures, TooFewBeats, WindowTooShort, band_power,
                  hrv_frequency_domain, hrv_time_domain)
from .respiration import NoDominantFrequency, RespirationEstimate, respiration_rate
from .stress import InsufficientBaseline, StressAssessment, stress_score

__all__ = [
    "IbiSeries", "detect_beats", "TooShort", "RateTooLow",
    "HrvFeatures", "hrv_time_domain", "hrv_frequency_domain", "band_power",
    "TooFewBeats", "WindowTooShort",
    "RespirationEstimate", "respiration_rate", "NoDominantFrequency",
    "EdaState", "EdaSegmentation", "eda_segment", "validate_segmentation",
    "StressAssessment", "stress_score", "InsufficientBaseline",
]
