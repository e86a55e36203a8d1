"""
Strain estimators.

Every module here is scanned by `elastostrain.registry`; classes named `...Estimator` that
subclass `StrainEstimator` are registered under their `method` attribute.
"""
from elastostrain.estimators.adaptive import AdaptiveStretchingEstimator, StretchResult, adaptive_stretch_segment
from elastostrain.estimators.estimator import StrainEstimator, TrackState, WindowEstimate
from elastostrain.estimators.gradient import GradientEstimator, estimate_displacement_line, gradient_strain_line
from elastostrain.estimators.lateral import LateralMatch, lateral_search_segment
from elastostrain.estimators.tracking import LineTrack, track_line
from elastostrain.estimators.windows import WindowGrid, window_grid

__all__ = [
    "AdaptiveStretchingEstimator",
    "GradientEstimator",
    "LateralMatch",
    "LineTrack",
    "StrainEstimator",
    "StretchResult",
    "TrackState",
    "WindowEstimate",
    "WindowGrid",
    "adaptive_stretch_segment",
    "estimate_displacement_line",
    "gradient_strain_line",
    "lateral_search_segment",
    "track_line",
    "window_grid",
]
