"""
Time-delay estimation followed by a finite-difference gradient.

Each window is tracked to the post frame with NCC and parabolic sub-sample refinement, giving an
axial displacement per window; strain is the negated forward difference of displacement over the
window stride, so compression reads positive.
"""
import logging
from dataclasses import dataclass
from typing import ClassVar, Optional, Tuple

import numpy as np

from elastostrain.datamodel import EstimatorConfig, Method, RFFrame
from elastostrain.errors import ConfigurationError
from elastostrain.estimators.estimator import StrainEstimator, TrackState, WindowEstimate
from elastostrain.estimators.tracking import track_line
from elastostrain.estimators.windows import WindowGrid, window_grid
from elastostrain.xcorr import ncc_track, refine_peak

logger = logging.getLogger(__name__)


@dataclass
class GradientEstimator(StrainEstimator):
    """
    Displacement by NCC peak tracking; strain by differentiating it.

    The stretch implied by the displacements tracked so far rides along in the state, so lateral
    candidates can be scored at the local strain.

    >>> import numpy as np
    >>> from elastostrain.datamodel import EstimatorConfig
    >>> line = np.sin(np.arange(400) * 0.9) * np.hanning(400)
    >>> est = GradientEstimator(EstimatorConfig())
    >>> round(est.estimate_window(line[100:200], np.roll(line, 5), 100, TrackState()).value, 2)
    5.0
    """

    method: ClassVar[Method] = "gradient"

    def estimate_window(
        self, pre_window: np.ndarray, post_line: np.ndarray, start: int, state: TrackState
    ) -> WindowEstimate:
        max_lag = self.config.max_lag_for_window(len(pre_window))
        offset = int(round(state.lag))
        result = ncc_track(pre_window, post_line, start + offset, max_lag, self.config.correlation_method)
        assert result.full_function is not None and result.lags is not None
        refined = refine_peak(result.full_function, result.peak_index)
        lag = offset + float(result.lags[0]) + refined
        return WindowEstimate(value=lag, lag=lag, peak_correlation=result.peak_value, alpha=state.alpha)

    def advance(self, state: TrackState, estimate: WindowEstimate, grid: WindowGrid) -> None:
        if state.windows:
            stretch = 1.0 + (estimate.lag - state.lag) / grid.stride
            state.alpha = float(np.clip(stretch, self.config.alpha_min, 1.0))
        state.lag = estimate.lag
        state.windows += 1

    def carry_over(self, state: TrackState) -> WindowEstimate:
        return WindowEstimate(value=state.lag, lag=state.lag, peak_correlation=0.0, alpha=state.alpha)

    def alignment(self, estimate: WindowEstimate, start: int, length: int) -> Tuple[float, float]:
        # the lag aligns window centres; the stretch comes from the displacement gradient above
        origin = start + estimate.lag + (1.0 - estimate.alpha) * (length - 1) / 2
        return origin, estimate.alpha

    def finish_line(self, values: np.ndarray, grid: WindowGrid) -> np.ndarray:
        return gradient_strain_line(values, grid.stride)


def gradient_strain_line(displacements, stride_samples: int) -> np.ndarray:
    """
    Strain from window displacements (samples), compression positive.

    Returns -(d[k+1] - d[k]) / stride. Displacements are post-frame delays, which fall with depth
    under compression; delays that grow with depth come out as negative strain. The last window
    repeats the strain above it.

    >>> [round(float(s), 6) for s in gradient_strain_line([0.0, -0.52, -1.04], 26)]
    [0.02, 0.02, 0.02]
    >>> [round(float(s), 6) for s in gradient_strain_line([0.0, 0.52, 1.04], 26)]
    [-0.02, -0.02, -0.02]

    :raises ConfigurationError: with fewer than two windows
    """
    d = np.asarray(displacements, dtype=float)
    if len(d) < 2:
        raise ConfigurationError("the gradient estimator needs at least two windows per A-line")
    strain = -np.diff(d) / stride_samples
    return np.append(strain, strain[-1])


def estimate_displacement_line(
    pre_line, post_line, config: EstimatorConfig, grid: Optional[WindowGrid] = None
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Axial displacement (samples), peak NCC and failure flag of every window on one pair of A-lines.

    Windows are tracked top to bottom, each search centred on the displacement above. A window
    that cannot be matched keeps the displacement above it and is flagged.

    :param grid: window layout; by default laid out for the default acquisition metadata
    """
    pre = np.asarray(pre_line, dtype=float)[np.newaxis, :]
    post = np.asarray(post_line, dtype=float)[np.newaxis, :]
    if grid is None:
        grid = window_grid(RFFrame(pre), config)
    track = track_line(pre, post, 0, grid, GradientEstimator(config), lateral=False)
    return track.values, track.peak_correlation, track.flagged
