"""
Adaptive stretching: strain as the stretch factor that best re-aligns a window.

A post-deformation segment is resampled at spacing alpha (alpha < 1 under compression) and
correlated with the pre-deformation window over a range of axial lags. The alpha maximising the
correlation gives strain = 1 - alpha directly, without differentiating displacement, so an axial
tracking error in one window does not leak into its neighbours.

The search evaluates the whole coarse alpha grid at once and then refines the best cell with a
golden-section search.
"""
import logging
from dataclasses import dataclass
from typing import ClassVar, Dict, Optional

import numpy as np
from scipy import signal

from elastostrain.datamodel import EstimatorConfig, Method
from elastostrain.errors import DegenerateInputError, EstimationError
from elastostrain.estimators.estimator import StrainEstimator, TrackState, WindowEstimate
from elastostrain.estimators.windows import WindowGrid
from elastostrain.utils.golden_section import golden_section_maximize
from elastostrain.xcorr import refine_peak

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class StretchResult:
    """Best stretch factor for a window, its correlation and the matched lag (samples)."""

    alpha: float
    peak_correlation: float
    lag_samples: float

    @property
    def strain(self) -> float:
        return 1.0 - self.alpha


def stretched_correlations(pre_window, post_line, origin: float, alphas, max_lag: int) -> np.ndarray:
    """
    NCC of `pre_window` against `post_line` resampled at each stretch factor.

    Row a, column k compares pre_window[q] with post_line(origin + (k - max_lag + q) * alphas[a]).
    Lags whose read leaves the line, or whose samples are constant, hold -inf.
    """
    pre = np.asarray(pre_window, dtype=float)
    post = np.asarray(post_line, dtype=float)
    alphas = np.atleast_1d(np.asarray(alphas, dtype=float))
    length = len(pre)
    pre0 = pre - pre.mean()
    pre_norm = np.sqrt(np.dot(pre0, pre0))
    if np.ptp(pre) == 0.0:
        raise DegenerateInputError("cannot stretch-match a zero-variance window")
    positions = origin + np.outer(alphas, np.arange(-max_lag, length + max_lag))
    resampled = np.interp(positions, np.arange(len(post)), post)
    cross = signal.fftconvolve(resampled, pre0[np.newaxis, ::-1], mode="valid", axes=1)
    zeros = np.zeros((len(alphas), 1))
    c1 = np.concatenate([zeros, np.cumsum(resampled, axis=1)], axis=1)
    c2 = np.concatenate([zeros, np.cumsum(resampled * resampled, axis=1)], axis=1)
    s1 = c1[:, length:] - c1[:, :-length]
    s2 = c2[:, length:] - c2[:, :-length]
    var = s2 - s1 * s1 / length
    inside = (positions[:, : 2 * max_lag + 1] >= 0) & (positions[:, length - 1 :] <= len(post) - 1)
    valid = inside & (var > 1e-12 * s2)
    out = np.full(var.shape, -np.inf)
    out[valid] = np.clip(cross[valid] / (pre_norm * np.sqrt(var[valid])), -1.0, 1.0)
    return out


def adaptive_stretch_segment(
    pre_window, post_line, start: float, config: EstimatorConfig, max_lag: Optional[int] = None
) -> StretchResult:
    """
    Find the stretch factor in [alpha_min, 1] that best aligns a window.

    A post line that is the pre line compressed by 2% is matched at alpha 0.98:

        >>> import numpy as np
        >>> t = np.arange(600)
        >>> def echo(x):
        ...     return np.sin(0.3 * x) * np.cos(0.05 * x) + 0.5 * np.sin(0.13 * x)
        >>> result = adaptive_stretch_segment(echo(t[100:256]), echo(t / 0.98), 98.0, EstimatorConfig())
        >>> round(result.strain, 3), abs(result.lag_samples) < 0.5
        (0.02, True)

    :param pre_window: pre-deformation window
    :param post_line: post-deformation A-line
    :param start: post-line position (fractional samples) expected to match the window's first sample
    :param config: coarse grid and refinement settings
    :param max_lag: axial search half-range in samples; derived from the window length if omitted
    :return: best alpha, its peak correlation and the lag of the match relative to `start`
    :raises DegenerateInputError: if the window is constant
    :raises EstimationError: if no alpha and lag gives a valid correlation
    """
    pre = np.asarray(pre_window, dtype=float)
    post = np.asarray(post_line, dtype=float)
    if max_lag is None:
        max_lag = config.max_lag_for_window(len(pre))

    grid = config.alpha_grid()
    table = stretched_correlations(pre, post, start, grid, max_lag)
    per_alpha = table.max(axis=1)
    if not np.isfinite(per_alpha).any():
        raise EstimationError(f"no stretch of the post line around sample {start:.1f} can be correlated")
    best = int(np.argmax(per_alpha))
    alpha, score, row = float(grid[best]), float(per_alpha[best]), table[best]

    if config.alpha_refine_iters > 0:
        rows: Dict[float, np.ndarray] = {}

        def objective(a: float) -> float:
            rows[a] = stretched_correlations(pre, post, start, [a], max_lag)[0]
            return float(rows[a].max())

        lo = max(config.alpha_min, alpha - config.alpha_coarse_step)
        hi = min(1.0, alpha + config.alpha_coarse_step)
        refined_alpha, refined_score, _ = golden_section_maximize(objective, lo, hi, config.alpha_refine_iters)
        if refined_score > score:
            alpha, score, row = refined_alpha, refined_score, rows[refined_alpha]

    peak = int(np.argmax(row))
    lag = (refine_peak(row, peak) - max_lag) * alpha
    return StretchResult(alpha=alpha, peak_correlation=score, lag_samples=lag)


@dataclass
class AdaptiveStretchingEstimator(StrainEstimator):
    """
    Strain from the best stretch factor of each window.

    The next window's search starts where this window's match predicts it:
    lag - strain * stride.
    """

    method: ClassVar[Method] = "adaptive"

    def estimate_window(
        self, pre_window: np.ndarray, post_line: np.ndarray, start: int, state: TrackState
    ) -> WindowEstimate:
        result = adaptive_stretch_segment(pre_window, post_line, start + state.lag, self.config)
        return WindowEstimate(
            value=result.strain,
            lag=state.lag + result.lag_samples,
            peak_correlation=result.peak_correlation,
            alpha=result.alpha,
        )

    def advance(self, state: TrackState, estimate: WindowEstimate, grid: WindowGrid) -> None:
        state.lag = estimate.lag - estimate.value * grid.stride
        state.alpha = estimate.alpha
        state.windows += 1

    def carry_over(self, state: TrackState) -> WindowEstimate:
        return WindowEstimate(value=1.0 - state.alpha, lag=state.lag, peak_correlation=0.0, alpha=state.alpha)

    def finish_line(self, values: np.ndarray, grid: WindowGrid) -> np.ndarray:
        return np.array(values, dtype=float)
