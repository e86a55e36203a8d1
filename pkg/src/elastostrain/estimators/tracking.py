"""Window-by-window tracking down one A-line, optionally with lateral search."""
import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from elastostrain.errors import DegenerateInputError, EstimationError
from elastostrain.estimators.estimator import StrainEstimator, TrackState, WindowEstimate
from elastostrain.estimators.lateral import estimator_scorer, search_lateral
from elastostrain.estimators.windows import WindowGrid

logger = logging.getLogger(__name__)


@dataclass(eq=False)
class LineTrack:
    """Per-window results for one pre-frame A-line, and the tracker state after the last window."""

    values: np.ndarray
    peak_correlation: np.ndarray
    flagged: np.ndarray
    shifts: np.ndarray
    lateral_score: Optional[np.ndarray] = None
    state: TrackState = field(default_factory=TrackState)


def track_line(
    pre: np.ndarray,
    post: np.ndarray,
    line_i: int,
    grid: WindowGrid,
    estimator: StrainEstimator,
    lateral: bool = False,
    n_windows: Optional[int] = None,
) -> LineTrack:
    """
    Run `estimator` over the windows of pre line `line_i`, top to bottom.

    Each window starts from the state left by the one above. A window that cannot be estimated
    is flagged and gets the estimator's carry-over value; its neighbours are unaffected.

    :param pre: pre-deformation samples, one row per A-line
    :param post: post-deformation samples of the same shape
    :param lateral: search post lines line_i + j for every window; the estimate made on the chosen
        line while scoring it is kept
    :param n_windows: stop after this many windows (default: all)
    """
    n = len(grid) if n_windows is None else n_windows
    values = np.zeros(n)
    peaks = np.zeros(n)
    flagged = np.zeros(n, dtype=bool)
    shifts = np.zeros(n, dtype=int)
    scores = np.zeros(n) if lateral else None
    state = TrackState()
    for k in range(n):
        start = int(grid.starts[k])
        window = pre[line_i, start : start + grid.length]
        found: Optional[WindowEstimate] = None
        if lateral:
            assert scores is not None
            scorer = estimator_scorer(window, post, line_i, start, state, estimator)
            match = search_lateral(pre.shape[0], line_i, state.shift, estimator.config, scorer)
            state.shift = match.shift
            shifts[k] = match.shift
            scores[k] = match.score
            found = match.estimate
        try:
            if found is None:
                found = estimator.estimate_window(window, post[line_i + shifts[k]], start, state)
            estimate = found
        except (DegenerateInputError, EstimationError) as e:
            logger.debug(f"line {line_i} window {k}: {e}")
            estimate = estimator.carry_over(state)
            flagged[k] = True
        values[k] = estimate.value
        peaks[k] = estimate.peak_correlation
        estimator.advance(state, estimate, grid)
    return LineTrack(values, peaks, flagged, shifts, scores, state)
