"""
Lateral (1.5D) search: pick the post-frame A-line that best matches a pre-frame window.

Lateral motion under compression moves speckle across A-lines, so pre line i is compared with
post lines i + j for |j| <= n. Candidates are scored with the lower median of sub-window NCC
maxima, which one corrupted sub-window cannot raise. In the tracker each candidate line is scored
where the estimator itself matches the window on that line, at its axial position and stretch.

The first window of a line scans every j; later windows test only j-1, j, j+1 around the
previous match, plus 0, and fall back to a full scan when none of those reaches the correlation
threshold. The winner is only accepted once it beats both of its neighbours, which are scored
when missing.
"""
import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Set, Tuple

import numpy as np

from elastostrain.datamodel import EstimatorConfig, RFFrame
from elastostrain.errors import ConfigurationError, DegenerateInputError, EstimationError
from elastostrain.estimators.estimator import StrainEstimator, TrackState, WindowEstimate
from elastostrain.estimators.windows import window_grid
from elastostrain.xcorr import subwindow_median_max

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CandidateMatch:
    """Lateral score of one candidate post line, with the estimator's match on it if one was run."""

    score: float
    estimate: Optional[WindowEstimate] = None


Scorer = Callable[[int], Optional[CandidateMatch]]
"""Scores line offset j; None when the candidate cannot be scored."""


@dataclass(frozen=True)
class LateralMatch:
    """Chosen line offset for one window, with the score of every candidate tried."""

    shift: int
    score: float
    candidates: Dict[int, float] = field(default_factory=dict)
    flagged: bool = False
    full_scan: bool = False
    estimate: Optional[WindowEstimate] = None


def lateral_bounds(line_i: int, n_lines: int, radius: int) -> Tuple[int, int]:
    """
    Smallest and largest offset j keeping line i + j inside the frame.

    >>> lateral_bounds(1, 10, 3)
    (-1, 3)
    """
    return max(-radius, -line_i), min(radius, n_lines - 1 - line_i)


def lateral_candidates(line_i: int, n_lines: int, radius: int, previous: Optional[int]) -> List[int]:
    """
    Offsets tried first for a window, given the previous window's match on the same line.

    >>> lateral_candidates(5, 10, 2, None)
    [-2, -1, 0, 1, 2]
    >>> lateral_candidates(5, 10, 6, 3)
    [0, 2, 3, 4]
    >>> lateral_candidates(0, 10, 6, 0)
    [0, 1]
    """
    lo, hi = lateral_bounds(line_i, n_lines, radius)
    if previous is None:
        return list(range(lo, hi + 1))
    return sorted(j for j in {previous - 1, previous, previous + 1, 0} if lo <= j <= hi)


def post_segment(post_line: np.ndarray, origin: float, length: int, alpha: float = 1.0) -> Optional[np.ndarray]:
    """
    Samples of `post_line` at origin + alpha * q for q < length, linearly interpolated.

    None if the read leaves the line.
    """
    positions = origin + alpha * np.arange(length)
    if positions[0] < 0 or positions[-1] > len(post_line) - 1:
        return None
    if alpha == 1.0 and float(origin).is_integer():
        start = int(origin)
        return np.asarray(post_line[start : start + length], dtype=float)
    return np.interp(positions, np.arange(len(post_line)), post_line)


def candidate_score(
    window: np.ndarray, post_line: np.ndarray, origin: float, config: EstimatorConfig, alpha: float = 1.0
) -> Optional[float]:
    """Sub-window median-of-maxima of `window` against the post line read at `origin`; None if unusable."""
    segment = post_segment(post_line, origin, len(window), alpha)
    if segment is None:
        return None
    max_lag = config.max_lag_for_window(len(window))
    try:
        return subwindow_median_max(window, segment, config.n_sub, max_lag, config.correlation_method)
    except DegenerateInputError:
        return None


def fixed_read_scorer(
    window: np.ndarray,
    post: np.ndarray,
    line_i: int,
    start: int,
    config: EstimatorConfig,
    axial_offset: float = 0.0,
    alpha: float = 1.0,
) -> Scorer:
    """Score every candidate line read at the same axial offset and stretch."""

    def score(j: int) -> Optional[CandidateMatch]:
        value = candidate_score(window, post[line_i + j], start + axial_offset, config, alpha)
        return None if value is None else CandidateMatch(value)

    return score


def estimator_scorer(
    window: np.ndarray,
    post: np.ndarray,
    line_i: int,
    start: int,
    state: TrackState,
    estimator: StrainEstimator,
) -> Scorer:
    """
    Score every candidate line where `estimator`, warm-started from `state`, matches the window.

    Reads that would run past the end of the line are pulled back inside it.
    """
    length = len(window)

    def score(j: int) -> Optional[CandidateMatch]:
        post_line = post[line_i + j]
        try:
            estimate = estimator.estimate_window(window, post_line, start, state)
        except (DegenerateInputError, EstimationError) as e:
            logger.debug(f"line {line_i} offset {j}: {e}")
            return None
        origin, alpha = estimator.alignment(estimate, start, length)
        origin = float(np.clip(origin, 0.0, max(0.0, len(post_line) - 1 - alpha * (length - 1))))
        value = candidate_score(window, post_line, origin, estimator.config, alpha)
        return None if value is None else CandidateMatch(value, estimate)

    return score


def _preference(j: int, previous: Optional[int]) -> Tuple[int, int, int]:
    return abs(j), abs(j - (previous or 0)), j


def _best(matches: Dict[int, CandidateMatch], previous: Optional[int]) -> int:
    ordered = sorted(matches, key=lambda j: _preference(j, previous))
    return max(ordered, key=lambda j: matches[j].score)


def search_lateral(
    n_lines: int,
    line_i: int,
    previous: Optional[int],
    config: EstimatorConfig,
    scorer: Scorer,
) -> LateralMatch:
    """
    Lateral search for one window of pre line `line_i`, scoring offsets with `scorer`.

    :raises ConfigurationError: if `previous` is outside the search range
    """
    lo, hi = lateral_bounds(line_i, n_lines, config.lateral_radius_n)
    if previous is not None and not lo <= previous <= hi:
        raise ConfigurationError(f"previous lateral shift {previous} is outside [{lo}, {hi}] for line {line_i}")
    matches: Dict[int, CandidateMatch] = {}
    tried: Set[int] = set()

    def score(j: int) -> None:
        if j in tried:
            return
        tried.add(j)
        match = scorer(j)
        if match is None:
            logger.debug(f"line {line_i} offset {j}: candidate cannot be scored")
        else:
            matches[j] = match

    for j in lateral_candidates(line_i, n_lines, config.lateral_radius_n, previous):
        score(j)
    full_scan = previous is None
    if not full_scan and (not matches or max(m.score for m in matches.values()) < config.corr_threshold):
        logger.debug(f"line {line_i}: local lateral candidates below threshold, scanning all")
        for j in range(lo, hi + 1):
            score(j)
        full_scan = True
    if not matches:
        fallback = 0 if previous is None else previous
        return LateralMatch(shift=fallback, score=-1.0, flagged=True, full_scan=full_scan)
    while True:
        best = _best(matches, previous)
        missing = [j for j in (best - 1, best + 1) if lo <= j <= hi and j not in tried]
        if not missing:
            break
        for j in missing:
            score(j)
    return LateralMatch(
        shift=best,
        score=matches[best].score,
        candidates={j: m.score for j, m in sorted(matches.items())},
        full_scan=full_scan,
        estimate=matches[best].estimate,
    )


def lateral_search_segment(
    pre_frame: RFFrame,
    post_frame: RFFrame,
    line_i: int,
    window_k: int,
    prev_shift_j: Optional[int],
    config: EstimatorConfig,
    axial_offset: float = 0.0,
    alpha: float = 1.0,
    estimator: Optional[StrainEstimator] = None,
) -> LateralMatch:
    """
    Choose the post line offset j for window k of pre line i.

    Ties go to the smaller |j|, then to the offset closer to the previous match.

    :param prev_shift_j: the match of window k - 1 on the same line, or None to scan every offset
    :param axial_offset: expected axial delay (samples) of the window in the post frame
    :param alpha: stretch applied to post segments before scoring
    :param estimator: if given, score each line where this estimator matches the window, warm-started
        from `axial_offset` and `alpha`, instead of reading every line at that offset and stretch
    :raises ConfigurationError: if the window does not exist or the previous shift is out of range
    """
    grid = window_grid(pre_frame, config)
    if not 0 <= window_k < len(grid):
        raise ConfigurationError(f"window {window_k} does not exist; the frame has {len(grid)} windows")
    if not 0 <= line_i < pre_frame.n_lines:
        raise ConfigurationError(f"line {line_i} does not exist; the frame has {pre_frame.n_lines} lines")
    start = int(grid.starts[window_k])
    window = pre_frame.samples[line_i, start : start + grid.length]
    if estimator is None:
        scorer = fixed_read_scorer(window, post_frame.samples, line_i, start, config, axial_offset, alpha)
    else:
        state = TrackState(lag=axial_offset, alpha=alpha, shift=prev_shift_j, windows=window_k)
        scorer = estimator_scorer(window, post_frame.samples, line_i, start, state, estimator)
    return search_lateral(pre_frame.n_lines, line_i, prev_shift_j, config, scorer)
