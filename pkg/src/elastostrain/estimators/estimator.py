from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import ClassVar, Optional, Tuple

import numpy as np

from elastostrain.datamodel import EstimatorConfig, Method
from elastostrain.estimators.windows import WindowGrid


@dataclass
class TrackState:
    """
    What the tracker carries from one window to the next along an A-line.

    `lag` is the expected post-frame delay (samples) of the next window's top edge,
    `alpha` the last stretch factor, `shift` the last lateral line offset
    (None before the first window) and `windows` the number of windows tracked so far.
    """

    lag: float = 0.0
    alpha: float = 1.0
    shift: Optional[int] = None
    windows: int = 0


@dataclass(frozen=True)
class WindowEstimate:
    """Result for one window: `value` is a displacement or a strain depending on the estimator."""

    value: float
    lag: float
    peak_correlation: float
    alpha: float = 1.0


@dataclass
class StrainEstimator(ABC):
    """
    Turns matched pre/post windows along one A-line into a strain column.

    Implementations are found by the registry from their class name:

        >>> from elastostrain.registry import get_estimator
        >>> type(get_estimator("gradient")).__name__
        'GradientEstimator'

    The tracker calls `estimate_window` for each window, top to bottom, then `advance`
    to carry the warm start; when a window cannot be estimated it uses `carry_over`.
    `finish_line` turns the per-window values into strain.
    """

    config: EstimatorConfig = field(default_factory=EstimatorConfig)
    method: ClassVar[Method]

    @abstractmethod
    def estimate_window(
        self, pre_window: np.ndarray, post_line: np.ndarray, start: int, state: TrackState
    ) -> WindowEstimate:
        """
        Match one pre-frame window against a post-frame A-line.

        :param pre_window: pre-deformation samples of the window
        :param post_line: full post-deformation A-line
        :param start: first sample of the window in the pre line
        :param state: warm start from the windows above; not modified
        :raises DegenerateInputError: if the samples have no variance
        :raises EstimationError: if no match can be computed
        """

    def advance(self, state: TrackState, estimate: WindowEstimate, grid: WindowGrid) -> None:
        state.lag = estimate.lag
        state.alpha = estimate.alpha
        state.windows += 1

    @abstractmethod
    def carry_over(self, state: TrackState) -> WindowEstimate:
        """Stand-in estimate for a window that could not be matched."""

    def alignment(self, estimate: WindowEstimate, start: int, length: int) -> Tuple[float, float]:
        """
        Where an estimate puts the window in the post line.

        :return: post-line position matched to the window's first sample, and the stretch factor
        """
        return start + estimate.lag, estimate.alpha

    @abstractmethod
    def finish_line(self, values: np.ndarray, grid: WindowGrid) -> np.ndarray:
        """Strain per window from the per-window values of one A-line."""
