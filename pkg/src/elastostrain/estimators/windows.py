"""Axial window layout shared by the estimators."""
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from elastostrain.datamodel import EstimatorConfig, RFFrame
from elastostrain.errors import ConfigurationError


@dataclass(frozen=True, eq=False)
class WindowGrid:
    """
    Start samples of the overlapping axial windows on every A-line.

    >>> grid = WindowGrid(starts=np.array([0, 26, 52]), length=156, stride=26, samples_per_mm=52.0)
    >>> grid.windows
    [(0, 156), (26, 156), (52, 156)]
    """

    starts: np.ndarray
    length: int
    stride: int
    samples_per_mm: float

    def __len__(self) -> int:
        return len(self.starts)

    @property
    def windows(self) -> List[Tuple[int, int]]:
        return [(int(s), self.length) for s in self.starts]

    @property
    def centers_mm(self) -> np.ndarray:
        return (self.starts + self.length / 2) / self.samples_per_mm

    @property
    def bounds_mm(self) -> np.ndarray:
        """(n_windows, 2) array of window top and bottom depths."""
        top = self.starts / self.samples_per_mm
        return np.column_stack([top, top + self.length / self.samples_per_mm])


def window_grid(frame: RFFrame, config: EstimatorConfig) -> WindowGrid:
    """
    Lay out windows of `window_mm` every `shift_mm`, all fully inside the frame.

    :raises ConfigurationError: if the frame is shorter than one window or the stride is below a sample
    """
    spm = frame.samples_per_mm
    length = config.window_samples(spm)
    stride = config.stride_samples(spm)
    if length < 2:
        raise ConfigurationError(f"window_mm={config.window_mm} spans fewer than two samples")
    if frame.n_samples < length:
        raise ConfigurationError(
            f"window of {length} samples ({config.window_mm} mm) does not fit a {frame.n_samples}-sample A-line"
        )
    n_windows = (frame.n_samples - length) // stride + 1
    return WindowGrid(starts=np.arange(n_windows) * stride, length=length, stride=stride, samples_per_mm=spm)
