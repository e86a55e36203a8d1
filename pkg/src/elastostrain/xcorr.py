"""
Normalized cross-correlation of 1D RF segments.

The correlation coefficient at lag l pairs a[i] with b[i + l] over the samples where both exist,
removes the mean of each overlapping piece and divides by their norms, so every value lies in
[-1, 1] and is unchanged by gain and offset:

    >>> x = np.sin(np.linspace(0, 12, 64)) + np.linspace(0, 1, 64)
    >>> result = ncc(x, x, max_lag=8)
    >>> result.peak_lag, round(result.peak_value, 12)
    (0.0, 1.0)

Raw lagged products come from `scipy.signal.correlate`, which sums directly or through FFTs;
overlap sums come from cumulative sums.
"""
import logging
from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np
from scipy import signal

from elastostrain.errors import ConfigurationError, DegenerateInputError

logger = logging.getLogger(__name__)

CorrelationMethod = Literal["auto", "direct", "fft"]

MIN_SUBWINDOW_SAMPLES = 8


@dataclass(frozen=True, eq=False)
class Segment:
    """A gated piece of an A-line."""

    samples: np.ndarray
    start_index: int = 0

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=float)
        if samples.ndim != 1 or len(samples) < 2:
            raise ValueError("a segment needs at least two samples")
        if not np.all(np.isfinite(samples)):
            raise ValueError("segment samples must be finite")
        object.__setattr__(self, "samples", samples)

    def __len__(self) -> int:
        return len(self.samples)

    def __array__(self, dtype=None, copy=None):
        return self.samples if dtype is None else self.samples.astype(dtype)


@dataclass(frozen=True, eq=False)
class CorrelationResult:
    """Correlation coefficients per integer lag and the location of the largest one."""

    peak_lag: float
    peak_value: float
    full_function: Optional[np.ndarray] = None
    lags: Optional[np.ndarray] = None

    @property
    def peak_index(self) -> int:
        if self.lags is None:
            raise ValueError("no lag axis recorded")
        return int(np.argmax(self.lags == int(round(self.peak_lag))))


def _is_flat(x: np.ndarray) -> bool:
    return bool(np.ptp(x) == 0.0)


def _coefficients(a: np.ndarray, b: np.ndarray, lags: np.ndarray, method: CorrelationMethod) -> np.ndarray:
    """Correlation coefficient of a[i] against b[i + lag] over each overlap."""
    a = a - a.mean()
    b = b - b.mean()
    la, lb = len(a), len(b)
    raw = signal.correlate(b, a, mode="full", method=method)
    cross = raw[lags + la - 1]
    i0 = np.maximum(0, -lags)
    i1 = np.minimum(la, lb - lags)
    n = (i1 - i0).astype(float)
    ca = np.concatenate([[0.0], np.cumsum(a)])
    caa = np.concatenate([[0.0], np.cumsum(a * a)])
    cb = np.concatenate([[0.0], np.cumsum(b)])
    cbb = np.concatenate([[0.0], np.cumsum(b * b)])
    sa = ca[i1] - ca[i0]
    saa = caa[i1] - caa[i0]
    sb = cb[i1 + lags] - cb[i0 + lags]
    sbb = cbb[i1 + lags] - cbb[i0 + lags]
    var_a = saa - sa * sa / n
    var_b = sbb - sb * sb / n
    tol_a = 1e-12 * caa[-1]
    tol_b = 1e-12 * cbb[-1]
    valid = (var_a > tol_a) & (var_b > tol_b) & (n >= 2)
    out = np.zeros(len(lags))
    num = cross - sa * sb / n
    out[valid] = num[valid] / np.sqrt(var_a[valid] * var_b[valid])
    return np.clip(out, -1.0, 1.0)


def _result(values: np.ndarray, lags: np.ndarray) -> CorrelationResult:
    idx = int(np.argmax(values))
    return CorrelationResult(
        peak_lag=float(lags[idx]), peak_value=float(values[idx]), full_function=values, lags=lags
    )


def ncc(a, b, max_lag: int, method: CorrelationMethod = "auto") -> CorrelationResult:
    """
    Zero-normalized cross-correlation for lags -max_lag..max_lag.

    >>> x = np.sin(np.linspace(0, 20, 80))
    >>> round(float(ncc(x, -x, 4).full_function[4]), 12)
    -1.0

    :param a: reference segment
    :param b: segment compared against `a`; positive lags mean `b` is delayed
    :param max_lag: largest lag in samples; must be below both lengths
    :param method: raw correlation engine passed to scipy ("auto", "direct" or "fft")
    :return: result with the integer-lag peak and the full function
    :raises DegenerateInputError: if either segment is constant
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if max_lag < 0 or max_lag >= min(len(a), len(b)):
        raise ConfigurationError(f"max_lag={max_lag} must be in [0, {min(len(a), len(b))})")
    if _is_flat(a) or _is_flat(b):
        raise DegenerateInputError("cannot correlate a zero-variance segment")
    lags = np.arange(-max_lag, max_lag + 1)
    return _result(_coefficients(a, b, lags, method), lags)


def ncc_track(template, line, start: int, max_lag: int, method: CorrelationMethod = "auto") -> CorrelationResult:
    """
    Slide `template` along `line` around `start`.

    Lag l compares the template with line[start + l : start + l + len(template)]. Where that read
    runs past either end of the line only the overlapping samples are compared, so a window at
    the top of the line can still be matched at a negative lag. Lags leaving less than half the
    template inside the line are dropped.

    >>> line = np.sin(np.arange(200) * 0.7) * np.hanning(200)
    >>> ncc_track(line[50:100], line, start=47, max_lag=6).peak_lag
    3.0
    >>> ncc_track(line[3:60], line, start=0, max_lag=6).peak_lag
    3.0
    >>> ncc_track(line[0:60], line[4:], start=0, max_lag=6).peak_lag
    -4.0

    :raises DegenerateInputError: if no lag fits or either side is constant
    """
    template = np.asarray(template, dtype=float)
    line = np.asarray(line, dtype=float)
    length = len(template)
    min_overlap = max(2, (length + 1) // 2)
    lo = max(-max_lag, min_overlap - length - start)
    hi = min(max_lag, len(line) - start - min_overlap)
    if lo > hi:
        raise DegenerateInputError(f"no lag in [-{max_lag}, {max_lag}] keeps the window at {start} inside the line")
    first = max(0, start + lo)
    region = line[first : min(len(line), start + hi + length)]
    if _is_flat(template) or _is_flat(region):
        raise DegenerateInputError("cannot correlate a zero-variance segment")
    lags = np.arange(lo, hi + 1)
    values = _coefficients(template, region, lags + start - first, method)
    return _result(values, lags)


def refine_peak(full_function, peak_index: int) -> float:
    """
    Sub-sample peak position by a parabola through the peak and its two neighbours.

    >>> round(refine_peak([0.7, 1.0, 0.9], 1), 12)
    1.25
    >>> refine_peak([1.0, 0.9, 0.8], 0)
    0.0

    :param full_function: correlation values on an integer grid
    :param peak_index: index of the integer maximum
    :return: refined index, within half a sample of `peak_index`
    """
    y = np.asarray(full_function, dtype=float)
    if peak_index <= 0 or peak_index >= len(y) - 1:
        return float(peak_index)
    left, mid, right = y[peak_index - 1], y[peak_index], y[peak_index + 1]
    if not (np.isfinite(left) and np.isfinite(mid) and np.isfinite(right)):
        return float(peak_index)
    denom = 2.0 * (2.0 * mid - left - right)
    if denom <= 0:
        return float(peak_index)
    offset = float(np.clip((right - left) / denom, -0.5, 0.5))
    return peak_index + offset


def subwindow_scores(a, b, n_sub: int, max_lag: int, method: CorrelationMethod = "auto") -> np.ndarray:
    """
    Peak NCC of each pair of corresponding sub-windows; a constant pair scores -1.

    Lags are limited to a quarter of the sub-window so every overlap keeps most of its samples.

    :raises ConfigurationError: if a sub-window would be shorter than 8 samples
    :raises DegenerateInputError: if every pair is constant
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if len(a) != len(b):
        raise ConfigurationError(f"segments differ in length: {len(a)} vs {len(b)}")
    if n_sub < 1:
        raise ConfigurationError(f"n_sub must be positive, got {n_sub}")
    sub_len = len(a) // n_sub
    if sub_len < MIN_SUBWINDOW_SAMPLES:
        raise ConfigurationError(
            f"{n_sub} sub-windows of a {len(a)}-sample window are {sub_len} samples long; "
            f"at least {MIN_SUBWINDOW_SAMPLES} are needed"
        )
    lag = min(max_lag, max(1, sub_len // 4))
    scores = np.empty(n_sub)
    n_degenerate = 0
    for k in range(n_sub):
        piece = slice(k * sub_len, (k + 1) * sub_len)
        try:
            scores[k] = ncc(a[piece], b[piece], lag, method).peak_value
        except DegenerateInputError:
            scores[k] = -1.0
            n_degenerate += 1
    if n_degenerate == n_sub:
        raise DegenerateInputError("every sub-window pair is constant")
    return scores


def lower_median(values) -> float:
    """
    Median that is always one of the values: the lower middle element for even counts.

    >>> lower_median([0.90, 0.85, 0.20, 0.88, 0.87])
    0.87
    >>> lower_median([4, 1, 3, 2])
    2.0
    """
    ordered = np.sort(np.asarray(values, dtype=float))
    return float(ordered[(len(ordered) - 1) // 2])


def subwindow_median_max(a, b, n_sub: int, max_lag: int, method: CorrelationMethod = "auto") -> float:
    """
    Robust match score: the lower median of the sub-window correlation maxima.

    A single sub-window with a false peak cannot move the median when n_sub >= 3.

    >>> x = np.random.default_rng(0).standard_normal(150)
    >>> round(subwindow_median_max(x, x, n_sub=3, max_lag=10), 9)
    1.0
    """
    return lower_median(subwindow_scores(a, b, n_sub, max_lag, method))
