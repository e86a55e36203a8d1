"""
Quality measures for comparing strain estimators.

* SNRe: mean over standard deviation of strain in a uniform region.
* CNRe: separation of lesion and background strain relative to their spread.
* Per-line mean maximum correlation: how well each A-line was matched, averaged over depth.
* Correlation profiles: the full NCC functions a single window sees on each candidate post line.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from elastostrain.datamodel import EstimatorConfig, Method, MethodTag, QualityRaw, RFFrame, StrainMap
from elastostrain.errors import ConfigurationError, DegenerateInputError, DegenerateROIError, DomainError
from elastostrain.estimation import check_pair
from elastostrain.estimators.lateral import estimator_scorer, lateral_bounds, search_lateral
from elastostrain.estimators.tracking import track_line
from elastostrain.estimators.windows import window_grid
from elastostrain.registry import get_estimator
from elastostrain.xcorr import ncc_track

logger = logging.getLogger(__name__)

DEFAULT_ROI_HALF_WIDTH_MM = 2.0

# (lesion centre, background centre) in phantom mm, one pair per inclusion of the reference phantom
DEFAULT_ROI_PAIRS_MM: Tuple[Tuple[Tuple[float, float], Tuple[float, float]], ...] = (
    ((20.0, 10.0), (8.0, 10.0)),
    ((20.0, 20.0), (8.0, 20.0)),
    ((10.0, 30.0), (20.0, 30.0)),
    ((30.0, 30.0), (30.0, 22.0)),
)


@dataclass(frozen=True)
class ROI:
    """
    A rectangle of a strain map: half-open window-row and line ranges.

    >>> ROI((2, 5), (0, 4)).size
    12
    """

    row_range: Tuple[int, int]
    col_range: Tuple[int, int]

    def __post_init__(self):
        (r0, r1), (c0, c1) = self.row_range, self.col_range
        if r1 <= r0 or c1 <= c0 or r0 < 0 or c0 < 0:
            raise ConfigurationError(f"empty or negative ROI rows={self.row_range} cols={self.col_range}")

    @property
    def size(self) -> int:
        return (self.row_range[1] - self.row_range[0]) * (self.col_range[1] - self.col_range[0])

    def values(self, strain_map: StrainMap) -> np.ndarray:
        """
        :raises ConfigurationError: if the ROI leaves the map
        """
        n_rows, n_cols = strain_map.values.shape
        if self.row_range[1] > n_rows or self.col_range[1] > n_cols:
            raise ConfigurationError(
                f"ROI rows={self.row_range} cols={self.col_range} exceeds map of {n_rows}x{n_cols}"
            )
        return strain_map.values[slice(*self.row_range), slice(*self.col_range)]

    @classmethod
    def around_mm(
        cls,
        strain_map: StrainMap,
        line_positions_mm: Sequence[float],
        x_mm: float,
        y_mm: float,
        half_width_mm: float = DEFAULT_ROI_HALF_WIDTH_MM,
    ) -> "ROI":
        """
        The windows whose centres and the lines whose positions lie within `half_width_mm` of (x, y).

        :raises DomainError: if no window or no line falls inside
        """
        rows = np.flatnonzero(np.abs(strain_map.axial_positions_mm - y_mm) <= half_width_mm)
        cols = np.flatnonzero(np.abs(np.asarray(line_positions_mm, dtype=float) - x_mm) <= half_width_mm)
        if len(rows) == 0 or len(cols) == 0:
            raise DomainError(f"no strain samples within {half_width_mm} mm of ({x_mm}, {y_mm})")
        return cls((int(rows[0]), int(rows[-1]) + 1), (int(cols[0]), int(cols[-1]) + 1))


@dataclass
class QualityReport:
    """Summary metrics for one strain map."""

    snr_by_roi: Dict[str, float] = field(default_factory=dict)
    cnr_by_lesion: Dict[str, float] = field(default_factory=dict)
    per_line_mean_max_corr: Optional[np.ndarray] = None
    method_tag: Optional[MethodTag] = None

    def to_dataframe(self) -> pd.DataFrame:
        rows = [{"metric": "snr_e", "roi": k, "value": v} for k, v in self.snr_by_roi.items()]
        rows += [{"metric": "cnr_e", "roi": k, "value": v} for k, v in self.cnr_by_lesion.items()]
        df = pd.DataFrame(rows, columns=["metric", "roi", "value"])
        df.insert(0, "method", str(self.method_tag) if self.method_tag else "")
        return df


def snr_e(strain_map: StrainMap, roi: ROI) -> float:
    """
    Elastographic SNR: mean / population standard deviation over the ROI.

    >>> m = StrainMap(np.array([[0.01, 0.03], [0.01, 0.03]]), np.array([1.0, 2.0]))
    >>> round(snr_e(m, ROI((0, 2), (0, 2))), 6)
    2.0

    :raises DegenerateROIError: if the strain is constant over the ROI
    """
    values = roi.values(strain_map)
    std = float(np.std(values))
    if std == 0.0:
        raise DegenerateROIError(f"strain is constant over ROI rows={roi.row_range} cols={roi.col_range}")
    return float(np.mean(values)) / std


def cnr_e(strain_map: StrainMap, lesion: ROI, background: ROI) -> float:
    """
    Contrast-to-noise ratio |mean_b - mean_l| / sqrt(var_b + var_l).

    :raises DegenerateROIError: if both regions are constant
    """
    lv = lesion.values(strain_map)
    bv = background.values(strain_map)
    spread = float(np.var(lv) + np.var(bv))
    if spread == 0.0:
        raise DegenerateROIError("lesion and background strain are both constant")
    return abs(float(np.mean(bv)) - float(np.mean(lv))) / float(np.sqrt(spread))


def per_line_mean_max_corr(quality: QualityRaw) -> np.ndarray:
    """Mean over depth of each A-line's per-window peak correlation."""
    return np.asarray(quality.peak_correlation, dtype=float).mean(axis=0)


def roi_pairs(
    strain_map: StrainMap,
    line_positions_mm: Sequence[float],
    pairs_mm: Sequence[Tuple[Tuple[float, float], Tuple[float, float]]] = DEFAULT_ROI_PAIRS_MM,
    half_width_mm: float = DEFAULT_ROI_HALF_WIDTH_MM,
) -> Tuple[List[ROI], List[ROI]]:
    """
    Lesion and background ROIs laid onto a strain map from (lesion, background) centres in mm.

    The defaults are the reference phantom's four inclusions, each against nearby background.
    """
    lesions = [ROI.around_mm(strain_map, line_positions_mm, x, y, half_width_mm) for (x, y), _ in pairs_mm]
    backgrounds = [ROI.around_mm(strain_map, line_positions_mm, x, y, half_width_mm) for _, (x, y) in pairs_mm]
    return lesions, backgrounds


def quality_report(
    strain_map: StrainMap,
    quality: QualityRaw,
    lesion_rois: Sequence[ROI],
    background_rois: Sequence[ROI],
) -> QualityReport:
    """
    SNRe of every background ROI, CNRe of every lesion against its background, and the
    per-line mean maximum correlation.

    ROIs are paired by position. A region with no spread is logged and left out.
    """
    if len(lesion_rois) != len(background_rois):
        raise ConfigurationError(f"{len(lesion_rois)} lesion ROIs but {len(background_rois)} background ROIs")
    report = QualityReport(per_line_mean_max_corr=per_line_mean_max_corr(quality), method_tag=strain_map.method_tag)
    for n, (lesion, background) in enumerate(zip(lesion_rois, background_rois)):
        name = f"lesion_{n}"
        try:
            report.snr_by_roi[f"background_{n}"] = snr_e(strain_map, background)
        except DegenerateROIError as e:
            logger.warning(f"background_{n}: {e}")
        try:
            report.cnr_by_lesion[name] = cnr_e(strain_map, lesion, background)
        except DegenerateROIError as e:
            logger.warning(f"{name}: {e}")
    return report


@dataclass(frozen=True, eq=False)
class ProfileEntry:
    """
    NCC function of one window against post line i + shift.

    `peak` is the maximum of that unstretched function. `estimator_peak` and `alpha` are the
    correlation and stretch the estimator itself reaches on the line, which for adaptive
    stretching is the stretched maximum; both are None when the estimator finds no match.
    """

    shift: int
    lags: np.ndarray
    values: np.ndarray
    peak: float
    lateral_score: Optional[float]
    estimator_peak: Optional[float] = None
    alpha: Optional[float] = None


PROFILE_COLUMNS = ["shift", "lag_samples", "ncc", "peak", "estimator_peak", "alpha", "lateral_score", "chosen"]


@dataclass(frozen=True, eq=False)
class CorrelationProfile:
    """Correlation functions of one window on every candidate post line."""

    line: int
    window: int
    chosen_shift: int
    axial_offset: float
    entries: List[ProfileEntry]

    def entry(self, shift: int) -> ProfileEntry:
        for e in self.entries:
            if e.shift == shift:
                return e
        raise KeyError(shift)

    def to_dataframe(self) -> pd.DataFrame:
        """Long format: one row per (shift, lag)."""

        def optional(value: Optional[float]) -> float:
            return np.nan if value is None else value

        frames = [
            pd.DataFrame(
                {
                    "shift": e.shift,
                    "lag_samples": e.lags,
                    "ncc": e.values,
                    "peak": e.peak,
                    "estimator_peak": optional(e.estimator_peak),
                    "alpha": optional(e.alpha),
                    "lateral_score": optional(e.lateral_score),
                    "chosen": e.shift == self.chosen_shift,
                }
            )
            for e in self.entries
        ]
        if not frames:
            return pd.DataFrame(columns=PROFILE_COLUMNS)
        return pd.concat(frames, ignore_index=True)


def correlation_profile_dump(
    pre: RFFrame,
    post: RFFrame,
    line_i: int,
    window_k: int,
    config: EstimatorConfig,
    method: Method = "adaptive",
) -> CorrelationProfile:
    """
    Replay the 1.5D tracker on one line up to window k and record what that window sees.

    For every lateral offset j within the search radius, the window is correlated against post
    line i + j around the tracker's predicted axial position. The lateral score of each offset is
    computed exactly as the tracker computes it, so the chosen offset's score matches the estimate.

    :raises ConfigurationError: if the line or window does not exist
    """
    check_pair(pre, post)
    grid = window_grid(pre, config)
    if not 0 <= line_i < pre.n_lines:
        raise ConfigurationError(f"line {line_i} does not exist; the frame has {pre.n_lines} lines")
    if not 0 <= window_k < len(grid):
        raise ConfigurationError(f"window {window_k} does not exist; the frame has {len(grid)} windows")
    estimator = get_estimator(method, config=config)
    lateral = config.lateral_radius_n > 0
    state = track_line(pre.samples, post.samples, line_i, grid, estimator, lateral=lateral, n_windows=window_k).state
    start = int(grid.starts[window_k])
    window = pre.samples[line_i, start : start + grid.length]
    lo, hi = lateral_bounds(line_i, pre.n_lines, config.lateral_radius_n)
    scorer = estimator_scorer(window, post.samples, line_i, start, state, estimator)
    found = {j: scorer(j) for j in range(lo, hi + 1)}
    chosen = search_lateral(pre.n_lines, line_i, state.shift, config, found.get).shift if lateral else 0
    max_lag = config.max_lag_for_window(grid.length)
    offset = int(round(state.lag))
    entries = []
    for j in range(lo, hi + 1):
        try:
            result = ncc_track(window, post.samples[line_i + j], start + offset, max_lag, config.correlation_method)
        except DegenerateInputError as e:
            logger.warning(f"offset {j}: {e}")
            continue
        assert result.full_function is not None and result.lags is not None
        candidate = found[j]
        estimate = None if candidate is None else candidate.estimate
        entries.append(
            ProfileEntry(
                shift=j,
                lags=result.lags + offset,
                values=result.full_function,
                peak=result.peak_value,
                lateral_score=candidate.score if lateral and candidate is not None else None,
                estimator_peak=None if estimate is None else estimate.peak_correlation,
                alpha=None if estimate is None else estimate.alpha,
            )
        )
    return CorrelationProfile(line_i, window_k, chosen, state.lag, entries)
