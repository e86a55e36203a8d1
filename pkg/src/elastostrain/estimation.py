"""
Strain maps from a pre/post pair of RF frames.

    >>> from elastostrain.phantom import simulate_pair
    >>> from elastostrain.datamodel import PhantomSpec, TransducerSpec, DeformationSpec
    >>> phantom = PhantomSpec.homogeneous(width_mm=5, height_mm=8, seed=3)
    >>> transducer = TransducerSpec.for_phantom(phantom, n_lines=4)
    >>> pre, post = simulate_pair(phantom, transducer, DeformationSpec(applied_strain=0.01))
    >>> strain, shifts, quality = estimate_strain_map(pre, post, "adaptive", False, EstimatorConfig())
    >>> strain.shape == quality.peak_correlation.shape, str(strain.method_tag)
    (True, 'adaptive-1D')
"""
import logging
from typing import Tuple

import numpy as np

from elastostrain.datamodel import EstimatorConfig, LateralShiftMap, Method, MethodTag, QualityRaw, RFFrame, StrainMap
from elastostrain.errors import ConfigurationError, FrameMismatchError
from elastostrain.estimators.tracking import track_line
from elastostrain.estimators.windows import window_grid
from elastostrain.registry import get_estimator
from elastostrain.xcorr import MIN_SUBWINDOW_SAMPLES

logger = logging.getLogger(__name__)


def check_pair(pre: RFFrame, post: RFFrame) -> None:
    """
    :raises FrameMismatchError: if the frames differ in shape or acquisition metadata
    """
    if pre.samples.shape != post.samples.shape:
        raise FrameMismatchError(f"pre frame is {pre.samples.shape}, post frame is {post.samples.shape}")
    if pre.metadata() != post.metadata():
        raise FrameMismatchError(
            f"acquisition metadata differ: pre (fs, pitch, c, f0) = {pre.metadata()}, post = {post.metadata()}"
        )


def estimate_strain_map(
    pre: RFFrame,
    post: RFFrame,
    method: Method,
    use_1p5d: bool,
    config: EstimatorConfig,
) -> Tuple[StrainMap, LateralShiftMap, QualityRaw]:
    """
    Estimate axial strain on every window of every A-line.

    A-lines are processed independently; with `use_1p5d` pre line i may draw on post lines
    i - n .. i + n. With a search radius of 0 the result equals the 1D estimate.

    :param method: "gradient" or "adaptive"
    :param use_1p5d: search neighbouring post lines for every window
    :return: the strain map, the lateral offset of every window and per-window correlations
    :raises FrameMismatchError: if the frames do not share shape and metadata
    :raises ConfigurationError: if the window layout cannot be honoured
    """
    check_pair(pre, post)
    grid = window_grid(pre, config)
    estimator = get_estimator(method, config=config)
    lateral = use_1p5d and config.lateral_radius_n > 0
    if lateral and grid.length // config.n_sub < MIN_SUBWINDOW_SAMPLES:
        raise ConfigurationError(
            f"{config.n_sub} sub-windows of a {grid.length}-sample window are shorter than "
            f"{MIN_SUBWINDOW_SAMPLES} samples"
        )
    shape = (len(grid), pre.n_lines)
    strain = np.zeros(shape)
    peaks = np.zeros(shape)
    flagged = np.zeros(shape, dtype=bool)
    shifts = np.zeros(shape, dtype=int)
    scores = np.zeros(shape) if lateral else None
    logger.info(f"{method} estimation on {pre.n_lines} lines x {len(grid)} windows (1.5D: {use_1p5d})")
    for i in range(pre.n_lines):
        track = track_line(pre.samples, post.samples, i, grid, estimator, lateral=lateral)
        strain[:, i] = estimator.finish_line(track.values, grid)
        peaks[:, i] = track.peak_correlation
        flagged[:, i] = track.flagged
        shifts[:, i] = track.shifts
        if scores is not None and track.lateral_score is not None:
            scores[:, i] = track.lateral_score
    tag = MethodTag(method, lateral=use_1p5d)
    quality = QualityRaw(peak_correlation=peaks, flagged=flagged, lateral_score=scores, method_tag=tag)
    n_flagged = int(flagged.sum())
    if n_flagged:
        message = f"{n_flagged} of {flagged.size} windows could not be estimated and carry the value above them"
        logger.warning(message)
        quality.notes.append(message)
    return StrainMap(strain, grid.centers_mm, tag), LateralShiftMap(shifts), quality
