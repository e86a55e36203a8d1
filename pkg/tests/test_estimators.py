import numpy as np
import pytest

from elastostrain.datamodel import EstimatorConfig, RFFrame
from elastostrain.errors import ConfigurationError, DegenerateInputError, EstimationError
from elastostrain.estimators import (
    AdaptiveStretchingEstimator,
    GradientEstimator,
    TrackState,
    WindowEstimate,
    WindowGrid,
    adaptive_stretch_segment,
    estimate_displacement_line,
    gradient_strain_line,
    track_line,
    window_grid,
)
from elastostrain.estimators.adaptive import stretched_correlations
from tests import band_limited

WINDOW = 156
STRIDE = 26


def _compressed_lines(alpha: float, n: int = 800, seed: int = 3):
    """A pre line and its uniformly compressed post line: pre[q] == post(alpha * q)."""
    f = band_limited(n, seed=seed)
    t = np.arange(n)
    return f(t), f(t / alpha)


def test_window_grid_layout():
    grid = window_grid(RFFrame(np.ones((2, 624))), EstimatorConfig())
    assert (grid.length, grid.stride, len(grid)) == (WINDOW, STRIDE, 19)
    assert grid.starts[-1] + grid.length <= 624
    assert grid.centers_mm[0] == pytest.approx(78 / RFFrame(np.ones((1, 1))).samples_per_mm)
    assert grid.bounds_mm.shape == (19, 2)


def test_window_grid_single_window():
    grid = window_grid(RFFrame(np.ones((1, WINDOW))), EstimatorConfig())
    assert grid.windows == [(0, WINDOW)]


def test_window_grid_frame_too_short():
    with pytest.raises(ConfigurationError):
        window_grid(RFFrame(np.ones((1, WINDOW - 1))), EstimatorConfig())


def test_stride_below_one_sample():
    with pytest.raises(ConfigurationError):
        window_grid(RFFrame(np.ones((1, 400))), EstimatorConfig(shift_mm=0.001))


@pytest.mark.parametrize("max_lag_mm,expected", [(None, 37), (0.5, 26), (1.5, 78), (5.0, 78)])
def test_axial_search_range_is_capped_at_half_a_window(max_lag_mm, expected):
    assert EstimatorConfig(max_lag_mm=max_lag_mm).max_lag_for_window(156) == expected


def test_gradient_strain_line():
    strain = gradient_strain_line([0.0, -0.52, -1.04, -1.56], STRIDE)
    assert np.allclose(strain, 0.02)
    assert len(strain) == 4
    with pytest.raises(ConfigurationError):
        gradient_strain_line([0.0], STRIDE)


def test_gradient_outlier_corrupts_two_rows():
    d = -0.52 * np.arange(10)
    d[5] += 7.0
    strain = gradient_strain_line(d, STRIDE)
    assert np.flatnonzero(~np.isclose(strain, 0.02)).tolist() == [4, 5]


def test_displacement_of_delayed_line(estimator_config):
    line = np.random.default_rng(0).standard_normal(700)
    post = np.roll(line, 5)
    displacements, peaks, flagged = estimate_displacement_line(line, post, estimator_config)
    assert np.array_equal(np.round(displacements), np.full(len(displacements), 5.0))
    assert np.allclose(displacements, 5.0, atol=0.1)
    assert np.all(peaks > 0.999)
    assert not flagged.any()


def test_displacement_and_gradient_on_compressed_line(estimator_config):
    pre, post = _compressed_lines(0.98)
    displacements, _, flagged = estimate_displacement_line(pre, post, estimator_config)
    assert not flagged.any()
    # the centre of the pre window at s sits at 0.98 (s + half a window) in the post line
    grid = window_grid(RFFrame(pre[np.newaxis, :]), estimator_config)
    assert np.allclose(displacements, -0.02 * (grid.starts + WINDOW / 2), atol=0.5)
    strain = gradient_strain_line(displacements, grid.stride)
    assert np.median(strain) == pytest.approx(0.02, rel=0.05)


def test_degenerate_window_is_flagged_and_carried(estimator_config):
    line = np.random.default_rng(1).standard_normal(700)
    line[200:420] = 0.0
    displacements, peaks, flagged = estimate_displacement_line(line, np.roll(line, 3), estimator_config)
    assert flagged.any()
    first = int(np.flatnonzero(flagged)[0])
    assert displacements[first] == displacements[first - 1]
    assert peaks[first] == 0.0


@pytest.mark.parametrize("alpha", [0.98, 0.96, 0.92, 0.88, 0.84])
def test_stretch_recovery_matches_fine_grid(alpha, estimator_config):
    f = band_limited(0, seed=5)
    pre = f(100 + np.arange(WINDOW))
    post = f(100 + (np.arange(700) - 100) / alpha)
    result = adaptive_stretch_segment(pre, post, 100.0, estimator_config)
    assert result.strain == pytest.approx(1 - alpha, abs=2e-3)
    assert result.strain == 1 - result.alpha
    assert abs(result.lag_samples) < 1.0
    fine = np.arange(estimator_config.alpha_min, 1.0 + 1e-12, 1e-4)
    table = stretched_correlations(pre, post, 100.0, fine, estimator_config.max_lag_for_window(WINDOW))
    oracle = fine[int(np.argmax(table.max(axis=1)))]
    assert result.alpha == pytest.approx(oracle, abs=2e-3)


def test_stretch_stays_in_admissible_range(estimator_config):
    rng = np.random.default_rng(2)
    for _ in range(5):
        pre, post = rng.standard_normal(WINDOW), rng.standard_normal(600)
        result = adaptive_stretch_segment(pre, post, 100.0, estimator_config)
        assert estimator_config.alpha_min <= result.alpha <= 1.0
        assert -1.0 <= result.peak_correlation <= 1.0


def test_stretch_without_refinement(estimator_config):
    cfg = estimator_config.model_copy(update={"alpha_refine_iters": 0})
    pre, post = _compressed_lines(0.97)
    result = adaptive_stretch_segment(pre[100 : 100 + WINDOW], post, 97.0, cfg)
    assert np.isclose(cfg.alpha_grid(), result.alpha).any()
    assert result.strain == pytest.approx(0.03, abs=2.6e-3)


def test_stretch_errors(estimator_config):
    with pytest.raises(DegenerateInputError):
        adaptive_stretch_segment(np.ones(WINDOW), np.arange(600.0), 100.0, estimator_config)
    with pytest.raises(EstimationError):
        adaptive_stretch_segment(np.arange(WINDOW, dtype=float), np.zeros(600), 100.0, estimator_config)
    with pytest.raises(EstimationError):
        adaptive_stretch_segment(np.arange(WINDOW, dtype=float), np.arange(100.0), 0.0, estimator_config)


def test_adaptive_decorrelated_window_corrupts_one_row(estimator_config):
    alpha = 0.98
    pre, post = _compressed_lines(alpha)
    starts = STRIDE * np.arange(12)
    noise = np.random.default_rng(9).standard_normal(WINDOW)

    def strains(bad):
        windows = [noise if k == bad else pre[s : s + WINDOW] for k, s in enumerate(starts)]
        return np.array(
            [adaptive_stretch_segment(w, post, alpha * s, estimator_config).strain for w, s in zip(windows, starts)]
        )

    clean = strains(bad=None)
    assert np.allclose(clean, 0.02, atol=2e-3)
    corrupted = strains(bad=4)
    assert np.flatnonzero(corrupted != clean).tolist() == [4]


def test_adaptive_tracking_along_a_line(estimator_config):
    pre, post = _compressed_lines(0.97)
    grid = window_grid(RFFrame(pre[np.newaxis, :]), estimator_config)
    track = track_line(pre[np.newaxis, :], post[np.newaxis, :], 0, grid, AdaptiveStretchingEstimator(estimator_config))
    assert not track.flagged.any()
    assert np.allclose(track.values, 0.03, atol=2e-3)
    assert track.lateral_score is None


def test_estimators_carry_over():
    state = TrackState(lag=-4.0, alpha=0.97)
    assert AdaptiveStretchingEstimator().carry_over(state).value == pytest.approx(0.03)
    assert GradientEstimator().carry_over(state).value == -4.0


def test_gradient_state_carries_stretch_of_displacements():
    estimator = GradientEstimator()
    grid = WindowGrid(starts=np.array([0, 26, 52]), length=WINDOW, stride=STRIDE, samples_per_mm=52.0)
    state = TrackState()
    estimator.advance(state, WindowEstimate(value=-1.56, lag=-1.56, peak_correlation=0.9), grid)
    assert state.alpha == 1.0
    estimator.advance(state, WindowEstimate(value=-2.6, lag=-2.6, peak_correlation=0.9), grid)
    assert state.alpha == pytest.approx(0.96)
    assert (state.lag, state.windows) == (-2.6, 2)


def test_alignment_of_estimates():
    adaptive = AdaptiveStretchingEstimator().alignment(
        WindowEstimate(value=0.02, lag=-3.0, peak_correlation=1.0, alpha=0.98), 100, WINDOW
    )
    assert adaptive == (97.0, 0.98)
    origin, alpha = GradientEstimator().alignment(
        WindowEstimate(value=-4.0, lag=-4.0, peak_correlation=1.0, alpha=0.98), 100, WINDOW + 1
    )
    # the centre of the pre window, sample 178, sits at 174 in the post line
    assert alpha == 0.98
    assert origin + alpha * WINDOW / 2 == pytest.approx(174.0)


def test_gradient_top_window_matches_negative_delay(estimator_config):
    pre, post = _compressed_lines(0.96)
    displacements, peaks, _ = estimate_displacement_line(pre, post, estimator_config)
    assert displacements[0] == pytest.approx(-0.04 * WINDOW / 2, abs=0.5)
    assert peaks[0] > 0.6
