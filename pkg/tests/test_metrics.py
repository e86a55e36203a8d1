import numpy as np
import pandas as pd
import pytest

from elastostrain.datamodel import EstimatorConfig, MethodTag, QualityRaw, StrainMap
from elastostrain.errors import ConfigurationError, DegenerateROIError, DomainError
from elastostrain.estimation import estimate_strain_map
from elastostrain.metrics import (
    ROI,
    cnr_e,
    correlation_profile_dump,
    per_line_mean_max_corr,
    quality_report,
    roi_pairs,
    snr_e,
)
from tests import SMALL_N_LINES, small_pair

DEPTHS = np.arange(10) * 0.5 + 1.5


def strain_map(values) -> StrainMap:
    values = np.asarray(values, dtype=float)
    return StrainMap(values, np.arange(values.shape[0]) * 0.5 + 1.5, MethodTag("adaptive", lateral=True))


def test_snr_of_two_level_region():
    m = strain_map(np.tile([0.01, 0.03], (4, 2)))
    assert snr_e(m, ROI((0, 4), (0, 4))) == pytest.approx(2.0)


def test_snr_scale_invariant():
    rng = np.random.default_rng(1)
    values = 0.02 + 0.002 * rng.standard_normal((10, 8))
    roi = ROI((2, 8), (1, 7))
    assert snr_e(strain_map(values), roi) == pytest.approx(snr_e(strain_map(7.5 * values), roi))


def test_cnr_known_value():
    values = np.zeros((4, 8))
    values[:, :4] = np.tile([0.01, 0.03], (4, 2))
    values[:, 4:] = np.tile([0.05, 0.07], (4, 2))
    m = strain_map(values)
    # means 0.02 and 0.06, each variance 1e-4
    assert cnr_e(m, ROI((0, 4), (0, 4)), ROI((0, 4), (4, 8))) == pytest.approx(0.04 / np.sqrt(2e-4))


def test_degenerate_regions():
    m = strain_map(np.full((4, 4), 0.02))
    with pytest.raises(DegenerateROIError):
        snr_e(m, ROI((0, 4), (0, 4)))
    with pytest.raises(DegenerateROIError):
        cnr_e(m, ROI((0, 2), (0, 2)), ROI((2, 4), (2, 4)))


def test_single_constant_region_still_gives_cnr():
    values = np.full((4, 4), 0.02)
    values[2:, 2:] = [[0.01, 0.03], [0.03, 0.01]]
    m = strain_map(values)
    assert cnr_e(m, ROI((0, 2), (0, 2)), ROI((2, 4), (2, 4))) == pytest.approx(0.0)


@pytest.mark.parametrize(
    "rows,cols",
    [((2, 2), (0, 1)), ((0, 1), (3, 1)), ((-1, 2), (0, 1))],
)
def test_invalid_roi(rows, cols):
    with pytest.raises(ConfigurationError):
        ROI(rows, cols)


def test_roi_outside_map():
    with pytest.raises(ConfigurationError):
        ROI((0, 20), (0, 2)).values(strain_map(np.ones((10, 4))))


def test_roi_around_mm():
    m = strain_map(np.zeros((10, 8)))
    positions = (np.arange(8) + 0.5) * 1.0
    roi = ROI.around_mm(m, positions, x_mm=4.0, y_mm=3.5, half_width_mm=1.0)
    # depths 2.5..4.5, lines at 3.5 and 4.5
    assert roi.row_range == (2, 7)
    assert roi.col_range == (3, 5)
    with pytest.raises(DomainError):
        ROI.around_mm(m, positions, x_mm=40.0, y_mm=3.5, half_width_mm=1.0)


def test_roi_pairs_follow_centres():
    m = strain_map(np.zeros((10, 8)))
    positions = (np.arange(8) + 0.5) * 1.0
    lesions, backgrounds = roi_pairs(m, positions, [((2.0, 3.0), (6.0, 3.0))], half_width_mm=1.0)
    assert lesions[0].col_range == (1, 3)
    assert backgrounds[0].col_range == (5, 7)
    assert lesions[0].row_range == backgrounds[0].row_range


def test_per_line_mean_max_corr():
    peaks = np.array([[0.9, 0.5], [0.7, 0.3]])
    quality = QualityRaw(peaks, np.zeros_like(peaks, dtype=bool))
    assert np.allclose(per_line_mean_max_corr(quality), [0.8, 0.4])


def test_quality_report_skips_degenerate(caplog):
    values = np.full((4, 8), 0.02)
    values[:, 4:] = np.tile([0.05, 0.07], (4, 2))
    m = strain_map(values)
    quality = QualityRaw(np.ones((4, 8)), np.zeros((4, 8), dtype=bool))
    lesion, background = ROI((0, 4), (4, 8)), ROI((0, 4), (0, 4))
    report = quality_report(m, quality, [lesion], [background])
    assert "background_0" not in report.snr_by_roi
    assert report.cnr_by_lesion["lesion_0"] == pytest.approx(0.04 / 0.01)
    assert "background_0" in caplog.text
    df = report.to_dataframe()
    assert list(df.columns) == ["method", "metric", "roi", "value"]
    assert (df["method"] == "adaptive-1.5D").all()
    with pytest.raises(ConfigurationError):
        quality_report(m, quality, [lesion], [])


@pytest.fixture(scope="module")
def lateral_pair():
    return small_pair(applied_strain=0.02, poisson_ratio=0.0, extra_column_shift=2)


@pytest.mark.parametrize("method", ["gradient", "adaptive"])
def test_profile_matches_tracker(method, lateral_pair):
    pre, post = lateral_pair
    config = EstimatorConfig()
    strain, shifts, quality = estimate_strain_map(pre, post, method, True, config)
    line, window = SMALL_N_LINES // 2, 9
    profile = correlation_profile_dump(pre, post, line, window, config, method=method)
    assert profile.chosen_shift == shifts.shifts[window, line]
    chosen = profile.entry(profile.chosen_shift)
    assert chosen.lateral_score == quality.lateral_score[window, line]
    assert chosen.estimator_peak == quality.peak_correlation[window, line]
    if method == "adaptive":
        assert 1.0 - chosen.alpha == strain.values[window, line]
    assert [e.shift for e in profile.entries] == list(range(-6, 7))
    best = max(profile.entries, key=lambda e: e.peak)
    assert best.shift == 2


def test_profile_dataframe(lateral_pair):
    pre, post = lateral_pair
    profile = correlation_profile_dump(pre, post, 3, 4, EstimatorConfig(lateral_radius_n=2))
    df = profile.to_dataframe()
    assert list(df.columns) == [
        "shift",
        "lag_samples",
        "ncc",
        "peak",
        "estimator_peak",
        "alpha",
        "lateral_score",
        "chosen",
    ]
    assert set(df["shift"]) == {-2, -1, 0, 1, 2}
    assert set(df.loc[df["chosen"], "shift"]) == {profile.chosen_shift}
    assert df["ncc"].between(-1, 1).all()
    assert isinstance(df, pd.DataFrame)


def test_profile_without_lateral_search(lateral_pair):
    pre, post = lateral_pair
    profile = correlation_profile_dump(pre, post, 3, 0, EstimatorConfig(lateral_radius_n=0))
    assert profile.chosen_shift == 0
    assert [e.shift for e in profile.entries] == [0]
    assert profile.entries[0].lateral_score is None


@pytest.mark.parametrize("line,window", [(-1, 0), (SMALL_N_LINES, 0), (0, 19)])
def test_profile_rejects_missing_addresses(line, window, lateral_pair):
    pre, post = lateral_pair
    with pytest.raises(ConfigurationError):
        correlation_profile_dump(pre, post, line, window, EstimatorConfig())


def test_arithmetic_references():
    m = strain_map([[0.018, 0.020], [0.022, 0.020]])
    assert snr_e(m, ROI((0, 2), (0, 2))) == pytest.approx(0.02 / np.sqrt(2e-6))
    assert snr_e(m, ROI((0, 2), (0, 2))) == pytest.approx(14.14, abs=0.01)
    lesion = strain_map([[0.003, 0.007, 0.018, 0.022]])
    # lesion mean 0.005, background mean 0.02, both standard deviations 0.002
    assert cnr_e(lesion, ROI((0, 1), (0, 2)), ROI((0, 1), (2, 4))) == pytest.approx(15 / np.sqrt(8))
