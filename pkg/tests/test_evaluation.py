import numpy as np
import pandas as pd
import pytest

from elastostrain.config import RunConfig, load_config
from elastostrain.datamodel import DeformationSpec, EstimatorConfig, LateralShiftMap, QualityRaw, StrainMap
from elastostrain.errors import ConfigurationError, EstimationError
from elastostrain.evaluation import (
    EstimationResult,
    SimulationResult,
    compare_cell,
    estimate,
    run_compare,
    run_dump,
    run_estimate,
    run_simulate,
    simulate,
    summarize_cells,
    with_applied_strain,
    with_lateral_radius,
)
from elastostrain.formats.rff import read_rff
from elastostrain.formats.tables import read_strain_csv
from tests import SMALL_N_LINES


@pytest.fixture
def small_config(small_config_file) -> RunConfig:
    return load_config(small_config_file)


def test_simulate_ground_truth(small_config):
    result = simulate(small_config)
    assert result.pre.n_lines == SMALL_N_LINES
    assert result.ground_truth.values.shape == (19, SMALL_N_LINES)
    assert np.allclose(result.ground_truth.values, 0.02)


def test_run_simulate_writes_outputs(small_config, tmp_path):
    result = run_simulate(small_config, tmp_path)
    for name in ["pre.rff", "post.rff", "pre_bmode.pgm", "post_bmode.pgm", "ground_truth.csv", "config.yaml"]:
        assert (tmp_path / name).exists()
    stored = read_rff(tmp_path / "pre.rff")
    assert np.allclose(stored.samples, result.pre.samples, rtol=1e-6, atol=1e-6 * np.abs(result.pre.samples).max())
    assert load_config(tmp_path / "config.yaml") == small_config
    truth = read_strain_csv(tmp_path / "ground_truth.csv")
    assert np.allclose(truth.values, result.ground_truth.values)


@pytest.mark.parametrize("lateral_n", [None, 2])
def test_run_estimate_writes_outputs(lateral_n, small_config, tmp_path):
    run_simulate(small_config, tmp_path / "sim")
    result = run_estimate(
        tmp_path / "sim" / "pre.rff", tmp_path / "sim" / "post.rff", "adaptive", lateral_n, small_config, tmp_path
    )
    for name in ["strain.csv", "strain.pgm", "bmode.pgm", "shifts.csv", "quality.csv", "report.csv"]:
        assert (tmp_path / name).exists()
    assert str(result.strain.method_tag) == ("adaptive-1D" if lateral_n is None else "adaptive-1.5D")
    assert result.report is not None
    assert "background_0" in result.report.snr_by_roi
    quality = pd.read_csv(tmp_path / "quality.csv")
    assert len(quality) == result.strain.values.size
    assert quality["lateral_score"].isna().all() == (lateral_n is None)


def test_report_skipped_when_rois_do_not_fit(small_config):
    config = RunConfig.from_flat({**small_config.to_flat(), "metrics.roi_pairs_mm": [[[30.0, 30.0], [4.0, 4.0]]]})
    sim = simulate(config)
    result = estimate(sim.pre, sim.post, "gradient", None, config)
    assert result.report is None


def test_with_lateral_radius():
    assert with_lateral_radius(EstimatorConfig(), 2).lateral_radius_n == 2
    with pytest.raises(ConfigurationError):
        with_lateral_radius(EstimatorConfig(), -1)


def test_summarize_cells_takes_medians():
    cells = [
        {
            "applied_strain": 0.02,
            "seed": seed,
            "method": "gradient",
            "mode": "1D",
            "snr_e": snr,
            "per_line_corr": np.array([0.9, 0.7]) + seed / 100,
        }
        for seed, snr in enumerate([1.0, 5.0, 3.0])
    ]
    table, per_line = summarize_cells(cells)
    assert table.loc[0, "snr_e"] == 3.0
    assert table.loc[0, "n_seeds"] == 3
    assert per_line["mean_max_corr"].tolist() == pytest.approx([0.91, 0.71])


def test_run_compare(small_config, tmp_path):
    result = run_compare(small_config, tmp_path)
    for name in ["snr_table.csv", "per_line_corr.csv", "corr_profiles.csv", "config.yaml"]:
        assert (tmp_path / name).exists()
    table = pd.read_csv(tmp_path / "snr_table.csv")
    assert set(table["mode"]) == {"1D", "1.5D"}
    assert (table["method"] == "gradient").all()
    assert table["median_strain"].to_numpy() == pytest.approx(0.02, rel=0.2)
    per_line = pd.read_csv(tmp_path / "per_line_corr.csv")
    assert len(per_line) == 2 * SMALL_N_LINES
    assert result.profile is not None
    assert result.profile.line == SMALL_N_LINES // 2


def test_run_compare_needs_cells(small_config, tmp_path):
    config = small_config.model_copy(update={"compare": small_config.compare.model_copy(update={"seeds": ()})})
    with pytest.raises(ConfigurationError):
        run_compare(config, tmp_path)


def test_run_dump(small_config, tmp_path):
    run_simulate(small_config, tmp_path)
    out = tmp_path / "dump" / "profile.csv"
    profile = run_dump(tmp_path / "pre.rff", tmp_path / "post.rff", 5, 3, "gradient", small_config, out)
    df = pd.read_csv(out)
    assert set(df["shift"]) == {e.shift for e in profile.entries}
    assert df["chosen"].any()


def test_with_applied_strain():
    deformation = DeformationSpec(poisson_ratio=0.3)
    assert with_applied_strain(deformation, 0.08) == DeformationSpec(applied_strain=0.08, poisson_ratio=0.3)
    for bad in (1.5, -0.2):
        with pytest.raises(ConfigurationError):
            with_applied_strain(deformation, bad)


def test_compare_errors_name_the_cell(small_config, monkeypatch):
    def failing_estimate(*args, **kwargs):
        raise EstimationError("window failed")

    monkeypatch.setattr("elastostrain.evaluation.estimate", failing_estimate)
    with pytest.raises(EstimationError) as e:
        compare_cell(small_config, 0.02, 3)
    assert str(e.value) == "applied_strain=0.02 seed=3 method=gradient mode=1D: window failed"


def test_run_simulate_is_deterministic(small_config, tmp_path):
    run_simulate(small_config, tmp_path / "a")
    run_simulate(small_config, tmp_path / "b")
    for name in ["pre.rff", "post.rff", "pre_bmode.pgm", "ground_truth.csv"]:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_default_sweep_has_a_row_per_strain_method_and_mode(monkeypatch, tmp_path):
    def quick_simulate(config, phantom=None, deformation=None):
        return SimulationResult(None, None, None)

    def quick_estimate(pre, post, method, lateral_n, config):
        depth = np.array([1.5, 2.0])
        return EstimationResult(
            StrainMap(np.full((2, 3), 0.02), depth),
            LateralShiftMap(np.zeros((2, 3), dtype=int)),
            QualityRaw(np.full((2, 3), 0.9), np.zeros((2, 3), dtype=bool)),
        )

    monkeypatch.setattr("elastostrain.evaluation.simulate", quick_simulate)
    monkeypatch.setattr("elastostrain.evaluation.estimate", quick_estimate)
    monkeypatch.setattr("elastostrain.evaluation.probe_profile", lambda config: None)
    result = run_compare(RunConfig(), tmp_path)
    assert len(result.snr_table) == 24
    assert (result.snr_table["n_seeds"] == 5).all()
    assert len(pd.read_csv(tmp_path / "snr_table.csv")) == 24
    assert len(result.cells) == 24 * 5
