"""
Experiment runners behind the command line: simulate, estimate, compare and dump-corr.

Each runner takes a validated `RunConfig`, writes its outputs into a directory and returns the
in-memory results so that notebooks and tests can use them directly.
"""
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np
import pandas as pd
from pydantic import ValidationError

from elastostrain.config import RunConfig, dump_config
from elastostrain.datamodel import (
    DeformationSpec,
    EstimatorConfig,
    LateralShiftMap,
    Method,
    PhantomSpec,
    QualityRaw,
    RFFrame,
    StrainMap,
)
from elastostrain.errors import ConfigurationError, DomainError, ElastostrainError, with_context
from elastostrain.estimation import estimate_strain_map
from elastostrain.estimators.windows import window_grid
from elastostrain.formats.pgm import write_bmode_pgm, write_pgm
from elastostrain.formats.rff import read_rff, write_rff
from elastostrain.formats.tables import quality_dataframe, shifts_dataframe, strain_dataframe, write_csv
from elastostrain.metrics import (
    CorrelationProfile,
    QualityReport,
    correlation_profile_dump,
    per_line_mean_max_corr,
    quality_report,
    roi_pairs,
)
from elastostrain.phantom import ideal_strain_map, simulate_pair

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


@dataclass
class SimulationResult:
    pre: RFFrame
    post: RFFrame
    ground_truth: StrainMap


@dataclass
class EstimationResult:
    strain: StrainMap
    shifts: LateralShiftMap
    quality: QualityRaw
    report: Optional[QualityReport] = None


@dataclass
class ComparisonResult:
    snr_table: pd.DataFrame
    per_line_corr: pd.DataFrame
    profile: Optional[CorrelationProfile] = None
    cells: List[Dict[str, Any]] = field(default_factory=list)


def _out_dir(out_dir: PathLike) -> Path:
    path = Path(out_dir)
    path.mkdir(parents=True, exist_ok=True)
    return path


def with_lateral_radius(config: EstimatorConfig, lateral_n: int) -> EstimatorConfig:
    """
    A copy of `config` with another lateral search radius.

    :raises ConfigurationError: if the radius is negative
    """
    try:
        return EstimatorConfig.model_validate({**config.model_dump(), "lateral_radius_n": lateral_n})
    except ValidationError as e:
        raise ConfigurationError(f"invalid lateral radius {lateral_n}: {e.errors()[0]['msg']}") from e


def simulate(config: RunConfig, phantom: Optional[PhantomSpec] = None, deformation: Optional[DeformationSpec] = None):
    """Frame pair and window-averaged ground truth for the configured (or given) phantom and deformation."""
    phantom = phantom or config.phantom
    deformation = deformation or config.deformation
    pre, post = simulate_pair(
        phantom,
        config.transducer,
        deformation,
        snr_db=config.noise.snr_db,
        pre_noise_seed=config.noise.pre_seed,
        post_noise_seed=config.noise.post_seed,
        extra_column_shift=config.simulate.extra_column_shift,
    )
    grid = window_grid(pre, config.estimator)
    truth = ideal_strain_map(phantom, deformation, config.transducer.line_positions_mm, grid.bounds_mm)
    return SimulationResult(pre, post, truth)


def run_simulate(config: RunConfig, out_dir: PathLike) -> SimulationResult:
    """
    Write pre.rff, post.rff, pre_bmode.pgm, post_bmode.pgm, ground_truth.csv and the resolved
    config.yaml.
    """
    out = _out_dir(out_dir)
    result = simulate(config)
    write_rff(out / "pre.rff", result.pre)
    write_rff(out / "post.rff", result.post)
    write_bmode_pgm(out / "pre_bmode.pgm", result.pre, config.output.bmode_dynamic_range_db)
    write_bmode_pgm(out / "post_bmode.pgm", result.post, config.output.bmode_dynamic_range_db)
    write_csv(strain_dataframe(result.ground_truth), out / "ground_truth.csv")
    dump_config(config, out / "config.yaml")
    logger.info(f"simulation written to {out}")
    return result


def report_for(strain: StrainMap, quality: QualityRaw, frame: RFFrame, config: RunConfig) -> Optional[QualityReport]:
    """Quality report on the configured ROIs, or None if they do not fit the map."""
    try:
        lesions, backgrounds = roi_pairs(
            strain, frame.line_positions_mm, config.metrics.roi_pairs_mm, config.metrics.roi_half_width_mm
        )
    except (DomainError, ConfigurationError) as e:
        logger.info(f"no quality report: {e}")
        return None
    return quality_report(strain, quality, lesions, backgrounds)


def estimate(
    pre: RFFrame, post: RFFrame, method: Method, lateral_n: Optional[int], config: RunConfig
) -> EstimationResult:
    """1D estimate when `lateral_n` is None, else 1.5D with that search radius."""
    estimator_config = config.estimator if lateral_n is None else with_lateral_radius(config.estimator, lateral_n)
    strain, shifts, quality = estimate_strain_map(pre, post, method, lateral_n is not None, estimator_config)
    return EstimationResult(strain, shifts, quality, report_for(strain, quality, pre, config))


def run_estimate(
    pre_path: PathLike,
    post_path: PathLike,
    method: Method,
    lateral_n: Optional[int],
    config: RunConfig,
    out_dir: PathLike,
) -> EstimationResult:
    """
    Write strain.csv, strain.pgm, bmode.pgm (the pre frame), shifts.csv, quality.csv and, when the
    ROIs fit, report.csv.
    """
    out = _out_dir(out_dir)
    pre = read_rff(pre_path)
    post = read_rff(post_path)
    result = estimate(pre, post, method, lateral_n, config)
    depth = result.strain.axial_positions_mm
    write_csv(strain_dataframe(result.strain), out / "strain.csv")
    write_pgm(out / "strain.pgm", result.strain)
    write_bmode_pgm(out / "bmode.pgm", pre, config.output.bmode_dynamic_range_db)
    write_csv(shifts_dataframe(result.shifts, depth), out / "shifts.csv")
    write_csv(quality_dataframe(result.quality, depth), out / "quality.csv")
    if result.report is not None:
        write_csv(result.report.to_dataframe(), out / "report.csv")
    logger.info(f"{result.strain.method_tag} strain map written to {out}")
    return result


def _cell_seeds(config: RunConfig, seed: int) -> RunConfig:
    """Config for one repetition: phantom and noise draws all follow `seed`."""
    return config.model_copy(
        update={
            "phantom": config.phantom.model_copy(update={"seed": seed}),
            "noise": config.noise.model_copy(update={"pre_seed": 2 * seed + 1, "post_seed": 2 * seed + 2}),
            "simulate": config.simulate.model_copy(update={"extra_column_shift": config.compare.extra_column_shift}),
        }
    )


def _nanmean(values: List[float]) -> float:
    return float(np.mean(values)) if values else float("nan")


def with_applied_strain(deformation: DeformationSpec, applied_strain: float) -> DeformationSpec:
    """
    A copy of `deformation` compressed by `applied_strain` instead.

    :raises ConfigurationError: if the strain is outside [0, 1)
    """
    try:
        return DeformationSpec.model_validate({**deformation.model_dump(), "applied_strain": applied_strain})
    except ValidationError as e:
        raise ConfigurationError(f"invalid applied strain {applied_strain}: {e.errors()[0]['msg']}") from e


def compare_cell(config: RunConfig, applied_strain: float, seed: int) -> List[Dict[str, Any]]:
    """
    Simulate one (strain, seed) pair and estimate it with every method in 1D and 1.5D.

    Module-level so that it can run in a worker process. Errors keep their class and name the
    sweep cell they come from.
    """
    cell = f"applied_strain={applied_strain} seed={seed}"
    cell_config = _cell_seeds(config, seed)
    try:
        sim = simulate(cell_config, deformation=with_applied_strain(cell_config.deformation, applied_strain))
    except ElastostrainError as e:
        raise with_context(e, f"simulating {cell}") from e
    rows = []
    for method in config.compare.methods:
        for lateral in (False, True):
            mode = "1.5D" if lateral else "1D"
            lateral_n = config.estimator.lateral_radius_n if lateral else None
            try:
                result = estimate(sim.pre, sim.post, method, lateral_n, cell_config)
            except ElastostrainError as e:
                raise with_context(e, f"{cell} method={method} mode={mode}") from e
            report = result.report
            rows.append(
                {
                    "applied_strain": applied_strain,
                    "seed": seed,
                    "method": method,
                    "mode": mode,
                    "snr_e": _nanmean(list(report.snr_by_roi.values())) if report else float("nan"),
                    **({f"cnr_{k}": v for k, v in report.cnr_by_lesion.items()} if report else {}),
                    "median_strain": float(np.median(result.strain.values)),
                    "mean_max_corr": float(np.mean(result.quality.peak_correlation)),
                    "per_line_corr": per_line_mean_max_corr(result.quality),
                    "n_flagged": int(result.quality.flagged.sum()),
                }
            )
            row = rows[-1]
            logger.info(f"strain {applied_strain} seed {seed} {method} {row['mode']}: SNRe {row['snr_e']:.2f}")
    return rows


def _run_cells(config: RunConfig) -> List[Dict[str, Any]]:
    jobs = [(s, seed) for s in config.compare.strains for seed in config.compare.seeds]
    if config.compare.workers == 1:
        results = [compare_cell(config, s, seed) for s, seed in jobs]
    else:
        with ProcessPoolExecutor(config.compare.workers) as executor:
            futures = [executor.submit(compare_cell, config, s, seed) for s, seed in jobs]
            results = [f.result() for f in futures]
    return [row for rows in results for row in rows]


def summarize_cells(cells: List[Dict[str, Any]]) -> Tuple[pd.DataFrame, pd.DataFrame]:
    """Medians over seeds: one summary row per (strain, method, mode) and one row per line."""
    keys = ["applied_strain", "method", "mode"]
    df = pd.DataFrame([{k: v for k, v in c.items() if k != "per_line_corr"} for c in cells])
    metric_columns = [c for c in df.columns if c not in keys + ["seed"]]
    table = df.groupby(keys, sort=False)[metric_columns].median().reset_index()
    table.insert(len(keys), "n_seeds", df.groupby(keys, sort=False)["seed"].count().to_numpy())
    per_line = pd.DataFrame(
        [
            {**{k: c[k] for k in keys}, "seed": c["seed"], "line": line, "mean_max_corr": value}
            for c in cells
            for line, value in enumerate(c["per_line_corr"])
        ]
    )
    per_line = per_line.groupby(keys + ["line"], sort=False)["mean_max_corr"].median().reset_index()
    return table, per_line


def probe_profile(config: RunConfig) -> Optional[CorrelationProfile]:
    """Correlation profile of the configured probe window (centre of the map by default)."""
    strains = config.compare.strains
    probe_strain = config.compare.probe_strain
    if probe_strain is None:
        probe_strain = 0.08 if 0.08 in strains else max(strains)
    cell_config = _cell_seeds(config, config.compare.seeds[0])
    sim = simulate(cell_config, deformation=with_applied_strain(cell_config.deformation, probe_strain))
    grid = window_grid(sim.pre, config.estimator)
    line = sim.pre.n_lines // 2 if config.compare.probe_line is None else config.compare.probe_line
    window = len(grid) // 2 if config.compare.probe_window is None else config.compare.probe_window
    return correlation_profile_dump(sim.pre, sim.post, line, window, config.estimator, method="adaptive")


def run_compare(config: RunConfig, out_dir: PathLike) -> ComparisonResult:
    """
    Sweep the applied strain and write snr_table.csv, per_line_corr.csv and corr_profiles.csv.

    Every (strain, seed) cell is independent; `compare.workers` > 1 runs them in a process pool.
    """
    if not config.compare.strains or not config.compare.seeds:
        raise ConfigurationError("compare.strains and compare.seeds must not be empty")
    out = _out_dir(out_dir)
    logger.info(
        f"comparing {len(config.compare.strains)} strains x {len(config.compare.seeds)} seeds "
        f"with {config.compare.workers} worker(s)"
    )
    cells = _run_cells(config)
    table, per_line = summarize_cells(cells)
    write_csv(table, out / "snr_table.csv")
    write_csv(per_line, out / "per_line_corr.csv")
    profile = probe_profile(config)
    if profile is not None:
        write_csv(profile.to_dataframe(), out / "corr_profiles.csv")
    dump_config(config, out / "config.yaml")
    return ComparisonResult(table, per_line, profile, cells)


def run_dump(
    pre_path: PathLike,
    post_path: PathLike,
    line: int,
    window: int,
    method: Method,
    config: RunConfig,
    out_path: Optional[PathLike] = None,
) -> CorrelationProfile:
    """Correlation profile of one window of a stored frame pair, optionally written as CSV."""
    pre = read_rff(pre_path)
    post = read_rff(post_path)
    profile = correlation_profile_dump(pre, post, line, window, config.estimator, method=method)
    if out_path is not None:
        Path(out_path).parent.mkdir(parents=True, exist_ok=True)
        write_csv(profile.to_dataframe(), out_path)
    return profile
