"""
Result tables as pandas DataFrames, written as CSV with a header row and `\\n` line endings.

Strain-like maps are wide (one column per A-line, one row per window); per-window quality is long.
"""
from pathlib import Path
from typing import Optional, Union

import numpy as np
import pandas as pd

from elastostrain.datamodel import LateralShiftMap, QualityRaw, StrainMap


def line_columns(n_lines: int):
    return [f"line_{i:03d}" for i in range(n_lines)]


def _wide(values: np.ndarray, depth_mm: np.ndarray) -> pd.DataFrame:
    df = pd.DataFrame(values, columns=line_columns(values.shape[1]))
    df.insert(0, "depth_mm", depth_mm)
    return df


def strain_dataframe(strain_map: StrainMap) -> pd.DataFrame:
    """
    >>> df = strain_dataframe(StrainMap(np.zeros((2, 3)), np.array([1.5, 2.0])))
    >>> list(df.columns)
    ['depth_mm', 'line_000', 'line_001', 'line_002']
    """
    return _wide(strain_map.values, strain_map.axial_positions_mm)


def shifts_dataframe(shifts: LateralShiftMap, depth_mm: np.ndarray) -> pd.DataFrame:
    return _wide(np.asarray(shifts.shifts, dtype=int), depth_mm)


def quality_dataframe(quality: QualityRaw, depth_mm: np.ndarray) -> pd.DataFrame:
    """One row per (window, line) with its peak correlation, lateral score and failure flag."""
    n_windows, n_lines = quality.peak_correlation.shape
    window, line = np.meshgrid(np.arange(n_windows), np.arange(n_lines), indexing="ij")
    lateral: Optional[np.ndarray] = quality.lateral_score
    return pd.DataFrame(
        {
            "window": window.ravel(),
            "depth_mm": np.asarray(depth_mm)[window.ravel()],
            "line": line.ravel(),
            "peak_correlation": quality.peak_correlation.ravel(),
            "lateral_score": np.full(window.size, np.nan) if lateral is None else lateral.ravel(),
            "flagged": quality.flagged.ravel(),
        }
    )


def write_csv(df: pd.DataFrame, path: Union[str, Path]) -> None:
    df.to_csv(path, index=False, lineterminator="\n")


def read_strain_csv(path: Union[str, Path]) -> StrainMap:
    """Inverse of writing `strain_dataframe`; the method tag is not stored."""
    df = pd.read_csv(path)
    return StrainMap(df[line_columns(df.shape[1] - 1)].to_numpy(dtype=float), df["depth_mm"].to_numpy(dtype=float))
