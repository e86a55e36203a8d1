"""
8-bit binary PGM (P5) images.

Strain images have one pixel per window and line, black at zero strain and white at the 99th
percentile. B-mode images have one pixel per sample and line.
"""
from pathlib import Path
from typing import Union

import numpy as np

from elastostrain.bmode import DEFAULT_DYNAMIC_RANGE_DB, bmode_gray
from elastostrain.datamodel import RFFrame, StrainMap


def strain_to_gray(values: np.ndarray) -> np.ndarray:
    """
    Map strain to 0..255, saturating at the 99th percentile; negative strain is black.

    >>> strain_to_gray(np.array([[0.0, 0.01], [0.02, -0.01]])).tolist()
    [[0, 129], [255, 0]]
    """
    values = np.asarray(values, dtype=float)
    top = float(np.percentile(values, 99))
    if not np.isfinite(top) or top <= 0:
        return np.zeros(values.shape, dtype=np.uint8)
    return np.round(np.clip(values / top, 0.0, 1.0) * 255).astype(np.uint8)


def write_gray(path: Union[str, Path], gray: np.ndarray) -> None:
    """Write a (height, width) uint8 array."""
    gray = np.asarray(gray, dtype=np.uint8)
    height, width = gray.shape
    Path(path).write_bytes(f"P5\n{width} {height}\n255\n".encode("ascii") + gray.tobytes())


def write_pgm(path: Union[str, Path], strain_map: StrainMap) -> None:
    """One pixel per window and line: width is the number of lines, height the number of windows."""
    write_gray(path, strain_to_gray(strain_map.values))


def write_bmode_pgm(
    path: Union[str, Path], frame: RFFrame, dynamic_range_db: float = DEFAULT_DYNAMIC_RANGE_DB
) -> None:
    """Envelope-detected, log-compressed image of `frame`: width is the number of lines, height the samples."""
    write_gray(path, bmode_gray(frame, dynamic_range_db))


def read_pgm(path: Union[str, Path]) -> np.ndarray:
    """Read a P5 image written by this module into a (height, width) uint8 array."""
    data = Path(path).read_bytes()
    magic, width, height, maxval = data.split(maxsplit=4)[:4]
    if magic != b"P5" or int(maxval) != 255:
        raise ValueError(f"{path} is not an 8-bit binary PGM")
    w, h = int(width), int(height)
    return np.frombuffer(data[len(data) - w * h :], dtype=np.uint8).reshape(h, w)
