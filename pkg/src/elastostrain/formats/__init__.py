"""Readers and writers for frames (RFF), strain images (PGM) and result tables (CSV)."""
from elastostrain.formats.pgm import read_pgm, strain_to_gray, write_bmode_pgm, write_gray, write_pgm
from elastostrain.formats.rff import read_rff, write_rff
from elastostrain.formats.tables import (
    quality_dataframe,
    shifts_dataframe,
    strain_dataframe,
    write_csv,
)

__all__ = [
    "quality_dataframe",
    "read_pgm",
    "read_rff",
    "shifts_dataframe",
    "strain_dataframe",
    "strain_to_gray",
    "write_bmode_pgm",
    "write_csv",
    "write_gray",
    "write_pgm",
    "write_rff",
]
