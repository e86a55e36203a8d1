"""Tests for elastostrain."""
from functools import lru_cache
from pathlib import Path
from typing import Tuple

import numpy as np

from elastostrain.datamodel import DeformationSpec, PhantomSpec, RFFrame, TransducerSpec
from elastostrain.phantom import simulate_pair

TESTS_DIR = Path(__file__).parent
OUTPUT_DIR = TESTS_DIR / "output"

SMALL_WIDTH_MM = 8.0
SMALL_HEIGHT_MM = 12.0
SMALL_N_LINES = 24


def small_phantom(seed: int = 0) -> PhantomSpec:
    """An 8 x 12 mm homogeneous phantom at the reference scatterer density."""
    return PhantomSpec.homogeneous(width_mm=SMALL_WIDTH_MM, height_mm=SMALL_HEIGHT_MM, seed=seed)


def small_transducer(n_lines: int = SMALL_N_LINES) -> TransducerSpec:
    return TransducerSpec.for_phantom(small_phantom(), n_lines=n_lines)


@lru_cache(maxsize=None)
def small_pair(
    applied_strain: float = 0.02,
    poisson_ratio: float = 0.495,
    extra_column_shift: int = 0,
    seed: int = 0,
    snr_db: float = 40.0,
) -> Tuple[RFFrame, RFFrame]:
    """Simulated pre/post frames of the small phantom; cached, frames are read-only."""
    return simulate_pair(
        small_phantom(seed),
        small_transducer(),
        DeformationSpec(applied_strain=applied_strain, poisson_ratio=poisson_ratio),
        snr_db=snr_db,
        pre_noise_seed=2 * seed + 1,
        post_noise_seed=2 * seed + 2,
        extra_column_shift=extra_column_shift,
    )


def band_limited(n: int, seed: int = 0, low: float = 0.25, high: float = 0.5, n_components: int = 30):
    """
    A smooth random echo-like function of a continuous sample position.

    Returned as a callable so tests can sample it at stretched positions.
    """
    rng = np.random.default_rng(seed)
    omega = rng.uniform(low, high, n_components)
    phase = rng.uniform(0, 2 * np.pi, n_components)
    amplitude = rng.uniform(0.5, 1.0, n_components)

    def f(t):
        t = np.asarray(t, dtype=float)
        waves = amplitude[:, None] * np.cos(omega[:, None] * t.ravel()[None, :] + phase[:, None])
        return waves.sum(axis=0).reshape(t.shape)

    return f


SMALL_CONFIG_YAML = f"""
phantom.width_mm: {SMALL_WIDTH_MM}
phantom.height_mm: {SMALL_HEIGHT_MM}
phantom.n_scatterers: {small_phantom().n_scatterers}
phantom.inclusions: []
transducer.n_lines: {SMALL_N_LINES}
transducer.pitch_mm: {SMALL_WIDTH_MM / SMALL_N_LINES!r}
metrics.roi_pairs_mm: [[[4.0, 4.0], [4.0, 8.0]]]
compare.strains: [0.02]
compare.seeds: [0]
compare.methods: [gradient]
"""
