"""
B-mode images of RF frames: envelope detection followed by log compression.

The envelope of every A-line is the magnitude of its analytic signal. Log compression expresses
it in dB below the frame maximum and clips at the display dynamic range:

    >>> frame = RFFrame(np.array([[0.0, 1.0, 0.0, -1.0] * 8, [0.0, 0.1, 0.0, -0.1] * 8]))
    >>> [round(float(v)) for v in log_compress(envelope(frame), 40.0)[:, 16]]
    [0, -20]
"""
import logging

import numpy as np
from scipy import signal

from elastostrain.datamodel import RFFrame
from elastostrain.errors import ConfigurationError, DomainError

logger = logging.getLogger(__name__)

DEFAULT_DYNAMIC_RANGE_DB = 50.0


def envelope(frame: RFFrame) -> np.ndarray:
    """Envelope of every A-line, shape (n_lines, n_samples)."""
    return np.abs(signal.hilbert(frame.samples, axis=1))


def log_compress(env: np.ndarray, dynamic_range_db: float = DEFAULT_DYNAMIC_RANGE_DB) -> np.ndarray:
    """
    Envelope in dB relative to its maximum, clipped to [-dynamic_range_db, 0].

    :raises ConfigurationError: if the dynamic range is not positive
    :raises DomainError: if the envelope is zero everywhere
    """
    if not dynamic_range_db > 0:
        raise ConfigurationError(f"dynamic range must be positive, got {dynamic_range_db} dB")
    env = np.asarray(env, dtype=float)
    peak = float(env.max())
    if peak <= 0:
        raise DomainError("cannot log-compress a silent frame")
    floor = 10 ** (-dynamic_range_db / 20)
    return 20 * np.log10(np.maximum(env / peak, floor))


def bmode_gray(frame: RFFrame, dynamic_range_db: float = DEFAULT_DYNAMIC_RANGE_DB) -> np.ndarray:
    """
    8-bit B-mode image with depth down and A-lines across, shape (n_samples, n_lines).

    The frame maximum is white and everything at or below -dynamic_range_db is black.
    """
    db = log_compress(envelope(frame), dynamic_range_db)
    gray = np.round((db + dynamic_range_db) / dynamic_range_db * 255).astype(np.uint8)
    logger.debug(f"B-mode image of {frame.n_lines} lines, {dynamic_range_db} dB dynamic range")
    return gray.T
