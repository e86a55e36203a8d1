"""
RFF: a minimal container for a frame of RF A-lines.

The file starts with one ASCII header line

    RFF1 n_lines n_samples fs_hz c_mps pitch_mm f0_hz

terminated by a newline, followed by n_lines * n_samples little-endian float32 values, all
samples of line 0 first. Errors name the byte offset where the file stops making sense.
"""
import logging
import re
from pathlib import Path
from typing import List, Tuple, Union

import numpy as np

from elastostrain.datamodel import RFFrame
from elastostrain.errors import RFFParseError

logger = logging.getLogger(__name__)

MAGIC = "RFF1"
PAYLOAD_DTYPE = np.dtype("<f4")
HEADER_FIELDS = ("n_lines", "n_samples", "fs_hz", "c_mps", "pitch_mm", "f0_hz")


def encode_rff(frame: RFFrame) -> bytes:
    header = " ".join(
        [
            MAGIC,
            str(frame.n_lines),
            str(frame.n_samples),
            repr(float(frame.fs_hz)),
            repr(float(frame.c_mps)),
            repr(float(frame.pitch_mm)),
            repr(float(frame.f0_hz)),
        ]
    )
    payload = np.ascontiguousarray(frame.samples, dtype=PAYLOAD_DTYPE).tobytes()
    return header.encode("ascii") + b"\n" + payload


def write_rff(path: Union[str, Path], frame: RFFrame) -> None:
    """Write a frame; samples are stored as float32."""
    Path(path).write_bytes(encode_rff(frame))
    logger.info(f"wrote {frame.n_lines}x{frame.n_samples} frame to {path}")


def _tokens(header: bytes) -> List[Tuple[int, str]]:
    return [(m.start(), m.group().decode("ascii", errors="replace")) for m in re.finditer(rb"[^ ]+", header)]


def decode_rff(data: bytes) -> RFFrame:
    """
    Parse an RFF byte string.

    >>> decode_rff(b"RFX1 1 1 1 1 1 1\\n\\x00\\x00\\x80\\x3f")
    Traceback (most recent call last):
    ...
    elastostrain.errors.RFFParseError: bad magic 'RFX1', expected 'RFF1' (at byte offset 0)

    :raises RFFParseError: for any malformed header or payload
    """
    end = data.find(b"\n")
    if not data.startswith(MAGIC.encode("ascii")):
        found = data[: len(MAGIC)].decode("ascii", errors="replace")
        raise RFFParseError(f"bad magic {found!r}, expected {MAGIC!r}", offset=0)
    if end < 0:
        raise RFFParseError("header line is not terminated by a newline", offset=len(data))
    header = data[:end]
    for offset, byte in enumerate(header):
        if byte > 127:
            raise RFFParseError("header is not ASCII", offset=offset)
    tokens = _tokens(header)
    if tokens[0][1] != MAGIC:
        raise RFFParseError(f"bad magic {tokens[0][1]!r}, expected {MAGIC!r}", offset=0)
    fields = tokens[1:]
    if len(fields) != len(HEADER_FIELDS):
        raise RFFParseError(
            f"header has {len(fields)} fields after the magic, "
            f"expected {len(HEADER_FIELDS)}: {', '.join(HEADER_FIELDS)}",
            offset=fields[len(HEADER_FIELDS)][0] if len(fields) > len(HEADER_FIELDS) else end,
        )
    values = []
    for name, (offset, text) in zip(HEADER_FIELDS, fields):
        try:
            value = int(text) if name in ("n_lines", "n_samples") else float(text)
        except ValueError:
            raise RFFParseError(f"header field {name}={text!r} is not a number", offset=offset) from None
        if not np.isfinite(value) or value <= 0:
            raise RFFParseError(f"header field {name}={text!r} must be positive", offset=offset)
        values.append(value)
    n_lines, n_samples, fs_hz, c_mps, pitch_mm, f0_hz = values
    payload = data[end + 1 :]
    expected = PAYLOAD_DTYPE.itemsize * int(n_lines) * int(n_samples)
    if len(payload) != expected:
        raise RFFParseError(
            f"payload is {len(payload)} bytes, expected {expected} for {n_lines}x{n_samples} float32 samples",
            offset=end + 1,
        )
    samples = np.frombuffer(payload, dtype=PAYLOAD_DTYPE).reshape(int(n_lines), int(n_samples))
    bad = np.flatnonzero(~np.isfinite(samples.ravel()))
    if bad.size:
        raise RFFParseError("non-finite sample", offset=end + 1 + PAYLOAD_DTYPE.itemsize * int(bad[0]))
    return RFFrame(samples.astype(np.float64), fs_hz=fs_hz, pitch_mm=pitch_mm, c_mps=c_mps, f0_hz=f0_hz)


def read_rff(path: Union[str, Path]) -> RFFrame:
    """
    Read a frame written by `write_rff` (or any conforming writer).

    :raises RFFParseError: for a malformed file
    """
    frame = decode_rff(Path(path).read_bytes())
    logger.info(f"read {frame.n_lines}x{frame.n_samples} frame from {path}")
    return frame
