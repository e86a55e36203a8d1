import numpy as np
import pytest

from elastostrain.datamodel import LateralShiftMap, QualityRaw, RFFrame, StrainMap
from elastostrain.errors import RFFParseError
from elastostrain.formats.pgm import read_pgm, strain_to_gray, write_pgm
from elastostrain.formats.rff import decode_rff, encode_rff, read_rff, write_rff
from elastostrain.formats.tables import (
    quality_dataframe,
    read_strain_csv,
    shifts_dataframe,
    strain_dataframe,
    write_csv,
)

HEADER = b"RFF1 2 3 40000000.0 1540.0 0.3125 5000000.0\n"


@pytest.fixture
def frame() -> RFFrame:
    samples = np.random.default_rng(5).standard_normal((4, 50)).astype(np.float32)
    return RFFrame(samples, fs_hz=40e6, pitch_mm=0.25, c_mps=1540.0, f0_hz=5e6)


def test_rff_round_trip(frame, tmp_path):
    path = tmp_path / "frame.rff"
    write_rff(path, frame)
    back = read_rff(path)
    assert np.array_equal(back.samples, frame.samples)
    assert back.metadata() == frame.metadata()


def test_rff_layout(frame):
    data = encode_rff(frame)
    header, payload = data.split(b"\n", 1)
    assert header.split()[:3] == [b"RFF1", b"4", b"50"]
    assert len(payload) == 4 * 4 * 50
    # line 0 first, little-endian float32
    assert np.frombuffer(payload[:200], dtype="<f4").tolist() == frame.samples[0].tolist()


def payload(n: int = 6) -> bytes:
    return np.arange(1, n + 1, dtype="<f4").tobytes()


def test_rff_minimal_file_decodes():
    frame = decode_rff(HEADER + payload())
    assert frame.samples.tolist() == [[1, 2, 3], [4, 5, 6]]


@pytest.mark.parametrize(
    "data,offset,fragment",
    [
        (b"RFX1 2 3 1 1 1 1\n" + payload(), 0, "bad magic"),
        (b"RFF1 2 3 40e6 1540 0.3 5e6", 26, "not terminated"),
        (b"RFF1 2 3 40e6 1540 0.3\n" + payload(), 22, "5 fields"),
        (b"RFF1 2 3 40e6 1540 0.3 5e6 9\n" + payload(), 27, "7 fields"),
        (b"RFF1 2 x 40e6 1540 0.3 5e6\n" + payload(), 7, "n_samples='x'"),
        (b"RFF1 2 3 40e6 -1540 0.3 5e6\n" + payload(), 14, "c_mps"),
        (b"RFF1 0 3 40e6 1540 0.3 5e6\n" + payload(), 5, "n_lines"),
        (b"RFF1 2 3 40e6 1540 0.3 nan\n" + payload(), 23, "f0_hz"),
        (HEADER + payload(5), len(HEADER), "20 bytes"),
        (HEADER + payload(7), len(HEADER), "28 bytes"),
    ],
)
def test_rff_errors_name_offsets(data, offset, fragment):
    with pytest.raises(RFFParseError) as e:
        decode_rff(data)
    assert e.value.offset == offset
    assert fragment in str(e.value)
    assert f"(at byte offset {offset})" in str(e.value)


def test_rff_non_ascii_header():
    with pytest.raises(RFFParseError) as e:
        decode_rff(b"RFF1 2 3 40e6 \xe9 0.3 5e6\n" + payload())
    assert e.value.offset == 14


def test_rff_non_finite_sample():
    samples = np.arange(1, 7, dtype="<f4")
    samples[4] = np.inf
    with pytest.raises(RFFParseError) as e:
        decode_rff(HEADER + samples.tobytes())
    assert e.value.offset == len(HEADER) + 16


def test_strain_to_gray_saturates():
    values = np.linspace(0, 1, 1000).reshape(10, 100)
    gray = strain_to_gray(values)
    assert gray.dtype == np.uint8
    assert gray.min() == 0 and gray.max() == 255
    assert np.sum(gray == 255) >= 10
    assert not strain_to_gray(np.zeros((3, 3))).any()
    assert not strain_to_gray(-np.ones((3, 3))).any()


def test_pgm_round_trip(tmp_path):
    m = StrainMap(np.linspace(0, 0.04, 12).reshape(3, 4), np.array([1.5, 2.0, 2.5]))
    path = tmp_path / "strain.pgm"
    write_pgm(path, m)
    assert path.read_bytes().startswith(b"P5\n4 3\n255\n")
    assert np.array_equal(read_pgm(path), strain_to_gray(m.values))


def test_strain_csv(tmp_path):
    m = StrainMap(np.array([[0.01, 0.02], [0.03, 0.04]]), np.array([1.5, 2.0]))
    path = tmp_path / "strain.csv"
    write_csv(strain_dataframe(m), path)
    text = path.read_bytes().decode("ascii")
    assert "\r" not in text
    assert text.splitlines()[0] == "depth_mm,line_000,line_001"
    back = read_strain_csv(path)
    assert np.allclose(back.values, m.values)
    assert np.allclose(back.axial_positions_mm, m.axial_positions_mm)


def test_shifts_dataframe():
    df = shifts_dataframe(LateralShiftMap(np.array([[0, 1], [-1, 2]])), np.array([1.5, 2.0]))
    assert df["line_001"].tolist() == [1, 2]
    assert df["depth_mm"].tolist() == [1.5, 2.0]


def test_quality_dataframe_long_format():
    peaks = np.array([[0.9, 0.8, 0.7], [0.6, 0.5, 0.4]])
    flagged = np.array([[False, True, False], [False, False, False]])
    df = quality_dataframe(QualityRaw(peaks, flagged), np.array([1.5, 2.0]))
    assert list(df.columns) == ["window", "depth_mm", "line", "peak_correlation", "lateral_score", "flagged"]
    assert len(df) == 6
    row = df[(df["window"] == 0) & (df["line"] == 1)].iloc[0]
    assert row["peak_correlation"] == 0.8 and row["flagged"]
    assert df["lateral_score"].isna().all()
    scored = quality_dataframe(QualityRaw(peaks, flagged, lateral_score=peaks - 0.1), np.array([1.5, 2.0]))
    assert scored["lateral_score"].tolist() == pytest.approx((peaks - 0.1).ravel().tolist())
