"""
Core data model for elastostrain.

Parameter objects (phantom, transducer, deformation, estimator settings) are frozen pydantic
models, so that a bad value is rejected where it is introduced and the error names the field.

Array-carrying results (frames, scatterer fields, maps) are frozen dataclasses holding numpy arrays.
"""
import math
from dataclasses import dataclass, field
from typing import List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from elastostrain.errors import ConfigurationError

MM_PER_M = 1000.0

Method = Literal["gradient", "adaptive"]


class _Spec(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")


class InclusionSpec(_Spec):
    """
    A circular inclusion, stiffer (or softer) than the background by `contrast_db`.

    >>> round(InclusionSpec(cx_mm=10, cy_mm=30, contrast_db=10).modulus_kpa(60.0), 1)
    189.7
    """

    cx_mm: float
    cy_mm: float
    radius_mm: float = Field(3.75, gt=0)
    contrast_db: float = 0.0

    def modulus_kpa(self, background_kpa: float) -> float:
        return background_kpa * 10 ** (self.contrast_db / 20)

    def contains(self, x_mm, y_mm):
        return (np.asarray(x_mm) - self.cx_mm) ** 2 + (np.asarray(y_mm) - self.cy_mm) ** 2 <= self.radius_mm**2


class PhantomSpec(_Spec):
    """
    A rectangular phantom with circular inclusions.

    x is the lateral coordinate, y is depth below the transducer face; both in mm.

    >>> spec = PhantomSpec.reference()
    >>> len(spec.inclusions), spec.n_scatterers
    (4, 30372)
    """

    width_mm: float = Field(40.0, gt=0)
    height_mm: float = Field(40.0, gt=0)
    n_scatterers: int = Field(30372, ge=0)
    background_modulus_kpa: float = Field(60.0, gt=0)
    inclusions: Tuple[InclusionSpec, ...] = ()
    seed: int = 0

    @model_validator(mode="after")
    def _inclusions_inside(self) -> "PhantomSpec":
        for n, inc in enumerate(self.inclusions):
            if (
                inc.cx_mm - inc.radius_mm < 0
                or inc.cx_mm + inc.radius_mm > self.width_mm
                or inc.cy_mm - inc.radius_mm < 0
                or inc.cy_mm + inc.radius_mm > self.height_mm
            ):
                raise ValueError(f"inclusion {n} at ({inc.cx_mm}, {inc.cy_mm}) r={inc.radius_mm} leaves the phantom")
        return self

    @property
    def density_per_mm2(self) -> float:
        return self.n_scatterers / (self.width_mm * self.height_mm)

    @classmethod
    def reference(cls, **kwargs) -> "PhantomSpec":
        """The 40x40 mm four-inclusion phantom: 10, 20, 30 and 40 dB stiffer 7.5 mm inclusions."""
        inclusions = (
            InclusionSpec(cx_mm=20.0, cy_mm=10.0, contrast_db=20.0),
            InclusionSpec(cx_mm=20.0, cy_mm=20.0, contrast_db=40.0),
            InclusionSpec(cx_mm=10.0, cy_mm=30.0, contrast_db=10.0),
            InclusionSpec(cx_mm=30.0, cy_mm=30.0, contrast_db=30.0),
        )
        return cls(**{"inclusions": inclusions, **kwargs})

    @classmethod
    def homogeneous(cls, width_mm: float = 40.0, height_mm: float = 40.0, **kwargs) -> "PhantomSpec":
        """
        An inclusion-free phantom; unless given, the scatterer count keeps the reference density.

        >>> PhantomSpec.homogeneous(width_mm=20, height_mm=20).n_scatterers
        7593
        """
        if "n_scatterers" not in kwargs:
            kwargs["n_scatterers"] = int(round(cls().density_per_mm2 * width_mm * height_mm))
        return cls(width_mm=width_mm, height_mm=height_mm, **kwargs)


class TransducerSpec(_Spec):
    """
    A linear array with a non-diffracting beam.

    >>> td = TransducerSpec()
    >>> td.n_lines, td.pitch_mm, round(td.samples_per_mm, 3)
    (128, 0.3125, 51.948)
    """

    f0_hz: float = Field(5e6, gt=0)
    fractional_bandwidth: float = Field(0.60, gt=0, lt=2)
    beam_width_mm: float = Field(1.5, gt=0)
    n_lines: int = Field(128, ge=1)
    pitch_mm: float = Field(0.3125, gt=0)
    fs_hz: float = Field(40e6, gt=0)
    c_mps: float = Field(1540.0, gt=0)

    @model_validator(mode="after")
    def _sampling_rate(self) -> "TransducerSpec":
        nyquist = 2 * self.f0_hz * (1 + self.fractional_bandwidth)
        if self.fs_hz <= nyquist:
            raise ValueError(f"fs_hz={self.fs_hz} must exceed 2*f0*(1+bandwidth)={nyquist}")
        return self

    @property
    def samples_per_mm(self) -> float:
        """Round-trip samples per mm of depth."""
        return 2 * self.fs_hz / (MM_PER_M * self.c_mps)

    @property
    def pulse_sigma_s(self) -> float:
        """Standard deviation (seconds) of the Gaussian pulse envelope for the -6 dB bandwidth."""
        sigma_f = self.fractional_bandwidth * self.f0_hz / (2 * math.sqrt(2 * math.log(2)))
        return 1 / (2 * math.pi * sigma_f)

    @property
    def line_positions_mm(self) -> np.ndarray:
        return (np.arange(self.n_lines) + 0.5) * self.pitch_mm

    @classmethod
    def for_phantom(cls, phantom: PhantomSpec, **kwargs) -> "TransducerSpec":
        """A transducer whose lines span the phantom width."""
        n_lines = kwargs.pop("n_lines", 128)
        return cls(n_lines=n_lines, pitch_mm=phantom.width_mm / n_lines, **kwargs)


class DeformationSpec(_Spec):
    """
    Quasi-static compression from the transducer face.

    `centerline_x_mm` is the lateral position that does not move; None means phantom mid-width.
    """

    applied_strain: float = Field(0.02, ge=0, lt=1)
    poisson_ratio: float = Field(0.495, ge=0, le=0.5)
    centerline_x_mm: Optional[float] = None

    def centerline(self, phantom: PhantomSpec) -> float:
        return phantom.width_mm / 2 if self.centerline_x_mm is None else self.centerline_x_mm


class EstimatorConfig(_Spec):
    """
    Window geometry and search settings shared by both estimators.

    >>> cfg = EstimatorConfig()
    >>> cfg.window_samples(TransducerSpec().samples_per_mm), cfg.stride_samples(TransducerSpec().samples_per_mm)
    (156, 26)
    """

    window_mm: float = Field(3.0, gt=0)
    shift_mm: float = Field(0.5, gt=0)
    lateral_radius_n: int = Field(6, ge=0)
    n_sub: int = Field(3, ge=1)
    alpha_min: float = Field(0.80, gt=0, lt=1)
    alpha_coarse_step: float = Field(0.005, gt=0)
    alpha_refine_iters: int = Field(10, ge=0)
    max_lag_mm: Optional[float] = Field(None, gt=0)
    corr_threshold: float = Field(0.5, ge=-1, le=1)
    correlation_method: Literal["auto", "direct", "fft"] = "auto"

    @model_validator(mode="after")
    def _shift_within_window(self) -> "EstimatorConfig":
        if self.shift_mm > self.window_mm:
            raise ValueError(f"shift_mm={self.shift_mm} exceeds window_mm={self.window_mm}")
        return self

    def window_samples(self, samples_per_mm: float) -> int:
        return int(round(self.window_mm * samples_per_mm))

    def stride_samples(self, samples_per_mm: float) -> int:
        stride = int(round(self.shift_mm * samples_per_mm))
        if stride < 1:
            raise ConfigurationError(f"shift_mm={self.shift_mm} is below one sample")
        return stride

    def max_lag_for_window(self, window_samples: int) -> int:
        """
        Axial search half-range for a window of the given length.

        Without an explicit `max_lag_mm` it covers the misalignment the strongest admissible
        stretch builds up over one window. Either way it is capped at half a window.

        >>> EstimatorConfig().max_lag_for_window(156)
        37
        >>> EstimatorConfig(max_lag_mm=5).max_lag_for_window(156)
        78
        """
        if self.max_lag_mm is None:
            fraction = min(1.2 * (1 - self.alpha_min), 0.5)
        else:
            fraction = min(self.max_lag_mm / self.window_mm, 0.5)
        return max(1, int(round(window_samples * fraction)))

    def alpha_grid(self) -> np.ndarray:
        """Coarse stretch factors from 1.0 down to alpha_min inclusive."""
        n = int(math.floor((1 - self.alpha_min) / self.alpha_coarse_step + 1e-9))
        grid = 1.0 - self.alpha_coarse_step * np.arange(n + 1)
        if grid[-1] - self.alpha_min > 1e-12:
            grid = np.append(grid, self.alpha_min)
        return grid


@dataclass(frozen=True, eq=False)
class ScattererField:
    """Point scatterers: lateral position, depth (mm) and reflectivity."""

    x_mm: np.ndarray
    y_mm: np.ndarray
    reflectivity: np.ndarray

    def __post_init__(self):
        if not (len(self.x_mm) == len(self.y_mm) == len(self.reflectivity)):
            raise ValueError("scatterer arrays must have equal length")

    def __len__(self) -> int:
        return len(self.x_mm)

    @property
    def points(self) -> np.ndarray:
        """(N, 3) array of x_mm, y_mm, reflectivity."""
        return np.column_stack([self.x_mm, self.y_mm, self.reflectivity])

    def scaled(self, factor: float) -> "ScattererField":
        return ScattererField(self.x_mm, self.y_mm, self.reflectivity * factor)


@dataclass(frozen=True, eq=False)
class RFFrame:
    """
    A raster of RF samples, one row per A-line.

    >>> frame = RFFrame(np.ones((2, 3)), fs_hz=40e6, pitch_mm=0.3125, c_mps=1540, f0_hz=5e6)
    >>> frame.n_lines, frame.n_samples
    (2, 3)
    """

    samples: np.ndarray
    fs_hz: float = 40e6
    pitch_mm: float = 0.3125
    c_mps: float = 1540.0
    f0_hz: float = 5e6

    def __post_init__(self):
        samples = np.array(self.samples, dtype=np.float64)
        if samples.ndim != 2 or samples.shape[0] < 1 or samples.shape[1] < 1:
            raise ValueError(f"RF samples must be a non-empty 2D array, got shape {samples.shape}")
        if not np.all(np.isfinite(samples)):
            raise ValueError("RF samples must be finite")
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)

    @property
    def n_lines(self) -> int:
        return self.samples.shape[0]

    @property
    def n_samples(self) -> int:
        return self.samples.shape[1]

    @property
    def samples_per_mm(self) -> float:
        return 2 * self.fs_hz / (MM_PER_M * self.c_mps)

    @property
    def line_positions_mm(self) -> np.ndarray:
        """Lateral centre of every A-line."""
        return (np.arange(self.n_lines) + 0.5) * self.pitch_mm

    def with_samples(self, samples: np.ndarray) -> "RFFrame":
        return RFFrame(samples, fs_hz=self.fs_hz, pitch_mm=self.pitch_mm, c_mps=self.c_mps, f0_hz=self.f0_hz)

    def metadata(self) -> Tuple[float, float, float, float]:
        return (self.fs_hz, self.pitch_mm, self.c_mps, self.f0_hz)

    @classmethod
    def for_transducer(cls, samples: np.ndarray, transducer: TransducerSpec) -> "RFFrame":
        return cls(
            samples,
            fs_hz=transducer.fs_hz,
            pitch_mm=transducer.pitch_mm,
            c_mps=transducer.c_mps,
            f0_hz=transducer.f0_hz,
        )


@dataclass(frozen=True)
class MethodTag:
    """
    Which estimator produced a map.

    >>> str(MethodTag("adaptive", lateral=True))
    'adaptive-1.5D'
    """

    method: Method
    lateral: bool = False

    def __str__(self) -> str:
        return f"{self.method}-{'1.5D' if self.lateral else '1D'}"


@dataclass(frozen=True, eq=False)
class StrainMap:
    """Strain per window row (axis 0) and A-line (axis 1); compression is positive."""

    values: np.ndarray
    axial_positions_mm: np.ndarray
    method_tag: Optional[MethodTag] = None

    @property
    def shape(self) -> Tuple[int, int]:
        return self.values.shape  # type: ignore[return-value]


@dataclass(frozen=True, eq=False)
class LateralShiftMap:
    """Integer line offset j matched by every window; pre line i pairs with post line i + j."""

    shifts: np.ndarray


@dataclass(eq=False)
class QualityRaw:
    """Per-window peak correlations recorded while estimating, for the metrics module."""

    peak_correlation: np.ndarray
    flagged: np.ndarray
    lateral_score: Optional[np.ndarray] = None
    method_tag: Optional[MethodTag] = None
    notes: List[str] = field(default_factory=list)
