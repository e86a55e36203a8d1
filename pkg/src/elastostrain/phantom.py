"""
Tissue phantom simulation: scatterer fields, quasi-static deformation and RF synthesis.

The deformation replaces a finite-element solve with a spring-column model. Each lateral column
is a chain of springs whose compliance is 1/E at each depth; the column is shortened by the
applied strain, so the local axial strain is proportional to the local compliance and the
column-average strain equals the applied strain. Lateral motion is a Poisson expansion about a
centreline, proportional to the local axial strain.

A typical simulation:

    >>> from elastostrain.datamodel import DeformationSpec, PhantomSpec, TransducerSpec
    >>> phantom = PhantomSpec.homogeneous(width_mm=5, height_mm=5, seed=1)
    >>> td = TransducerSpec.for_phantom(phantom, n_lines=16)
    >>> field = generate_scatterers(phantom)
    >>> pre = synthesize_rf(field, td, depth_mm=phantom.height_mm)
    >>> moved = displace_scatterers(field, phantom, DeformationSpec(applied_strain=0.02))
    >>> post = synthesize_rf(moved, td, depth_mm=phantom.height_mm)
    >>> pre.samples.shape == post.samples.shape == (16, 260)
    True
"""
import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import cumulative_trapezoid

from elastostrain.datamodel import (
    DeformationSpec,
    PhantomSpec,
    RFFrame,
    ScattererField,
    StrainMap,
    TransducerSpec,
)
from elastostrain.errors import DomainError

logger = logging.getLogger(__name__)

COLUMN_RESOLUTION_MM = 0.05
AXIAL_RESOLUTION_MM = 0.02
PULSE_TRUNCATION_SIGMAS = 3.0


def generate_scatterers(spec: PhantomSpec) -> ScattererField:
    """
    Draw `n_scatterers` points uniformly over the phantom with standard normal reflectivity.

    >>> field = generate_scatterers(PhantomSpec(n_scatterers=5, seed=3))
    >>> len(field), bool(np.all((field.x_mm >= 0) & (field.x_mm <= 40)))
    (5, True)

    :param spec: phantom description; its seed makes the draw reproducible
    :return: scatterer field
    """
    rng = np.random.default_rng(spec.seed)
    x = rng.uniform(0.0, spec.width_mm, spec.n_scatterers)
    y = rng.uniform(0.0, spec.height_mm, spec.n_scatterers)
    reflectivity = rng.standard_normal(spec.n_scatterers)
    return ScattererField(x_mm=x, y_mm=y, reflectivity=reflectivity)


def modulus_map(spec: PhantomSpec, x_mm, y_mm) -> np.ndarray:
    """
    Young's modulus (kPa) at each point; the first listed inclusion containing a point wins.

    No bounds checking; see `modulus_at` for the checked scalar form.
    """
    x = np.asarray(x_mm, dtype=float)
    y = np.asarray(y_mm, dtype=float)
    modulus = np.full(np.broadcast(x, y).shape, spec.background_modulus_kpa)
    assigned = np.zeros(modulus.shape, dtype=bool)
    for inclusion in spec.inclusions:
        inside = inclusion.contains(x, y) & ~assigned
        modulus[inside] = inclusion.modulus_kpa(spec.background_modulus_kpa)
        assigned |= inside
    return modulus


def modulus_at(spec: PhantomSpec, x_mm: float, y_mm: float) -> float:
    """
    Young's modulus (kPa) at one point of the phantom.

    >>> spec = PhantomSpec.reference()
    >>> modulus_at(spec, 2.0, 2.0)
    60.0
    >>> round(modulus_at(spec, 10.0, 30.0), 1)
    189.7
    >>> round(modulus_at(spec, 20.0, 10.0), 6)
    600.0

    :raises DomainError: if the point lies outside the phantom
    """
    if not (0.0 <= x_mm <= spec.width_mm and 0.0 <= y_mm <= spec.height_mm):
        raise DomainError(f"point ({x_mm}, {y_mm}) mm is outside the {spec.width_mm}x{spec.height_mm} mm phantom")
    return float(modulus_map(spec, x_mm, y_mm))


@dataclass(frozen=True, eq=False)
class _ComplianceColumns:
    """Cumulative compliance C(x, y) on a column grid, normalised per column."""

    column_x_mm: np.ndarray
    depth_mm: np.ndarray
    cumulative: np.ndarray  # (n_columns, n_depths), cumulative[:, 0] == 0
    column_mean: np.ndarray  # mean compliance of each column

    def column_index(self, x_mm) -> np.ndarray:
        spacing = self.column_x_mm[1] - self.column_x_mm[0] if len(self.column_x_mm) > 1 else 1.0
        idx = np.floor(np.asarray(x_mm, dtype=float) / spacing).astype(int)
        return np.clip(idx, 0, len(self.column_x_mm) - 1)

    def fraction_above(self, x_mm, y_mm) -> np.ndarray:
        """C(x, y) / C(x, H): the share of the column shortening that happens above depth y."""
        x = np.atleast_1d(np.asarray(x_mm, dtype=float))
        y = np.atleast_1d(np.asarray(y_mm, dtype=float))
        x, y = np.broadcast_arrays(x, y)
        cols = self.column_index(x)
        out = np.empty(x.shape)
        for col in np.unique(cols):
            sel = cols == col
            out[sel] = np.interp(y[sel], self.depth_mm, self.cumulative[col]) / self.cumulative[col, -1]
        return out


def _compliance_columns(
    spec: PhantomSpec,
    column_resolution_mm: float = COLUMN_RESOLUTION_MM,
    axial_resolution_mm: float = AXIAL_RESOLUTION_MM,
) -> _ComplianceColumns:
    n_columns = max(1, int(math.ceil(spec.width_mm / column_resolution_mm)))
    n_depths = max(2, int(math.ceil(spec.height_mm / axial_resolution_mm)) + 1)
    column_x = (np.arange(n_columns) + 0.5) * (spec.width_mm / n_columns)
    depth = np.linspace(0.0, spec.height_mm, n_depths)
    if not spec.inclusions:
        compliance = np.full((n_columns, n_depths), 1.0 / spec.background_modulus_kpa)
    else:
        xx, yy = np.meshgrid(column_x, depth, indexing="ij")
        compliance = 1.0 / modulus_map(spec, xx, yy)
    cumulative = cumulative_trapezoid(compliance, depth, axis=1, initial=0.0)
    return _ComplianceColumns(
        column_x_mm=column_x,
        depth_mm=depth,
        cumulative=cumulative,
        column_mean=cumulative[:, -1] / spec.height_mm,
    )


def axial_displacement_mm(spec: PhantomSpec, deformation: DeformationSpec, x_mm, y_mm) -> np.ndarray:
    """
    Upward (towards the transducer) displacement u(x, y) of material at depth y.

    The face y = 0 is fixed and the bottom of every column moves by exactly s * H.

    >>> spec = PhantomSpec.homogeneous(width_mm=10, height_mm=10)
    >>> u = axial_displacement_mm(spec, DeformationSpec(applied_strain=0.02), [5.0], [10.0])
    >>> round(float(u[0]), 12)
    0.2
    """
    columns = _compliance_columns(spec)
    s = deformation.applied_strain
    return s * spec.height_mm * columns.fraction_above(x_mm, y_mm)


def local_axial_strain(spec: PhantomSpec, deformation: DeformationSpec, x_mm, y_mm) -> np.ndarray:
    """Local axial strain: the applied strain scaled by local compliance over the column mean."""
    columns = _compliance_columns(spec)
    return _local_strain(columns, spec, deformation, x_mm, y_mm)


def _local_strain(columns: _ComplianceColumns, spec: PhantomSpec, deformation: DeformationSpec, x_mm, y_mm):
    x = np.atleast_1d(np.asarray(x_mm, dtype=float))
    y = np.atleast_1d(np.asarray(y_mm, dtype=float))
    compliance = 1.0 / modulus_map(spec, x, y)
    return deformation.applied_strain * compliance / columns.column_mean[columns.column_index(x)]


def displace_scatterers(field: ScattererField, spec: PhantomSpec, deformation: DeformationSpec) -> ScattererField:
    """
    Move every scatterer according to the spring-column compression model.

    Axial: y' = y - u(x, y). Lateral: x' = xc + (x - xc) * (1 + nu * local strain).

    >>> spec = PhantomSpec.homogeneous(width_mm=40, height_mm=40)
    >>> field = ScattererField(np.array([30.0]), np.array([20.0]), np.array([1.0]))
    >>> moved = displace_scatterers(field, spec, DeformationSpec(applied_strain=0.02, poisson_ratio=0.495))
    >>> round(float(moved.x_mm[0]), 6), round(float(moved.y_mm[0]), 6)
    (30.099, 19.6)

    :param field: scatterers at their pre-compression positions
    :param spec: phantom (stiffness layout)
    :param deformation: applied strain, Poisson ratio, centreline
    :return: displaced scatterers with unchanged reflectivities
    """
    if deformation.applied_strain == 0 or len(field) == 0:
        return ScattererField(field.x_mm.copy(), field.y_mm.copy(), field.reflectivity.copy())
    columns = _compliance_columns(spec)
    s = deformation.applied_strain
    u = s * spec.height_mm * columns.fraction_above(field.x_mm, field.y_mm)
    strain = _local_strain(columns, spec, deformation, field.x_mm, field.y_mm)
    xc = deformation.centerline(spec)
    x_new = xc + (field.x_mm - xc) * (1.0 + deformation.poisson_ratio * strain)
    logger.debug(
        f"displaced {len(field)} scatterers: max axial {np.max(np.abs(u)):.4f} mm, "
        f"max lateral {np.max(np.abs(x_new - field.x_mm)):.4f} mm"
    )
    return ScattererField(x_mm=x_new, y_mm=field.y_mm - u, reflectivity=field.reflectivity.copy())


def pulse(t_s: np.ndarray, transducer: TransducerSpec) -> np.ndarray:
    """Gaussian-modulated cosine, zero beyond the truncation point."""
    sigma = transducer.pulse_sigma_s
    envelope = np.exp(-0.5 * (t_s / sigma) ** 2)
    envelope[np.abs(t_s) > PULSE_TRUNCATION_SIGMAS * sigma] = 0.0
    return envelope * np.cos(2 * np.pi * transducer.f0_hz * t_s)


def synthesize_rf(field: ScattererField, transducer: TransducerSpec, depth_mm: float) -> RFFrame:
    """
    Pulse-echo RF lines from a non-diffracting rectangular beam.

    Every scatterer within half a beam width of a line contributes reflectivity * pulse(t - 2y/c).

    >>> td = TransducerSpec(n_lines=4)
    >>> frame = synthesize_rf(ScattererField(np.array([]), np.array([]), np.array([])), td, 10.0)
    >>> frame.samples.shape, float(np.abs(frame.samples).max())
    ((4, 520), 0.0)

    :param field: scatterers (mm)
    :param transducer: array and pulse description
    :param depth_mm: imaging depth; sets the number of samples
    :return: RF frame with one row per A-line
    """
    n_samples = int(math.ceil(2 * depth_mm * transducer.fs_hz / (1000.0 * transducer.c_mps)))
    samples = np.zeros((transducer.n_lines, n_samples))
    if len(field) == 0:
        return RFFrame.for_transducer(samples, transducer)
    sigma = transducer.pulse_sigma_s
    half_support = int(math.ceil(PULSE_TRUNCATION_SIGMAS * sigma * transducer.fs_hz)) + 1
    offsets = np.arange(-half_support, half_support + 1)
    delay_samples = 2 * field.y_mm * transducer.fs_hz / (1000.0 * transducer.c_mps)
    half_beam = transducer.beam_width_mm / 2
    for i, line_x in enumerate(transducer.line_positions_mm):
        on_beam = np.abs(field.x_mm - line_x) <= half_beam
        if not np.any(on_beam):
            continue
        delays = delay_samples[on_beam]
        idx = np.floor(delays).astype(int)[:, None] + offsets[None, :]
        t = (idx - delays[:, None]) / transducer.fs_hz
        contrib = field.reflectivity[on_beam][:, None] * pulse(t, transducer)
        valid = (idx >= 0) & (idx < n_samples)
        samples[i] = np.bincount(idx[valid], weights=contrib[valid], minlength=n_samples)
    return RFFrame.for_transducer(samples, transducer)


def add_noise(frame: RFFrame, snr_db: float, seed: Optional[int] = None) -> RFFrame:
    """
    Add zero-mean white Gaussian noise at `snr_db` relative to the mean signal power.

    `math.inf` returns the frame unchanged.

    :raises DomainError: for an SNR of NaN or -inf, and for a silent frame with a finite SNR
    """
    if math.isnan(snr_db) or snr_db == -math.inf:
        raise DomainError(f"cannot add noise at an SNR of {snr_db} dB")
    if snr_db == math.inf:
        return frame
    signal_power = float(np.mean(frame.samples**2))
    if signal_power == 0.0:
        raise DomainError("cannot scale noise to a finite SNR on an all-zero frame")
    noise_sigma = math.sqrt(signal_power / 10 ** (snr_db / 10))
    rng = np.random.default_rng(seed)
    noise = rng.normal(0.0, noise_sigma, frame.samples.shape)
    return frame.with_samples(frame.samples + noise)


def measured_snr_db(clean: RFFrame, noisy: RFFrame) -> float:
    """Empirical SNR of `noisy` against its clean version."""
    noise = noisy.samples - clean.samples
    return 10 * math.log10(float(np.mean(clean.samples**2)) / float(np.mean(noise**2)))


def shift_columns(frame: RFFrame, shift: int) -> RFFrame:
    """
    Rigidly move every line by `shift` columns: output line i + shift is input line i.

    Vacated lines repeat the nearest moved line.
    """
    if shift == 0:
        return frame
    n = frame.n_lines
    source = np.clip(np.arange(n) - shift, 0, n - 1)
    return frame.with_samples(frame.samples[source])


def ideal_strain_map(
    spec: PhantomSpec,
    deformation: DeformationSpec,
    line_positions_mm: Sequence[float],
    window_bounds_mm: Sequence[Tuple[float, float]],
) -> StrainMap:
    """
    Analytic strain averaged over each estimation window: (u(y1) - u(y0)) / (y1 - y0).

    :param line_positions_mm: lateral position of every A-line
    :param window_bounds_mm: (top, bottom) depth of every window row
    """
    columns = _compliance_columns(spec)
    s = deformation.applied_strain
    lines = np.asarray(line_positions_mm, dtype=float)
    bounds = np.asarray(window_bounds_mm, dtype=float).reshape(-1, 2)
    top = np.clip(bounds[:, 0], 0.0, spec.height_mm)
    bottom = np.clip(bounds[:, 1], 0.0, spec.height_mm)
    xx = np.broadcast_to(lines[None, :], (len(bounds), len(lines)))
    u_top = s * spec.height_mm * columns.fraction_above(xx, np.broadcast_to(top[:, None], xx.shape))
    u_bottom = s * spec.height_mm * columns.fraction_above(xx, np.broadcast_to(bottom[:, None], xx.shape))
    span = np.where(bottom > top, bottom - top, 1.0)[:, None]
    values = np.where((bottom > top)[:, None], (u_bottom - u_top) / span, 0.0)
    return StrainMap(values=values, axial_positions_mm=bounds.mean(axis=1), method_tag=None)


def simulate_pair(
    phantom: PhantomSpec,
    transducer: TransducerSpec,
    deformation: DeformationSpec,
    snr_db: float = 40.0,
    pre_noise_seed: Optional[int] = 1,
    post_noise_seed: Optional[int] = 2,
    extra_column_shift: int = 0,
) -> Tuple[RFFrame, RFFrame]:
    """
    Simulate a pre/post-compression frame pair from a single scatterer draw.

    :return: (pre, post) noisy frames
    """
    field = generate_scatterers(phantom)
    logger.info(f"generated {len(field)} scatterers (seed {phantom.seed})")
    pre = synthesize_rf(field, transducer, phantom.height_mm)
    moved = displace_scatterers(field, phantom, deformation)
    post = synthesize_rf(moved, transducer, phantom.height_mm)
    post = shift_columns(post, extra_column_shift)
    pre = add_noise(pre, snr_db, pre_noise_seed)
    post = add_noise(post, snr_db, post_noise_seed)
    return pre, post


__all__ = [
    "generate_scatterers",
    "modulus_at",
    "modulus_map",
    "displace_scatterers",
    "axial_displacement_mm",
    "local_axial_strain",
    "synthesize_rf",
    "add_noise",
    "measured_snr_db",
    "shift_columns",
    "ideal_strain_map",
    "simulate_pair",
    "pulse",
]
