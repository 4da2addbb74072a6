"""Near-field diffraction models.

Four propagators share one question -- the Fresnel integral

    U_d(x, y) = e^{i 2 pi d / lambda} / (i lambda d)
                * iint U_0(x', y') e^{i pi ((x-x')^2 + (y-y')^2) / (lambda d)} dx' dy'

-- and answer it with different discretizations:

* propagate_reference: brute-force separable trapezium quadrature, evaluated
  directly at the destination coordinates. The source samples are first
  band-limited-interpolated onto a finer lattice so the quadrature resolves
  the chirp at short distances; this makes it the ground-truth oracle for
  the fast models (which all consume the same sampled field).
* propagate_sft: single-FFT form; destination pixel pitch lambda*d/(N dx').
* propagate_tf: transfer-function (frequency-domain) form; pitch preserved.
* propagate_frft: fractional-Fourier form. The distance maps to an order
  p = (2/pi) atan(lambda d N / L^2) and a detector scale
  s2 = sqrt(1 + (lambda d N / L^2)^2); the field is the order-p transform on
  the dimensionless lattice (pitch 1/sqrt(N)) times a spherical phase, and
  the detector pitch is s2 times the source pitch. Magnitudes obey
  |U_d| = |F^p U_0| / sqrt(tan(a)^2 + 1).

The same order/scale mapping defines the measurement operator used by the
phase-retrieval solvers; `measurement_from_order` gives its purely digital
form (unit scale, no geometric attenuation) for transform-domain
experiments.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import List, Optional, Sequence, Union

import numpy as np

from . import dfrft
from .fields import ComplexField, Measurement, MeasurementMeta, SamplingGrid

__all__ = [
    "OpticalConfig",
    "OrderScale",
    "map_order",
    "config_for_order",
    "propagate_reference",
    "propagate_sft",
    "propagate_tf",
    "propagate_frft",
    "forward_measurement",
    "measurement_from_order",
    "FrftOperator",
    "operator_for",
    "resample",
    "resample_array",
    "intensity_psnr",
    "compare_models",
]

MAX_REFINE = 16


@dataclass(frozen=True)
class OpticalConfig:
    """Source-side description: wavelength, propagation distance, sampling."""

    wavelength: float
    distance: float
    grid: SamplingGrid

    def __post_init__(self):
        if not (self.wavelength > 0 and math.isfinite(self.wavelength)):
            raise ValueError(f"wavelength must be positive, got {self.wavelength}")
        if not (self.distance > 0 and math.isfinite(self.distance)):
            raise ValueError(f"distance must be positive, got {self.distance}")


@dataclass(frozen=True)
class OrderScale:
    """Fractional order and detector scale equivalent to a physical distance."""

    order: float
    scale: float

    @property
    def alpha(self) -> float:
        return self.order * math.pi / 2

    @property
    def tan_alpha(self) -> float:
        return math.tan(self.alpha)

    def amplitude_constant(self) -> float:
        return 1.0 / math.sqrt(self.tan_alpha**2 + 1.0)


def map_order(cfg: OpticalConfig) -> OrderScale:
    """Order/scale of the propagation: p = (2/pi) atan(t), s2 = sqrt(1+t^2),
    with t = lambda d N / L^2 (unit source scale)."""
    g = cfg.grid
    t = cfg.wavelength * cfg.distance * g.n / g.window**2
    return OrderScale(order=2.0 / math.pi * math.atan(t), scale=math.hypot(1.0, t))


def config_for_order(p: float, grid: SamplingGrid, wavelength: float) -> OpticalConfig:
    """Distance whose propagation corresponds to fractional order p in (0, 1)."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"a finite distance needs 0 < p < 1, got {p}")
    t = math.tan(p * math.pi / 2)
    d = t * grid.window**2 / (wavelength * grid.n)
    return OpticalConfig(wavelength=wavelength, distance=d, grid=grid)


# ---------------------------------------------------------------------------
# reference quadrature


@lru_cache(maxsize=8)
def _refine_matrix(n: int, factor: int) -> np.ndarray:
    """(factor*n, n) band-limited interpolation matrix (periodic Dirichlet).

    Columns are the refined unit samples: zero-pad the centered spectrum,
    splitting the even-n Nyquist bin symmetrically so original samples are
    reproduced exactly.
    """
    if factor == 1:
        return np.eye(n, dtype=complex)
    nf = factor * n
    spec = dfrft.centered_dft(np.eye(n, dtype=complex))  # rows: basis vectors
    pad = np.zeros((n, nf), dtype=complex)
    lo = nf // 2 - n // 2
    pad[:, lo : lo + n] = spec
    if n % 2 == 0:
        pad[:, lo] *= 0.5
        pad[:, lo + n] = pad[:, lo]
    fine = dfrft.centered_idft(pad) * math.sqrt(factor)
    return np.ascontiguousarray(fine.T)


def _auto_refine(cfg: OpticalConfig, dest: SamplingGrid) -> int:
    # Nyquist criterion for the quadrature chirp: fine pitch must satisfy
    # 2 |x - x'|_max * pitch_fine <= lambda d.
    reach = dest.window / 2 + cfg.grid.window / 2
    need = cfg.wavelength * cfg.distance / (2 * reach)
    return int(np.clip(math.ceil(cfg.grid.pitch / need), 1, MAX_REFINE))


def _quadrature_kernel(cfg: OpticalConfig, dest: SamplingGrid, refine: int) -> np.ndarray:
    """(n_dest, n_src) effective 1D kernel: chirp x trapezium weights x refinement."""
    src = cfg.grid
    nf = refine * src.n
    fine_pitch = src.pitch / refine
    xf = (np.arange(nf) - nf // 2) * fine_pitch
    xo = dest.coords()
    w = np.full(nf, fine_pitch)
    w[0] *= 0.5
    w[-1] *= 0.5
    g = np.exp(1j * math.pi * (xo[:, None] - xf[None, :]) ** 2 / (cfg.wavelength * cfg.distance))
    g *= w[None, :]
    if refine == 1:
        return g
    return g @ _refine_matrix(src.n, refine)


def propagate_reference(
    cfg: OpticalConfig,
    fld: ComplexField,
    dest_grid: Optional[SamplingGrid] = None,
    refine: Optional[int] = None,
    full2d: bool = False,
) -> ComplexField:
    """Trapezium-rule quadrature of the Fresnel integral (the oracle path).

    Defaults to the fractional-model detector grid so the fast propagators can
    be compared sample-for-sample. `refine` upsamples the source field
    (band-limited) before integrating; by default it is chosen from the chirp
    sampling criterion, so short distances are integrated densely. `full2d`
    evaluates the non-separable double sum directly (small grids only).
    """
    if fld.grid != cfg.grid:
        raise ValueError("field grid does not match the optical configuration")
    if dest_grid is None:
        dest_grid = cfg.grid.scaled(map_order(cfg).scale)
    if refine is None:
        refine = _auto_refine(cfg, dest_grid)
    lam_d = cfg.wavelength * cfg.distance
    phase = np.exp(2j * math.pi * cfg.distance / cfg.wavelength)
    g = _quadrature_kernel(cfg, dest_grid, refine)
    if fld.grid.dims == 1:
        out = (phase / np.sqrt(1j * lam_d)) * (g @ fld.data)
        return ComplexField(SamplingGrid(dest_grid.n, dest_grid.pitch, 1), out)
    if full2d:
        if cfg.grid.n > 96:
            raise ValueError("full 2D quadrature is restricted to small grids")
        k4 = np.einsum("ac,bd->abcd", g, g)
        out = (phase / (1j * lam_d)) * np.einsum("abcd,cd->ab", k4, fld.data)
    else:
        out = (phase / (1j * lam_d)) * (g @ fld.data @ g.T)
    return ComplexField(SamplingGrid(dest_grid.n, dest_grid.pitch, 2), out)


# ---------------------------------------------------------------------------
# fast models


def _cdft2(data: np.ndarray) -> np.ndarray:
    return dfrft.centered_dft(dfrft.centered_dft(data).T).T


def _cidft2(data: np.ndarray) -> np.ndarray:
    return dfrft.centered_idft(dfrft.centered_idft(data).T).T


def propagate_sft(cfg: OpticalConfig, fld: ComplexField) -> ComplexField:
    """Single-transform form; destination pitch lambda*d/(N dx')."""
    if fld.grid != cfg.grid:
        raise ValueError("field grid does not match the optical configuration")
    g = cfg.grid
    lam_d = cfg.wavelength * cfg.distance
    x = g.coords()
    chirp_in = np.exp(1j * math.pi * (x[:, None] ** 2 + x[None, :] ** 2) / lam_d)
    spec = _cdft2(fld.data * chirp_in) * math.sqrt(g.n) ** 2  # plain (non-unitary) sum
    out_pitch = lam_d / (g.n * g.pitch)
    xo = (np.arange(g.n) - g.n // 2) * out_pitch
    chirp_out = np.exp(1j * math.pi * (xo[:, None] ** 2 + xo[None, :] ** 2) / lam_d)
    pref = np.exp(2j * math.pi * cfg.distance / cfg.wavelength) / (1j * lam_d)
    out = pref * chirp_out * spec * g.pitch**2
    return ComplexField(SamplingGrid(g.n, out_pitch, 2), out)


def propagate_tf(cfg: OpticalConfig, fld: ComplexField) -> ComplexField:
    """Transfer-function form; pitch preserving, exactly norm preserving."""
    if fld.grid != cfg.grid:
        raise ValueError("field grid does not match the optical configuration")
    g = cfg.grid
    f = (np.arange(g.n) - g.n // 2) / g.window
    h = np.exp(
        1j * math.pi * cfg.distance
        * (2.0 / cfg.wavelength - cfg.wavelength * (f[:, None] ** 2 + f[None, :] ** 2))
    )
    out = _cidft2(_cdft2(fld.data) * h)
    return ComplexField(g, out)


def _normalized_plan(p: float, n: int) -> dfrft.FrFTPlan:
    return dfrft.plan(p, n, 1.0 / math.sqrt(n))


def propagate_frft(cfg: OpticalConfig, fld: ComplexField):
    """Fractional-transform propagation; returns (field, OrderScale)."""
    if fld.grid != cfg.grid:
        raise ValueError("field grid does not match the optical configuration")
    g = cfg.grid
    os = map_order(cfg)
    pl = _normalized_plan(os.order, g.n)
    spec = dfrft.apply_2d(pl, pl, fld.data)
    xh = (np.arange(g.n) - g.n // 2) / math.sqrt(g.n)
    sphere = np.exp(1j * math.pi * os.tan_alpha * (xh[:, None] ** 2 + xh[None, :] ** 2))
    pref = np.exp(2j * math.pi * cfg.distance / cfg.wavelength) / (1j * os.tan_alpha + 1.0)
    out = ComplexField(g.scaled(os.scale), pref * sphere * spec)
    return out, os


# ---------------------------------------------------------------------------
# measurement operator


class FrftOperator:
    """Linear operator x -> c * F^p x on the dimensionless 2D lattice.

    `forward` is the map whose magnitude the detector sees; `adjoint` is its
    exact conjugate transpose (for gradients); `approx_inverse` applies the
    order -p transform, which inverts only approximately away from |p| = 1
    and 0 (the fast transform is not unitary).
    """

    def __init__(self, order: float, n: int, constant: float = 1.0):
        self.order = float(order)
        self.n = int(n)
        self.constant = float(constant)
        self._plan = _normalized_plan(self.order, self.n)
        self._inv = self._plan.inverse_plan()

    def forward(self, x: np.ndarray) -> np.ndarray:
        return self.constant * dfrft.apply_2d(self._plan, self._plan, x)

    def adjoint(self, y: np.ndarray) -> np.ndarray:
        return self.constant * dfrft.adjoint_2d(self._plan, self._plan, y)

    def approx_inverse(self, y: np.ndarray) -> np.ndarray:
        return dfrft.apply_2d(self._inv, self._inv, y) / self.constant

    def measure(self, x: np.ndarray) -> np.ndarray:
        return np.abs(self.forward(x))


def forward_measurement(cfg: OpticalConfig, obj: ComplexField) -> Measurement:
    """Physical single-shot measurement: |F^p obj| / sqrt(tan^2 a + 1) on the
    s2-scaled detector grid."""
    if obj.grid != cfg.grid:
        raise ValueError("object grid does not match the optical configuration")
    os = map_order(cfg)
    op = FrftOperator(os.order, cfg.grid.n, constant=os.amplitude_constant())
    amp = op.measure(obj.data)
    meta = MeasurementMeta(
        order=os.order, scale=os.scale, wavelength=cfg.wavelength, distance=cfg.distance
    )
    det = cfg.grid.scaled(os.scale)
    return Measurement(amp, det, meta, source_pitch=cfg.grid.pitch)


def measurement_from_order(p: float, obj: ComplexField) -> Measurement:
    """Digital transform-domain measurement |F^p obj| (unit scale, no optics)."""
    if not 0.0 < p <= 1.0:
        raise ValueError(f"measurement order must lie in (0, 1], got {p}")
    op = FrftOperator(p, obj.grid.n, constant=1.0)
    amp = op.measure(obj.data)
    meta = MeasurementMeta(order=p, scale=1.0, wavelength=None, distance=None)
    return Measurement(amp, obj.grid, meta, source_pitch=obj.grid.pitch)


def operator_for(meas: Measurement) -> FrftOperator:
    """Forward operator consistent with how the measurement was produced."""
    return FrftOperator(
        meas.meta.order, meas.detector_grid.n, constant=meas.meta.amplitude_constant()
    )


# ---------------------------------------------------------------------------
# band-limited resampling


def resample_array(data: np.ndarray, factor: float, oversample: int = 32) -> np.ndarray:
    """Rate conversion along the last axis: output sample k sits at coordinate
    k * (pitch * factor) of the input, linearly interpolated on an
    `oversample`-times zero-pad-refined grid; coordinates beyond the input
    window give 0. Output length equals input length (window grows by factor).
    """
    if factor < 1.0:
        raise ValueError(f"resampling factor must be >= 1, got {factor}")
    if oversample < 8:
        raise ValueError("oversampling below 8x is too coarse for interpolation")
    data = np.asarray(data)
    if factor == 1.0:
        return data.copy()
    n = data.shape[-1]
    nf = oversample * n
    spec = dfrft.centered_dft(data.astype(np.complex128))
    pad_shape = data.shape[:-1] + (nf,)
    pad = np.zeros(pad_shape, dtype=np.complex128)
    lo = nf // 2 - n // 2
    pad[..., lo : lo + n] = spec
    if n % 2 == 0:
        pad[..., lo] *= 0.5
        pad[..., lo + n] = pad[..., lo]
    fine = dfrft.centered_idft(pad) * math.sqrt(oversample)
    # target coordinates in units of the fine pitch
    q = (np.arange(n) - n // 2) * factor * oversample + nf // 2
    q0 = np.floor(q).astype(int)
    frac = q - q0
    valid = (q0 >= 0) & (q0 + 1 <= nf - 1)
    q0c = np.clip(q0, 0, nf - 2)
    out = fine[..., q0c] * (1 - frac) + fine[..., q0c + 1] * frac
    out[..., ~valid] = 0.0
    return out


def _resample2(data: np.ndarray, factor: float, oversample: int) -> np.ndarray:
    rows = resample_array(data, factor, oversample)
    return resample_array(rows.T, factor, oversample).T


def resample(
    item: Union[ComplexField, Measurement], factor: float, oversample: int = 32
) -> Union[ComplexField, Measurement]:
    """Band-limited rate conversion of a field or measurement (factor >= 1)."""
    if isinstance(item, ComplexField):
        if item.grid.dims == 1:
            out = resample_array(item.data, factor, oversample)
        else:
            out = _resample2(item.data, factor, oversample)
        return ComplexField(item.grid.scaled(factor), out)
    if isinstance(item, Measurement):
        if item.detector_grid.dims == 1:
            amp = resample_array(item.amplitude.astype(complex), factor, oversample)
        else:
            amp = _resample2(item.amplitude.astype(complex), factor, oversample)
        amp = np.maximum(amp.real, 0.0)
        return Measurement(amp, item.detector_grid.scaled(factor), item.meta)
    raise TypeError(f"cannot resample {type(item).__name__}")


# ---------------------------------------------------------------------------
# model comparison


def intensity_psnr(ref: ComplexField, test: ComplexField) -> float:
    """PSNR between intensity patterns, both scaled by the reference peak."""
    same = (
        ref.grid.n == test.grid.n
        and ref.grid.dims == test.grid.dims
        and math.isclose(ref.grid.pitch, test.grid.pitch, rel_tol=1e-9)
    )
    if not same:
        raise ValueError("intensity comparison needs a common grid")
    ir = np.abs(ref.data) ** 2
    it = np.abs(test.data) ** 2
    peak = ir.max()
    if peak == 0:
        raise ValueError("reference intensity is identically zero")
    err = float(np.mean(((it - ir) / peak) ** 2))
    return math.inf if err == 0 else 10.0 * math.log10(1.0 / err)


def compare_models(
    cfg_template: OpticalConfig,
    distances: Sequence[float],
    aperture: ComplexField,
    keep_fields: bool = False,
) -> List[dict]:
    """Run SFT / TF / FrFT against the quadrature reference over a distance sweep.

    Every model output is brought onto the fractional model's detector grid
    (pitch s2 dx') with the band-limited resampler, then scored with
    intensity PSNR against the reference computed natively on that grid.
    Returns one row dict per (distance, model).
    """
    rows: List[dict] = []
    for d in distances:
        cfg = OpticalConfig(cfg_template.wavelength, d, cfg_template.grid)
        os = map_order(cfg)
        ref = propagate_reference(cfg, aperture)
        frft_out, _ = propagate_frft(cfg, aperture)
        sft_native = propagate_sft(cfg, aperture)
        tf_native = propagate_tf(cfg, aperture)
        sft_out = resample(sft_native, ref.grid.pitch / sft_native.grid.pitch)
        tf_out = resample(tf_native, os.scale)
        for name, out in [("sft", sft_out), ("tf", tf_out), ("frft", frft_out)]:
            row = {
                "distance_m": d,
                "model": name,
                "psnr_db": intensity_psnr(ref, out),
                "order": os.order,
                "scale": os.scale,
            }
            if keep_fields:
                row["field"] = out
                row["reference"] = ref
            rows.append(row)
    return rows
