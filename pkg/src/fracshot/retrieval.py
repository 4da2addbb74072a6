"""Single-shot phase retrieval from one fractional-transform magnitude.

Two iterative solvers work directly on the measurement operator A = c F^p:

* `wirtinger_flow`: gradient descent on the amplitude residual
  1/2 || |A x| - b ||^2 with the Wirtinger gradient A^H((|z|-b) z/|z|).
* `gap_tv`: alternating projection; replaces the transform magnitude by the
  measured one, maps the correction back through the order -p transform
  (the *approximate* inverse -- the fast transform is not unitary, which is
  exactly why this solver degrades at small orders), and applies a total
  variation proximal step.

A single n^2-sample magnitude cannot pin down an unconstrained complex
field (2 n^2 real unknowns): gradient descent then converges onto a
magnitude-consistent estimate with meaningless per-pixel phase. Both
solvers therefore work in the *object's* parameter domain when it is
known: `object_kind="amplitude"` runs a complex warmup to localize the
solution, then descends over real-valued images clipped to [0, 1];
`object_kind="complex"` (and phase objects) keeps the unconstrained
iteration. PSNR against a known ground truth is tracked per iteration;
phase objects are scored after removing the global-phase gauge the
magnitude measurement cannot see.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Union

import numpy as np

from .fields import (
    ComplexField,
    Measurement,
    RealImage,
    circular_shift,
    conjugate_flip,
    decode_object,
    encode_object,
)
from .metrics import align_global_phase, psnr
from .propagation import FrftOperator, measurement_from_order, operator_for

__all__ = [
    "SolverConfig",
    "SolveReport",
    "amplitude_loss_grad",
    "wirtinger_flow",
    "gap_tv",
    "tv_denoise",
    "total_variation",
    "ambiguity_demo",
]

DEFAULT_WF_STEP = 0.5
DEFAULT_TV_WEIGHT = 0.01
DEFAULT_TV_ITERS = 20
# amplitude-mode schedule: fraction of the budget spent in the complex
# warmup, and the step reduction for the projected real descent after it
_WARMUP_FRACTION = 0.3
_POLISH_STEP_FACTOR = 0.1


@dataclass(frozen=True)
class SolverConfig:
    max_iters: int = 2000
    step: float = DEFAULT_WF_STEP
    tv_weight: float = DEFAULT_TV_WEIGHT
    tv_inner_iters: int = DEFAULT_TV_ITERS
    init: Union[str, ComplexField] = "random"  # random | spectral | provided field
    tolerance: float = 0.0  # relative loss-change stop; 0 runs all iterations
    eps_phase: float = 1e-12  # relative to the measurement peak
    seed: int = 0

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.step <= 0:
            raise ValueError("step must be positive")
        if self.tv_weight < 0:
            raise ValueError("tv_weight must be nonnegative")
        if isinstance(self.init, str) and self.init not in ("random", "spectral"):
            raise ValueError(f"unknown init {self.init!r}")


@dataclass(frozen=True)
class SolveReport:
    estimate: ComplexField
    loss_trace: np.ndarray = field(repr=False)
    psnr_trace: Optional[np.ndarray] = field(repr=False, default=None)
    iterations_run: int = 0
    converged: bool = False

    def final_psnr(self) -> Optional[float]:
        if self.psnr_trace is None or len(self.psnr_trace) == 0:
            return None
        return float(self.psnr_trace[-1])


def amplitude_loss_grad(x: np.ndarray, b: np.ndarray, op: FrftOperator, eps: float):
    """Loss 1/2 || |A x| - b ||^2 and its gradient d/du + i d/dv at x."""
    z = op.forward(x)
    mag = np.abs(z)
    resid = mag - b
    loss = 0.5 * float(np.sum(resid**2))
    grad = op.adjoint(resid * z / np.maximum(mag, eps))
    return loss, grad


def _random_init(rng: np.random.Generator, op: FrftOperator, b: np.ndarray) -> np.ndarray:
    # Back-projection of the measurement under random phases: starts inside
    # range(A^H), where every gradient step also lives, so components the
    # operator cannot see never enter the iterate.
    x = op.adjoint(b * np.exp(2j * np.pi * rng.uniform(size=b.shape)))
    scale = np.linalg.norm(b) / max(np.linalg.norm(op.forward(x)), 1e-300)
    return x * scale


def _spectral_init(rng: np.random.Generator, op: FrftOperator, b: np.ndarray) -> np.ndarray:
    # power iteration on A^H diag(b^2) A
    v = rng.standard_normal(b.shape) + 1j * rng.standard_normal(b.shape)
    v /= np.linalg.norm(v)
    for _ in range(30):
        v = op.adjoint(b**2 * op.forward(v))
        v /= np.linalg.norm(v)
    return v * (np.linalg.norm(b) / max(np.linalg.norm(op.forward(v)), 1e-300))


def _initial_guess(cfg: SolverConfig, op: FrftOperator, meas: Measurement) -> np.ndarray:
    if isinstance(cfg.init, ComplexField):
        return cfg.init.data.copy()
    rng = np.random.default_rng(cfg.seed)
    if cfg.init == "spectral":
        return _spectral_init(rng, op, meas.amplitude)
    return _random_init(rng, op, meas.amplitude)


class _Tracker:
    """Collects per-iteration traces and builds the final report."""

    def __init__(self, grid, truth: Optional[RealImage], kind: str):
        self.grid = grid
        self.truth = truth
        self.kind = kind
        self.losses = []
        self.psnrs = [] if truth is not None else None

    def record(self, loss: float, x: np.ndarray):
        self.losses.append(loss)
        if self.psnrs is not None:
            est = ComplexField(self.grid, np.ascontiguousarray(x))
            if self.kind == "phase":
                est = align_global_phase(est, encode_object(self.truth, "phase"))
            self.psnrs.append(psnr(self.truth, decode_object(est, self.kind)))

    def report(self, x: np.ndarray, converged: bool) -> SolveReport:
        return SolveReport(
            estimate=ComplexField(self.grid, np.ascontiguousarray(x)),
            loss_trace=np.asarray(self.losses),
            psnr_trace=None if self.psnrs is None else np.asarray(self.psnrs),
            iterations_run=len(self.losses),
            converged=converged,
        )


def _loss_stop(prev: Optional[float], cur: float, tol: float) -> bool:
    if prev is None or tol <= 0:
        return False
    return abs(prev - cur) / max(prev, 1e-300) < tol


def wirtinger_flow(
    meas: Measurement,
    cfg: SolverConfig,
    truth: Optional[RealImage] = None,
    truth_kind: str = "amplitude",
    object_kind: str = "amplitude",
) -> SolveReport:
    """Fixed-step gradient descent on the amplitude loss.

    object_kind="amplitude" spends the first ~30% of the budget on the
    unconstrained complex iterate, takes its magnitude, and descends over
    real images in [0, 1] at step/10; "complex" runs the plain iteration
    for the whole budget (use this for phase objects, scoring with
    truth_kind="phase").
    """
    if object_kind not in ("amplitude", "complex"):
        raise ValueError(f"unknown object_kind {object_kind!r}")
    op = operator_for(meas)
    b = meas.amplitude
    eps = cfg.eps_phase * float(b.max() if b.max() > 0 else 1.0)
    track = _Tracker(meas.detector_grid, truth, truth_kind)
    x = _initial_guess(cfg, op, meas)

    warmup = cfg.max_iters if object_kind == "complex" else int(round(_WARMUP_FRACTION * cfg.max_iters))
    prev_loss = None
    for _ in range(warmup):
        loss, grad = amplitude_loss_grad(x, b, op, eps)
        if not math.isfinite(loss):
            track.record(loss, x)
            return track.report(x, converged=False)
        x = x - cfg.step * grad
        track.record(loss, x)
        if _loss_stop(prev_loss, loss, cfg.tolerance):
            return track.report(x, converged=True)
        prev_loss = loss
    if object_kind == "complex":
        return track.report(x, converged=False)

    xr = np.abs(x)
    polish_step = cfg.step * _POLISH_STEP_FACTOR
    for _ in range(cfg.max_iters - warmup):
        loss, grad = amplitude_loss_grad(xr.astype(complex), b, op, eps)
        if not math.isfinite(loss):
            track.record(loss, xr.astype(complex))
            return track.report(xr.astype(complex), converged=False)
        xr = np.clip(xr - polish_step * grad.real, 0.0, 1.0)
        track.record(loss, xr.astype(complex))
        if _loss_stop(prev_loss, loss, cfg.tolerance):
            return track.report(xr.astype(complex), converged=True)
        prev_loss = loss
    return track.report(xr.astype(complex), converged=False)


# ---------------------------------------------------------------------------
# total variation proximal step (dual projection, fixed iteration count)


def _grad2(u):
    gx = np.zeros_like(u)
    gy = np.zeros_like(u)
    gx[:, :-1] = u[:, 1:] - u[:, :-1]
    gy[:-1, :] = u[1:, :] - u[:-1, :]
    return gx, gy


def _div2(px, py):
    out = np.zeros_like(px)
    out[:, :-1] -= px[:, :-1]
    out[:, 1:] += px[:, :-1]
    out[:-1, :] -= py[:-1, :]
    out[1:, :] += py[:-1, :]
    return out


def tv_denoise(img: Union[np.ndarray, RealImage], weight: float, iters: int = DEFAULT_TV_ITERS):
    """Isotropic TV proximal step min_u 1/2||u-f||^2 + weight*TV(u).

    Dual projection iteration with a fixed count; weight 0 returns the input.
    """
    as_image = isinstance(img, RealImage)
    f = img.data.astype(float) if as_image else np.asarray(img, dtype=float)
    if weight == 0.0:
        out = f.copy()
        return RealImage(img.grid, out) if as_image else out
    tau = 0.125
    px = np.zeros_like(f)
    py = np.zeros_like(f)
    for _ in range(iters):
        gx, gy = _grad2(f / weight - _div2(px, py))
        norm = 1.0 + tau * np.hypot(gx, gy)
        px = (px + tau * gx) / norm
        py = (py + tau * gy) / norm
    out = f - weight * _div2(px, py)
    return RealImage(img.grid, out) if as_image else out


def total_variation(u: np.ndarray) -> float:
    gx, gy = _grad2(np.asarray(u, dtype=float))
    return float(np.sum(np.hypot(gx, gy)))


def _tv_denoise_complex(x: np.ndarray, weight: float, iters: int) -> np.ndarray:
    if weight == 0.0:
        return x.copy()
    return tv_denoise(x.real, weight, iters) + 1j * tv_denoise(x.imag, weight, iters)


def gap_tv(
    meas: Measurement,
    cfg: SolverConfig,
    truth: Optional[RealImage] = None,
    truth_kind: str = "amplitude",
    object_kind: str = "amplitude",
) -> SolveReport:
    """Alternating projection: magnitude replacement, order -p back-mapping,
    TV proximal step. Inherits the inverse-transform error at small orders.

    object_kind="amplitude" keeps the iterate a real [0, 1] image after
    every TV step; "complex" denoises real and imaginary parts separately.
    """
    if object_kind not in ("amplitude", "complex"):
        raise ValueError(f"unknown object_kind {object_kind!r}")
    op = operator_for(meas)
    b = meas.amplitude
    eps = cfg.eps_phase * float(b.max() if b.max() > 0 else 1.0)
    track = _Tracker(meas.detector_grid, truth, truth_kind)
    x = _initial_guess(cfg, op, meas)
    if object_kind == "amplitude":
        x = np.abs(x).astype(complex)
    prev_loss = None
    converged = False
    for _ in range(cfg.max_iters):
        z = op.forward(x)
        mag = np.abs(z)
        loss = 0.5 * float(np.sum((mag - b) ** 2))
        if not math.isfinite(loss):
            track.record(loss, x)
            return track.report(x, converged=False)
        z_replaced = b * z / np.maximum(mag, eps)
        v = x + op.approx_inverse(z_replaced - z)
        if object_kind == "amplitude":
            x = np.clip(tv_denoise(v.real, cfg.tv_weight, cfg.tv_inner_iters), 0.0, 1.0).astype(complex)
        else:
            x = _tv_denoise_complex(v, cfg.tv_weight, cfg.tv_inner_iters)
        track.record(loss, x)
        if _loss_stop(prev_loss, loss, cfg.tolerance):
            converged = True
            break
        prev_loss = loss
    return track.report(x, converged)


# ---------------------------------------------------------------------------
# ambiguity experiments


def ambiguity_demo(
    obj: ComplexField,
    orders,
    shift: tuple = (0, 0),
    solver: Optional[SolverConfig] = None,
    truth: Optional[RealImage] = None,
    truth_kind: str = "amplitude",
    init_noise: float = 0.05,
):
    """Distance between the magnitude of the transform of an object and of its
    shifted / conjugate-flipped copies, per order; optionally runs the gradient
    solver from those perturbed objects (plus Gaussian noise) as initial guesses.
    """
    if shift == (0, 0):
        shift = (obj.grid.n // 4, 0)
    shifted = circular_shift(obj, *shift)
    flipped = conjugate_flip(obj)
    rows = []
    for p in orders:
        base = measurement_from_order(p, obj)
        m_ref = base.amplitude
        scale = np.linalg.norm(m_ref)
        row = {"order": p, "shift": shift}
        for name, variant in [("shift", shifted), ("flip", flipped)]:
            m_var = measurement_from_order(p, variant).amplitude
            row[f"distance_{name}"] = float(np.linalg.norm(m_var - m_ref) / scale)
        if solver is not None:
            rng = np.random.default_rng(solver.seed)
            for name, variant in [("shift", shifted), ("flip", flipped)]:
                noisy = variant.data + init_noise * (
                    rng.standard_normal(variant.data.shape)
                    + 1j * rng.standard_normal(variant.data.shape)
                )
                scfg = replace(solver, init=ComplexField(obj.grid, noisy))
                report = wirtinger_flow(base, scfg, truth=truth, truth_kind=truth_kind)
                row[f"solver_{name}"] = report
                if report.psnr_trace is not None:
                    row[f"final_psnr_{name}"] = report.final_psnr()
        rows.append(row)
    return rows
