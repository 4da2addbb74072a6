"""Image fidelity metrics for [0, 1]-normalized images."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fields import ComplexField, GridMismatchError, RealImage

__all__ = ["FidelityScore", "mse", "psnr", "ssim", "fidelity", "align_global_phase"]

# SSIM constants for unit dynamic range (standard choices).
_SSIM_WINDOW = 11
_SSIM_SIGMA = 1.5
_SSIM_K1 = 0.01
_SSIM_K2 = 0.03


@dataclass(frozen=True)
class FidelityScore:
    psnr: float
    ssim: float
    mse: float

    def psnr_label(self) -> str:
        return "exact" if math.isinf(self.psnr) else f"{self.psnr:.6g}"


def _check_grids(ref: RealImage, test: RealImage):
    if ref.grid != test.grid:
        raise GridMismatchError(f"grids differ: {ref.grid} vs {test.grid}")


def mse(ref: RealImage, test: RealImage) -> float:
    _check_grids(ref, test)
    return float(np.mean((ref.data - test.data) ** 2))


def psnr(ref: RealImage, test: RealImage) -> float:
    """10*log10(1/mse) for peak 1; +inf ("exact") when the images coincide."""
    err = mse(ref, test)
    if err == 0.0:
        return math.inf
    return 10.0 * math.log10(1.0 / err)


def _gaussian_window(size: int, sigma: float) -> np.ndarray:
    t = np.arange(size) - (size - 1) / 2.0
    w = np.exp(-(t**2) / (2.0 * sigma**2))
    return w / w.sum()


def _windowed_mean(img: np.ndarray, w: np.ndarray) -> np.ndarray:
    # Separable valid-mode correlation with the (symmetric) window.
    k = len(w)
    n0, n1 = img.shape
    rows = np.empty((n0, n1 - k + 1))
    for i in range(n0):
        rows[i] = np.convolve(img[i], w, mode="valid")
    out = np.empty((n0 - k + 1, n1 - k + 1))
    for j in range(rows.shape[1]):
        out[:, j] = np.convolve(rows[:, j], w, mode="valid")
    return out


def ssim(ref: RealImage, test: RealImage) -> float:
    """Mean local SSIM with an 11x11 Gaussian window (sigma 1.5), range 1."""
    _check_grids(ref, test)
    if ref.grid.dims != 2 or ref.grid.n < _SSIM_WINDOW:
        raise ValueError(f"ssim needs a 2D grid with n >= {_SSIM_WINDOW}")
    x, y = ref.data, test.data
    w = _gaussian_window(_SSIM_WINDOW, _SSIM_SIGMA)
    mu_x = _windowed_mean(x, w)
    mu_y = _windowed_mean(y, w)
    mu_xx = _windowed_mean(x * x, w)
    mu_yy = _windowed_mean(y * y, w)
    mu_xy = _windowed_mean(x * y, w)
    var_x = mu_xx - mu_x**2
    var_y = mu_yy - mu_y**2
    cov = mu_xy - mu_x * mu_y
    c1 = _SSIM_K1**2
    c2 = _SSIM_K2**2
    num = (2 * mu_x * mu_y + c1) * (2 * cov + c2)
    den = (mu_x**2 + mu_y**2 + c1) * (var_x + var_y + c2)
    return float(np.mean(num / den))


def fidelity(ref: RealImage, test: RealImage) -> FidelityScore:
    return FidelityScore(psnr=psnr(ref, test), ssim=ssim(ref, test), mse=mse(ref, test))


def align_global_phase(estimate: ComplexField, reference: ComplexField) -> ComplexField:
    """Rotate the estimate by the global phase that best correlates with the reference.

    The magnitude measurement is blind to a global phase e^{i theta}; metrics on
    phase objects are computed after removing that gauge freedom.
    """
    corr = np.vdot(estimate.data, reference.data)
    if corr == 0:
        return estimate
    return estimate.with_data(estimate.data * (corr / abs(corr)))
