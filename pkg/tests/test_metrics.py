import math

import numpy as np
import pytest

from fracshot import ComplexField, RealImage, SamplingGrid, GridMismatchError
from fracshot import align_global_phase, fidelity, mse, psnr, ssim
from fracshot.metrics import _SSIM_K1, _SSIM_K2, _SSIM_SIGMA, _SSIM_WINDOW, _gaussian_window


def image(data, pitch=1.0):
    data = np.asarray(data, dtype=float)
    return RealImage(SamplingGrid(data.shape[0], pitch, dims=2), data)


def ssim_scalar_reference(x, y):
    """Direct windowed evaluation of the SSIM formula, no separable tricks."""
    w1 = _gaussian_window(_SSIM_WINDOW, _SSIM_SIGMA)
    w = np.outer(w1, w1)
    c1, c2 = _SSIM_K1**2, _SSIM_K2**2
    n = x.shape[0]
    vals = []
    for i in range(n - _SSIM_WINDOW + 1):
        for j in range(n - _SSIM_WINDOW + 1):
            px = x[i : i + _SSIM_WINDOW, j : j + _SSIM_WINDOW]
            py = y[i : i + _SSIM_WINDOW, j : j + _SSIM_WINDOW]
            mx, my = np.sum(w * px), np.sum(w * py)
            vx = np.sum(w * px * px) - mx**2
            vy = np.sum(w * py * py) - my**2
            cov = np.sum(w * px * py) - mx * my
            vals.append(
                ((2 * mx * my + c1) * (2 * cov + c2))
                / ((mx**2 + my**2 + c1) * (vx + vy + c2))
            )
    return float(np.mean(vals))


class TestPsnr:
    def test_identical_exact_sentinel(self):
        a = image(np.random.default_rng(0).uniform(0, 1, (16, 16)))
        assert math.isinf(psnr(a, a))

    def test_flat_offset_twenty_db(self):
        a = image(np.zeros((16, 16)))
        b = image(np.full((16, 16), 0.1))
        assert psnr(a, b) == pytest.approx(20.0, abs=1e-12)

    def test_full_scale_zero_db(self):
        a = image(np.zeros((16, 16)))
        b = image(np.ones((16, 16)))
        assert psnr(a, b) == pytest.approx(0.0, abs=1e-12)

    def test_symmetric(self):
        rng = np.random.default_rng(1)
        a = image(rng.uniform(0, 1, (16, 16)))
        b = image(rng.uniform(0, 1, (16, 16)))
        assert psnr(a, b) == psnr(b, a)

    def test_grid_mismatch(self):
        with pytest.raises(GridMismatchError):
            psnr(image(np.zeros((16, 16))), image(np.zeros((16, 16)), pitch=2.0))


class TestSsim:
    def test_self_is_one(self):
        a = image(np.random.default_rng(2).uniform(0, 1, (32, 32)))
        assert ssim(a, a) == pytest.approx(1.0, abs=1e-12)

    def test_constant_pair_is_one(self):
        a = image(np.full((16, 16), 0.5))
        assert ssim(a, a) == pytest.approx(1.0, abs=1e-12)

    def test_binary_inverse_negative(self):
        rng = np.random.default_rng(3)
        a = (rng.uniform(0, 1, (24, 24)) > 0.5).astype(float)
        val = ssim(image(a), image(1.0 - a))
        assert val < 0.0
        assert val == pytest.approx(ssim_scalar_reference(a, 1.0 - a), abs=1e-10)

    def test_matches_scalar_reference_random(self):
        rng = np.random.default_rng(4)
        a = rng.uniform(0, 1, (20, 20))
        b = np.clip(a + 0.1 * rng.standard_normal((20, 20)), 0, 1)
        assert ssim(image(a), image(b)) == pytest.approx(
            ssim_scalar_reference(a, b), abs=1e-10
        )

    def test_window_size_guard(self):
        a = image(np.zeros((8, 8)))
        with pytest.raises(ValueError):
            ssim(a, a)


class TestFidelityAndAlignment:
    def test_fidelity_bundle(self):
        rng = np.random.default_rng(5)
        a = image(rng.uniform(0, 1, (16, 16)))
        score = fidelity(a, a)
        assert score.psnr_label() == "exact"
        assert score.ssim == pytest.approx(1.0)
        assert score.mse == 0.0

    def test_align_global_phase_recovers_rotation(self):
        rng = np.random.default_rng(6)
        g = SamplingGrid(16, 1.0, dims=2)
        ref = ComplexField(g, rng.standard_normal((16, 16)) + 1j * rng.standard_normal((16, 16)))
        rotated = ComplexField(g, ref.data * np.exp(1j * 1.234))
        aligned = align_global_phase(rotated, ref)
        np.testing.assert_allclose(aligned.data, ref.data, atol=1e-12)

    def test_mse_basic(self):
        a = image(np.zeros((16, 16)))
        b = image(np.full((16, 16), 0.5))
        assert mse(a, b) == pytest.approx(0.25)
