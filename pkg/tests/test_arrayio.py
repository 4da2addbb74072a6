import numpy as np
import pytest

from fracshot import (
    ArrayDtypeError,
    ArrayFormatError,
    ArrayTruncatedError,
    load_array,
    load_pgm,
    save_array,
    save_pgm,
)
from fracshot import add_noise, Measurement, MeasurementMeta, SamplingGrid


class TestArrayRoundTrip:
    def test_small_complex_bit_exact(self, tmp_path):
        x = np.array([[1.5 + 2j, -3.25], [0.0, 1e-300 + 1e300j]])
        p = tmp_path / "x.npy"
        save_array(p, x)
        y = load_array(p)
        assert y.dtype == np.complex128
        assert np.array_equal(x, y)

    def test_real_roundtrip(self, tmp_path):
        rng = np.random.default_rng(0)
        x = rng.standard_normal((7, 3))
        p = tmp_path / "r.npy"
        save_array(p, x)
        assert np.array_equal(load_array(p), x)

    def test_1d_roundtrip(self, tmp_path):
        x = np.arange(5, dtype=float)
        save_array(tmp_path / "v.npy", x)
        assert np.array_equal(load_array(tmp_path / "v.npy"), x)

    def test_large_field_norm_exact(self, tmp_path):
        rng = np.random.default_rng(1)
        x = rng.standard_normal((256, 256)) + 1j * rng.standard_normal((256, 256))
        p = tmp_path / "f.npy"
        save_array(p, x)
        y = load_array(p)
        assert np.linalg.norm(y) == np.linalg.norm(x)
        assert np.array_equal(x, y)

    def test_numpy_interop(self, tmp_path):
        # files are plain NPY v1.0: numpy must read ours and we must read numpy's
        x = np.linspace(0, 1, 12).reshape(3, 4).astype(np.complex128)
        ours = tmp_path / "ours.npy"
        save_array(ours, x)
        assert np.array_equal(np.load(ours), x)
        theirs = tmp_path / "theirs.npy"
        np.save(theirs, x)
        assert np.array_equal(load_array(theirs), x)

    def test_byte_stable(self, tmp_path):
        x = np.arange(6, dtype=float).reshape(2, 3)
        a, b = tmp_path / "a.npy", tmp_path / "b.npy"
        save_array(a, x)
        save_array(b, x)
        assert a.read_bytes() == b.read_bytes()


class TestArrayErrors:
    def test_bad_magic(self, tmp_path):
        p = tmp_path / "bad.npy"
        p.write_bytes(b"NOTNPY" + b"\x00" * 64)
        with pytest.raises(ArrayFormatError):
            load_array(p)

    def test_bad_version(self, tmp_path):
        p = tmp_path / "v2.npy"
        good = tmp_path / "good.npy"
        save_array(good, np.zeros(3))
        raw = bytearray(good.read_bytes())
        raw[6] = 2
        p.write_bytes(bytes(raw))
        with pytest.raises(ArrayFormatError):
            load_array(p)

    def test_unsupported_dtype(self, tmp_path):
        p = tmp_path / "int.npy"
        np.save(p, np.arange(4, dtype=np.int64))
        with pytest.raises(ArrayDtypeError):
            load_array(p)

    def test_truncated_payload(self, tmp_path):
        p = tmp_path / "t.npy"
        save_array(p, np.zeros((4, 4)))
        raw = p.read_bytes()
        p.write_bytes(raw[: len(raw) - 9])
        with pytest.raises(ArrayTruncatedError):
            load_array(p)

    def test_mangled_header(self, tmp_path):
        p = tmp_path / "h.npy"
        save_array(p, np.zeros(3))
        raw = bytearray(p.read_bytes())
        raw[12:18] = b"zzzzzz"
        p.write_bytes(bytes(raw))
        with pytest.raises(ArrayFormatError):
            load_array(p)


class TestPgm:
    def test_roundtrip_8bit(self, tmp_path):
        rng = np.random.default_rng(2)
        img = rng.uniform(0, 1, (9, 13))
        p = tmp_path / "i.pgm"
        save_pgm(p, img, bits=8)
        back = load_pgm(p)
        assert back.shape == img.shape
        assert np.max(np.abs(back - img)) <= 0.5 / 255 + 1e-12

    def test_roundtrip_16bit(self, tmp_path):
        rng = np.random.default_rng(3)
        img = rng.uniform(0, 1, (5, 5))
        p = tmp_path / "i16.pgm"
        save_pgm(p, img, bits=16)
        assert np.max(np.abs(load_pgm(p) - img)) <= 0.5 / 65535 + 1e-12

    def test_comment_in_header(self, tmp_path):
        p = tmp_path / "c.pgm"
        p.write_bytes(b"P5\n# a comment\n2 2\n255\n" + bytes([0, 128, 255, 64]))
        img = load_pgm(p)
        assert img.shape == (2, 2)
        assert img[0, 1] == pytest.approx(128 / 255)

    def test_not_pgm(self, tmp_path):
        p = tmp_path / "x.pgm"
        p.write_bytes(b"P6\n2 2\n255\n" + bytes(12))
        with pytest.raises(ArrayFormatError):
            load_pgm(p)


class TestNoise:
    def meas(self, n=32):
        rng = np.random.default_rng(4)
        amp = rng.uniform(0.5, 1.5, (n, n))
        return Measurement(amp, SamplingGrid(n, 1e-6), MeasurementMeta(order=0.5, scale=1.0))

    def test_zero_sigma_identity(self):
        m = self.meas()
        assert add_noise(m, gaussian_sigma=0.0) is m

    def test_seed_determinism(self):
        m = self.meas()
        a = add_noise(m, gaussian_sigma=0.05, seed=7)
        b = add_noise(m, gaussian_sigma=0.05, seed=7)
        assert np.array_equal(a.amplitude, b.amplitude)
        c = add_noise(m, gaussian_sigma=0.05, seed=8)
        assert not np.array_equal(a.amplitude, c.amplitude)

    def test_gaussian_mean_statistics(self):
        n = 64
        amp = np.ones((n, n))
        m = Measurement(amp, SamplingGrid(n, 1e-6), MeasurementMeta(order=0.5, scale=1.0))
        sigma = 0.01
        noisy = add_noise(m, gaussian_sigma=sigma, seed=9)
        mean_intensity = noisy.intensity().mean()
        assert abs(mean_intensity - 1.0) <= 3 * sigma / n  # 3 sigma of the mean

    def test_poisson_peak(self):
        m = self.meas()
        noisy = add_noise(m, poisson_peak=1e4, seed=10)
        assert np.all(noisy.amplitude >= 0)
        assert noisy.intensity().mean() == pytest.approx(m.intensity().mean(), rel=0.05)
