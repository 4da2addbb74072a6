"""Sampled complex fields on centered grids.

All containers are immutable after construction: arrays are copied in and
marked read-only, so instances can be shared freely between threads.
Index m of an n-point axis corresponds to the physical coordinate
(m - n//2) * pitch, i.e. the grid is centered on sample n//2.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

__all__ = [
    "SamplingGrid",
    "ComplexField",
    "RealImage",
    "MeasurementMeta",
    "Measurement",
    "GridMismatchError",
    "encode_object",
    "decode_object",
    "circular_shift",
    "conjugate_flip",
]


class GridMismatchError(ValueError):
    """Raised when two operands live on incompatible sampling grids."""


@dataclass(frozen=True)
class SamplingGrid:
    """Centered sample lattice: `n` samples per axis at `pitch` meters each."""

    n: int
    pitch: float
    dims: int = 2

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"need at least 2 samples per axis, got {self.n}")
        if not (self.pitch > 0 and np.isfinite(self.pitch)):
            raise ValueError(f"pitch must be positive and finite, got {self.pitch}")
        if self.dims not in (1, 2):
            raise ValueError(f"dims must be 1 or 2, got {self.dims}")

    @property
    def window(self) -> float:
        """Physical window length L = n * pitch."""
        return self.n * self.pitch

    def coords(self) -> np.ndarray:
        """Centered 1D coordinates (m - n//2) * pitch."""
        return (np.arange(self.n) - self.n // 2) * self.pitch

    def shape(self) -> tuple:
        return (self.n,) if self.dims == 1 else (self.n, self.n)

    def scaled(self, factor: float) -> "SamplingGrid":
        return SamplingGrid(self.n, self.pitch * factor, self.dims)


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class ComplexField:
    """Complex amplitudes sampled on a SamplingGrid (row-major for 2D)."""

    grid: SamplingGrid
    data: np.ndarray = field(repr=False)

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.complex128)
        if data.shape != self.grid.shape():
            raise GridMismatchError(
                f"data shape {data.shape} does not match grid {self.grid.shape()}"
            )
        if not np.all(np.isfinite(data)):
            raise ValueError("field contains non-finite samples")
        object.__setattr__(self, "data", _freeze(data))

    def energy(self) -> float:
        """Squared l2 norm of the samples."""
        return float(np.sum(np.abs(self.data) ** 2))

    def with_data(self, data: np.ndarray) -> "ComplexField":
        return ComplexField(self.grid, data)


@dataclass(frozen=True)
class RealImage:
    """Real-valued image with samples in [0, 1] on a SamplingGrid."""

    grid: SamplingGrid
    data: np.ndarray = field(repr=False)

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float64)
        if data.shape != self.grid.shape():
            raise GridMismatchError(
                f"data shape {data.shape} does not match grid {self.grid.shape()}"
            )
        if not np.all(np.isfinite(data)):
            raise ValueError("image contains non-finite samples")
        object.__setattr__(self, "data", _freeze(np.clip(data, 0.0, 1.0)))


@dataclass(frozen=True)
class MeasurementMeta:
    """Acquisition parameters attached to a measurement.

    `wavelength`/`distance` are None for purely digital transform-domain
    measurements (no physical propagation attached); in that case the
    amplitude carries no geometric attenuation and `scale == 1`.
    """

    order: float
    scale: float
    wavelength: Optional[float] = None
    distance: Optional[float] = None

    @property
    def is_physical(self) -> bool:
        return self.wavelength is not None and self.distance is not None

    def amplitude_constant(self) -> float:
        """Attenuation applied to the transform magnitude: 1/sqrt(tan^2 a + 1)."""
        if not self.is_physical:
            return 1.0
        alpha = self.order * np.pi / 2
        return 1.0 / np.sqrt(np.tan(alpha) ** 2 + 1.0)


@dataclass(frozen=True)
class Measurement:
    """Detected amplitude (sqrt of intensity) on the detector grid."""

    amplitude: np.ndarray = field(repr=False)
    detector_grid: SamplingGrid
    meta: MeasurementMeta
    source_pitch: Optional[float] = None

    def __post_init__(self):
        amp = np.asarray(self.amplitude, dtype=np.float64)
        if amp.shape != self.detector_grid.shape():
            raise GridMismatchError(
                f"amplitude shape {amp.shape} does not match grid "
                f"{self.detector_grid.shape()}"
            )
        if np.any(amp < 0) or not np.all(np.isfinite(amp)):
            raise ValueError("measurement amplitude must be finite and nonnegative")
        if self.source_pitch is not None:
            expect = self.meta.scale * self.source_pitch
            if not np.isclose(self.detector_grid.pitch, expect, rtol=1e-9):
                raise ValueError(
                    f"detector pitch {self.detector_grid.pitch} != scale x source "
                    f"pitch {expect}"
                )
        object.__setattr__(self, "amplitude", _freeze(amp))

    def intensity(self) -> np.ndarray:
        return self.amplitude**2


def encode_object(img: RealImage, kind: str) -> ComplexField:
    """Turn a [0, 1] image into a complex object field.

    kind="amplitude": field = img (zero phase).
    kind="phase": field = exp(i * pi * img), unit modulus with phase in [0, pi].
    """
    if kind == "amplitude":
        return ComplexField(img.grid, img.data.astype(np.complex128))
    if kind == "phase":
        return ComplexField(img.grid, np.exp(1j * np.pi * img.data))
    raise ValueError(f"unknown object kind {kind!r}")


def decode_object(fld: ComplexField, kind: str) -> RealImage:
    """Inverse of encode_object, clamped/wrapped back into [0, 1]."""
    if kind == "amplitude":
        return RealImage(fld.grid, np.clip(np.abs(fld.data), 0.0, 1.0))
    if kind == "phase":
        # angle() yields (-pi, pi]; fold negatives onto [0, 2) then clamp.
        frac = np.angle(fld.data) / np.pi
        frac = np.mod(frac, 2.0)
        return RealImage(fld.grid, np.clip(frac, 0.0, 1.0))
    raise ValueError(f"unknown object kind {kind!r}")


def circular_shift(fld: ComplexField, dx: int, dy: int = 0) -> ComplexField:
    """Cyclic shift by whole samples; exactly energy preserving."""
    if fld.grid.dims == 1:
        return fld.with_data(np.roll(fld.data, dx))
    return fld.with_data(np.roll(fld.data, (dy, dx), axis=(0, 1)))


def _flip_axis_indices(n: int) -> np.ndarray:
    # Centered-index negation m -> -m; the unpaired index -n//2 maps to itself.
    return (n - np.arange(n)) % n


def conjugate_flip(fld: ComplexField) -> ComplexField:
    """Conjugate inversion: data[m] -> conj(data[-m]) on the centered lattice."""
    idx = _flip_axis_indices(fld.grid.n)
    if fld.grid.dims == 1:
        return fld.with_data(np.conj(fld.data[idx]))
    return fld.with_data(np.conj(fld.data[np.ix_(idx, idx)]))
