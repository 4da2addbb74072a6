"""Deterministic synthetic test images.

The toolkit ships its own phantoms instead of photographs so that demos,
golden files, and acceptance thresholds are reproducible byte-for-byte.
"""
from __future__ import annotations

import numpy as np

from .fields import RealImage, SamplingGrid

__all__ = ["phantom", "rect_aperture"]


def phantom(n: int, pitch: float = 1.0) -> RealImage:
    """Piecewise-smooth test scene: graded background, disks, bars, and a wedge.

    Mixes flat regions, sharp edges, and smooth ramps so it exercises both
    low- and high-frequency behavior like a natural photograph would.
    """
    if n < 16:
        raise ValueError("phantom needs n >= 16")
    y, x = np.mgrid[0:n, 0:n]
    u = (x - n / 2) / n
    v = (y - n / 2) / n
    img = 0.25 + 0.3 * (u + 0.5)  # horizontal ramp background

    def disk(cx, cy, r, val):
        mask = (u - cx) ** 2 + (v - cy) ** 2 <= r**2
        img[mask] = val

    disk(-0.18, -0.15, 0.16, 0.85)
    disk(-0.18, -0.15, 0.08, 0.35)
    disk(0.22, 0.18, 0.12, 0.95)
    # vertical bars of decreasing width
    w = 0.04
    cx = 0.05
    for k in range(4):
        mask = (np.abs(u - cx) <= w / 2) & (v > 0.05) & (v < 0.42)
        img[mask] = 0.1 if k % 2 == 0 else 0.7
        cx += w * 1.6
        w *= 0.7
    # smooth gaussian bump lower-left
    img += 0.35 * np.exp(-((u + 0.28) ** 2 + (v - 0.28) ** 2) / (2 * 0.07**2))
    # triangular wedge upper-left
    mask = (v < -0.1) & (u < -0.05) & (v > -0.45) & (u > v)
    img[mask] = 0.6
    return RealImage(SamplingGrid(n, pitch, dims=2), np.clip(img, 0.0, 1.0))


def rect_aperture(grid: SamplingGrid, width: float) -> RealImage:
    """Centered square aperture of physical side `width` (transmission 1)."""
    c = np.abs(grid.coords()) <= width / 2
    if grid.dims == 1:
        return RealImage(grid, c.astype(np.float64))
    return RealImage(grid, np.outer(c, c).astype(np.float64))
