"""Detector noise models applied to measured intensities."""
from __future__ import annotations

from typing import Optional

import numpy as np

from .fields import Measurement

__all__ = ["add_noise"]


def add_noise(
    m: Measurement,
    gaussian_sigma: float = 0.0,
    poisson_peak: Optional[float] = None,
    seed: int = 0,
) -> Measurement:
    """Corrupt the detected intensity, then retake the (clipped) square root.

    gaussian_sigma is the additive standard deviation on intensity;
    poisson_peak scales the intensity so its maximum maps to that expected
    photon count. Both zero/None return the measurement unchanged.
    """
    if gaussian_sigma < 0:
        raise ValueError("gaussian_sigma must be nonnegative")
    if gaussian_sigma == 0.0 and poisson_peak is None:
        return m
    rng = np.random.default_rng(seed)
    intensity = m.intensity().copy()
    if poisson_peak is not None:
        if poisson_peak <= 0:
            raise ValueError("poisson_peak must be positive")
        top = intensity.max()
        if top > 0:
            counts = rng.poisson(intensity / top * poisson_peak)
            intensity = counts * (top / poisson_peak)
    if gaussian_sigma > 0.0:
        intensity = intensity + gaussian_sigma * rng.standard_normal(intensity.shape)
    amplitude = np.sqrt(np.maximum(intensity, 0.0))
    return Measurement(amplitude, m.detector_grid, m.meta, m.source_pitch)
