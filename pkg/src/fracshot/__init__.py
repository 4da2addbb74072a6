"""fracshot: fractional-Fourier diffraction modeling and single-shot phase retrieval."""

from .fields import (
    ComplexField,
    GridMismatchError,
    Measurement,
    MeasurementMeta,
    RealImage,
    SamplingGrid,
    circular_shift,
    conjugate_flip,
    decode_object,
    encode_object,
)
from .metrics import FidelityScore, align_global_phase, fidelity, mse, psnr, ssim
from .arrayio import (
    ArrayDtypeError,
    ArrayFormatError,
    ArrayTruncatedError,
    load_array,
    load_pgm,
    save_array,
    save_pgm,
)
from .noise import add_noise
from .testimages import phantom, rect_aperture
from . import dfrft

__version__ = "0.1.0"
