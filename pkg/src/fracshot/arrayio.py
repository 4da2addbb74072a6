"""Array and image file I/O.

Arrays travel as NPY version 1.0 files (magic \\x93NUMPY, a python-dict
header, then a little-endian payload) restricted to float64 / complex128 —
a published, language-neutral layout that downstream tools can parse
without numpy. Grayscale images travel as binary PGM (P5), 8- or 16-bit.
"""
from __future__ import annotations

import ast
from pathlib import Path
from typing import Union

import numpy as np

__all__ = [
    "ArrayFormatError",
    "ArrayDtypeError",
    "ArrayTruncatedError",
    "save_array",
    "load_array",
    "save_pgm",
    "load_pgm",
]

_MAGIC = b"\x93NUMPY"
_SUPPORTED = {"<f8": np.float64, "<c16": np.complex128}


class ArrayFormatError(ValueError):
    """Malformed magic/version/header."""


class ArrayDtypeError(ValueError):
    """Well-formed file with an unsupported dtype."""


class ArrayTruncatedError(ValueError):
    """Payload shorter than the header-declared shape requires."""


def _header_bytes(descr: str, shape: tuple) -> bytes:
    shape_repr = "(%s)" % (", ".join(str(int(s)) for s in shape) + ("," if len(shape) == 1 else ""))
    head = "{'descr': '%s', 'fortran_order': False, 'shape': %s, }" % (descr, shape_repr)
    # Total of magic+version+length+header must be a multiple of 64.
    base = len(_MAGIC) + 2 + 2 + len(head) + 1
    pad = (64 - base % 64) % 64
    head = head + " " * pad + "\n"
    return _MAGIC + bytes([1, 0]) + len(head).to_bytes(2, "little") + head.encode("latin1")


def save_array(path: Union[str, Path], array: np.ndarray) -> None:
    """Write a float64/complex128 array; real input is widened to float64."""
    arr = np.asarray(array)
    if np.iscomplexobj(arr):
        arr = np.ascontiguousarray(arr, dtype="<c16")
        descr = "<c16"
    else:
        arr = np.ascontiguousarray(arr, dtype="<f8")
        descr = "<f8"
    with open(path, "wb") as fh:
        fh.write(_header_bytes(descr, arr.shape))
        fh.write(arr.tobytes(order="C"))


def load_array(path: Union[str, Path]) -> np.ndarray:
    raw = Path(path).read_bytes()
    if len(raw) < 10 or raw[:6] != _MAGIC:
        raise ArrayFormatError(f"{path}: not an array file (bad magic)")
    major, minor = raw[6], raw[7]
    if (major, minor) != (1, 0):
        raise ArrayFormatError(f"{path}: unsupported format version {major}.{minor}")
    hlen = int.from_bytes(raw[8:10], "little")
    if len(raw) < 10 + hlen:
        raise ArrayFormatError(f"{path}: truncated header")
    try:
        header = ast.literal_eval(raw[10 : 10 + hlen].decode("latin1"))
        descr = header["descr"]
        fortran = header["fortran_order"]
        shape = tuple(int(s) for s in header["shape"])
    except (ValueError, SyntaxError, KeyError, TypeError) as exc:
        raise ArrayFormatError(f"{path}: malformed header ({exc})") from exc
    if fortran:
        raise ArrayFormatError(f"{path}: fortran-order payloads not supported")
    if descr not in _SUPPORTED:
        raise ArrayDtypeError(f"{path}: dtype {descr!r} not supported (need <f8 or <c16)")
    dtype = np.dtype(descr)
    count = int(np.prod(shape, dtype=np.int64)) if shape else 1
    payload = raw[10 + hlen :]
    if len(payload) < count * dtype.itemsize:
        raise ArrayTruncatedError(
            f"{path}: payload holds {len(payload)} bytes, "
            f"need {count * dtype.itemsize} for shape {shape}"
        )
    return np.frombuffer(payload[: count * dtype.itemsize], dtype=dtype).reshape(shape).copy()


def save_pgm(path: Union[str, Path], image: np.ndarray, bits: int = 8) -> None:
    """Write values (any real range) as P5 grayscale, normalized to [0, 1] first."""
    if bits not in (8, 16):
        raise ValueError("PGM export supports 8 or 16 bits")
    img = np.asarray(image, dtype=np.float64)
    if img.ndim != 2:
        raise ValueError("PGM export needs a 2D array")
    lo, hi = float(img.min()), float(img.max())
    if hi > 1.0 or lo < 0.0:
        img = (img - lo) / (hi - lo) if hi > lo else np.zeros_like(img)
    maxval = (1 << bits) - 1
    quant = np.rint(img * maxval)
    with open(path, "wb") as fh:
        fh.write(f"P5\n{img.shape[1]} {img.shape[0]}\n{maxval}\n".encode("ascii"))
        if bits == 8:
            fh.write(quant.astype(np.uint8).tobytes())
        else:
            fh.write(quant.astype(">u2").tobytes())


def load_pgm(path: Union[str, Path]) -> np.ndarray:
    """Read P5 grayscale into float64 in [0, 1]."""
    raw = Path(path).read_bytes()
    if raw[:2] != b"P5":
        raise ArrayFormatError(f"{path}: not a binary PGM file")
    # Header tokens (width, height, maxval) may be interleaved with comments.
    tokens = []
    pos = 2
    while len(tokens) < 3:
        while pos < len(raw) and raw[pos : pos + 1].isspace():
            pos += 1
        if pos < len(raw) and raw[pos : pos + 1] == b"#":
            while pos < len(raw) and raw[pos : pos + 1] != b"\n":
                pos += 1
            continue
        start = pos
        while pos < len(raw) and not raw[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise ArrayFormatError(f"{path}: truncated PGM header")
        tokens.append(raw[start:pos])
    pos += 1  # single whitespace after maxval
    try:
        width, height, maxval = (int(t) for t in tokens)
    except ValueError as exc:
        raise ArrayFormatError(f"{path}: bad PGM header ({exc})") from exc
    if maxval <= 0 or maxval > 65535:
        raise ArrayFormatError(f"{path}: bad PGM maxval {maxval}")
    dtype = np.dtype(np.uint8) if maxval < 256 else np.dtype(">u2")
    count = width * height
    payload = raw[pos:]
    if len(payload) < count * dtype.itemsize:
        raise ArrayTruncatedError(f"{path}: PGM payload truncated")
    data = np.frombuffer(payload[: count * dtype.itemsize], dtype=dtype)
    return data.reshape(height, width).astype(np.float64) / maxval
