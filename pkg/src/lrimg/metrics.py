"""Error and storage metrics: relative Frobenius error, compression ratio,
pixel-wise error maps, and the edge-concentration diagnostic."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .image import ImageTensor, clamp_quantize


@dataclass(frozen=True)
class ErrorMap:
    """Per-pixel reconstruction error; multichannel errors pooled Euclidean-wise."""

    values: np.ndarray

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]


def _check_pair(original: ImageTensor, approx: ImageTensor) -> None:
    if (
        original.height != approx.height
        or original.width != approx.width
        or original.channels != approx.channels
    ):
        raise InvalidInputError(
            f"image shapes differ: {original.height}x{original.width}x{original.channels}"
            f" vs {approx.height}x{approx.width}x{approx.channels}"
        )


def relative_frobenius_error(original: ImageTensor, approx: ImageTensor) -> float:
    """Frobenius norm of the difference over the norm of the original,
    pooled across all channels."""
    _check_pair(original, approx)
    diff_sq = 0.0
    ref_sq = 0.0
    for po, pa in zip(original.planes, approx.planes):
        d = po - pa
        diff_sq += float(np.sum(d * d))
        ref_sq += float(np.sum(po * po))
    if ref_sq == 0.0:
        if diff_sq == 0.0:
            return 0.0
        raise InvalidInputError(
            "relative error undefined: original has zero norm but approximation does not"
        )
    return float(np.sqrt(diff_sq) / np.sqrt(ref_sq))


def compression_ratio(original_bytes: int, compressed_bytes: int) -> float:
    """1 - compressed/original; negative when compression loses ground."""
    if original_bytes <= 0:
        raise InvalidInputError("original byte count must be positive")
    return 1.0 - compressed_bytes / original_bytes


def error_map(original: ImageTensor, approx: ImageTensor) -> ErrorMap:
    """Per-pixel Euclidean error across channels."""
    _check_pair(original, approx)
    acc = np.zeros((original.height, original.width))
    for po, pa in zip(original.planes, approx.planes):
        d = po - pa
        acc += d * d
    return ErrorMap(values=np.sqrt(acc))


def render_error_map(em: ErrorMap) -> ImageTensor:
    """Grayscale rendering normalized by the map's maximum (all-black if zero)."""
    peak = float(em.values.max())
    if peak == 0.0:
        plane = np.zeros_like(em.values)
    else:
        plane = em.values * (255.0 / peak)
    return ImageTensor(planes=(clamp_quantize(plane),))


def gradient_magnitude(plane: np.ndarray) -> np.ndarray:
    """Finite-difference gradient magnitude, used to locate edges."""
    gy, gx = np.gradient(np.asarray(plane, dtype=np.float64))
    return np.sqrt(gx * gx + gy * gy)


def edge_error_ratio(original_plane: np.ndarray, em: ErrorMap) -> float:
    """Mean error over top-decile-gradient pixels divided by the mean over
    bottom-decile-gradient pixels of the original."""
    grad = gradient_magnitude(original_plane).ravel()
    err = em.values.ravel()
    if grad.shape != err.shape:
        raise InvalidInputError("error map does not match the reference plane")
    lo, hi = np.quantile(grad, [0.1, 0.9])
    flat = err[grad <= lo]
    edgy = err[grad >= hi]
    flat_mean = float(flat.mean()) if flat.size else 0.0
    edgy_mean = float(edgy.mean()) if edgy.size else 0.0
    if flat_mean == 0.0:
        return float("inf") if edgy_mean > 0.0 else 1.0
    return edgy_mean / flat_mean
