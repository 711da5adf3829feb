"""Rank selection under an error tolerance and the LRIF binary container.

LRIF layout (little-endian):
  header, 16 bytes: magic "LRIF", version u8 = 1, channels u8,
  reserved u16 = 0, width u32, height u32.
  per channel, in plane order: rank u32, sigma rank x f32,
  u as height x rank f32 column-major, vt as rank x width f32 row-major.
No trailing bytes are permitted.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import (
    ConvergenceError,
    InvalidInputError,
    InvalidRankError,
    LrifCorruptError,
    LrifFormatError,
    LrifVersionError,
)
from .image import ImageTensor, clamp_quantize
from .linalg import SvdFactors

LRIF_MAGIC = b"LRIF"
LRIF_VERSION = 1
HEADER_SIZE = 16
SCALAR_BYTES = 4  # factors are stored as f32

DEFAULT_GRID = tuple(round(0.05 * i, 2) for i in range(1, 20))  # 0.05 .. 0.95


@dataclass(frozen=True)
class ToleranceSpec:
    """An ordered grid of target relative Frobenius errors."""

    grid: tuple[float, ...] = DEFAULT_GRID

    def __post_init__(self):
        if not self.grid:
            raise InvalidInputError("tolerance grid is empty")
        for t in self.grid:
            _check_tolerance(t)
        if any(b <= a for a, b in zip(self.grid, self.grid[1:])):
            raise InvalidInputError("tolerance grid must be strictly increasing")


@dataclass(frozen=True)
class LowRankImage:
    """Per-channel truncated SVD factors at f32 storage precision."""

    height: int
    width: int
    factors: tuple[SvdFactors, ...]

    def __post_init__(self):
        r = min(self.height, self.width)
        for f in self.factors:
            if not (1 <= f.rank <= r):
                raise InvalidRankError(f"channel rank {f.rank} outside [1, {r}]")
            if f.u.shape != (self.height, f.rank) or f.vt.shape != (f.rank, self.width):
                raise InvalidInputError("factor dimensions inconsistent with image size")

    @property
    def channels(self) -> int:
        return len(self.factors)

    @property
    def ranks(self) -> tuple[int, ...]:
        return tuple(f.rank for f in self.factors)


def _check_tolerance(tolerance: float) -> None:
    if not (0.0 < tolerance <= 1.0):
        raise InvalidInputError(f"tolerance must lie in (0, 1], got {tolerance}")


def select_rank(sigma, tolerance: float) -> int:
    """Smallest k >= 1 with sqrt(sum_{i>k} sigma_i^2) <= tolerance * ||sigma||."""
    _check_tolerance(tolerance)
    sigma = np.asarray(sigma, dtype=np.float64)
    linalg.residual_from_sigma(sigma, 0)  # validates ordering/signs
    total_sq = float(np.sum(sigma * sigma))
    if total_sq == 0.0:
        return 1
    budget = (tolerance * tolerance) * total_sq
    # residual^2 after keeping k values, scanned from k=1 upward
    tail_sq = total_sq
    for k in range(1, len(sigma) + 1):
        tail_sq -= float(sigma[k - 1]) ** 2
        if tail_sq <= budget:
            return k
    return len(sigma)


def _to_storage(f: SvdFactors) -> SvdFactors:
    return SvdFactors(
        u=f.u.astype(np.float32).astype(np.float64),
        sigma=f.sigma.astype(np.float32).astype(np.float64),
        vt=f.vt.astype(np.float32).astype(np.float64),
    )


def _zero_channel_factors(height: int, width: int) -> SvdFactors:
    u = np.zeros((height, 1))
    u[0, 0] = 1.0
    vt = np.zeros((1, width))
    vt[0, 0] = 1.0
    return SvdFactors(u=u, sigma=np.zeros(1), vt=vt)


def _decompose_channel(plane: np.ndarray, index: int) -> SvdFactors:
    try:
        return linalg.svd(plane)
    except ConvergenceError as exc:
        raise ConvergenceError(f"channel {index}: {exc}") from exc


def compress(t: ImageTensor, tolerance: float) -> LowRankImage:
    """Per-channel SVD with the minimal rank meeting `tolerance` on each channel."""
    _check_tolerance(tolerance)
    factors = []
    for i, plane in enumerate(t.planes):
        if not plane.any():
            factors.append(_zero_channel_factors(t.height, t.width))
            continue
        full = _decompose_channel(plane, i)
        k = select_rank(full.sigma, tolerance)
        factors.append(_to_storage(linalg.truncate(full, k)))
    return LowRankImage(height=t.height, width=t.width, factors=tuple(factors))


def compress_at_rank(t: ImageTensor, k: int) -> LowRankImage:
    """Truncate every channel to exactly rank k."""
    if not (1 <= k <= min(t.height, t.width)):
        raise InvalidRankError(f"rank {k} outside [1, {min(t.height, t.width)}]")
    factors = []
    for i, plane in enumerate(t.planes):
        if not plane.any():
            full = _zero_channel_factors(t.height, t.width)
            factors.append(
                _to_storage(
                    SvdFactors(
                        u=np.pad(full.u, ((0, 0), (0, k - 1))),
                        sigma=np.zeros(k),
                        vt=np.pad(full.vt, ((0, k - 1), (0, 0))),
                    )
                )
                if k > 1
                else full
            )
            continue
        factors.append(_to_storage(linalg.truncate(_decompose_channel(plane, i), k)))
    return LowRankImage(height=t.height, width=t.width, factors=tuple(factors))


def reconstruct_planes(l: LowRankImage) -> list[np.ndarray]:
    """Float-domain per-channel reconstructions, before clamping."""
    return [linalg.reconstruct(f) for f in l.factors]


def decompress(l: LowRankImage) -> ImageTensor:
    """Reconstruct each channel, then clamp and quantize to a valid tensor."""
    return ImageTensor(planes=tuple(clamp_quantize(p) for p in reconstruct_planes(l)))


def factor_storage_bytes(l: LowRankImage) -> int:
    """Exact LRIF byte length: header + per-channel record + k(m+n+1) scalars."""
    total = HEADER_SIZE
    for f in l.factors:
        total += 4 + f.rank * (l.height + l.width + 1) * SCALAR_BYTES
    return total


def encode_lrif(l: LowRankImage) -> bytes:
    """Serialize to LRIF bytes; deterministic for identical input."""
    for f in l.factors:
        if f.rank >= 2**32:
            raise InvalidInputError("rank exceeds LRIF format limit")
    out = bytearray()
    out += struct.pack(
        "<4sBBHII", LRIF_MAGIC, LRIF_VERSION, l.channels, 0, l.width, l.height
    )
    for f in l.factors:
        out += struct.pack("<I", f.rank)
        out += f.sigma.astype("<f4").tobytes()
        out += f.u.astype("<f4").tobytes(order="F")
        out += f.vt.astype("<f4").tobytes(order="C")
    return bytes(out)


def decode_lrif(data: bytes) -> LowRankImage:
    """Exact inverse of encode_lrif at storage precision."""
    if len(data) < 4 or data[:4] != LRIF_MAGIC:
        raise LrifFormatError("missing LRIF magic")
    if len(data) < HEADER_SIZE:
        raise LrifCorruptError("truncated header", offset=len(data))
    _, version, channels, reserved, width, height = struct.unpack(
        "<4sBBHII", data[:HEADER_SIZE]
    )
    if version != LRIF_VERSION:
        raise LrifVersionError(f"unsupported LRIF version {version}")
    if channels not in (1, 3, 4):
        raise LrifCorruptError(f"invalid channel count {channels}", offset=5)
    if reserved != 0:
        raise LrifCorruptError("reserved field is nonzero", offset=6)
    if width == 0 or height == 0:
        raise LrifCorruptError("zero image dimension", offset=8)

    pos = HEADER_SIZE
    factors = []
    for _ in range(channels):
        if len(data) < pos + 4:
            raise LrifCorruptError("truncated channel record", offset=len(data))
        (rank,) = struct.unpack_from("<I", data, pos)
        pos += 4
        if not (1 <= rank <= min(height, width)):
            raise LrifCorruptError(f"invalid rank {rank}", offset=pos - 4)
        need = rank * (height + width + 1) * SCALAR_BYTES
        if len(data) < pos + need:
            raise LrifCorruptError("truncated factor payload", offset=len(data))
        sigma = np.frombuffer(data, dtype="<f4", count=rank, offset=pos)
        pos += rank * SCALAR_BYTES
        u = np.frombuffer(data, dtype="<f4", count=height * rank, offset=pos)
        u = u.reshape((height, rank), order="F")
        pos += height * rank * SCALAR_BYTES
        vt = np.frombuffer(data, dtype="<f4", count=rank * width, offset=pos)
        vt = vt.reshape((rank, width), order="C")
        pos += rank * width * SCALAR_BYTES
        if not (
            np.all(np.isfinite(sigma)) and np.all(np.isfinite(u)) and np.all(np.isfinite(vt))
        ):
            raise LrifCorruptError("non-finite factor data", offset=pos)
        factors.append(
            SvdFactors(
                u=u.astype(np.float64),
                sigma=sigma.astype(np.float64),
                vt=vt.astype(np.float64),
            )
        )
    if pos != len(data):
        raise LrifCorruptError(f"{len(data) - pos} surplus trailing bytes", offset=pos)
    return LowRankImage(height=height, width=width, factors=tuple(factors))
