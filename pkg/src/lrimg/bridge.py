"""Uniform interface to external image codecs with a quality search that
matches a target relative Frobenius error.

Two backend kinds sit behind one interface: embeddable OpenCV codecs
(jpeg, webp, jpeg2000) and command-template codecs driven through
subprocess with {input}/{output}/{quality} placeholders.
"""

from __future__ import annotations

import logging
import subprocess
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import CodecBridgeError, CodecUnavailableError, InvalidInputError
from .image import ImageTensor, load_image, quantize_tensor, save_image, tensor_from_array, tensor_to_array
from .metrics import relative_frobenius_error

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class CodecHandle:
    name: str
    quality_range: tuple[int, int] = (0, 100)
    available: bool = True
    supports_alpha: bool = False
    command_template: str | None = None

    def __post_init__(self):
        if self.quality_range[1] < self.quality_range[0]:
            raise InvalidInputError("empty quality range")


@dataclass(frozen=True)
class CodecResult:
    bytes: int
    quality: int
    achieved_error: float
    met: bool
    decoded: ImageTensor | None = None


def _to_bgr_uint8(t: ImageTensor) -> np.ndarray:
    arr = tensor_to_array(quantize_tensor(t)).astype(np.uint8)
    if t.channels == 1:
        return arr
    if t.channels == 3:
        return arr[:, :, ::-1]  # RGB -> BGR
    return arr[:, :, [2, 1, 0, 3]]  # RGBA -> BGRA


def _from_bgr_uint8(arr: np.ndarray) -> ImageTensor:
    if arr.ndim == 2:
        return tensor_from_array(arr)
    if arr.shape[2] == 3:
        return tensor_from_array(arr[:, :, ::-1])
    return tensor_from_array(arr[:, :, [2, 1, 0, 3]])


class _OpenCvBackend:
    """Shared cv2 import and per-codec encode parameters."""

    EXT = {"jpeg": ".jpg", "webp": ".webp", "jpeg2000": ".jp2"}

    def __init__(self):
        import cv2

        self.cv2 = cv2
        self.flags = {
            "jpeg": cv2.IMWRITE_JPEG_QUALITY,
            "webp": cv2.IMWRITE_WEBP_QUALITY,
            "jpeg2000": cv2.IMWRITE_JPEG2000_COMPRESSION_X1000,
        }

    def encode_decode(self, name: str, t: ImageTensor, quality: int):
        cv2 = self.cv2
        arr = _to_bgr_uint8(t)
        if name == "jpeg2000":
            # cv2's JPEG2000 knob spans 0..1000
            param = max(1, quality * 10)
        elif name == "webp":
            # webp quality > 100 switches to lossless; keep in lossy range
            param = min(max(quality, 1), 100)
        else:
            param = quality
        ok, buf = cv2.imencode(self.EXT[name], arr, [self.flags[name], int(param)])
        if not ok:
            raise CodecBridgeError(f"{name}: cv2.imencode failed at quality {quality}")
        decoded = cv2.imdecode(buf, cv2.IMREAD_UNCHANGED)
        if decoded is None:
            raise CodecBridgeError(f"{name}: cv2.imdecode failed at quality {quality}")
        return len(buf), _from_bgr_uint8(decoded)


_opencv_backend: _OpenCvBackend | None = None


def _get_opencv() -> _OpenCvBackend:
    global _opencv_backend
    if _opencv_backend is None:
        _opencv_backend = _OpenCvBackend()
    return _opencv_backend


def _probe_opencv(name: str) -> bool:
    try:
        backend = _get_opencv()
    except ImportError:
        return False
    # OpenJPEG rejects tiny tiles, so probe at a realistic size.
    probe = tensor_from_array(np.tile(np.arange(64.0) * 4 % 256, (64, 1))[:, :, None].repeat(3, axis=2))
    try:
        backend.encode_decode(name, probe, 80)
        return True
    except Exception:
        return False


def builtin_codecs() -> dict[str, CodecHandle]:
    """Probe the embeddable backends once and return the registry."""
    registry = {}
    for name in ("jpeg", "webp", "jpeg2000"):
        available = _probe_opencv(name)
        registry[name] = CodecHandle(
            name=name,
            quality_range=(1, 100) if name != "jpeg" else (0, 100),
            available=available,
            supports_alpha=(name == "webp"),
        )
        if not available:
            log.warning("codec backend %s unavailable, skipping", name)
    return registry


def command_codec(name: str, template: str, quality_range=(0, 100)) -> CodecHandle:
    """Codec handle backed by an external command template.

    The template must contain {input}, {output} and {quality} placeholders;
    input is written as PNG, output must be any format load_image accepts.
    """
    for ph in ("{input}", "{output}", "{quality}"):
        if ph not in template:
            raise InvalidInputError(f"command template for {name} lacks {ph}")
    return CodecHandle(
        name=name,
        quality_range=tuple(quality_range),
        available=True,
        supports_alpha=False,
        command_template=template,
    )


def _run_command_codec(codec: CodecHandle, t: ImageTensor, quality: int):
    with tempfile.TemporaryDirectory(prefix="lrimg-codec-") as tmp:
        inp = Path(tmp) / "input.png"
        outp = Path(tmp) / "output.img"
        save_image(t, inp)
        cmd = codec.command_template.format(input=inp, output=outp, quality=quality)
        proc = subprocess.run(cmd, shell=True, capture_output=True, text=True)
        if proc.returncode != 0 or not outp.exists():
            raise CodecBridgeError(
                f"{codec.name}: command failed (rc={proc.returncode}): {proc.stderr.strip()}"
            )
        data = outp.read_bytes()
        decoded = load_image(outp)
        return len(data), decoded


def encode_decode(codec: CodecHandle, t: ImageTensor, quality: int) -> tuple[int, ImageTensor]:
    """Round-trip the tensor through the codec at the given quality."""
    if not codec.available:
        raise CodecUnavailableError(f"codec backend not available: {codec.name}")
    lo, hi = codec.quality_range
    if not (lo <= quality <= hi):
        raise InvalidInputError(f"quality {quality} outside [{lo}, {hi}] for {codec.name}")
    if t.channels == 4 and not codec.supports_alpha:
        raise InvalidInputError(f"{codec.name} does not support alpha channels")
    if codec.command_template is not None:
        nbytes, decoded = _run_command_codec(codec, t, quality)
    else:
        nbytes, decoded = _get_opencv().encode_decode(codec.name, t, quality)
    if decoded.height != t.height or decoded.width != t.width:
        raise CodecBridgeError(
            f"{codec.name}: decoded dimensions {decoded.height}x{decoded.width} "
            f"differ from input {t.height}x{t.width}"
        )
    if decoded.channels != t.channels:
        # Some decoders drop or add planes (e.g. gray promoted to RGB).
        if decoded.channels == 3 and t.channels == 1:
            from .image import to_grayscale

            decoded = to_grayscale(decoded)
        elif decoded.channels == 1 and t.channels == 3:
            decoded = ImageTensor(planes=(decoded.planes[0],) * 3)
        else:
            raise CodecBridgeError(
                f"{codec.name}: decoded channel count {decoded.channels} "
                f"differs from input {t.channels}"
            )
    return nbytes, decoded


def _probe(codec: CodecHandle, t: ImageTensor, quality: int, cache: dict) -> CodecResult:
    if quality not in cache:
        nbytes, decoded = encode_decode(codec, t, quality)
        err = relative_frobenius_error(t, decoded)
        cache[quality] = CodecResult(
            bytes=nbytes, quality=quality, achieved_error=err, met=False, decoded=None
        )
    return cache[quality]


def match_error_tolerance(
    codec: CodecHandle, t: ImageTensor, tolerance: float
) -> CodecResult:
    """Smallest encoding whose round-trip error meets the tolerance.

    Binary search over quality assuming error is non-increasing in quality,
    then a +/-2 local scan to absorb mild non-monotonicity. If even the best
    quality misses the tolerance the minimum-error probe is returned with
    met=False.
    """
    if not (0.0 < tolerance <= 1.0):
        raise InvalidInputError(f"tolerance must lie in (0, 1], got {tolerance}")
    lo, hi = codec.quality_range
    cache: dict[int, CodecResult] = {}

    best_quality = _probe(codec, t, hi, cache)
    if best_quality.achieved_error > tolerance:
        # Codec floor is above the tolerance; report the least-bad probe.
        lowest = _probe(codec, t, lo, cache)
        floor = min(cache.values(), key=lambda r: (r.achieved_error, r.bytes))
        del lowest
        return CodecResult(
            bytes=floor.bytes,
            quality=floor.quality,
            achieved_error=floor.achieved_error,
            met=False,
        )

    # Find the lowest quality that still meets the tolerance.
    a, b = lo, hi
    while a < b:
        mid = (a + b) // 2
        if _probe(codec, t, mid, cache).achieved_error <= tolerance:
            b = mid
        else:
            a = mid + 1
    # Local scan around the boundary guards against non-monotonic encoders.
    for q in range(max(lo, a - 2), min(hi, a + 2) + 1):
        _probe(codec, t, q, cache)
    candidates = [r for r in cache.values() if r.achieved_error <= tolerance]
    winner = min(candidates, key=lambda r: (r.bytes, r.quality))
    return CodecResult(
        bytes=winner.bytes,
        quality=winner.quality,
        achieved_error=winner.achieved_error,
        met=True,
    )


def exhaustive_match(codec: CodecHandle, t: ImageTensor, tolerance: float) -> CodecResult:
    """Scan every quality; test oracle for match_error_tolerance."""
    lo, hi = codec.quality_range
    cache: dict[int, CodecResult] = {}
    for q in range(lo, hi + 1):
        _probe(codec, t, q, cache)
    met = [r for r in cache.values() if r.achieved_error <= tolerance]
    if met:
        winner = min(met, key=lambda r: (r.bytes, r.quality))
        return CodecResult(winner.bytes, winner.quality, winner.achieved_error, True)
    floor = min(cache.values(), key=lambda r: (r.achieved_error, r.bytes))
    return CodecResult(floor.bytes, floor.quality, floor.achieved_error, False)
