"""Image ingestion and output: PGM/PPM codecs in-repo, PNG via Pillow.

Pixel data lives as float64 planes on the 0-255 scale; each channel is an
independent matrix handed to the linear-algebra layer.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image as PilImage

from .errors import InvalidInputError, UnsupportedFormatError

GRAY_WEIGHTS = (0.299, 0.587, 0.114)  # ITU-R BT.601 luma


@dataclass(frozen=True)
class ImageTensor:
    """height x width x channels pixel data, one float64 plane per channel."""

    planes: tuple[np.ndarray, ...]

    def __post_init__(self):
        if len(self.planes) not in (1, 3, 4):
            raise InvalidInputError(f"channel count must be 1, 3 or 4, got {len(self.planes)}")
        shape = self.planes[0].shape
        for p in self.planes:
            if p.ndim != 2 or p.shape != shape:
                raise InvalidInputError("all planes must share one 2-D shape")
            if not np.all(np.isfinite(p)):
                raise InvalidInputError("plane contains non-finite entries")
            if p.min() < 0.0 or p.max() > 255.0:
                raise InvalidInputError("plane entries must lie in [0, 255]")

    @property
    def height(self) -> int:
        return self.planes[0].shape[0]

    @property
    def width(self) -> int:
        return self.planes[0].shape[1]

    @property
    def channels(self) -> int:
        return len(self.planes)


def tensor_from_array(arr: np.ndarray) -> ImageTensor:
    """Build an ImageTensor from an H x W or H x W x C array."""
    arr = np.asarray(arr, dtype=np.float64)
    if arr.ndim == 2:
        return ImageTensor(planes=(arr.copy(),))
    if arr.ndim == 3:
        return ImageTensor(planes=tuple(arr[:, :, c].copy() for c in range(arr.shape[2])))
    raise InvalidInputError(f"expected 2-D or 3-D array, got ndim={arr.ndim}")


def tensor_to_array(t: ImageTensor) -> np.ndarray:
    """Stack planes into an H x W (gray) or H x W x C array."""
    if t.channels == 1:
        return t.planes[0].copy()
    return np.stack(t.planes, axis=2)


def clamp_quantize(m: np.ndarray) -> np.ndarray:
    """Clamp to [0, 255] then round half-away-from-zero to integral reals."""
    m = np.asarray(m, dtype=np.float64)
    clipped = np.clip(m, 0.0, 255.0)
    # All values are non-negative after clamping, so half-away-from-zero
    # reduces to floor(x + 0.5).
    return np.floor(clipped + 0.5)


def quantize_tensor(t: ImageTensor) -> ImageTensor:
    return ImageTensor(planes=tuple(clamp_quantize(p) for p in t.planes))


def to_grayscale(t: ImageTensor) -> ImageTensor:
    """BT.601 luma combination of an RGB tensor."""
    if t.channels != 3:
        raise InvalidInputError(f"grayscale conversion needs 3 channels, got {t.channels}")
    r, g, b = t.planes
    gray = GRAY_WEIGHTS[0] * r + GRAY_WEIGHTS[1] * g + GRAY_WEIGHTS[2] * b
    return ImageTensor(planes=(np.clip(gray, 0.0, 255.0),))


def _to_uint8(t: ImageTensor) -> np.ndarray:
    arr = tensor_to_array(quantize_tensor(t))
    return arr.astype(np.uint8)


def _read_pnm_token(buf: io.BufferedReader) -> bytes:
    token = b""
    while True:
        ch = buf.read(1)
        if ch == b"":
            raise UnsupportedFormatError("pnm", "truncated PNM header")
        if ch == b"#":
            while ch not in (b"\n", b""):
                ch = buf.read(1)
            continue
        if ch.isspace():
            if token:
                return token
            continue
        token += ch


def _load_pnm(data: bytes) -> ImageTensor:
    buf = io.BufferedReader(io.BytesIO(data))
    magic = buf.read(2)
    if magic not in (b"P5", b"P6"):
        raise UnsupportedFormatError(magic.decode("latin1"), f"unsupported PNM magic {magic!r}")
    width = int(_read_pnm_token(buf))
    height = int(_read_pnm_token(buf))
    maxval = int(_read_pnm_token(buf))
    if maxval != 255:
        raise UnsupportedFormatError("pnm", f"only maxval 255 supported, got {maxval}")
    channels = 1 if magic == b"P5" else 3
    n = width * height * channels
    raster = buf.read(n)
    if len(raster) != n:
        raise UnsupportedFormatError("pnm", "truncated PNM raster")
    arr = np.frombuffer(raster, dtype=np.uint8).astype(np.float64)
    if channels == 1:
        return tensor_from_array(arr.reshape(height, width))
    return tensor_from_array(arr.reshape(height, width, 3))


def _save_pnm(t: ImageTensor, path: Path) -> None:
    arr = _to_uint8(t)
    magic = b"P5" if t.channels == 1 else b"P6"
    header = magic + b"\n%d %d\n255\n" % (t.width, t.height)
    path.write_bytes(header + arr.tobytes())


def _load_png(data: bytes) -> ImageTensor:
    img = PilImage.open(io.BytesIO(data))
    if img.mode not in ("L", "RGB", "RGBA"):
        if img.mode in ("I;16", "I", "I;16B"):
            raise UnsupportedFormatError("png", f"unsupported PNG bit depth (mode {img.mode})")
        if img.mode in ("P", "LA", "1"):
            img = img.convert("RGBA" if "transparency" in img.info or img.mode == "LA" else "RGB")
        else:
            raise UnsupportedFormatError("png", f"unsupported PNG mode {img.mode}")
    return tensor_from_array(np.asarray(img, dtype=np.float64))


def png_bytes(t: ImageTensor) -> bytes:
    """Deterministic lossless PNG encoding of a tensor (quantized first)."""
    arr = _to_uint8(t)
    mode = {1: "L", 3: "RGB", 4: "RGBA"}[t.channels]
    if t.channels == 1:
        img = PilImage.fromarray(arr, mode=mode)
    else:
        img = PilImage.fromarray(arr, mode=mode)
    out = io.BytesIO()
    img.save(out, format="PNG", optimize=False, compress_level=6)
    return out.getvalue()


def load_image(path) -> ImageTensor:
    """Load a PGM (P5), PPM (P6) or 8-bit PNG file."""
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise IOError(f"cannot read {path}: {exc}") from exc
    if data[:2] in (b"P5", b"P6"):
        return _load_pnm(data)
    if data[:8] == b"\x89PNG\r\n\x1a\n":
        return _load_png(data)
    head = data[:2].decode("latin1", errors="replace")
    raise UnsupportedFormatError(head, f"unrecognized image format in {path}")


def save_image(t: ImageTensor, path) -> None:
    """Write PGM for 1 channel, PPM for 3, PNG for 4 (or by file extension).

    A .png extension forces PNG regardless of channel count.
    """
    path = Path(path)
    try:
        if path.suffix.lower() == ".png" or t.channels == 4:
            path.write_bytes(png_bytes(t))
        else:
            _save_pnm(t, path)
    except OSError as exc:
        raise IOError(f"cannot write {path}: {exc}") from exc
