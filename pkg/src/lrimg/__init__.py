"""Low-rank SVD image compression toolkit."""

from .image import ImageTensor, clamp_quantize, load_image, save_image, to_grayscale
from .linalg import (
    SvdFactors,
    frobenius_norm,
    reconstruct,
    residual_from_sigma,
    svd,
    truncate,
)
from .lowrank import (
    LowRankImage,
    ToleranceSpec,
    compress,
    compress_at_rank,
    decode_lrif,
    decompress,
    encode_lrif,
    factor_storage_bytes,
    select_rank,
)
from .metrics import (
    ErrorMap,
    compression_ratio,
    error_map,
    relative_frobenius_error,
    render_error_map,
)

__version__ = "0.1.0"

__all__ = [
    "ImageTensor",
    "SvdFactors",
    "LowRankImage",
    "ToleranceSpec",
    "ErrorMap",
    "clamp_quantize",
    "load_image",
    "save_image",
    "to_grayscale",
    "frobenius_norm",
    "reconstruct",
    "residual_from_sigma",
    "svd",
    "truncate",
    "compress",
    "compress_at_rank",
    "decompress",
    "encode_lrif",
    "decode_lrif",
    "factor_storage_bytes",
    "select_rank",
    "compression_ratio",
    "error_map",
    "relative_frobenius_error",
    "render_error_map",
]
