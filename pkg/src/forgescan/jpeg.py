"""Lossy stage of baseline JPEG: 8x8 DCT, quality-scaled quantization, and
a compress/decompress cycle that imprints the blocking fingerprint.

Entropy coding is deliberately absent; only the transform and quantizer
shape decoded pixels.
"""
from __future__ import annotations

import numpy as np

from .imaging import ImageSizeError

# ITU-T T.81 Annex K, Table K.1 (luminance)
BASE_LUMA_TABLE = np.array([
    [16, 11, 10, 16, 24, 40, 51, 61],
    [12, 12, 14, 19, 26, 58, 60, 55],
    [14, 13, 16, 24, 40, 57, 69, 56],
    [14, 17, 22, 29, 51, 87, 80, 62],
    [18, 22, 37, 56, 68, 109, 103, 77],
    [24, 35, 55, 64, 81, 104, 113, 92],
    [49, 64, 78, 87, 103, 121, 120, 101],
    [72, 92, 95, 98, 112, 100, 103, 99],
], dtype=np.int64)


def _dct_basis() -> np.ndarray:
    k = np.arange(8)[:, None]
    n = np.arange(8)[None, :]
    w = np.where(k == 0, 1.0 / np.sqrt(2.0), 1.0)
    return 0.5 * w * np.cos((2 * n + 1) * k * np.pi / 16.0)


# Row k holds the k-th cosine basis vector; C @ C.T == I.
DCT_MATRIX = _dct_basis()


def dct8x8(block: np.ndarray) -> np.ndarray:
    """Orthonormal 2-D DCT-II of one or more 8x8 blocks.

    Accepts shape ``(..., 8, 8)`` of level-shifted samples (-128..127).  A
    constant block ``c`` maps to DC ``8c`` with every AC term zero.
    """
    b = np.asarray(block, dtype=np.float64)
    if b.shape[-2:] != (8, 8):
        raise ValueError(f"expected trailing 8x8 dims, got {b.shape}")
    return DCT_MATRIX @ b @ DCT_MATRIX.T


def idct8x8(coeffs: np.ndarray) -> np.ndarray:
    """Inverse of :func:`dct8x8`."""
    c = np.asarray(coeffs, dtype=np.float64)
    if c.shape[-2:] != (8, 8):
        raise ValueError(f"expected trailing 8x8 dims, got {c.shape}")
    return DCT_MATRIX.T @ c @ DCT_MATRIX


def quality_to_matrix(qf: int) -> np.ndarray:
    """IJG quality scaling of the Annex K luminance table.

    >>> int(quality_to_matrix(75)[0, 0])
    8
    """
    qf = int(qf)
    if not 1 <= qf <= 100:
        raise ValueError(f"quality factor must be in 1..100, got {qf}")
    scale = 5000 // qf if qf < 50 else 200 - 2 * qf
    q = (BASE_LUMA_TABLE * scale + 50) // 100
    return np.clip(q, 1, 255)


def round_half_away(x: np.ndarray) -> np.ndarray:
    return np.sign(x) * np.floor(np.abs(x) + 0.5)


def quantize(coeffs: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Element-wise ``round(D / Q)`` with halves rounded away from zero."""
    return round_half_away(np.asarray(coeffs, dtype=np.float64) / q)


def dequantize(levels: np.ndarray, q: np.ndarray) -> np.ndarray:
    return np.asarray(levels, dtype=np.float64) * q


def to_blocks(img: np.ndarray) -> np.ndarray:
    """Split an ``(8m, 8n)`` array into ``(m, n, 8, 8)`` tiles."""
    h, w = img.shape
    return img.reshape(h // 8, 8, w // 8, 8).swapaxes(1, 2)


def from_blocks(blocks: np.ndarray) -> np.ndarray:
    m, n = blocks.shape[:2]
    return blocks.swapaxes(1, 2).reshape(m * 8, n * 8)


def recompress(img: np.ndarray, qf: int) -> np.ndarray:
    """Run a grayscale image through JPEG's lossy transform stage.

    Each 8x8 block is level-shifted, transformed, quantized with the
    ``qf`` table, dequantized and inverse transformed.  Edges are padded by
    replication to whole blocks and cropped afterwards, so the output has
    the input's shape.
    """
    img = np.asarray(img)
    if img.ndim != 2:
        raise ValueError(f"recompress works on single-channel images, got shape {img.shape}")
    h, w = img.shape
    if h < 8 or w < 8:
        raise ImageSizeError(f"image must be at least 8x8, got {w}x{h}")
    q = quality_to_matrix(qf)
    ph, pw = -h % 8, -w % 8
    padded = np.pad(img.astype(np.float64), ((0, ph), (0, pw)), mode="edge") - 128.0
    coeffs = dct8x8(to_blocks(padded))
    rec = idct8x8(dequantize(quantize(coeffs, q), q))
    out = np.clip(from_blocks(rec) + 128.0, 0.0, 255.0)
    return np.floor(out[:h, :w] + 0.5).astype(np.uint8)
