"""Image decoding, color reduction and mask serialization.

Images travel through the package as plain ``numpy`` arrays of ``uint8``:
``(H, W)`` for single-channel data and ``(H, W, 3)`` for RGB.  Binary masks
are ``bool`` arrays of shape ``(H, W)``.
"""
from __future__ import annotations

import os
from pathlib import Path
from typing import Union

import numpy as np
from PIL import Image, UnidentifiedImageError

PathLike = Union[str, os.PathLike]

SUPPORTED_FORMATS = ("JPEG", "PNG", "BMP")

# ITU-R BT.601 luma weights
LUMA_WEIGHTS = (0.299, 0.587, 0.114)


class ImageDecodeError(ValueError):
    """Raised when a file cannot be decoded as a supported image."""


class ImageSizeError(ValueError):
    """Raised when an image is too small for the requested operation."""


def load_image(path: PathLike) -> np.ndarray:
    """Decode a JPEG, PNG or BMP file into an 8-bit array.

    Grayscale files come back as ``(H, W)``, everything else as ``(H, W, 3)``
    in RGB order.  Palette and alpha images are flattened to RGB.

    Raises:
        FileNotFoundError: ``path`` does not exist.
        ImageDecodeError: the file is corrupt or not one of the supported
            formats.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"image not found: {path}")
    fmt = None
    try:
        with Image.open(path) as im:
            fmt = im.format
            if fmt not in SUPPORTED_FORMATS:
                raise ImageDecodeError(f"{path}: unsupported format {fmt!r} "
                                       f"(expected one of {', '.join(SUPPORTED_FORMATS)})")
            im.load()
            if im.mode in ("L", "1"):
                arr = np.asarray(im.convert("L"))
            elif im.mode.startswith("I") or im.mode == "F":
                raise ImageDecodeError(f"{path}: {fmt} with mode {im.mode} is not 8-bit")
            else:
                arr = np.asarray(im.convert("RGB"))
    except UnidentifiedImageError as exc:
        raise ImageDecodeError(f"{path}: not a decodable JPEG/PNG/BMP image") from exc
    except (OSError, SyntaxError) as exc:
        fmt = fmt or path.suffix.lstrip(".").upper() or "image"
        raise ImageDecodeError(f"{path}: corrupt {fmt} data: {exc}") from exc
    return np.ascontiguousarray(arr, dtype=np.uint8)


def save_image(img: np.ndarray, path: PathLike) -> None:
    """Write an 8-bit gray or RGB array as PNG."""
    Image.fromarray(np.ascontiguousarray(img, dtype=np.uint8)).save(path, format="PNG")


def _check_channels(img: np.ndarray) -> None:
    if img.ndim == 2:
        return
    if img.ndim == 3 and img.shape[2] == 3:
        return
    raise ValueError(f"expected (H, W) or (H, W, 3) image, got shape {img.shape}")


def to_luma(img: np.ndarray) -> np.ndarray:
    """Map RGB to BT.601 luma, ``round(0.299R + 0.587G + 0.114B)``."""
    _check_channels(img)
    if img.ndim == 2:
        return img
    rgb = img.astype(np.float64)
    y = rgb[..., 0] * LUMA_WEIGHTS[0] + rgb[..., 1] * LUMA_WEIGHTS[1] + rgb[..., 2] * LUMA_WEIGHTS[2]
    return np.clip(np.floor(y + 0.5), 0, 255).astype(np.uint8)


def to_v_channel(img: np.ndarray) -> np.ndarray:
    """HSV value channel: the per-pixel maximum of R, G and B."""
    _check_channels(img)
    if img.ndim == 2:
        return img
    return img.max(axis=2).astype(np.uint8)


def render_block_mask(marked: np.ndarray, shape: tuple[int, int] | None = None) -> np.ndarray:
    """Expand a per-block boolean grid to pixel resolution.

    Each marked block becomes a solid 8x8 patch.  ``shape`` pads (with clean
    pixels) or crops the result to an image size; trailing partial blocks
    are never marked.
    """
    marked = np.asarray(marked, dtype=bool)
    px = np.repeat(np.repeat(marked, 8, axis=0), 8, axis=1)
    if shape is None:
        return px
    out = np.zeros(shape, dtype=bool)
    h = min(shape[0], px.shape[0])
    w = min(shape[1], px.shape[1])
    out[:h, :w] = px[:h, :w]
    return out


def save_mask(mask: np.ndarray, path: PathLike) -> None:
    """Write a binary mask as an 8-bit PNG with 255 for marked pixels."""
    mask = np.asarray(mask)
    if mask.size == 0:
        raise ValueError("cannot save an empty mask")
    if mask.ndim != 2:
        raise ValueError(f"mask must be 2-D, got shape {mask.shape}")
    samples = np.where(mask.astype(bool), 255, 0).astype(np.uint8)
    Image.fromarray(samples).save(path, format="PNG")


def load_mask(path: PathLike) -> np.ndarray:
    """Read a mask PNG back into a boolean array (nonzero = marked)."""
    img = load_image(path)
    if img.ndim == 3:
        img = img.max(axis=2)
    return img > 0
