"""JPEG block-inconsistency detector.

Every 8x8 block gets a corner feature ``R = |A - B - C - D|`` computed from
its top-left 2x2 samples.  Neighbouring features are differenced to the
right and downward, and a global threshold on those differences marks
suspicious blocks.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, NamedTuple

import numpy as np

from .imaging import ImageSizeError, render_block_mask
from .regions import Region, extract_regions

DEFAULT_THRESHOLD = 65.0
DEFAULT_SWEEP = (55.0, 65.0, 75.0)


@dataclass(frozen=True)
class BlockFeatureGrid:
    """Per-block corner features and their neighbour differences.

    Arrays are indexed ``[block_row, block_col]``: ``r`` is ``(bh, bw)``,
    ``d_right`` is ``(bh, bw - 1)`` and ``d_bottom`` is ``(bh - 1, bw)``.
    """
    r: np.ndarray
    d_right: np.ndarray
    d_bottom: np.ndarray

    @property
    def bh(self) -> int:
        return self.r.shape[0]

    @property
    def bw(self) -> int:
        return self.r.shape[1]


@dataclass(frozen=True)
class BlockMask:
    """Boolean ``(bh, bw)`` grid; ``True`` marks a suspicious block."""
    marked: np.ndarray

    @property
    def bh(self) -> int:
        return self.marked.shape[0]

    @property
    def bw(self) -> int:
        return self.marked.shape[1]

    @property
    def count(self) -> int:
        return int(self.marked.sum())

    def to_pixels(self, shape: tuple[int, int] | None = None) -> np.ndarray:
        return render_block_mask(self.marked, shape)


class SweepResult(NamedTuple):
    threshold: float
    mask: BlockMask
    count: int


def block_features(img: np.ndarray) -> BlockFeatureGrid:
    """Corner features for every complete 8x8 block of a grayscale image.

    Trailing rows and columns that do not fill a block are ignored.
    """
    img = np.asarray(img)
    if img.ndim != 2:
        raise ValueError(f"block features need a single-channel image, got shape {img.shape}")
    h, w = img.shape
    if h < 16 or w < 16:
        raise ImageSizeError(f"block detector needs at least 16x16 pixels, got {w}x{h}")
    bh, bw = h // 8, w // 8
    px = img[: bh * 8, : bw * 8].astype(np.int64)
    a = px[0::8, 0::8]
    b = px[0::8, 1::8]
    c = px[1::8, 0::8]
    d = px[1::8, 1::8]
    r = np.abs(a - b - c - d)
    return BlockFeatureGrid(
        r=r,
        d_right=np.abs(r[:, :-1] - r[:, 1:]),
        d_bottom=np.abs(r[:-1, :] - r[1:, :]),
    )


def classify_blocks(grid: BlockFeatureGrid, t: float, *, literal: bool = False) -> BlockMask:
    """Mark blocks whose right or bottom difference reaches ``t``.

    The last column has no right neighbour and the last row no bottom
    neighbour, so those blocks are judged on the one difference they have
    and the bottom-right block is never marked.

    With ``literal=True`` the bottom test is ``d_bottom <= t`` instead, as in
    the originally published pseudo-code.  That form marks nearly every
    block and exists only for comparison.
    """
    if t < 0:
        raise ValueError(f"threshold must be non-negative, got {t}")
    marked = np.zeros((grid.bh, grid.bw), dtype=bool)
    marked[:, :-1] |= grid.d_right >= t
    if literal:
        marked[:-1, :] |= grid.d_bottom <= t
    else:
        marked[:-1, :] |= grid.d_bottom >= t
    return BlockMask(marked)


def threshold_sweep(img: np.ndarray, ts: Iterable[float] = DEFAULT_SWEEP, *,
                    literal: bool = False) -> list[SweepResult]:
    """Classify one shared feature grid at several thresholds."""
    ts = [float(t) for t in ts]
    if not ts:
        raise ValueError("threshold sweep needs at least one threshold")
    for t in ts:
        if t < 0:
            raise ValueError(f"threshold must be non-negative, got {t}")
    grid = block_features(img)
    out = []
    for t in ts:
        mask = classify_blocks(grid, t, literal=literal)
        out.append(SweepResult(t, mask, mask.count))
    return out


def block_regions(mask: BlockMask, shape: tuple[int, int], min_area: int = 64) -> list[Region]:
    """Connected groups of marked blocks, as pixel-space regions."""
    return extract_regions(mask.to_pixels(shape), min_area=min_area)


def block_density(mask: BlockMask, region: np.ndarray) -> tuple[float, float]:
    """Marked-block density inside and outside a pixel mask.

    A block counts as inside when its centre pixel is set in ``region``.
    Returns ``(inside, outside)``; an empty side has density 0.
    """
    centres = np.asarray(region, dtype=bool)[4::8, 4::8][: mask.bh, : mask.bw]
    inside = centres.sum()
    outside = centres.size - inside
    d_in = float(mask.marked[centres].sum() / inside) if inside else 0.0
    d_out = float(mask.marked[~centres].sum() / outside) if outside else 0.0
    return d_in, d_out
