"""Connected-component regions of binary maps."""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
from scipy import ndimage

_EIGHT = np.ones((3, 3), dtype=bool)


@dataclass(frozen=True, order=True)
class Region:
    """Axis-aligned bounding box of a component plus its pixel count."""
    x: int
    y: int
    w: int
    h: int
    area: int

    @property
    def box(self) -> tuple[int, int, int, int]:
        return self.x, self.y, self.x + self.w, self.y + self.h

    def to_dict(self) -> dict:
        return asdict(self)


def extract_regions(fmap: np.ndarray, min_area: int = 64) -> list[Region]:
    """8-connected components of ``fmap`` with at least ``min_area`` pixels.

    Sorted by area (largest first), then by the top-left corner ``(y, x)``.
    """
    fmap = np.asarray(fmap, dtype=bool)
    labels, n = ndimage.label(fmap, structure=_EIGHT)
    if n == 0:
        return []
    areas = np.bincount(labels.ravel(), minlength=n + 1)
    regions = []
    for idx, sl in enumerate(ndimage.find_objects(labels), start=1):
        area = int(areas[idx])
        if area < min_area:
            continue
        ys, xs = sl
        regions.append(Region(x=xs.start, y=ys.start, w=xs.stop - xs.start,
                              h=ys.stop - ys.start, area=area))
    regions.sort(key=lambda r: (-r.area, r.y, r.x))
    return regions


def box_iou(a: Region, b: Region) -> float:
    """Intersection over union of two bounding boxes."""
    ax0, ay0, ax1, ay1 = a.box
    bx0, by0, bx1, by1 = b.box
    iw = min(ax1, bx1) - max(ax0, bx0)
    ih = min(ay1, by1) - max(ay0, by0)
    if iw <= 0 or ih <= 0:
        return 0.0
    inter = iw * ih
    return inter / (a.w * a.h + b.w * b.h - inter)


def regions_mask(regions: list[Region], shape: tuple[int, int]) -> np.ndarray:
    """Fill the bounding boxes of ``regions`` into a boolean map."""
    out = np.zeros(shape, dtype=bool)
    for r in regions:
        out[r.y:r.y + r.h, r.x:r.x + r.w] = True
    return out
