"""Direction-filter tamper localization.

Pipeline: V channel -> Canny edges split by orientation and weighted by the
local standard deviation -> row/column projections thresholded at their
means -> binary feature map -> connected regions.

Each stage commutes with transposing the image: the vertical-edge channel
uses the transposed statistics window and every derivative or sum is
computed so that swapping axes swaps the channels bit for bit.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
from scipy import ndimage

from .imaging import ImageSizeError, to_v_channel
from .regions import Region, extract_regions

# Gradient magnitudes below this are treated as flat.
_MIN_GRADIENT = 1e-6
_TAN_22_5 = np.sqrt(2.0) - 1.0


@dataclass(frozen=True)
class DirectionParams:
    sigma: float = 1.4
    high_percentile: float = 90.0
    low_ratio: float = 0.4
    win_w: int = 7
    win_h: int = 3
    closing: int = 5
    min_area: int = 64

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class ProjectionProfile:
    horizontal: np.ndarray
    vertical: np.ndarray

    @property
    def h_threshold(self) -> float:
        return float(self.horizontal.mean())

    @property
    def v_threshold(self) -> float:
        return float(self.vertical.mean())


def std_edge_image(img: np.ndarray, win_w: int = 7, win_h: int = 3) -> np.ndarray:
    """Sample standard deviation over a ``win_h`` x ``win_w`` window.

    The window is centred on each pixel and the border is replicated, so the
    output matches the input shape.  Integer images are summed exactly in
    int64, which makes flat areas come out as exactly zero.
    """
    img = np.asarray(img)
    if img.ndim != 2:
        raise ValueError(f"expected a single-channel image, got shape {img.shape}")
    if win_w < 1 or win_h < 1 or win_w % 2 == 0 or win_h % 2 == 0:
        raise ValueError(f"window dims must be odd and positive, got {win_h}x{win_w}")
    h, w = img.shape
    if h < win_h or w < win_w:
        raise ImageSizeError(f"image {w}x{h} is smaller than the {win_h}x{win_w} window")
    n = win_w * win_h
    if n < 2:
        return np.zeros(img.shape, dtype=np.float64)

    exact = np.issubdtype(img.dtype, np.integer) or img.dtype == bool
    acc = np.int64 if exact else np.float64
    p = np.pad(img.astype(acc), ((win_h // 2,) * 2, (win_w // 2,) * 2), mode="edge")

    def window_sum(a: np.ndarray) -> np.ndarray:
        s = np.zeros((a.shape[0] + 1, a.shape[1] + 1), dtype=acc)
        s[1:, 1:] = a.cumsum(axis=0).cumsum(axis=1)
        return s[win_h:, win_w:] - s[:-win_h, win_w:] - s[win_h:, :-win_w] + s[:-win_h, :-win_w]

    s1 = window_sum(p)
    s2 = window_sum(p * p)
    num = n * s2 - s1 * s1
    if not exact:
        num = np.maximum(num, 0.0)
    return np.sqrt(num / float(n * (n - 1)))


def _smooth(img: np.ndarray, sigma: float) -> np.ndarray:
    # Average both pass orders so the result is exactly symmetric in the axes.
    x = img.astype(np.float64)
    if sigma <= 0:
        return x
    a = ndimage.gaussian_filter1d(ndimage.gaussian_filter1d(x, sigma, axis=0, mode="nearest"),
                                  sigma, axis=1, mode="nearest")
    b = ndimage.gaussian_filter1d(ndimage.gaussian_filter1d(x, sigma, axis=1, mode="nearest"),
                                  sigma, axis=0, mode="nearest")
    return 0.5 * (a + b)


def _sobel_rows(p: np.ndarray) -> np.ndarray:
    """Sobel derivative along axis 0 of an edge-padded array (pad 1)."""
    d = p[2:, :] - p[:-2, :]
    return d[:, :-2] + 2.0 * d[:, 1:-1] + d[:, 2:]


def sobel_gradients(smoothed: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(gx, gy)``: column-wise and row-wise Sobel derivatives."""
    p = np.pad(smoothed, 1, mode="edge")
    gy = _sobel_rows(p)
    gx = np.ascontiguousarray(_sobel_rows(np.ascontiguousarray(p.T)).T)
    return gx, gy


def _non_max_suppression(mag: np.ndarray, gx: np.ndarray, gy: np.ndarray) -> np.ndarray:
    ax, ay = np.abs(gx), np.abs(gy)
    p = np.pad(mag, 1, mode="constant")
    h, w = mag.shape

    def nb(dr: int, dc: int) -> np.ndarray:
        return p[1 + dr:1 + dr + h, 1 + dc:1 + dc + w]

    along_x = ay < _TAN_22_5 * ax
    along_y = ax < _TAN_22_5 * ay
    diag = ~(along_x | along_y)
    main = diag & (gx * gy > 0)
    anti = diag & ~main

    n1 = np.zeros_like(mag)
    n2 = np.zeros_like(mag)
    for sel, (r1, c1), (r2, c2) in (
        (along_x, (0, -1), (0, 1)),
        (along_y, (-1, 0), (1, 0)),
        (main, (-1, -1), (1, 1)),
        (anti, (-1, 1), (1, -1)),
    ):
        n1[sel] = nb(r1, c1)[sel]
        n2[sel] = nb(r2, c2)[sel]
    keep = (mag >= n1) & (mag >= n2)
    return np.where(keep, mag, 0.0)


def canny(img: np.ndarray, sigma: float = 1.4, high_percentile: float = 90.0,
          low_ratio: float = 0.4) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Canny edge detector with percentile-based hysteresis.

    The high threshold is the ``high_percentile`` of the gradient magnitude
    over the whole image, the low one ``low_ratio`` times that.

    Returns:
        ``(edges, gx, gy)`` where ``edges`` is a boolean map of retained
        edge pixels and ``gx``/``gy`` are the smoothed Sobel gradients.
    """
    gx, gy = sobel_gradients(_smooth(img, sigma))
    mag = np.hypot(gx, gy)
    high = float(np.percentile(mag, high_percentile))
    low = low_ratio * high
    thin = _non_max_suppression(mag, gx, gy)
    floor = _MIN_GRADIENT
    weak = (thin >= low) & (thin > floor)
    strong = (thin >= high) & (thin > floor)
    labels, n = ndimage.label(weak, structure=np.ones((3, 3), dtype=bool))
    if n == 0:
        return np.zeros(img.shape, dtype=bool), gx, gy
    keep = np.zeros(n + 1, dtype=bool)
    keep[np.unique(labels[strong])] = True
    keep[0] = False
    return keep[labels], gx, gy


def directional_edges(img: np.ndarray, params: DirectionParams = DirectionParams()
                      ) -> tuple[np.ndarray, np.ndarray]:
    """Split Canny edges into horizontal and vertical edge images.

    An edge pixel whose gradient lies within 45 degrees of vertical belongs
    to a horizontal edge; all others to a vertical one.  Retained pixels
    carry the local standard deviation as their strength, measured with a
    ``win_h x win_w`` window for horizontal edges and the transposed window
    for vertical ones.
    """
    img = np.asarray(img)
    if img.ndim != 2:
        raise ValueError(f"expected a single-channel image, got shape {img.shape}")
    if min(img.shape) < 16:
        raise ImageSizeError(f"direction filter needs at least 16x16 pixels, got "
                             f"{img.shape[1]}x{img.shape[0]}")
    edges, gx, gy = canny(img, params.sigma, params.high_percentile, params.low_ratio)
    horiz = edges & (np.abs(gy) > np.abs(gx))
    vert = edges & ~horiz
    return _weight_edges(img, horiz, vert, params)


def _weight_edges(img: np.ndarray, horiz: np.ndarray, vert: np.ndarray,
                  params: DirectionParams) -> tuple[np.ndarray, np.ndarray]:
    # Edge strength = binary Canny response x windowed std.
    std_h = std_edge_image(img, params.win_w, params.win_h)
    std_v = std_edge_image(img, params.win_h, params.win_w)
    return np.where(horiz, std_h, 0.0), np.where(vert, std_v, 0.0)


def projections(edges: np.ndarray) -> ProjectionProfile:
    """Row sums (horizontal) and column sums (vertical) of an edge image."""
    edges = np.asarray(edges, dtype=np.float64)
    if edges.size == 0:
        raise ValueError("projection of an empty edge image")
    # Both sums reduce contiguous rows so transposed inputs swap them exactly.
    horizontal = np.ascontiguousarray(edges).sum(axis=1)
    vertical = np.ascontiguousarray(edges.T).sum(axis=1)
    return ProjectionProfile(horizontal, vertical)


def _close(fmap: np.ndarray, size: int) -> np.ndarray:
    r = size // 2
    se = np.ones((size, size), dtype=bool)
    p = np.pad(fmap, r, mode="constant")
    p = ndimage.binary_erosion(ndimage.binary_dilation(p, se), se)
    return p[r:-r, r:-r] if r else p


def feature_map(h_edges: np.ndarray, v_edges: np.ndarray, prof_h: ProjectionProfile,
                prof_v: ProjectionProfile, closing: int = 5) -> np.ndarray:
    """Combine the thresholded directional edges into a binary map.

    Horizontal-edge pixels survive in rows whose projection is strictly
    above the mean row projection, vertical-edge pixels in columns above the
    mean column projection.  ``closing`` is the side of the square used to
    bridge fragmented outlines; 0 or 1 skips it.
    """
    h_edges = np.asarray(h_edges)
    v_edges = np.asarray(v_edges)
    if h_edges.shape != v_edges.shape:
        raise ValueError(f"edge images differ in shape: {h_edges.shape} vs {v_edges.shape}")
    if prof_h.horizontal.shape[0] != h_edges.shape[0] or prof_v.vertical.shape[0] != v_edges.shape[1]:
        raise ValueError("projection profiles do not match the edge images")
    rows = prof_h.horizontal > prof_h.h_threshold
    cols = prof_v.vertical > prof_v.v_threshold
    fmap = ((h_edges > 0) & rows[:, None]) | ((v_edges > 0) & cols[None, :])
    if closing > 1:
        fmap = _close(fmap, closing)
    return fmap


def detect_direction(img: np.ndarray, params: DirectionParams = DirectionParams()
                     ) -> tuple[np.ndarray, list[Region]]:
    """Run the full direction-filter pipeline on a gray or RGB image.

    Returns the feature map (same height and width as ``img``) and the
    extracted regions, largest first.
    """
    v = to_v_channel(np.asarray(img))
    h_edges, v_edges = directional_edges(v, params)
    fmap = feature_map(h_edges, v_edges, projections(h_edges), projections(v_edges),
                       closing=params.closing)
    return fmap, extract_regions(fmap, min_area=params.min_area)
