"""Seeded copy-move / copy-create forgeries with pixel-exact ground truth.

Hosts are fractal-noise scenes (or crops of user-supplied photos) pushed
through the JPEG lossy stage at a random quality, so they carry a blocking
grid.  Pasted rectangles are displaced by an offset that is either a
multiple of 8 (grid-aligned) or not, and may be feathered with a short
alpha ramp to imitate a soft-brush editor.
"""
from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .imaging import PathLike, load_image, save_image, save_mask, to_luma
from .jpeg import recompress

MANIFEST = "manifest.jsonl"
IMAGE_EXTS = (".jpg", ".jpeg", ".png", ".bmp")


class Rect(NamedTuple):
    x: int
    y: int
    w: int
    h: int


@dataclass(frozen=True)
class ForgerySpec:
    kind: str
    src_rect: Rect
    dst: tuple[int, int]
    feather: int = 0
    post_quality: Optional[int] = None
    seed: int = 0

    @property
    def offset(self) -> tuple[int, int]:
        return self.dst[0] - self.src_rect.x, self.dst[1] - self.src_rect.y

    @property
    def aligned(self) -> bool:
        dx, dy = self.offset
        return dx % 8 == 0 and dy % 8 == 0


@dataclass
class GroundTruth:
    mask: np.ndarray
    meta: ForgerySpec


@dataclass(frozen=True)
class CorpusOptions:
    size_range: tuple[int, int] = (256, 384)
    quality_range: tuple[int, int] = (50, 90)
    misaligned_fraction: float = 0.75
    copy_move_fraction: float = 0.5
    feather: int = 2
    feather_fraction: float = 0.5
    beta_range: tuple[float, float] = (3.5, 4.0)
    grain: float = 1.0
    bases: Optional[str] = None

    def to_dict(self) -> dict:
        return asdict(self)


def _check_rect(rect: Rect, shape: tuple[int, ...], what: str) -> None:
    x, y, w, h = rect
    if w < 1 or h < 1 or x < 0 or y < 0 or x + w > shape[1] or y + h > shape[0]:
        raise ValueError(f"{what} rect {tuple(rect)} outside image of size {shape[1]}x{shape[0]}")


def feather_alpha(w: int, h: int, radius: int) -> np.ndarray:
    """Alpha ramp over a ``h x w`` paste: 1 in the interior, falling over
    ``radius`` pixels towards the rectangle edge, never reaching 0."""
    if radius <= 0:
        return np.ones((h, w))
    ys = np.minimum(np.arange(h), np.arange(h)[::-1])
    xs = np.minimum(np.arange(w), np.arange(w)[::-1])
    dist = np.minimum(ys[:, None], xs[None, :])
    return np.minimum(1.0, (dist + 1.0) / (radius + 1.0))


def _paste(donor: np.ndarray, host: np.ndarray, src_rect: Rect, dst: tuple[int, int],
           kind: str, feather: int, seed: int) -> tuple[np.ndarray, GroundTruth]:
    src_rect = Rect(*src_rect)
    _check_rect(src_rect, donor.shape, "source")
    dst_rect = Rect(dst[0], dst[1], src_rect.w, src_rect.h)
    _check_rect(dst_rect, host.shape, "destination")
    if donor.ndim != host.ndim:
        raise ValueError("donor and host must have the same number of channels")
    x, y, w, h = src_rect
    patch = donor[y:y + h, x:x + w].copy()
    out = host.copy()
    region = out[dst[1]:dst[1] + h, dst[0]:dst[0] + w]
    if feather > 0:
        alpha = feather_alpha(w, h, feather)
        if patch.ndim == 3:
            alpha = alpha[..., None]
        blend = alpha * patch + (1.0 - alpha) * region
        region[...] = np.floor(blend + 0.5).astype(np.uint8)
    else:
        region[...] = patch
    mask = np.zeros(host.shape[:2], dtype=bool)
    mask[dst[1]:dst[1] + h, dst[0]:dst[0] + w] = True
    spec = ForgerySpec(kind, src_rect, (int(dst[0]), int(dst[1])), feather, None, seed)
    return out, GroundTruth(mask, spec)


def copy_move(host: np.ndarray, src_rect: Rect, dst: tuple[int, int], seed: int = 0,
              feather: int = 0) -> tuple[np.ndarray, GroundTruth]:
    """Clone ``src_rect`` of ``host`` to top-left ``dst`` within the same image."""
    host = np.asarray(host)
    return _paste(host, host, src_rect, dst, "copy-move", feather, seed)


def copy_create(donor: np.ndarray, host: np.ndarray, src_rect: Rect, dst: tuple[int, int],
                seed: int = 0, feather: int = 0) -> tuple[np.ndarray, GroundTruth]:
    """Splice ``src_rect`` of ``donor`` into ``host`` at ``dst``."""
    return _paste(np.asarray(donor), np.asarray(host), src_rect, dst, "copy-create", feather, seed)


def fractal_noise(shape: tuple[int, int], rng: np.random.Generator,
                  beta: float = 3.75, grain: float = 1.0) -> np.ndarray:
    """Grayscale 1/f^beta noise scene scaled into a random 8-bit range.

    ``beta`` near 2 gives busy cloud texture; 3.5 and up gives smooth,
    sky-like gradients.  ``grain`` is the sigma of an added white-noise
    layer standing in for sensor noise.
    """
    h, w = shape
    fy = np.fft.fftfreq(h)[:, None]
    fx = np.fft.rfftfreq(w)[None, :]
    f = np.hypot(fy, fx)
    f[0, 0] = 1.0
    amp = f ** (-beta / 2.0)
    amp[0, 0] = 0.0
    spectrum = amp * (rng.normal(size=amp.shape) + 1j * rng.normal(size=amp.shape))
    field_ = np.fft.irfft2(spectrum, s=(h, w))
    field_ = (field_ - field_.min()) / max(np.ptp(field_), 1e-12)
    lo = rng.uniform(10.0, 60.0)
    hi = rng.uniform(190.0, 245.0)
    img = lo + (hi - lo) * field_ + rng.normal(0.0, grain, size=(h, w))
    return np.clip(np.floor(img + 0.5), 0, 255).astype(np.uint8)


def _list_bases(bases: Optional[PathLike]) -> list[Path]:
    if bases is None:
        return []
    files = sorted(p for p in Path(bases).iterdir() if p.suffix.lower() in IMAGE_EXTS)
    if not files:
        raise FileNotFoundError(f"no JPEG/PNG/BMP base images in {bases}")
    return files


def _base_image(shape: tuple[int, int], rng: np.random.Generator, bases: list[Path],
                opts: CorpusOptions) -> np.ndarray:
    if not bases:
        return fractal_noise(shape, rng, rng.uniform(*opts.beta_range), opts.grain)
    img = to_luma(load_image(bases[int(rng.integers(len(bases)))]))
    h, w = shape
    if img.shape[0] < h or img.shape[1] < w:
        reps = (-(-h // img.shape[0]), -(-w // img.shape[1]))
        img = np.tile(img, reps)
    y = int(rng.integers(img.shape[0] - h + 1))
    x = int(rng.integers(img.shape[1] - w + 1))
    return np.ascontiguousarray(img[y:y + h, x:x + w])


def _overlaps(a: Rect, b: Rect) -> bool:
    return not (a.x + a.w <= b.x or b.x + b.w <= a.x or a.y + a.h <= b.y or b.y + b.h <= a.y)


def _place(rng: np.random.Generator, src: Rect, host_shape: tuple[int, int], residue: tuple[int, int],
           avoid: Optional[Rect]) -> tuple[int, int]:
    """Pick a destination whose offset from ``src`` is congruent to ``residue`` mod 8."""
    H, W = host_shape
    best = None
    for _ in range(64):
        cx = int(rng.integers(0, W - src.w + 1))
        cy = int(rng.integers(0, H - src.h + 1))
        dx = cx - ((cx - src.x - residue[0]) % 8)
        dy = cy - ((cy - src.y - residue[1]) % 8)
        if dx < 0:
            dx += 8
        if dy < 0:
            dy += 8
        if dx + src.w > W or dy + src.h > H:
            continue
        cand = (dx, dy)
        if best is None:
            best = cand
        if avoid is None or not _overlaps(Rect(dx, dy, src.w, src.h), avoid):
            return cand
    if best is None:
        raise ValueError("could not place paste inside host")
    return best


def _allocate(n: int, fraction: float, rng: np.random.Generator) -> np.ndarray:
    flags = np.zeros(n, dtype=bool)
    flags[: int(round(fraction * n))] = True
    return rng.permutation(flags)


def make_forgery(index: int, seed: int, opts: CorpusOptions, *, copy_move_kind: bool,
                 misaligned: bool, feathered: bool,
                 bases: Sequence[Path] = ()) -> tuple[np.ndarray, GroundTruth, int]:
    """Build forgery number ``index`` of a corpus; returns image, truth and qf."""
    rng = np.random.default_rng([seed, index, 1])
    lo, hi = opts.size_range
    H, W = (int(v) for v in rng.integers(lo, hi + 1, size=2))
    qf = int(rng.integers(opts.quality_range[0], opts.quality_range[1] + 1))
    host = recompress(_base_image((H, W), rng, list(bases), opts), qf)
    if copy_move_kind:
        donor = host
    else:
        dh, dw = (int(v) for v in rng.integers(lo, hi + 1, size=2))
        donor = recompress(_base_image((dh, dw), rng, list(bases), opts), qf)
    side_lo = 48
    side_hi = max(side_lo, min(H, W, donor.shape[0], donor.shape[1]) // 3)
    pw, ph = (int(v) for v in rng.integers(side_lo, side_hi + 1, size=2))
    src = Rect(int(rng.integers(0, donor.shape[1] - pw + 1)),
               int(rng.integers(0, donor.shape[0] - ph + 1)), pw, ph)
    residue = (int(rng.integers(1, 8)), int(rng.integers(1, 8))) if misaligned else (0, 0)
    dst = _place(rng, src, (H, W), residue, src if copy_move_kind else None)
    radius = opts.feather if feathered else 0
    if copy_move_kind:
        img, gt = copy_move(host, src, dst, seed=seed, feather=radius)
    else:
        img, gt = copy_create(donor, host, src, dst, seed=seed, feather=radius)
    return img, gt, qf


def make_authentic(index: int, seed: int, opts: CorpusOptions,
                   bases: Sequence[Path] = ()) -> tuple[np.ndarray, int]:
    rng = np.random.default_rng([seed, index, 2])
    lo, hi = opts.size_range
    H, W = (int(v) for v in rng.integers(lo, hi + 1, size=2))
    qf = int(rng.integers(opts.quality_range[0], opts.quality_range[1] + 1))
    return recompress(_base_image((H, W), rng, list(bases), opts), qf), qf


def build_corpus(out_dir: PathLike, n: int = 100, seed: int = 0,
                 opts: CorpusOptions = CorpusOptions(), jobs: int = 1) -> Path:
    """Write ``n`` forgeries, ``n`` authentic controls, masks and a manifest.

    Layout under ``out_dir``: ``forged/``, ``authentic/``, ``gt/`` and
    ``manifest.jsonl`` (one JSON record per image, forgeries first).  The
    output is a pure function of ``(n, seed, opts)``.
    """
    if n < 1:
        raise ValueError(f"corpus size must be at least 1, got {n}")
    out = Path(out_dir)
    for sub in ("forged", "authentic", "gt"):
        (out / sub).mkdir(parents=True, exist_ok=True)
    bases = _list_bases(opts.bases)

    plan = np.random.default_rng([seed, 0])
    misaligned = _allocate(n, opts.misaligned_fraction, plan)
    feathered = _allocate(n, opts.feather_fraction if opts.feather > 0 else 0.0, plan)
    moves = _allocate(n, opts.copy_move_fraction, plan)

    def forged(i: int) -> dict:
        img, gt, qf = make_forgery(i, seed, opts, copy_move_kind=bool(moves[i]),
                                   misaligned=bool(misaligned[i]), feathered=bool(feathered[i]),
                                   bases=bases)
        fid = f"f{i:04d}"
        save_image(img, out / "forged" / f"{fid}.png")
        save_mask(gt.mask, out / "gt" / f"{fid}.png")
        spec = gt.meta
        return {
            "id": fid, "kind": spec.kind, "forged": f"forged/{fid}.png", "gt": f"gt/{fid}.png",
            "qf": qf, "offset": list(spec.offset), "aligned": spec.aligned,
            "feathered": spec.feather > 0, "feather": spec.feather,
            "src": list(spec.src_rect), "dst": list(spec.dst),
            "size": [int(img.shape[1]), int(img.shape[0])], "seed": seed,
        }

    def authentic(i: int) -> dict:
        img, qf = make_authentic(i, seed, opts, bases)
        aid = f"a{i:04d}"
        save_image(img, out / "authentic" / f"{aid}.png")
        save_mask(np.zeros(img.shape, dtype=bool), out / "gt" / f"{aid}.png")
        return {
            "id": aid, "kind": "authentic", "forged": f"authentic/{aid}.png", "gt": f"gt/{aid}.png",
            "qf": qf, "offset": None, "aligned": None, "feathered": False, "feather": 0,
            "src": None, "dst": None, "size": [int(img.shape[1]), int(img.shape[0])], "seed": seed,
        }

    with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
        records = list(pool.map(forged, range(n))) + list(pool.map(authentic, range(n)))

    tmp = out / (MANIFEST + ".tmp")
    with open(tmp, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")
    os.replace(tmp, out / MANIFEST)
    return out


def read_manifest(corpus_dir: PathLike) -> list[dict]:
    path = Path(corpus_dir) / MANIFEST
    with open(path, encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]
