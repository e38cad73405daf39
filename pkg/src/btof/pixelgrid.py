"""Image decoding, edge-preserving pre-smoothing, CIELAB conversion and SLIC.

Everything here is a pure function of its inputs. Images are held as
``(height, width, 3)`` float arrays; coordinates follow the usual
row/column convention with ``x`` the column and ``y`` the row.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError
from skimage.measure import label as label_components

from .errors import ImageTooSmall, TargetTooLarge, UnreadableFile, UnsupportedFormat

MIN_SIDE = 16

_PNG_MAGIC = b"\x89PNG"
_JPEG_MAGIC = b"\xff\xd8"

# sRGB primaries -> XYZ, D65 reference white.
_RGB_TO_XYZ = np.array(
    [
        [0.4124564, 0.3575761, 0.1804375],
        [0.2126729, 0.7151522, 0.0721750],
        [0.0193339, 0.1191920, 0.9503041],
    ]
)
D65_WHITE = np.array([0.95047, 1.0, 1.08883])


@dataclass(frozen=True)
class RasterImage:
    """8-bit sRGB image stored as float64 values in [0, 255]."""

    pixels: np.ndarray

    def __post_init__(self):
        px = np.asarray(self.pixels, dtype=np.float64)
        if px.ndim != 3 or px.shape[2] != 3:
            raise ValueError(f"expected (H, W, 3) pixels, got {px.shape}")
        if px.shape[0] < MIN_SIDE or px.shape[1] < MIN_SIDE:
            raise ImageTooSmall(f"image is {px.shape[1]}x{px.shape[0]}, minimum side is {MIN_SIDE}")
        if px.min() < 0 or px.max() > 255:
            raise ValueError("channel values must lie in [0, 255]")
        object.__setattr__(self, "pixels", px)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


@dataclass(frozen=True)
class LabImage:
    """Per-pixel CIELAB triplets, shape ``(H, W, 3)``."""

    pixels: np.ndarray

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


@dataclass(frozen=True)
class SuperpixelMap:
    """Partition of the pixel grid into ``region_count`` connected regions.

    Attributes:
        labels: ``(H, W)`` int array, region index of every pixel.
        region_count: number of regions R; labels cover ``0..R-1``.
        centroids: ``(R, 2)`` array of ``(x, y)`` pixel-centre coordinates.
        region_pixel_counts: ``(R,)`` pixel count of each region.
    """

    labels: np.ndarray
    region_count: int
    centroids: np.ndarray
    region_pixel_counts: np.ndarray

    @classmethod
    def from_labels(cls, labels: np.ndarray) -> "SuperpixelMap":
        """Build a map from an arbitrary integer labelling.

        Labels are compacted to ``0..R-1`` in order of first appearance in
        raster scan, so the result does not depend on the input numbering.
        """
        labels = np.asarray(labels)
        flat = labels.ravel()
        _, first, inverse = np.unique(flat, return_index=True, return_inverse=True)
        order = np.argsort(first, kind="stable")
        rank = np.empty_like(order)
        rank[order] = np.arange(order.size)
        compact = rank[inverse].reshape(labels.shape).astype(np.int64)

        r = int(order.size)
        h, w = compact.shape
        ys, xs = np.mgrid[0:h, 0:w]
        counts = np.bincount(compact.ravel(), minlength=r)
        cx = np.bincount(compact.ravel(), weights=xs.ravel() + 0.5, minlength=r) / counts
        cy = np.bincount(compact.ravel(), weights=ys.ravel() + 0.5, minlength=r) / counts
        return cls(compact, r, np.column_stack([cx, cy]), counts)

    @property
    def width(self) -> int:
        return self.labels.shape[1]

    @property
    def height(self) -> int:
        return self.labels.shape[0]


def load_image(path) -> RasterImage:
    """Decode a PNG or JPEG file into a :class:`RasterImage`.

    Raises:
        UnreadableFile: missing, truncated or corrupt file.
        UnsupportedFormat: the file decodes but is neither PNG nor JPEG, or
            is not an image at all.
        ImageTooSmall: either side is below 16 pixels.
    """
    path = Path(path)
    try:
        head = path.read_bytes()[:4]
    except OSError as exc:
        raise UnreadableFile(f"{path}: {exc}") from exc
    known_magic = head.startswith(_PNG_MAGIC) or head.startswith(_JPEG_MAGIC)
    try:
        with Image.open(path) as im:
            if im.format not in ("PNG", "JPEG"):
                raise UnsupportedFormat(f"{path}: format {im.format} is not PNG or JPEG")
            im.load()
            rgb = np.asarray(im.convert("RGB"), dtype=np.float64)
    except UnidentifiedImageError as exc:
        if known_magic:
            raise UnreadableFile(f"{path}: corrupt image data") from exc
        raise UnsupportedFormat(f"{path}: not a PNG or JPEG image") from exc
    except (OSError, SyntaxError, ValueError) as exc:
        raise UnreadableFile(f"{path}: {exc}") from exc
    return RasterImage(rgb)


def smooth(img: RasterImage, strength: float, iterations: int = 4) -> RasterImage:
    """Flatten low-amplitude structure while keeping strong colour edges.

    A lightweight stand-in for L0 gradient minimisation. Channels are scaled
    to [0, 1]; on each pass every neighbour difference whose squared colour
    magnitude falls below ``strength`` is treated as zero gradient, and the
    pixel is rebuilt as the average of itself and those neighbours. Edges at
    or above the threshold never exchange mass, so piecewise-constant images
    are fixed points.
    """
    if strength < 0:
        raise ValueError("strength must be non-negative")
    if strength == 0:
        return img
    u = img.pixels / 255.0
    h, w, _ = u.shape
    for _ in range(iterations):
        padded = np.pad(u, ((1, 1), (1, 1), (0, 0)), mode="edge")
        acc = u.copy()
        count = np.ones((h, w))
        for dy, dx in ((-1, 0), (1, 0), (0, -1), (0, 1)):
            nb = padded[1 + dy : 1 + dy + h, 1 + dx : 1 + dx + w]
            keep = ((nb - u) ** 2).sum(axis=2) < strength
            acc += nb * keep[..., None]
            count += keep
        u = acc / count[..., None]
    return RasterImage(np.clip(u * 255.0, 0.0, 255.0))


def _lab_f(t: np.ndarray) -> np.ndarray:
    delta = 6.0 / 29.0
    return np.where(t > delta**3, np.cbrt(t), t / (3 * delta**2) + 4.0 / 29.0)


def to_lab(img: RasterImage) -> LabImage:
    """sRGB -> CIELAB under D65 with the standard sRGB gamma expansion."""
    c = img.pixels / 255.0
    linear = np.where(c <= 0.04045, c / 12.92, ((c + 0.055) / 1.055) ** 2.4)
    xyz = linear @ _RGB_TO_XYZ.T / D65_WHITE
    fx, fy, fz = (_lab_f(xyz[..., i]) for i in range(3))
    lab = np.stack([116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)], axis=-1)
    return LabImage(lab)


def _seed_grid(h: int, w: int, target: int) -> np.ndarray:
    step = math.sqrt(h * w / target)
    rows = max(1, round(h / step))
    cols = max(1, round(w / step))
    ys = (np.arange(rows) + 0.5) * h / rows
    xs = (np.arange(cols) + 0.5) * w / cols
    yy, xx = np.meshgrid(ys, xs, indexing="ij")
    return np.column_stack([yy.ravel(), xx.ravel()]).astype(np.int64)


def _perturb_seeds(lab: np.ndarray, seeds: np.ndarray) -> np.ndarray:
    padded = np.pad(lab, ((1, 1), (1, 1), (0, 0)), mode="edge")
    gx = padded[1:-1, 2:] - padded[1:-1, :-2]
    gy = padded[2:, 1:-1] - padded[:-2, 1:-1]
    grad = (gx**2).sum(axis=2) + (gy**2).sum(axis=2)
    h, w = grad.shape
    moved = seeds.copy()
    for k, (y, x) in enumerate(seeds):
        y0, y1 = max(0, y - 1), min(h, y + 2)
        x0, x1 = max(0, x - 1), min(w, x + 2)
        window = grad[y0:y1, x0:x1]
        iy, ix = np.unravel_index(np.argmin(window), window.shape)
        moved[k] = (y0 + iy, x0 + ix)
    return moved


def _merge_orphans(assign: np.ndarray) -> np.ndarray:
    """Relabel so every region is 4-connected.

    For each cluster only its largest connected piece is kept; every other
    piece is absorbed by the adjacent group with the most pixels.
    """
    comp = label_components(assign, background=-1, connectivity=1) - 1
    n_comp = int(comp.max()) + 1
    sizes = np.bincount(comp.ravel(), minlength=n_comp).astype(np.int64)
    owner = np.zeros(n_comp, dtype=np.int64)
    owner[comp.ravel()] = assign.ravel()

    primary = np.full(int(assign.max()) + 1, -1)
    for c in np.lexsort((np.arange(n_comp), -sizes)):
        if primary[owner[c]] < 0:
            primary[owner[c]] = c
    orphans = [c for c in range(n_comp) if primary[owner[c]] != c]
    if not orphans:
        return comp

    pairs = np.concatenate(
        [
            np.stack([comp[:, :-1].ravel(), comp[:, 1:].ravel()], axis=1),
            np.stack([comp[:-1, :].ravel(), comp[1:, :].ravel()], axis=1),
        ]
    )
    pairs = pairs[pairs[:, 0] != pairs[:, 1]]
    pairs = np.unique(np.sort(pairs, axis=1), axis=0)
    neighbours: dict[int, set[int]] = {}
    for a, b in pairs:
        neighbours.setdefault(int(a), set()).add(int(b))
        neighbours.setdefault(int(b), set()).add(int(a))

    parent = np.arange(n_comp)

    def find(c: int) -> int:
        while parent[c] != c:
            parent[c] = parent[parent[c]]
            c = parent[c]
        return int(c)

    for o in orphans:
        root = find(o)
        candidates = {find(nb) for nb in neighbours.get(o, ())} - {root}
        if not candidates:
            continue
        target = min(candidates, key=lambda r: (-sizes[r], r))
        parent[root] = target
        sizes[target] += sizes[root]

    roots = np.array([find(c) for c in range(n_comp)])
    return roots[comp]


def slic(
    lab: LabImage,
    target_regions: int,
    compactness: float = 10.0,
    iterations: int = 10,
) -> SuperpixelMap:
    """Over-segment ``lab`` into roughly ``target_regions`` compact superpixels.

    Args:
        lab: CIELAB image.
        target_regions: desired region count; must not exceed ``W*H/16``.
        compactness: weight of the spatial term. The assignment distance is
            ``|dlab| + (compactness / S) * |dxy|`` with grid step ``S``.
        iterations: Lloyd-style update rounds.

    Raises:
        TargetTooLarge: ``target_regions > W*H/16``.
    """
    if target_regions < 4:
        raise ValueError("target_regions must be at least 4")
    if compactness <= 0:
        raise ValueError("compactness must be positive")
    pix = lab.pixels
    h, w, _ = pix.shape
    if target_regions > h * w / 16:
        raise TargetTooLarge(f"{target_regions} regions requested for a {w}x{h} image")

    step = math.sqrt(h * w / target_regions)
    radius = int(math.ceil(step))
    spatial_weight = compactness / step

    seeds = _perturb_seeds(pix, _seed_grid(h, w, target_regions))
    k = seeds.shape[0]
    centers_yx = seeds.astype(np.float64)
    centers_lab = pix[seeds[:, 0], seeds[:, 1]].copy()
    alive = np.ones(k, dtype=bool)

    ys, xs = np.mgrid[0:h, 0:w]
    flat_lab = pix.reshape(-1, 3)
    for _ in range(iterations):
        dist = np.full((h, w), np.inf)
        assign = np.full((h, w), -1, dtype=np.int64)
        for c in np.flatnonzero(alive):
            cy, cx = centers_yx[c]
            y0, y1 = max(0, int(cy) - radius), min(h, int(cy) + radius + 1)
            x0, x1 = max(0, int(cx) - radius), min(w, int(cx) + radius + 1)
            d_lab = np.sqrt(((pix[y0:y1, x0:x1] - centers_lab[c]) ** 2).sum(axis=2))
            d_xy = np.sqrt((ys[y0:y1, x0:x1] - cy) ** 2 + (xs[y0:y1, x0:x1] - cx) ** 2)
            d = d_lab + spatial_weight * d_xy
            window = dist[y0:y1, x0:x1]
            better = d < window
            window[better] = d[better]
            assign[y0:y1, x0:x1][better] = c

        missing = assign < 0
        if missing.any():
            live = np.flatnonzero(alive)
            my, mx = ys[missing], xs[missing]
            d2 = (my[:, None] - centers_yx[live, 0]) ** 2 + (mx[:, None] - centers_yx[live, 1]) ** 2
            assign[missing] = live[np.argmin(d2, axis=1)]

        flat = assign.ravel()
        counts = np.bincount(flat, minlength=k)
        alive = counts > 0
        safe = np.maximum(counts, 1)
        centers_yx = np.column_stack(
            [
                np.bincount(flat, weights=ys.ravel(), minlength=k) / safe,
                np.bincount(flat, weights=xs.ravel(), minlength=k) / safe,
            ]
        )
        centers_lab = np.column_stack(
            [np.bincount(flat, weights=flat_lab[:, i], minlength=k) / safe for i in range(3)]
        )

    return SuperpixelMap.from_labels(_merge_orphans(assign))
