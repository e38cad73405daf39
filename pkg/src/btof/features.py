"""Per-superpixel colour/texture descriptors and the mixed feature distance."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BinCountMismatch, DimensionMismatch
from .pixelgrid import LabImage, RasterImage, SuperpixelMap

HOG_BINS = 9


@dataclass(frozen=True)
class RegionDescriptor:
    lab_mean: np.ndarray
    hog: np.ndarray
    region_index: int


@dataclass(frozen=True)
class DistanceParams:
    """Weights of the colour term (``alpha1``) and texture term (``alpha2``)."""

    alpha1: float = 0.6
    alpha2: float = 0.4

    def __post_init__(self):
        if self.alpha1 < 0 or self.alpha2 < 0:
            raise ValueError("distance weights must be non-negative")


def extract_descriptors(
    lab: LabImage, img: RasterImage, sp: SuperpixelMap, bins: int = HOG_BINS
) -> list[RegionDescriptor]:
    """Mean CIELAB colour and an L1-normalised gradient histogram per region.

    Gradients are central differences of the L channel. Each pixel votes its
    gradient magnitude into one of ``bins`` unsigned orientation bins over
    [0, pi). A region without any gradient keeps an all-zero histogram.
    """
    shape = sp.labels.shape
    if lab.pixels.shape[:2] != shape or img.pixels.shape[:2] != shape:
        raise DimensionMismatch(
            f"lab {lab.pixels.shape[:2]}, image {img.pixels.shape[:2]}, labels {shape}"
        )
    r = sp.region_count
    flat = sp.labels.ravel()
    counts = np.bincount(flat, minlength=r)
    lab_flat = lab.pixels.reshape(-1, 3)
    means = np.column_stack(
        [np.bincount(flat, weights=lab_flat[:, i], minlength=r) / counts for i in range(3)]
    )

    gy, gx = np.gradient(lab.pixels[..., 0])
    magnitude = np.hypot(gx, gy).ravel()
    angle = np.mod(np.arctan2(gy, gx), np.pi).ravel()
    which = np.minimum((angle / (np.pi / bins)).astype(np.int64), bins - 1)
    hist = np.bincount(flat * bins + which, weights=magnitude, minlength=r * bins).reshape(r, bins)
    totals = hist.sum(axis=1, keepdims=True)
    hist = np.divide(hist, totals, out=np.zeros_like(hist), where=totals > 0)

    return [RegionDescriptor(means[i], hist[i], i) for i in range(r)]


def stack_descriptors(descriptors: list[RegionDescriptor]) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(lab_means, hogs)`` as ``(R, 3)`` and ``(R, K)`` arrays."""
    lab = np.array([d.lab_mean for d in descriptors], dtype=np.float64).reshape(-1, 3)
    hog = np.array([d.hog for d in descriptors], dtype=np.float64)
    return lab, hog.reshape(len(descriptors), -1)


def chi_square(h1, h2) -> float:
    """``sum 2 (h1 - h2)^2 / (h1 + h2)``; bins with a zero denominator add 0."""
    h1 = np.asarray(h1, dtype=np.float64)
    h2 = np.asarray(h2, dtype=np.float64)
    if h1.shape != h2.shape:
        raise BinCountMismatch(f"{h1.shape} vs {h2.shape}")
    return float(_chi_square_terms(h1, h2).sum(axis=-1))


def _chi_square_terms(h1: np.ndarray, h2: np.ndarray) -> np.ndarray:
    num = 2.0 * (h1 - h2) ** 2
    den = h1 + h2
    return np.divide(num, den, out=np.zeros(np.broadcast(num, den).shape), where=den > 0)


def feature_distance(a: RegionDescriptor, b: RegionDescriptor, p: DistanceParams = DistanceParams()) -> float:
    if a.hog.shape != b.hog.shape:
        raise BinCountMismatch(f"{a.hog.shape} vs {b.hog.shape}")
    color = float(np.linalg.norm(np.asarray(a.lab_mean) - np.asarray(b.lab_mean)))
    return p.alpha1 * color + p.alpha2 * chi_square(a.hog, b.hog)


def distance_matrix(descriptors: list[RegionDescriptor], p: DistanceParams = DistanceParams()) -> np.ndarray:
    """All-pairs :func:`feature_distance` as an ``(R, R)`` matrix."""
    lab, hog = stack_descriptors(descriptors)
    color = np.sqrt(((lab[:, None, :] - lab[None, :, :]) ** 2).sum(axis=2))
    texture = _chi_square_terms(hog[:, None, :], hog[None, :, :]).sum(axis=2)
    return p.alpha1 * color + p.alpha2 * texture
