"""Two-stage refinement: centre-weighted decrease, then cluster-wise highlight."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .background import SaliencyMap, Stage
from .errors import ClusterCountTooLarge
from .features import DistanceParams, RegionDescriptor, distance_matrix, stack_descriptors
from .graph import edge_weight
from .kmeans import kmeans
from .pixelgrid import SuperpixelMap
from .ranking import normalize


@dataclass(frozen=True)
class DecreaseParams:
    sigma_x: float
    sigma_y: float
    center: tuple[float, float]

    def __post_init__(self):
        if self.sigma_x <= 0 or self.sigma_y <= 0:
            raise ValueError("Gaussian widths must be positive")

    @classmethod
    def for_image(cls, width: int, height: int, spread: float = 0.5) -> "DecreaseParams":
        """Gaussian centred on the image with widths ``spread * (W, H)``."""
        return cls(spread * width, spread * height, (width / 2.0, height / 2.0))


@dataclass(frozen=True)
class HighlightParams:
    gamma1: float = 0.5
    gamma2: float = 0.5
    k_clusters: int = 8
    kmeans_seed: int = 0

    def __post_init__(self):
        if self.gamma1 < 0 or self.gamma2 < 0 or self.gamma1 + self.gamma2 <= 0:
            raise ValueError("gamma weights must be non-negative with a positive sum")
        if self.k_clusters < 1:
            raise ValueError("k_clusters must be at least 1")


def gaussian_prior(width: int, height: int, p: DecreaseParams) -> np.ndarray:
    """``G(x, y)`` evaluated at pixel centres, shape ``(height, width)``."""
    xs = np.arange(width) + 0.5
    ys = np.arange(height) + 0.5
    gx = (xs - p.center[0]) ** 2 / (2 * p.sigma_x**2)
    gy = (ys - p.center[1]) ** 2 / (2 * p.sigma_y**2)
    return np.exp(-(gy[:, None] + gx[None, :]))


def decrease_pixels(m: SaliencyMap, p: DecreaseParams) -> np.ndarray:
    """Pixel map attenuated by the Gaussian prior, before any rescaling."""
    w, h = m.image_dims
    return m.render() * gaussian_prior(w, h, p)


def decrease(m: SaliencyMap, sp: SuperpixelMap, p: DecreaseParams | None = None) -> SaliencyMap:
    """Attenuate away from the centre, average per region, rescale to [0, 1]."""
    if m.stage not in (Stage.FBM, Stage.FINAL):
        raise ValueError(f"cannot decrease a {m.stage.value} map")
    if p is None:
        p = DecreaseParams.for_image(sp.width, sp.height)
    pixels = decrease_pixels(m, p)
    sums = np.bincount(sp.labels.ravel(), weights=pixels.ravel(), minlength=sp.region_count)
    return SaliencyMap(normalize(sums / sp.region_pixel_counts), Stage.DEC, sp.labels)


def highlight(
    dec: SaliencyMap,
    descriptors: list[RegionDescriptor],
    p: HighlightParams = HighlightParams(),
    dp: DistanceParams = DistanceParams(),
    sigma2: float = 0.1,
) -> SaliencyMap:
    """Pull each region toward the affinity-weighted mean of its appearance cluster.

    Regions are clustered with k-means on ``(alpha1 * lab, alpha2 * hog)``.
    Inside a cluster, region ``i`` scores
    ``gamma1 * s_i + gamma2 * sum_j w_ij s_j / sum_j w_ij`` with
    ``w_ij = exp(-d_ij / sigma2)``, ``j`` ranging over the cluster including
    ``i``. Distances are scaled by their image-wide maximum, as for the graph.
    """
    if dec.stage is not Stage.DEC:
        raise ValueError(f"expected an {Stage.DEC.value} map, got {dec.stage.value}")
    s = dec.region_scores
    n = s.size
    if p.k_clusters > n:
        raise ClusterCountTooLarge(f"{p.k_clusters} clusters for {n} regions")
    if len(descriptors) != n:
        raise ValueError(f"{len(descriptors)} descriptors for {n} regions")

    lab, hog = stack_descriptors(descriptors)
    clusters, _ = kmeans(np.hstack([dp.alpha1 * lab, dp.alpha2 * hog]), p.k_clusters, seed=p.kmeans_seed)
    dist = distance_matrix(descriptors, dp)
    if dist.max() > 0:
        dist = dist / dist.max()
    weight = edge_weight(dist, sigma2) * (clusters[:, None] == clusters[None, :])
    shared = weight @ s / weight.sum(axis=1)
    return SaliencyMap(normalize(p.gamma1 * s + p.gamma2 * shared), Stage.FINAL, dec.labels)


def refine_stages(
    fbm: SaliencyMap,
    sp: SuperpixelMap,
    descriptors: list[RegionDescriptor],
    decrease_params: DecreaseParams | None = None,
    highlight_params: HighlightParams = HighlightParams(),
    distance_params: DistanceParams = DistanceParams(),
    sigma2: float = 0.1,
    max_iters: int = 3,
    tol: float = 1e-3,
) -> tuple[SaliencyMap, SaliencyMap | None, int]:
    """Run decrease + highlight rounds; return ``(final, last_decrease, rounds)``."""
    if fbm.stage is not Stage.FBM:
        raise ValueError(f"expected an {Stage.FBM.value} map, got {fbm.stage.value}")
    current = fbm.with_stage(Stage.FINAL)
    dec = None
    rounds = 0
    for _ in range(max_iters):
        dec = decrease(current, sp, decrease_params)
        nxt = highlight(dec, descriptors, highlight_params, distance_params, sigma2)
        rounds += 1
        change = np.abs(nxt.region_scores - current.region_scores).max()
        current = nxt
        if change < tol:
            break
    return current, dec, rounds


def refine_pipeline(fbm: SaliencyMap, sp: SuperpixelMap, descriptors: list[RegionDescriptor], **params) -> SaliencyMap:
    """Refined final map; see :func:`refine_stages` for the parameters."""
    return refine_stages(fbm, sp, descriptors, **params)[0]
