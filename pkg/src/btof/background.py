"""Background-template saliency: boundary-query ranking and template fusion."""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.optimize import nnls

from .errors import DimensionMismatch, EmptyBoundary, EmptyValidationSet
from .graph import AffinityGraph, boundary_set
from .ranking import RankingParams, query_vector, rank


class Stage(str, Enum):
    B1 = "S_b1"
    B2 = "S_b2"
    B3 = "S_b3"
    B4 = "S_b4"
    B5 = "S_b5"
    BBM = "S_BBM"
    FBM = "S_FBM"
    DEC = "S_dec"
    FINAL = "S_final"


@dataclass(frozen=True)
class SaliencyMap:
    """Region scores in [0, 1] together with the labelling they live on."""

    region_scores: np.ndarray
    stage: Stage
    labels: np.ndarray

    def __post_init__(self):
        scores = np.asarray(self.region_scores, dtype=np.float64)
        object.__setattr__(self, "region_scores", scores)
        if self.labels.size and self.labels.max() >= scores.size:
            raise DimensionMismatch(
                f"labels reference region {self.labels.max()} but only {scores.size} scores"
            )

    @property
    def image_dims(self) -> tuple[int, int]:
        return self.labels.shape[1], self.labels.shape[0]

    def render(self) -> np.ndarray:
        """Pixel map with each pixel carrying its region's score."""
        return self.region_scores[self.labels]

    def with_stage(self, stage: Stage) -> "SaliencyMap":
        return SaliencyMap(self.region_scores, stage, self.labels)


@dataclass(frozen=True)
class BackgroundTemplate:
    id: int
    sides: frozenset

    @property
    def stage(self) -> Stage:
        return Stage(f"S_b{self.id}")


TEMPLATES = (
    BackgroundTemplate(1, frozenset({"top", "bottom", "left", "right"})),
    BackgroundTemplate(2, frozenset({"top", "bottom", "left"})),
    BackgroundTemplate(3, frozenset({"top", "bottom", "right"})),
    BackgroundTemplate(4, frozenset({"top", "left", "right"})),
    BackgroundTemplate(5, frozenset({"bottom", "left", "right"})),
)


@dataclass(frozen=True)
class TemplateWeights:
    lam: tuple[float, ...] = (0.2, 0.2, 0.2, 0.2, 0.2)

    def __post_init__(self):
        lam = tuple(float(v) for v in self.lam)
        if len(lam) != len(TEMPLATES):
            raise ValueError(f"expected {len(TEMPLATES)} template weights, got {len(lam)}")
        if any(v < 0 for v in lam) or sum(lam) <= 0:
            raise ValueError("template weights must be non-negative with a positive sum")
        object.__setattr__(self, "lam", lam)

    def normalized(self) -> "TemplateWeights":
        total = sum(self.lam)
        return TemplateWeights(tuple(v / total for v in self.lam))


def side_complement(g: AffinityGraph, side: str, p: RankingParams = RankingParams()) -> np.ndarray:
    """``1 - normalize(rank)`` against the regions touching one border."""
    queries = boundary_set(g, side)
    if not queries:
        raise EmptyBoundary(f"no region touches the {side} border")
    return 1.0 - rank(g, query_vector(g.n, queries), p).normalized


def template_map(
    g: AffinityGraph,
    t: BackgroundTemplate,
    labels: np.ndarray,
    p: RankingParams = RankingParams(),
) -> SaliencyMap:
    """Product of per-side complements over the template's borders.

    Every factor lies in [0, 1], so the product does too and is returned as
    is; stretching it would break ``S(i) <= 1 - f_side(i)``.
    """
    if not t.sides:
        raise ValueError("template has no sides")
    scores = np.ones(g.n)
    for side in sorted(t.sides):
        scores *= side_complement(g, side, p)
    return SaliencyMap(scores, t.stage, labels)


def all_template_maps(g: AffinityGraph, labels: np.ndarray, p: RankingParams = RankingParams()) -> list[SaliencyMap]:
    # Each border is ranked once and shared by the templates using it.
    complements = {side: side_complement(g, side, p) for side in ("top", "bottom", "left", "right")}
    maps = []
    for t in TEMPLATES:
        scores = np.ones(g.n)
        for side in sorted(t.sides):
            scores = scores * complements[side]
        maps.append(SaliencyMap(scores, t.stage, labels))
    return maps


def aggregate(maps: list[SaliencyMap], w: TemplateWeights = TemplateWeights()) -> SaliencyMap:
    """Convex combination of the five template maps.

    Weights are renormalised to sum to one, so the result stays inside the
    elementwise hull of the inputs; it is only clamped, never stretched.
    """
    if len(maps) != len(w.lam):
        raise DimensionMismatch(f"{len(maps)} maps for {len(w.lam)} weights")
    sizes = {m.region_scores.shape for m in maps}
    if len(sizes) != 1:
        raise DimensionMismatch(f"inconsistent region counts {sizes}")
    lam = np.array(w.normalized().lam)
    mixed = np.tensordot(lam, np.stack([m.region_scores for m in maps]), axes=1)
    mixed = np.clip(mixed, 0.0, 1.0)
    return SaliencyMap(mixed, Stage.BBM, maps[0].labels)


def fit_weights(validation, ridge: float = 1e-10) -> TemplateWeights:
    """Non-negative least-squares template weights over a validation set.

    Args:
        validation: iterable of ``(maps, gt)`` pairs, where ``maps`` holds the
            five template maps of one image and ``gt`` is its binary mask.
        ridge: relative Tikhonov term. It only matters when the objective
            has a flat valley (e.g. identical template maps), where it picks
            the minimum-norm, i.e. uniform, solution.

    Returns:
        Weights rescaled to sum to one.
    """
    rows, target = [], []
    for maps, gt in validation:
        if len(maps) != len(TEMPLATES):
            raise DimensionMismatch(f"expected {len(TEMPLATES)} maps, got {len(maps)}")
        gt = np.asarray(gt, dtype=np.float64)
        rendered = [m.render() for m in maps]
        if any(r.shape != gt.shape for r in rendered):
            raise DimensionMismatch("template maps and ground truth differ in size")
        rows.append(np.column_stack([r.ravel() for r in rendered]))
        target.append(gt.ravel())
    if not rows:
        raise EmptyValidationSet("no validation pairs supplied")

    a = np.vstack(rows)
    b = np.concatenate(target)
    k = a.shape[1]
    gram_scale = np.trace(a.T @ a) / k
    eps = np.sqrt(ridge * max(gram_scale, 1e-300))
    lam, _ = nnls(np.vstack([a, eps * np.eye(k)]), np.concatenate([b, np.zeros(k)]))
    if lam.sum() <= 0:
        return TemplateWeights()
    return TemplateWeights(tuple(lam / lam.sum()))
