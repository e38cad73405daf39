"""Foreground seeding of the background-based map and re-ranking."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .background import SaliencyMap, Stage
from .errors import NoForegroundSeeds
from .graph import AffinityGraph
from .ranking import RankingParams, normalize, rank


@dataclass(frozen=True)
class ThresholdParams:
    """Mixing weights of the min, max and mean of a map."""

    a: float = 0.025
    b: float = 0.95
    c: float = 0.025

    def __post_init__(self):
        if min(self.a, self.b, self.c) < 0:
            raise ValueError("threshold weights must be non-negative")
        if self.a + self.b + self.c <= 0:
            raise ValueError("threshold weights must not all be zero")

    def normalized(self) -> "ThresholdParams":
        total = self.a + self.b + self.c
        return ThresholdParams(self.a / total, self.b / total, self.c / total)


def adaptive_threshold(m: SaliencyMap, p: ThresholdParams = ThresholdParams()) -> float:
    s = m.region_scores
    if s.size == 0:
        raise ValueError("map has no regions")
    lo, hi = float(s.min()), float(s.max())
    t = p.a * lo + p.b * hi + p.c * float(s.mean())
    # Round-off can push a convex mix just past its bounds.
    return min(max(t, lo), hi)


def foreground_seeds(bbm: SaliencyMap, p: ThresholdParams = ThresholdParams()) -> np.ndarray:
    seeds = bbm.region_scores >= adaptive_threshold(bbm, p)
    if not seeds.any():
        raise NoForegroundSeeds("no region reaches the adaptive threshold")
    return seeds


def foreground_map(
    g: AffinityGraph,
    bbm: SaliencyMap,
    p: ThresholdParams = ThresholdParams(),
    rp: RankingParams = RankingParams(),
) -> SaliencyMap:
    """Rank every region against the regions at or above the adaptive threshold."""
    if bbm.stage is not Stage.BBM:
        raise ValueError(f"expected an {Stage.BBM.value} map, got {bbm.stage.value}")
    y = foreground_seeds(bbm, p).astype(np.float64)
    return SaliencyMap(normalize(rank(g, y, rp).f), Stage.FBM, bbm.labels)
