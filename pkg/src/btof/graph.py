"""Close-loop superpixel graph and its affinity matrix."""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import IndexMismatch
from .features import DistanceParams, RegionDescriptor, distance_matrix
from .pixelgrid import SuperpixelMap

SIDES = ("top", "bottom", "left", "right")


@dataclass(frozen=True)
class AffinityGraph:
    """Weighted superpixel graph.

    Attributes:
        weights: symmetric ``(n, n)`` matrix with zero diagonal.
        boundary_sides: for each node, the image borders its region touches.
        adjacency: for each node, the set of nodes it shares an edge with.
    """

    weights: np.ndarray
    boundary_sides: tuple[frozenset, ...]
    adjacency: tuple[frozenset, ...]

    @property
    def n(self) -> int:
        return self.weights.shape[0]

    @property
    def degrees(self) -> np.ndarray:
        return self.weights.sum(axis=1)

    def dump_triplets(self, path) -> None:
        """Write every non-zero upper-triangle weight as ``i j w`` lines."""
        iu, ju = np.nonzero(np.triu(self.weights, k=1))
        with Path(path).open("w") as fh:
            for i, j in zip(iu, ju):
                fh.write(f"{i} {j} {float(self.weights[i, j])!r}\n")


def edge_weight(dist, sigma2: float):
    return np.exp(-np.asarray(dist) / sigma2)


def region_adjacency(labels: np.ndarray, n: int) -> np.ndarray:
    """Boolean ``(n, n)`` matrix of regions sharing a 4-connected pixel border."""
    adj = np.zeros((n, n), dtype=bool)
    for a, b in ((labels[:, :-1], labels[:, 1:]), (labels[:-1, :], labels[1:, :])):
        diff = a != b
        adj[a[diff], b[diff]] = True
    return adj | adj.T


def touching_sides(labels: np.ndarray, n: int) -> tuple[frozenset, ...]:
    rows = {
        "top": labels[0, :],
        "bottom": labels[-1, :],
        "left": labels[:, 0],
        "right": labels[:, -1],
    }
    sides: list[set] = [set() for _ in range(n)]
    for side, border in rows.items():
        for node in np.unique(border):
            sides[node].add(side)
    return tuple(frozenset(s) for s in sides)


def build_graph(
    sp: SuperpixelMap,
    descriptors: list[RegionDescriptor],
    sigma2: float = 0.1,
    p: DistanceParams = DistanceParams(),
    normalize_distances: bool = True,
) -> AffinityGraph:
    """Connect spatial neighbours, 2-hop neighbours and all border regions.

    Edge weights are ``exp(-dist / sigma2)``. With ``normalize_distances``
    the feature distances are first divided by their maximum over the edge
    set, so ``sigma2`` acts on a [0, 1] scale independent of image contrast.
    """
    n = sp.region_count
    if len(descriptors) != n or any(d.region_index != i for i, d in enumerate(descriptors)):
        raise IndexMismatch(f"{len(descriptors)} descriptors for {n} regions")
    if sigma2 <= 0:
        raise ValueError("sigma2 must be positive")

    near = region_adjacency(sp.labels, n)
    hop2 = (near.astype(np.int64) @ near.astype(np.int64)) > 0
    sides = touching_sides(sp.labels, n)
    on_border = np.array([bool(s) for s in sides])
    edges = near | hop2 | np.outer(on_border, on_border)
    np.fill_diagonal(edges, False)

    dist = distance_matrix(descriptors, p)
    if normalize_distances and edges.any():
        scale = dist[edges].max()
        if scale > 0:
            dist = dist / scale
    weights = np.where(edges, edge_weight(dist, sigma2), 0.0)
    adjacency = tuple(frozenset(np.flatnonzero(row).tolist()) for row in edges)
    return AffinityGraph(weights, sides, adjacency)


def boundary_set(g: AffinityGraph, side: str) -> frozenset:
    """Nodes whose region touches the given image border."""
    if side not in SIDES:
        raise ValueError(f"unknown side {side!r}")
    return frozenset(i for i, s in enumerate(g.boundary_sides) if side in s)
