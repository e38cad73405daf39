"""Manifold ranking: relevance of every graph node to a set of query nodes."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sparse
from scipy.sparse.linalg import splu

from .errors import SingularSystem
from .graph import AffinityGraph


@dataclass(frozen=True)
class RankingParams:
    mu: float = 0.01

    def __post_init__(self):
        if self.mu <= 0:
            raise ValueError("mu must be positive")

    @property
    def alpha(self) -> float:
        return 1.0 / (1.0 + self.mu)


@dataclass(frozen=True)
class RankVector:
    f: np.ndarray

    @property
    def normalized(self) -> np.ndarray:
        return normalize(self.f)


def normalize(f) -> np.ndarray:
    """Affine rescale to [0, 1]; a constant vector maps to all zeros.

    Spreads within floating-point round-off of the magnitude count as
    constant, so solver noise is never stretched into a full-range map.
    """
    f = np.asarray(f, dtype=np.float64)
    if f.size == 0:
        return f.copy()
    lo, hi = f.min(), f.max()
    if hi - lo <= 1e-12 * max(abs(hi), abs(lo)):
        return np.zeros_like(f)
    return (f - lo) / (hi - lo)


def query_vector(n: int, nodes) -> np.ndarray:
    y = np.zeros(n)
    y[list(nodes)] = 1.0
    return y


def rank(g: AffinityGraph, y, p: RankingParams = RankingParams()) -> RankVector:
    """Solve ``(D - alpha W) f = y`` by sparse LU factorisation.

    Raises:
        SingularSystem: the factorisation fails or the residual exceeds
            ``1e-8 * max|y|``.
    """
    y = np.asarray(y, dtype=np.float64)
    if y.shape != (g.n,):
        raise ValueError(f"query vector of shape {y.shape} for a graph of {g.n} nodes")
    if not y.any():
        return RankVector(np.zeros(g.n))
    w = sparse.csc_matrix(g.weights)
    system = (sparse.diags(g.degrees) - p.alpha * w).tocsc()
    try:
        f = splu(system).solve(y)
    except RuntimeError as exc:
        raise SingularSystem(str(exc)) from exc
    residual = np.abs(system @ f - y).max()
    if not np.isfinite(residual) or residual > 1e-8 * np.abs(y).max():
        raise SingularSystem(f"residual {residual:.3e} after direct solve")
    return RankVector(f)
