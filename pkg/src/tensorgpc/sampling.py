"""Experimental design for the active-learning loop.

The initial design is a Latin hypercube mapped to standard-normal space.
Later samples come from a Monte-Carlo estimate of the Voronoi diagram of
the current design: a candidate pool drawn from the input measure is
assigned to its nearest design point, and a cell's candidate count
measures its volume.  The cell with the most candidates is the least
densely sampled region; a new point is taken from there, either the
candidate farthest from the cell center (exploration) or the one where the
surrogate deviates most from its linearization at the center
(exploitation).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri
from scipy.stats import qmc

from .cptensor import CPTensor
from .exceptions import DomainError, ShapeError
from .polybasis import BasisFamily
from .surrogate import SurrogateModel

MODES = ("explore", "exploit")
_CLAMP = 1e-12
# Pairwise-difference buffer size per chunk (floats).
_CHUNK_FLOATS = 2**22


def latin_hypercube(n: int, d: int, seed=None) -> np.ndarray:
    """``n`` points in ``[0, 1)^d``, one per stratum ``[i/n, (i+1)/n)`` in every dimension."""
    if n < 1 or d < 1:
        raise DomainError("latin_hypercube requires n >= 1 and d >= 1")
    return qmc.LatinHypercube(d=d, rng=np.random.default_rng(seed)).random(n)


def to_standard_normal(unit_points) -> np.ndarray:
    """Inverse standard-normal CDF, elementwise, with inputs clamped to ``[1e-12, 1 - 1e-12]``."""
    u = np.clip(np.asarray(unit_points, dtype=float), _CLAMP, 1.0 - _CLAMP)
    return ndtri(u)


def nearest_center(points: np.ndarray, centers: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Index of (and distance to) the nearest center for each point.

    Ties go to the lowest center index.
    """
    points = np.atleast_2d(points)
    centers = np.atleast_2d(centers)
    M, d = points.shape
    idx = np.empty(M, dtype=np.intp)
    dist2 = np.empty(M)
    step = max(1, _CHUNK_FLOATS // max(1, centers.shape[0] * d))
    for start in range(0, M, step):
        chunk = points[start:start + step]
        D = ((chunk[:, None, :] - centers[None, :, :]) ** 2).sum(axis=-1)
        j = np.argmin(D, axis=1)
        idx[start:start + step] = j
        dist2[start:start + step] = D[np.arange(len(chunk)), j]
    return idx, np.sqrt(dist2)


@dataclass(frozen=True)
class VoronoiEstimate:
    """Monte-Carlo approximation of the Voronoi diagram of a design.

    Attributes
    ----------
    centers : ndarray of shape (n_centers, d)
    pool : ndarray of shape (M, d)
    assignment : ndarray of shape (M,)
        Nearest center of every candidate (lowest index on ties).
    cell_counts : ndarray of shape (n_centers,)
    distances : ndarray of shape (M,)
        Euclidean distance of every candidate to its cell center.
    """

    centers: np.ndarray
    pool: np.ndarray
    assignment: np.ndarray
    cell_counts: np.ndarray
    distances: np.ndarray

    def ranked_cells(self) -> np.ndarray:
        """Non-empty cells by descending candidate count, lowest index first on ties."""
        order = np.argsort(-self.cell_counts, kind="stable")
        return order[self.cell_counts[order] > 0]

    def members(self, cell: int) -> np.ndarray:
        return np.flatnonzero(self.assignment == cell)


def estimate_voronoi(design, M: int | None = None, seed=None, pool=None) -> VoronoiEstimate:
    """Assign a candidate pool to the nearest design point.

    Parameters
    ----------
    design : array_like of shape (n, d)
        Current design points (cell centers), standardized space.
    M : int
        Pool size; candidates are drawn i.i.d. standard normal.
    seed : int or Generator, optional
    pool : array_like of shape (M, d), optional
        Use these candidates instead of drawing a fresh pool.
    """
    centers = np.atleast_2d(np.asarray(design, dtype=float))
    if centers.shape[0] < 1:
        raise DomainError("design must contain at least one point")
    if pool is None:
        if M is None or M < 1:
            raise DomainError("pool size M must be >= 1")
        pool = np.random.default_rng(seed).standard_normal((M, centers.shape[1]))
    else:
        pool = np.asarray(pool, dtype=float)
        if pool.ndim == 1:
            pool = pool[:, None]
        if pool.shape[1] != centers.shape[1] or pool.shape[0] < 1:
            raise ShapeError("pool must be a non-empty (M, d) array matching the design")
    assignment, distances = nearest_center(pool, centers)
    counts = np.bincount(assignment, minlength=centers.shape[0])
    return VoronoiEstimate(centers, pool, assignment, counts, distances)


def _as_surrogate(model, basis: BasisFamily) -> SurrogateModel:
    if isinstance(model, SurrogateModel):
        return model
    if not isinstance(model, CPTensor):
        raise DomainError("model must be a CPTensor or SurrogateModel")
    return SurrogateModel(model, basis)


def nonlinearity_gamma(model, basis: BasisFamily, xi, a):
    """Absolute first-order Taylor residual of the surrogate at ``xi`` around ``a``.

    ``xi`` may be a single point or an ``(N, d)`` batch; all inputs live in
    standardized space.
    """
    sur = _as_surrogate(model, basis)
    xi = np.asarray(xi, dtype=float)
    a = np.asarray(a, dtype=float)
    lin = sur.predict(a) + (xi - a) @ sur.gradient(a)
    return np.abs(sur.predict(xi) - lin)


def _pick_explore(est: VoronoiEstimate, cell: int) -> int:
    idx = est.members(cell)
    return int(idx[np.argmax(est.distances[idx])])


def _pick_exploit(est: VoronoiEstimate, cell: int, sur: SurrogateModel) -> int:
    idx = est.members(cell)
    gamma = nonlinearity_gamma(sur, sur.basis, est.pool[idx], est.centers[cell])
    return int(idx[np.argmax(gamma)])


def select_explore(est: VoronoiEstimate) -> np.ndarray:
    """Candidate farthest from its center inside the most populated cell."""
    return select_batch(est, None, None, 1, "explore")[0]


def select_exploit(est: VoronoiEstimate, model, basis: BasisFamily) -> np.ndarray:
    """Candidate with the largest nonlinearity score inside the most populated cell."""
    return select_batch(est, model, basis, 1, "exploit")[0]


def select_batch(est: VoronoiEstimate, model, basis: BasisFamily | None, K: int,
                 mode: str = "explore") -> np.ndarray:
    """One candidate from each of the ``K`` most populated cells.

    Returns an array of shape ``(k, d)`` with ``k = min(K, non-empty cells)``.
    """
    if K < 1:
        raise DomainError("batch size K must be >= 1")
    if mode not in MODES:
        raise DomainError(f"mode must be one of {MODES}, got {mode!r}")
    cells = est.ranked_cells()[:K]
    if mode == "explore":
        picks = [_pick_explore(est, c) for c in cells]
    else:
        if model is None:
            raise DomainError("exploit mode needs a fitted model")
        sur = _as_surrogate(model, basis)
        picks = [_pick_exploit(est, c, sur) for c in cells]
    return est.pool[picks].copy()
