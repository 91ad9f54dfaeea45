"""Orthonormal univariate polynomial families.

Each input dimension of the surrogate carries the same family ``psi_0..psi_p``,
orthonormal under the input probability measure.  Two families are provided:

* ``"hermite"``: normalized probabilists' Hermite polynomials,
  ``psi_k = He_k / sqrt(k!)``, orthonormal under the standard normal density.
* ``"legendre"``: normalized Legendre polynomials, ``psi_k = sqrt(2k+1) P_k``,
  orthonormal under the uniform density on ``[-1, 1]``.

All evaluation goes through three-term recurrences, which stay stable for the
moderate degrees (``p`` up to about 10) used in practice.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.polynomial import hermite_e, legendre

from .exceptions import DomainError, NumericalError

FAMILIES = ("hermite", "legendre")


@dataclass(frozen=True)
class BasisFamily:
    """A univariate orthonormal family truncated at ``max_degree``.

    Parameters
    ----------
    kind : {"hermite", "legendre"}
        Distribution family of the (standardized) input.
    max_degree : int
        Highest polynomial degree ``p``; the family has ``p + 1`` members.
    """

    kind: str = "hermite"
    max_degree: int = 2

    def __post_init__(self):
        if self.kind not in FAMILIES:
            raise DomainError(f"unknown basis family {self.kind!r}; expected one of {FAMILIES}")
        if int(self.max_degree) != self.max_degree or self.max_degree < 0:
            raise DomainError(f"max_degree must be a non-negative integer, got {self.max_degree!r}")
        object.__setattr__(self, "max_degree", int(self.max_degree))

    @property
    def size(self) -> int:
        return self.max_degree + 1

    def vander(self, x) -> np.ndarray:
        """Evaluate all members at ``x``; output shape is ``x.shape + (p + 1,)``."""
        x = _finite(x)
        out = np.empty(x.shape + (self.size,))
        out[..., 0] = 1.0
        if self.max_degree == 0:
            return out
        if self.kind == "hermite":
            out[..., 1] = x
            for k in range(1, self.max_degree):
                out[..., k + 1] = (x * out[..., k] - math.sqrt(k) * out[..., k - 1]) / math.sqrt(k + 1)
        else:
            # Unnormalized P_k first, scaled at the end.
            out[..., 1] = x
            for k in range(1, self.max_degree):
                out[..., k + 1] = ((2 * k + 1) * x * out[..., k] - k * out[..., k - 1]) / (k + 1)
            out *= np.sqrt(2.0 * np.arange(self.size) + 1.0)
        return out

    def vander_deriv(self, x) -> np.ndarray:
        """Derivatives of all members at ``x``; same shape as :meth:`vander`."""
        x = _finite(x)
        out = np.zeros(x.shape + (self.size,))
        if self.max_degree == 0:
            return out
        if self.kind == "hermite":
            # psi_k' = sqrt(k) psi_{k-1}
            vals = self.vander(x)
            out[..., 1:] = vals[..., :-1] * np.sqrt(np.arange(1, self.size))
            return out
        p_vals = self.vander(x) / np.sqrt(2.0 * np.arange(self.size) + 1.0)
        out[..., 1] = 1.0
        for k in range(1, self.max_degree):
            # P'_{k+1} = P'_{k-1} + (2k+1) P_k
            out[..., k + 1] = out[..., k - 1] + (2 * k + 1) * p_vals[..., k]
        out *= np.sqrt(2.0 * np.arange(self.size) + 1.0)
        return out


@dataclass(frozen=True)
class MultiIndex:
    """Degree multi-index ``alpha`` of a tensor-product basis function."""

    entries: tuple

    def __post_init__(self):
        entries = tuple(int(a) for a in self.entries)
        if any(a < 0 for a in entries):
            raise DomainError("multi-index entries must be non-negative")
        object.__setattr__(self, "entries", entries)

    @property
    def degree(self) -> int:
        return sum(self.entries)

    def in_full_set(self, p: int) -> bool:
        """Whether every entry respects the per-dimension bound ``p``."""
        return all(a <= p for a in self.entries)

    def tensor_position(self) -> tuple:
        """Position of this index inside the coefficient tensor (0-based)."""
        return self.entries


def _finite(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise DomainError("basis evaluation requires finite inputs")
    return x


def _check_degree(family: BasisFamily, degree: int):
    if not 0 <= degree <= family.max_degree:
        raise DomainError(f"degree {degree} outside [0, {family.max_degree}]")


def eval_univariate(family: BasisFamily, degree: int, x: float) -> float:
    """Value of the orthonormal member ``psi_degree`` at ``x``."""
    _check_degree(family, degree)
    return float(family.vander(x)[..., degree])


def eval_univariate_deriv(family: BasisFamily, degree: int, x: float) -> float:
    """Derivative of ``psi_degree`` at ``x``."""
    _check_degree(family, degree)
    return float(family.vander_deriv(x)[..., degree])


def eval_basis_vector(family: BasisFamily, x: float) -> np.ndarray:
    """Vector ``[psi_0(x), ..., psi_p(x)]``, one rank-1 factor of the basis tensor."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 0:
        raise DomainError("eval_basis_vector expects a scalar input")
    return family.vander(x)


def count_basis(d: int, p: int) -> tuple[int, int]:
    """Number of gPC basis functions for ``d`` inputs at per-dimension order ``p``.

    Returns
    -------
    full_count : int
        Size of the full tensor-product set, ``(p + 1) ** d`` (exact integer).
    total_degree_count : int
        Size of the total-degree set ``|alpha| <= p``, ``C(d + p, p)``.
    """
    if d < 1 or p < 0:
        raise DomainError("count_basis requires d >= 1 and p >= 0")
    return (p + 1) ** d, math.comb(d + p, p)


def quadrature_rule(family: BasisFamily, n_nodes: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss rule for the family's probability measure (weights sum to one)."""
    if n_nodes < 1:
        raise DomainError("n_nodes must be >= 1")
    try:
        if family.kind == "hermite":
            nodes, weights = hermite_e.hermegauss(n_nodes)
        else:
            nodes, weights = legendre.leggauss(n_nodes)
    except np.linalg.LinAlgError as exc:  # pragma: no cover
        raise NumericalError(f"Gauss rule with {n_nodes} nodes failed") from exc
    weights = weights / weights.sum()
    if not (np.all(np.isfinite(nodes)) and np.all(np.isfinite(weights))):
        raise NumericalError(f"Gauss rule with {n_nodes} nodes is not finite")
    return nodes, weights


def gram_matrix(family: BasisFamily, n_nodes: int = 20) -> np.ndarray:
    """Quadrature estimate of ``<psi_j, psi_k>`` for all ``j, k <= p``."""
    nodes, weights = quadrature_rule(family, n_nodes)
    V = family.vander(nodes)
    return V.T @ (weights[:, None] * V)


def basis_vectors(family: BasisFamily, points: Sequence) -> list[np.ndarray]:
    """Per-dimension Vandermonde blocks for a batch of points.

    ``points`` has shape ``(N, d)``; the result is a list of ``d`` arrays of
    shape ``(N, p + 1)``, i.e. the rank-1 factors of every basis tensor.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    V = family.vander(pts)
    return [V[:, k, :] for k in range(pts.shape[1])]
