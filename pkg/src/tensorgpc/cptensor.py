"""CP (Kruskal) coefficient tensors.

A :class:`CPTensor` stores ``d`` factor matrices ``U^(k)`` of shape
``(p + 1, R)``; the represented tensor is ``sum_r u_r^(1) o ... o u_r^(d)``.
Everything here works on the factors directly.  :func:`to_full` is the one
exception and only exists as a brute-force oracle for small cases.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .exceptions import CapacityError, DomainError, ShapeError

MAX_DENSE_ENTRIES = 10**7


class CPTensor:
    """Immutable CP tensor.

    Parameters
    ----------
    factors : sequence of array_like
        ``d`` matrices, each with the same shape ``(n_rows, R)``.
    """

    __slots__ = ("_factors",)

    def __init__(self, factors: Sequence):
        if len(factors) == 0:
            raise ShapeError("a CPTensor needs at least one factor matrix")
        mats = []
        for U in factors:
            U = np.array(U, dtype=float, copy=True)
            if U.ndim == 1:
                U = U[:, None]
            if U.ndim != 2:
                raise ShapeError("factor matrices must be 2-D")
            mats.append(U)
        shape = mats[0].shape
        if shape[1] < 1:
            raise ShapeError("CP rank must be at least 1")
        if any(U.shape != shape for U in mats):
            raise ShapeError(f"all factor matrices must share shape {shape}")
        if not all(np.all(np.isfinite(U)) for U in mats):
            raise DomainError("factor matrices must be finite")
        for U in mats:
            U.setflags(write=False)
        self._factors = tuple(mats)

    @property
    def factors(self) -> tuple:
        return self._factors

    @property
    def dims(self) -> int:
        return len(self._factors)

    @property
    def rank(self) -> int:
        return self._factors[0].shape[1]

    @property
    def n_rows(self) -> int:
        """Rows per factor, ``p + 1``."""
        return self._factors[0].shape[0]

    @property
    def n_parameters(self) -> int:
        """Free parameters in the factor representation, ``d * (p + 1) * R``."""
        return self.dims * self.n_rows * self.rank

    def __repr__(self):
        return f"CPTensor(dims={self.dims}, n_rows={self.n_rows}, rank={self.rank})"

    def __add__(self, other: "CPTensor") -> "CPTensor":
        # Sum of CP tensors = column concatenation.
        _check_compatible(self, other)
        return CPTensor([np.hstack([U, W]) for U, W in zip(self._factors, other._factors)])

    def scaled(self, c: float) -> "CPTensor":
        """Every factor multiplied by ``c`` (the tensor scales by ``c**d``)."""
        return CPTensor([c * U for U in self._factors])

    def with_factor(self, k: int, U) -> "CPTensor":
        """Copy with factor ``k`` replaced."""
        factors = list(self._factors)
        factors[k] = U
        return CPTensor(factors)

    def select_columns(self, columns) -> "CPTensor":
        return CPTensor([U[:, columns] for U in self._factors])

    @classmethod
    def zeros(cls, dims: int, n_rows: int, rank: int = 1) -> "CPTensor":
        return cls([np.zeros((n_rows, rank)) for _ in range(dims)])

    @classmethod
    def constant(cls, dims: int, n_rows: int, value: float) -> "CPTensor":
        """Rank-1 tensor whose only non-zero entry is ``value`` at index ``(0, ..., 0)``."""
        factors = []
        for k in range(dims):
            U = np.zeros((n_rows, 1))
            U[0, 0] = value if k == 0 else 1.0
            factors.append(U)
        return cls(factors)

    @classmethod
    def random(cls, dims: int, n_rows: int, rank: int, random_state=None) -> "CPTensor":
        """Balanced random initialization.

        Entries are drawn uniformly from ``[-0.5, 0.5]``; every column is then
        normalized to unit length, and the product of the original column
        norms is folded back into the first factor.
        """
        rng = np.random.default_rng(random_state)
        factors = [rng.uniform(-0.5, 0.5, size=(n_rows, rank)) for _ in range(dims)]
        norms = np.array([np.linalg.norm(U, axis=0) for U in factors])
        norms[norms == 0] = 1.0
        magnitude = np.prod(norms, axis=0)
        factors = [U / n for U, n in zip(factors, norms)]
        factors[0] = factors[0] * magnitude
        return cls(factors)


def _check_compatible(X: CPTensor, Y: CPTensor):
    if X.dims != Y.dims or X.n_rows != Y.n_rows:
        raise ShapeError(
            f"incompatible CP tensors: dims {X.dims} vs {Y.dims}, rows {X.n_rows} vs {Y.n_rows}"
        )


def to_full(X: CPTensor) -> np.ndarray:
    """Dense array of shape ``(p + 1,) * d``; refuses more than 1e7 entries."""
    if X.n_rows**X.dims > MAX_DENSE_ENTRIES:
        raise CapacityError(f"dense tensor would have {X.n_rows}**{X.dims} entries")
    full = X.factors[0]
    for U in X.factors[1:]:
        full = full[..., None, :] * U
    return full.sum(axis=-1)


def factor_projections(X: CPTensor, b_vectors: Sequence) -> np.ndarray:
    """Per-dimension inner products ``u_r^(k) . b^(k)``.

    ``b_vectors`` holds ``d`` arrays of shape ``(p + 1,)`` or ``(N, p + 1)``.
    Returns an array of shape ``(d, R)`` or ``(d, N, R)``.
    """
    if len(b_vectors) != X.dims:
        raise ShapeError(f"expected {X.dims} basis vectors, got {len(b_vectors)}")
    out = []
    for U, b in zip(X.factors, b_vectors):
        b = np.asarray(b, dtype=float)
        if b.shape[-1] != X.n_rows:
            raise ShapeError(f"basis vector length {b.shape[-1]} != {X.n_rows}")
        out.append(b @ U)
    return np.stack(out)


def inner_rank1(X: CPTensor, b_vectors: Sequence):
    """``<X, b^(1) o ... o b^(d)>`` without forming either tensor.

    Accepts a batch: if each ``b^(k)`` has shape ``(N, p + 1)`` the result
    is a length-``N`` array.
    """
    P = factor_projections(X, b_vectors)
    value = np.prod(P, axis=0).sum(axis=-1)
    return float(value) if np.ndim(value) == 0 else value


def inner_cp(X: CPTensor, Y: CPTensor) -> float:
    """Frobenius inner product of two CP tensors via Gram-matrix products."""
    _check_compatible(X, Y)
    G = np.ones((X.rank, Y.rank))
    for U, W in zip(X.factors, Y.factors):
        G *= U.T @ W
    return float(G.sum())


def frobenius_norm(X: CPTensor) -> float:
    return float(np.sqrt(max(inner_cp(X, X), 0.0)))


def group_norms(X: CPTensor) -> np.ndarray:
    """Column-group norms ``z_r = sqrt(sum_k ||u_r^(k)||^2)``."""
    return np.sqrt(sum((U**2).sum(axis=0) for U in X.factors))


def truncate_rank(X: CPTensor, rel_threshold: float = 1e-3) -> CPTensor:
    """Drop every column group whose norm is below ``rel_threshold * max(z)``.

    The largest group always survives, so the result has rank >= 1.
    """
    if not 0 < rel_threshold < 1:
        raise DomainError("rel_threshold must lie in (0, 1)")
    z = group_norms(X)
    # z.max() itself always passes, so at least one group is kept.
    keep = np.flatnonzero(z >= rel_threshold * z.max())
    if keep.size == X.rank:
        return X
    return X.select_columns(keep)
