"""Fitted gPC surrogate: evaluation, gradient, moments and error metrics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cptensor import CPTensor, factor_projections, inner_cp
from .exceptions import DomainError, ShapeError
from .polybasis import BasisFamily, basis_vectors


def check_standardization(d: int, mean=None, std=None) -> tuple[np.ndarray, np.ndarray]:
    """Validated per-dimension ``(mean, std)``; defaults are zeros and ones."""
    mean = np.zeros(d) if mean is None else np.array(mean, dtype=float).reshape(-1)
    std = np.ones(d) if std is None else np.array(std, dtype=float).reshape(-1)
    if mean.shape != (d,) or std.shape != (d,):
        raise ShapeError(f"standardization must have length {d}")
    if np.any(std <= 0) or not np.all(np.isfinite(mean)) or not np.all(np.isfinite(std)):
        raise DomainError("standardization needs finite means and positive stds")
    return mean, std


@dataclass(frozen=True)
class SurrogateModel:
    """A CP-format gPC expansion together with its input standardization.

    Raw inputs are mapped to the standardized space with
    ``xi = (x - mean) / std`` before the basis is evaluated.

    Parameters
    ----------
    coeffs : CPTensor
        Coefficient tensor; factors must have ``basis.max_degree + 1`` rows.
    basis : BasisFamily
    mean, std : array_like, optional
        Per-dimension location and scale of the raw inputs.  Default to
        zeros and ones.
    """

    coeffs: CPTensor
    basis: BasisFamily
    mean: np.ndarray | None = None
    std: np.ndarray | None = None

    def __post_init__(self):
        d = self.coeffs.dims
        if self.coeffs.n_rows != self.basis.size:
            raise ShapeError(
                f"coefficient factors have {self.coeffs.n_rows} rows, basis has {self.basis.size} members"
            )
        mean, std = check_standardization(d, self.mean, self.std)
        mean.setflags(write=False)
        std.setflags(write=False)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "std", std)

    @property
    def dims(self) -> int:
        return self.coeffs.dims

    def standardize(self, x_raw) -> np.ndarray:
        x = np.asarray(x_raw, dtype=float)
        if x.shape[-1] != self.dims:
            raise ShapeError(f"expected {self.dims} input dimensions, got {x.shape[-1]}")
        if not np.all(np.isfinite(x)):
            raise DomainError("surrogate inputs must be finite")
        return (x - self.mean) / self.std

    def _projections(self, xi: np.ndarray):
        xi2 = np.atleast_2d(xi)
        return factor_projections(self.coeffs, basis_vectors(self.basis, xi2)), xi2

    def predict(self, x_raw):
        """Surrogate value(s); a single point gives a float, ``(N, d)`` an array."""
        xi = self.standardize(x_raw)
        P, _ = self._projections(xi)
        out = np.prod(P, axis=0).sum(axis=-1)
        return float(out[0]) if xi.ndim == 1 else out

    def gradient(self, x_raw) -> np.ndarray:
        """Gradient with respect to the raw inputs, shape ``(d,)`` or ``(N, d)``."""
        xi = self.standardize(x_raw)
        P, xi2 = self._projections(xi)
        grad = np.empty(xi2.shape)
        for j, U in enumerate(self.coeffs.factors):
            dP = self.basis.vander_deriv(xi2[:, j]) @ U
            others = np.prod(np.delete(P, j, axis=0), axis=0) if self.dims > 1 else 1.0
            grad[:, j] = (dP * others).sum(axis=-1)
        grad /= self.std
        return grad[0] if xi.ndim == 1 else grad

    def moments(self) -> tuple[float, float]:
        """Analytic mean and variance under the input measure.

        Orthonormality makes the mean the ``(0, ..., 0)`` coefficient and the
        second moment the squared Frobenius norm of the coefficient tensor.
        """
        mean = float(np.prod(np.stack([U[0] for U in self.coeffs.factors]), axis=0).sum())
        var = inner_cp(self.coeffs, self.coeffs) - mean**2
        if var < 0:
            var = 0.0
        return mean, float(var)

    def relative_error(self, x_raw, y) -> float:
        """``||y_hat - y||_2 / ||y||_2`` over a test set."""
        y = np.asarray(y, dtype=float).reshape(-1)
        if y.size == 0:
            raise DomainError("empty test set")
        denom = np.linalg.norm(y)
        if denom == 0:
            raise DomainError("relative error undefined for an all-zero reference")
        y_hat = np.atleast_1d(self.predict(np.atleast_2d(x_raw)))
        return float(np.linalg.norm(y_hat - y) / denom)
