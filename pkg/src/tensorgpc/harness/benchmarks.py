"""Built-in synthetic simulators.

All benchmarks are defined on standardized (standard-normal) inputs.
"""

from __future__ import annotations

import numpy as np

from ..cptensor import CPTensor, inner_rank1
from ..exceptions import ConfigError
from ..polybasis import BasisFamily, basis_vectors

BENCHMARKS = ("planted-cp", "quad-exp", "affine")
PLANTED_RANK = 2


def planted_tensor(d: int, order: int = 2, seed=0, rank: int = PLANTED_RANK) -> CPTensor:
    """Seeded CP tensor with standard-normal factor entries."""
    rng = np.random.default_rng(seed)
    return CPTensor([rng.standard_normal((order + 1, rank)) for _ in range(d)])


class PlantedCP:
    """``y(xi) = <X*, B(xi)>`` for a hidden low-rank coefficient tensor ``X*``."""

    def __init__(self, d, order=2, seed=0, rank=PLANTED_RANK):
        self.basis = BasisFamily("hermite", order)
        self.tensor = planted_tensor(d, order, seed, rank)

    def __call__(self, xi):
        xi = np.atleast_2d(xi)
        return np.asarray(inner_rank1(self.tensor, basis_vectors(self.basis, xi))).reshape(-1)


def quad_exp(xi):
    """``exp(-||xi||^2 / (2d)) + 0.1 * xi_1 * xi_2``; smooth but not polynomial."""
    xi = np.atleast_2d(xi)
    d = xi.shape[1]
    cross = 0.1 * xi[:, 0] * xi[:, 1] if d >= 2 else 0.0
    return np.exp(-np.sum(xi**2, axis=1) / (2 * d)) + cross


def affine(xi):
    """``1 + mean(xi)``."""
    xi = np.atleast_2d(xi)
    return 1.0 + xi.sum(axis=1) / xi.shape[1]


def builtin_benchmark(name: str, d: int, seed=0, order: int = 2):
    """Vectorized black-box function ``(N, d) -> (N,)`` for a named benchmark."""
    if d < 1:
        raise ConfigError("benchmark dimension must be >= 1")
    if name == "planted-cp":
        return PlantedCP(d, order, seed)
    if name == "quad-exp":
        return quad_exp
    if name == "affine":
        return affine
    raise ConfigError(f"unknown benchmark {name!r}; choose from {', '.join(BENCHMARKS)}")
