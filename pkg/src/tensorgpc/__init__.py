"""Rank-adaptive low-rank tensor regression for polynomial chaos surrogates."""

from .cptensor import CPTensor, group_norms, inner_cp, inner_rank1, to_full, truncate_rank
from .estimator import TensorGPCRegressor
from .polybasis import BasisFamily, MultiIndex, count_basis
from .regression import Dataset, FitResult, SolverConfig, fit
from .surrogate import SurrogateModel

__version__ = "0.1.0"

__all__ = [
    "BasisFamily",
    "CPTensor",
    "Dataset",
    "FitResult",
    "MultiIndex",
    "SolverConfig",
    "SurrogateModel",
    "TensorGPCRegressor",
    "count_basis",
    "fit",
    "group_norms",
    "inner_cp",
    "inner_rank1",
    "to_full",
    "truncate_rank",
]
