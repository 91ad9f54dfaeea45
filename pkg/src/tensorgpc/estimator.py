"""scikit-learn compatible front end for the rank-adaptive tensor gPC regressor."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .polybasis import BasisFamily
from .regression import Dataset, SolverConfig, fit, pad_rank
from .surrogate import SurrogateModel, check_standardization


class TensorGPCRegressor(RegressorMixin, BaseEstimator):
    """Polynomial chaos regression with a rank-adaptive CP coefficient tensor.

    The full tensor-product gPC basis of order ``order`` in every input is
    used; its ``(order + 1) ** d`` coefficients are never formed explicitly.
    A group l_q/l_2 penalty on the CP columns switches off unneeded rank-1
    terms, so ``initial_rank`` only needs to be an upper bound.

    Parameters
    ----------
    order : int, default=2
        Highest univariate polynomial degree ``p``.
    family : {"hermite", "legendre"}, default="hermite"
        Orthonormal family matching the distribution of the standardized
        inputs (standard normal, or uniform on [-1, 1]).
    initial_rank : int, default=4
        Starting CP rank ``R``.
    q : float, default=0.5
        Exponent of the rank penalty, in (0, 1]; smaller shrinks harder.
    lam : float or None, default=None
        Penalty weight.  ``None`` means ``1e-3 * n_samples``.
    max_sweeps : int, default=200
    tol : float, default=1e-6
        Relative objective change per sweep that counts as converged.
    eta_floor : float, default=1e-8
    truncation_threshold : float, default=1e-3
        Column groups with norm below this fraction of the largest are
        deleted after fitting.
    n_init : int, default=3
        Number of starts; the lowest-objective one is kept.
    input_mean, input_std : array-like of shape (n_features,), optional
        Distribution parameters of the raw inputs.  Inputs are standardized
        as ``(X - input_mean) / input_std`` before the basis is applied.
    warm_start : bool, default=False
        Reuse the previous coefficients (padded back to ``initial_rank``)
        as one of the starts when ``fit`` is called again.
    random_state : int, default=0

    Attributes
    ----------
    coef_ : CPTensor
        Truncated coefficient tensor.
    rank_ : int
        Estimated CP rank.
    surrogate_ : SurrogateModel
    fit_result_ : FitResult
    n_features_in_ : int
    """

    def __init__(self, order=2, family="hermite", initial_rank=4, q=0.5, lam=None,
                 max_sweeps=200, tol=1e-6, eta_floor=1e-8, truncation_threshold=1e-3,
                 n_init=3, input_mean=None, input_std=None, warm_start=False,
                 random_state=0):
        self.order = order
        self.family = family
        self.initial_rank = initial_rank
        self.q = q
        self.lam = lam
        self.max_sweeps = max_sweeps
        self.tol = tol
        self.eta_floor = eta_floor
        self.truncation_threshold = truncation_threshold
        self.n_init = n_init
        self.input_mean = input_mean
        self.input_std = input_std
        self.warm_start = warm_start
        self.random_state = random_state

    def _solver_config(self) -> SolverConfig:
        return SolverConfig(
            initial_rank=self.initial_rank,
            q=self.q,
            lam=self.lam,
            max_sweeps=self.max_sweeps,
            objective_rel_tol=self.tol,
            eta_floor=self.eta_floor,
            truncation_rel_threshold=self.truncation_threshold,
            seed=self.random_state,
            n_init=self.n_init,
        )

    def fit(self, X, y):
        X, y = check_X_y(X, y, y_numeric=True)
        cfg = self._solver_config()
        basis = BasisFamily(self.family, self.order)
        mean, std = check_standardization(X.shape[1], self.input_mean, self.input_std)
        data = Dataset((X - mean) / std, y)

        init = None
        if self.warm_start and hasattr(self, "coef_") and self.coef_.dims == X.shape[1] \
                and self.coef_.n_rows == basis.size:
            init = pad_rank(self.coef_, self.initial_rank, random_state=self.random_state)

        result = fit(data, basis, cfg, init=init)
        self.fit_result_ = result
        self.coef_ = result.model
        self.rank_ = result.estimated_rank
        self.surrogate_ = SurrogateModel(result.model, basis, mean, std)
        self.n_features_in_ = X.shape[1]
        return self

    def _checked(self, X):
        check_is_fitted(self, "surrogate_")
        X = check_array(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"X has {X.shape[1]} features, but {type(self).__name__} was fitted with "
                f"{self.n_features_in_} features"
            )
        return X

    def predict(self, X):
        X = self._checked(X)
        return self.surrogate_.predict(X)

    def gradient(self, X):
        """Gradient of the surrogate at every row of ``X``."""
        X = self._checked(X)
        return self.surrogate_.gradient(X)

    def moments(self):
        """Analytic ``(mean, variance)`` of the surrogate under the input measure."""
        check_is_fitted(self, "surrogate_")
        return self.surrogate_.moments()

    @property
    def n_parameters_(self) -> int:
        """Free parameters of the fitted factors, ``d * (p + 1) * rank_``."""
        check_is_fitted(self, "coef_")
        return self.coef_.n_parameters

