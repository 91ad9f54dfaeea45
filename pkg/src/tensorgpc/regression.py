"""Rank-adaptive CP tensor regression.

The coefficient tensor of a gPC expansion is fitted in CP form by minimizing

    f(X) = h(X) + lam * g(X),
    h(X) = 1/2 sum_n (y_n - <X, B(xi_n)>)^2,
    g(X) = ||z||_q,   z_r = sqrt(sum_k ||u_r^(k)||^2),   0 < q <= 1.

The group l_q/l_2 penalty ``g`` is replaced by its variational form

    g_hat(X, eta) = 1/2 sum_r z_r^2 / eta_r + 1/2 ||eta||_{q/(2-q)},

whose minimum over ``eta > 0`` equals ``g(X)``.  For fixed ``eta`` the
penalty is a weighted ridge on every factor matrix, so block coordinate
descent alternates a closed-form ``eta`` step with exact ridge solves for
``U^(1), ..., U^(d)``.  Both steps minimize ``f_hat`` exactly over their
block, so the objective never increases.  Column groups driven to zero are
deleted after convergence, which determines the rank.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.optimize import brentq

from .cptensor import CPTensor, group_norms, inner_rank1, truncate_rank
from .exceptions import ConfigError, DomainError, NumericalError, ShapeError
from .polybasis import BasisFamily, basis_vectors

logger = logging.getLogger(__name__)

DEFAULT_LAMBDA_PER_SAMPLE = 1e-3


@dataclass(frozen=True)
class Dataset:
    """Paired samples in standardized parameter space."""

    points: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        points = np.atleast_2d(np.asarray(self.points, dtype=float))
        values = np.asarray(self.values, dtype=float).ravel()
        if points.shape[0] != values.shape[0]:
            raise ShapeError(f"{points.shape[0]} points but {values.shape[0]} values")
        if values.shape[0] < 1:
            raise DomainError("a dataset needs at least one sample")
        if not (np.all(np.isfinite(points)) and np.all(np.isfinite(values))):
            raise DomainError("dataset entries must be finite")
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "values", values)

    @property
    def n_samples(self) -> int:
        return self.values.shape[0]

    @property
    def dims(self) -> int:
        return self.points.shape[1]


@dataclass(frozen=True)
class SolverConfig:
    """Hyper-parameters of :func:`fit`.

    ``lam=None`` resolves to ``1e-3 * N`` at fit time.
    """

    initial_rank: int = 4
    q: float = 0.5
    lam: float | None = None
    max_sweeps: int = 200
    objective_rel_tol: float = 1e-6
    eta_floor: float = 1e-8
    truncation_rel_threshold: float = 1e-3
    seed: int = 0
    n_init: int = 3

    def __post_init__(self):
        if self.initial_rank < 1:
            raise ConfigError("initial_rank must be >= 1")
        if not 0 < self.q <= 1:
            raise ConfigError("q must lie in (0, 1]")
        if self.lam is not None and self.lam < 0:
            raise ConfigError("lambda must be >= 0")
        if self.eta_floor <= 0:
            raise ConfigError("eta_floor must be > 0")
        if self.n_init < 1:
            raise ConfigError("n_init must be >= 1")
        if self.max_sweeps < 1:
            raise ConfigError("max_sweeps must be >= 1")
        if not 0 < self.truncation_rel_threshold < 1:
            raise ConfigError("truncation_rel_threshold must lie in (0, 1)")

    def resolve_lambda(self, n_samples: int) -> float:
        return DEFAULT_LAMBDA_PER_SAMPLE * n_samples if self.lam is None else float(self.lam)


@dataclass(frozen=True)
class FitResult:
    """Outcome of :func:`fit`.

    ``objective_history`` and ``rank_history`` hold one entry per sweep;
    ``step_objectives`` records ``f_hat`` after every individual block
    update (the eta step and each factor solve) and starts with the value
    at initialization.
    """

    model: CPTensor
    estimated_rank: int
    objective_history: list
    rank_history: list
    converged: bool
    n_sweeps: int
    lam: float
    eta: np.ndarray
    step_objectives: list

    @property
    def objective(self) -> float:
        return self.objective_history[-1]


def _check_q(q: float):
    if not 0 < q <= 1:
        raise DomainError(f"q must lie in (0, 1], got {q}")


def _quasi_norm(v: np.ndarray, s: float) -> float:
    """``(sum v_i^s)^(1/s)`` for non-negative ``v``."""
    total = float(np.sum(v**s))
    return total ** (1.0 / s) if total > 0 else 0.0


def _blocks(data: Dataset, basis: BasisFamily) -> list:
    return basis_vectors(basis, data.points)


def _predict_blocks(X: CPTensor, blocks: list) -> np.ndarray:
    return np.asarray(inner_rank1(X, blocks)).reshape(-1)


def loss_h(X: CPTensor, data: Dataset, basis: BasisFamily, blocks: list | None = None) -> float:
    """Least-squares loss ``1/2 sum_n (y_n - <X, B(xi_n)>)^2``."""
    if data.dims != X.dims:
        raise ShapeError(f"data has {data.dims} dimensions, model has {X.dims}")
    if basis.size != X.n_rows:
        raise ShapeError(f"basis has {basis.size} members, model factors have {X.n_rows} rows")
    if blocks is None:
        blocks = _blocks(data, basis)
    r = data.values - _predict_blocks(X, blocks)
    return 0.5 * float(r @ r)


def penalty_g(X: CPTensor, q: float) -> float:
    """Group l_q/l_2 penalty ``||z||_q``."""
    _check_q(q)
    return _quasi_norm(group_norms(X), q)


def eta_update(z, q: float, eta_floor: float = 1e-8) -> np.ndarray:
    """Closed-form minimizer of the variational penalty, floored at ``eta_floor``.

    ``eta_r = z_r^(2-q) * ||z||_q^(q-1)``.
    """
    _check_q(q)
    z = np.asarray(z, dtype=float)
    if np.any(z < 0):
        raise DomainError("group norms must be non-negative")
    norm = _quasi_norm(z, q)
    if norm == 0:
        return np.full(z.shape, float(eta_floor))
    return np.maximum(eta_floor, z ** (2 - q) * norm ** (q - 1))


def _ghat_from_z(z: np.ndarray, eta: np.ndarray, q: float) -> float:
    s = q / (2 - q)
    return 0.5 * float(np.sum(z**2 / eta)) + 0.5 * _quasi_norm(eta, s)


def penalty_ghat(X: CPTensor, eta, q: float) -> float:
    """Variational surrogate ``1/2 sum_r z_r^2/eta_r + 1/2 ||eta||_{q/(2-q)}``."""
    _check_q(q)
    eta = np.asarray(eta, dtype=float)
    if eta.shape != (X.rank,):
        raise ShapeError(f"eta must have length {X.rank}")
    if np.any(eta <= 0):
        raise DomainError("eta entries must be positive")
    return _ghat_from_z(group_norms(X), eta, q)


def objective_fhat(X: CPTensor, data: Dataset, basis: BasisFamily, cfg: SolverConfig, eta,
                   blocks: list | None = None) -> float:
    """``h(X) + lam * g_hat(X, eta)``."""
    lam = cfg.resolve_lambda(data.n_samples)
    return loss_h(X, data, basis, blocks) + lam * penalty_ghat(X, eta, cfg.q)


def _eta_exact(z: np.ndarray, q: float, eta_floor: float) -> np.ndarray:
    """Minimizer of ``g_hat`` over ``eta >= eta_floor`` for fixed ``z``.

    Without the floor this is :func:`eta_update`.  Clamped entries add a
    constant ``c = |clamped| * floor^s`` inside the eta quasi-norm; the free
    entries then satisfy ``eta_r = z_r^(2-q) * S^((q-1)/s)`` where
    ``S = sum_free eta_r^s + c`` solves ``S = Z * S^(q-1) + c`` with
    ``Z = sum_free z_r^q`` (``s = q/(2-q)``).
    """
    s = q / (2 - q)
    eta = eta_update(z, q, eta_floor)
    clamped = eta <= eta_floor
    for _ in range(z.size + 1):
        free = ~clamped
        if not free.any():
            return np.full(z.shape, float(eta_floor))
        c = clamped.sum() * eta_floor**s
        Z = float(np.sum(z[free] ** q))
        if Z == 0:
            return np.full(z.shape, float(eta_floor))
        S0 = Z ** (1.0 / (2 - q))
        if c > 0 and q < 1:
            S = brentq(lambda S: S - Z * S ** (q - 1) - c, S0, S0 + c, xtol=1e-300, rtol=4 * np.finfo(float).eps)
        else:
            S = S0 + c
        cand = np.full(z.shape, float(eta_floor))
        cand[free] = z[free] ** (2 - q) * S ** ((q - 1) / s)
        new_clamped = cand <= eta_floor
        if np.array_equal(new_clamped, clamped):
            return np.maximum(cand, eta_floor)
        clamped = new_clamped
    return np.maximum(cand, eta_floor)


def solve_factor(k: int, X: CPTensor, data: Dataset, basis: BasisFamily, lam: float, eta,
                 blocks: list | None = None) -> CPTensor:
    """Exact minimizer of ``f_hat`` over factor ``k`` with everything else fixed.

    Predictions are linear in ``U^(k)``: ``y_n = sum_r w_nr (b_n . u_r)`` with
    ``w_nr = prod_{j != k} (u_r^(j) . b_n^(j))``.  The penalty contributes
    ``lam/2 * sum_r ||u_r||^2 / eta_r``, giving the ridge normal equations
    ``(A^T A + lam D) vec(U) = A^T y``.

    Raises
    ------
    NumericalError
        If the normal matrix is not positive definite (possible only when
        ``lam == 0``).
    """
    eta = np.asarray(eta, dtype=float)
    if np.any(eta <= 0):
        raise DomainError("eta entries must be positive")
    if blocks is None:
        blocks = _blocks(data, basis)
    P = np.stack([B @ U for B, U in zip(blocks, X.factors)])
    return X.with_factor(k, _factor_update(k, P, blocks, data.values, lam, eta))


def _factor_update(k: int, P: np.ndarray, blocks: list, y: np.ndarray, lam: float,
                   eta: np.ndarray) -> np.ndarray:
    B = blocks[k]
    N, n_rows = B.shape
    R = P.shape[2]
    W = np.prod(np.delete(P, k, axis=0), axis=0) if P.shape[0] > 1 else np.ones((N, R))
    # Column index r * n_rows + i  <->  U[i, r]
    A = (W[:, :, None] * B[:, None, :]).reshape(N, R * n_rows)
    G = A.T @ A
    if lam > 0:
        G[np.diag_indices_from(G)] += lam * np.repeat(1.0 / eta, n_rows)
    try:
        cho = scipy.linalg.cho_factor(G, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(
            f"normal equations for factor {k} are singular (lambda={lam})"
        ) from exc
    sol = scipy.linalg.cho_solve(cho, A.T @ y, check_finite=False)
    return sol.reshape(R, n_rows).T


def pad_rank(X: CPTensor, rank: int, scale: float = 1e-2, random_state=None) -> CPTensor:
    """Append small random columns until ``X`` has ``rank`` columns.

    Each new rank-1 term has magnitude about ``scale`` times a typical
    existing term: every factor column gets ``scale ** (1/d)`` times the
    mean column norm of that factor.  Shrinking each factor by ``scale``
    instead would make the new terms vanish as ``scale ** d``, and the
    rank penalty would never let them regrow.
    """
    if X.rank >= rank:
        return X
    rng = np.random.default_rng(random_state)
    extra = rank - X.rank
    per_factor = scale ** (1.0 / X.dims)
    factors = []
    for U in X.factors:
        ref = float(np.mean(np.linalg.norm(U, axis=0))) or 1.0
        V = rng.uniform(-0.5, 0.5, size=(U.shape[0], extra))
        V *= per_factor * ref / np.maximum(np.linalg.norm(V, axis=0), 1e-300)
        factors.append(np.hstack([U, V]))
    return CPTensor(factors)


def _count_live(z: np.ndarray, rel_threshold: float) -> int:
    return int(np.sum(z >= rel_threshold * z.max()))


def fit(data: Dataset, basis: BasisFamily, cfg: SolverConfig, init: CPTensor | None = None) -> FitResult:
    """Block coordinate descent on ``f_hat`` followed by rank truncation.

    One sweep is an eta step followed by exact solves for factors
    ``1..d`` in order.  Iteration stops when the relative change of
    ``f_hat`` over a sweep drops below ``cfg.objective_rel_tol`` or after
    ``cfg.max_sweeps`` sweeps.  The problem is non-convex, so ``cfg.n_init``
    starts are run and the one with the lowest final ``f_hat`` is kept.

    Parameters
    ----------
    init : CPTensor, optional
        Warm start; counts as the first of the ``n_init`` starts.  The
        remaining starts are balanced random tensors of rank
        ``cfg.initial_rank`` seeded from ``cfg.seed``.
    """
    if not isinstance(data, Dataset):
        raise DomainError("fit expects a Dataset")
    if init is not None and (init.dims != data.dims or init.n_rows != basis.size):
        raise ShapeError("initial tensor does not match data dimensions / basis size")
    starts = [] if init is None else [init]
    seeds = np.random.SeedSequence(cfg.seed).spawn(cfg.n_init)
    for child in seeds[len(starts):]:
        starts.append(CPTensor.random(data.dims, basis.size, cfg.initial_rank, child))
    blocks = _blocks(data, basis)
    best = None
    for X in starts:
        result = _fit_from(X, data, blocks, cfg)
        if best is None or result.objective < best.objective:
            best = result
    return best


def _fit_from(X: CPTensor, data: Dataset, blocks: list, cfg: SolverConfig) -> FitResult:
    lam = cfg.resolve_lambda(data.n_samples)
    q = cfg.q
    y = data.values
    P = np.stack([B @ U for B, U in zip(blocks, X.factors)])
    factors = list(X.factors)

    def fhat(eta):
        r = y - np.prod(P, axis=0).sum(axis=1)
        z = np.sqrt(sum((U**2).sum(axis=0) for U in factors))
        return 0.5 * float(r @ r) + lam * _ghat_from_z(z, eta, q)

    z = group_norms(X)
    eta = _eta_exact(z, q, cfg.eta_floor)
    f_prev = fhat(eta)
    steps = [f_prev]
    objective_history, rank_history = [], []
    converged = False
    sweep = 0
    for sweep in range(1, cfg.max_sweeps + 1):
        z = np.sqrt(sum((U**2).sum(axis=0) for U in factors))
        candidate = _eta_exact(z, q, cfg.eta_floor)
        f_cand = fhat(candidate)
        if f_cand <= steps[-1]:
            eta = candidate
            steps.append(f_cand)
        else:
            # Floor clamping can leave the closed form marginally worse.
            steps.append(steps[-1])
        for k in range(data.dims):
            factors[k] = _factor_update(k, P, blocks, y, lam, eta)
            P[k] = blocks[k] @ factors[k]
            steps.append(fhat(eta))
        f_cur = steps[-1]
        z = np.sqrt(sum((U**2).sum(axis=0) for U in factors))
        objective_history.append(f_cur)
        rank_history.append(_count_live(z, cfg.truncation_rel_threshold))
        rel = abs(f_prev - f_cur) / max(abs(f_prev), np.finfo(float).tiny)
        f_prev = f_cur
        if rel < cfg.objective_rel_tol:
            converged = True
            break

    model = truncate_rank(CPTensor(factors), cfg.truncation_rel_threshold)
    logger.debug("fit: %d sweeps, converged=%s, rank %d -> %d", sweep, converged,
                 len(factors[0].T), model.rank)
    return FitResult(
        model=model,
        estimated_rank=model.rank,
        objective_history=objective_history,
        rank_history=rank_history,
        converged=converged,
        n_sweeps=sweep,
        lam=lam,
        eta=eta,
        step_objectives=steps,
    )

