"""The active-learning driver: LH design, simulate, fit, adapt, repeat."""

from __future__ import annotations

import json
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..exceptions import ConfigError, TensorGPCError
from ..polybasis import BasisFamily, count_basis
from ..regression import Dataset, FitResult, SolverConfig, fit, pad_rank
from ..sampling import estimate_voronoi, latin_hypercube, select_batch, to_standard_normal
from ..surrogate import SurrogateModel, check_standardization
from .benchmarks import BENCHMARKS, builtin_benchmark
from .persistence import RoundRecord, emit_history, persist_model
from .simulator import ExternalSimulator

logger = logging.getLogger(__name__)

RUN_MODES = ("explore", "exploit", "random")
POOL_PER_POINT = 100


@dataclass
class RunConfig:
    """Settings of one active-learning run.

    ``lam=None`` uses ``1e-3 * N`` at every refit; ``pool_size=None`` draws
    ``100 * |design|`` candidates per round.  Exactly one of ``benchmark``
    and ``sim_cmd`` selects the simulator.
    """

    dim: int = 10
    order: int = 2
    rank_init: int = 4
    q: float = 0.5
    lam: float | None = None
    init_samples: int = 60
    batches: int = 6
    batch_size: int = 10
    pool_size: int | None = None
    mode: str = "exploit"
    seed: int = 0
    benchmark: str | None = "quad-exp"
    sim_cmd: str | None = None
    sim_timeout: float = 600.0
    test_size: int = 100_000
    test_file: str | None = None
    out: str | None = None
    mean: list | None = None
    std: list | None = None
    no_rank_penalty: bool = False
    n_init: int = 3
    max_sweeps: int = 200
    record_timing: bool = True

    def validate(self):
        for name in ("dim", "order", "rank_init", "init_samples", "batch_size", "test_size",
                     "n_init", "max_sweeps"):
            if int(getattr(self, name)) < (0 if name == "order" else 1):
                raise ConfigError(f"{name} must be >= 1")
        if self.batches < 0:
            raise ConfigError("batches must be >= 0")
        if self.pool_size is not None and self.pool_size < 1:
            raise ConfigError("pool_size must be >= 1")
        if not 0 < self.q <= 1:
            raise ConfigError("q must lie in (0, 1]")
        if self.lam is not None and self.lam < 0:
            raise ConfigError("lambda must be >= 0")
        if self.mode not in RUN_MODES:
            raise ConfigError(f"mode must be one of {RUN_MODES}")
        if (self.benchmark is None) == (self.sim_cmd is None):
            raise ConfigError("specify exactly one of benchmark and sim_cmd")
        if self.benchmark is not None and self.benchmark not in BENCHMARKS:
            raise ConfigError(f"unknown benchmark {self.benchmark!r}; choose from {', '.join(BENCHMARKS)}")
        try:
            check_standardization(self.dim, _broadcast(self.mean, self.dim), _broadcast(self.std, self.dim))
        except TensorGPCError as exc:
            raise ConfigError(f"bad mean/std: {exc}") from exc
        return self

    def solver_config(self, seed) -> SolverConfig:
        return SolverConfig(
            initial_rank=self.rank_init,
            q=self.q,
            lam=0.0 if self.no_rank_penalty else self.lam,
            max_sweeps=self.max_sweeps,
            seed=seed,
            n_init=self.n_init,
        )


def _broadcast(v, d):
    if v is None:
        return None
    v = np.atleast_1d(np.asarray(v, dtype=float))
    return np.full(d, v[0]) if v.size == 1 else v


@dataclass
class RunHistory:
    config: RunConfig
    records: list = field(default_factory=list)
    model: SurrogateModel | None = None
    fit_result: FitResult | None = None

    def __iter__(self):
        return iter(self.records)

    def __len__(self):
        return len(self.records)

    @property
    def final(self) -> RoundRecord:
        return self.records[-1]


def _seeds(seed: int, n_batches: int):
    root = np.random.SeedSequence(seed)
    lh, test, fit_seq, rounds = root.spawn(4)
    return lh, test, fit_seq, rounds.spawn(max(n_batches, 1))


def load_test_file(path, d):
    """CSV rows ``x_1, ..., x_d, y`` in raw parameter space."""
    data = np.loadtxt(path, delimiter=",", ndmin=2)
    if data.shape[1] != d + 1:
        raise ConfigError(f"test file {path} must have {d + 1} columns, found {data.shape[1]}")
    return data[:, :d], data[:, d]


def _top_up(picks, pool, K, rng):
    """Pad a short batch with distinct unused pool candidates."""
    if len(picks) >= K:
        return picks
    used = {tuple(p) for p in picks}
    spare = [c for c in pool[rng.permutation(len(pool))] if tuple(c) not in used]
    extra = np.array(spare[:K - len(picks)]).reshape(-1, pool.shape[1])
    return np.vstack([picks, extra])


def run_active_loop(cfg: RunConfig) -> RunHistory:
    """Execute the initial design plus ``cfg.batches`` adaptive rounds.

    After every round the surrogate is refitted (warm-started from the
    previous model) and one history row is recorded.  If ``cfg.out`` is set,
    the history CSV, the latest model and a summary are rewritten after
    every round, so a simulator failure leaves the partial run on disk.
    """
    cfg.validate()
    d = cfg.dim
    basis = BasisFamily("hermite", cfg.order)
    mean, std = check_standardization(d, _broadcast(cfg.mean, d), _broadcast(cfg.std, d))
    lh_seed, test_seed, fit_seq, round_seeds = _seeds(cfg.seed, cfg.batches)
    fit_seeds = [int(s.generate_state(1)[0]) for s in fit_seq.spawn(cfg.batches + 1)]

    if cfg.benchmark is not None:
        bench = builtin_benchmark(cfg.benchmark, d, cfg.seed, cfg.order)

        def simulate(xi):
            return np.asarray(bench(xi), dtype=float)

        rng_test = np.random.default_rng(test_seed)
        test_xi = rng_test.standard_normal((cfg.test_size, d))
        test_y = simulate(test_xi)
    else:
        sim = ExternalSimulator(cfg.sim_cmd, cfg.sim_timeout)

        def simulate(xi):
            return sim(mean + std * xi)

        test_xi = test_y = None
        if cfg.test_file is not None:
            raw, test_y = load_test_file(cfg.test_file, d)
            test_xi = (raw - mean) / std

    out = Path(cfg.out) if cfg.out else None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
    history = RunHistory(cfg)

    def record(rnd, xi, y, result, t0):
        model = SurrogateModel(result.model, basis, mean, std)
        train_err = model.relative_error(mean + std * xi, y) if np.any(y) else float("nan")
        test_err = float("nan")
        if test_xi is not None:
            test_err = model.relative_error(mean + std * test_xi, test_y)
        wall = (time.perf_counter() - t0) * 1e3 if cfg.record_timing else 0.0
        history.records.append(RoundRecord(rnd, len(y), train_err, test_err, result.estimated_rank,
                                           result.objective, wall))
        history.model, history.fit_result = model, result
        logger.info("round %d: N=%d rank=%d train=%.3e test=%.3e", rnd, len(y), result.estimated_rank,
                    train_err, test_err)
        if out is not None:
            _flush(history, out, test_xi)

    t0 = time.perf_counter()
    xi = to_standard_normal(latin_hypercube(cfg.init_samples, d, lh_seed))
    try:
        y = simulate(xi)
        result = fit(Dataset(xi, y), basis, cfg.solver_config(fit_seeds[0]))
        record(0, xi, y, result, t0)

        for b in range(1, cfg.batches + 1):
            t0 = time.perf_counter()
            rng = np.random.default_rng(round_seeds[b - 1])
            if cfg.mode == "random":
                new = rng.standard_normal((cfg.batch_size, d))
            else:
                M = cfg.pool_size or POOL_PER_POINT * len(xi)
                est = estimate_voronoi(xi, M, rng)
                new = select_batch(est, result.model, basis, cfg.batch_size, cfg.mode)
                new = _top_up(new, est.pool, cfg.batch_size, rng)
            y_new = simulate(new)
            xi = np.vstack([xi, new])
            y = np.concatenate([y, y_new])
            init = pad_rank(result.model, cfg.rank_init, random_state=fit_seeds[b])
            result = fit(Dataset(xi, y), basis, cfg.solver_config(fit_seeds[b]), init=init)
            record(b, xi, y, result, t0)
    except TensorGPCError:
        if out is not None and history.records:
            _flush(history, out, test_xi)
        raise
    return history


def summarize(history: RunHistory, test_xi=None) -> dict:
    """Final-model statistics: analytic and sampled moments, parameter counts."""
    model = history.model
    cfg = history.config
    mean, var = model.moments()
    full, total = count_basis(cfg.dim, cfg.order)
    summary = {
        "samples": history.final.samples,
        "rank": model.coeffs.rank,
        "n_parameters": model.coeffs.n_parameters,
        "full_basis_size": str(full),
        "total_degree_basis_size": total,
        "mean": mean,
        "std": float(np.sqrt(var)),
        "test_err": history.final.test_err,
    }
    if test_xi is not None and len(test_xi):
        preds = model.predict(model.mean + model.std * test_xi)
        summary["sampled_mean"] = float(np.mean(preds))
        summary["sampled_std"] = float(np.std(preds, ddof=1)) if len(preds) > 1 else 0.0
    return summary


def _flush(history: RunHistory, out: Path, test_xi):
    emit_history(history.records, out / "history.csv")
    persist_model(history.model, out / "model.json")
    with open(out / "summary.json", "w") as fh:
        json.dump(summarize(history, test_xi), fh, indent=1)
        fh.write("\n")
