"""Acceptance suite: each test checks one criterion at its stated tolerance and
prints a PASS/FAIL line (collected again in the terminal summary)."""

import math
import time

import numpy as np
import pytest

from tensorgpc.cptensor import CPTensor, inner_cp, inner_rank1, to_full
from tensorgpc.harness import RunConfig, run_active_loop
from tensorgpc.harness.benchmarks import planted_tensor
from tensorgpc.polybasis import BasisFamily, basis_vectors, count_basis, gram_matrix
from tensorgpc.regression import Dataset, SolverConfig, eta_update, fit, loss_h, penalty_g, penalty_ghat
from tensorgpc.sampling import (
    estimate_voronoi,
    latin_hypercube,
    select_batch,
    select_explore,
    to_standard_normal,
)
from tensorgpc.surrogate import SurrogateModel

from conftest import dense_gpc_value, outer_all, random_cp


def test_criterion_01_variational_identity(acceptance):
    rng = np.random.default_rng(1)
    t0 = time.perf_counter()
    worst = 0.0
    for i in range(100):
        d, R = int(rng.integers(1, 5)), int(rng.integers(1, 6))
        q = (0.3, 0.5, 1.0)[i % 3]
        X = random_cp(rng, d, 2, R)
        g = penalty_g(X, q)
        ghat = penalty_ghat(X, eta_update(np.sqrt(sum((U**2).sum(axis=0) for U in X.factors)), q, 1e-300), q)
        worst = max(worst, abs(ghat - g) / g)
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-10 and elapsed < 1.0
    acceptance.record(1, "g_hat(eta*) == g", ok, f"max rel err {worst:.2e}, {elapsed:.2f} s")
    assert ok


def test_criterion_02_orthonormality(acceptance):
    t0 = time.perf_counter()
    G = gram_matrix(BasisFamily("hermite", 8), n_nodes=20)
    err = float(np.max(np.abs(G - np.eye(9))))
    elapsed = time.perf_counter() - t0
    ok = err <= 1e-10 and elapsed < 1.0
    acceptance.record(2, "Hermite Gram matrix is identity", ok, f"max dev {err:.2e}")
    assert ok


def test_criterion_03_gradient(acceptance):
    rng = np.random.default_rng(3)
    t0 = time.perf_counter()
    h = 1e-5
    worst = 0.0
    for _ in range(100):
        d, p, R = int(rng.integers(1, 6)), int(rng.integers(1, 4)), int(rng.integers(1, 4))
        model = SurrogateModel(random_cp(rng, d, p, R), BasisFamily("hermite", p),
                               rng.standard_normal(d), rng.uniform(0.5, 2.0, d))
        x = model.mean + model.std * rng.standard_normal(d)
        fd = np.array([(model.predict(x + h * e) - model.predict(x - h * e)) / (2 * h) for e in np.eye(d)])
        g = model.gradient(x)
        worst = max(worst, float(np.linalg.norm(g - fd) / np.linalg.norm(g)))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-6 and elapsed < 5.0
    acceptance.record(3, "gradient vs central differences", ok, f"max rel err {worst:.2e}, {elapsed:.2f} s")
    assert ok


def test_criterion_04_monotone_descent(acceptance):
    rng = np.random.default_rng(4)
    worst = -np.inf
    for run in range(20):
        d, N = int(rng.integers(2, 7)), int(rng.integers(50, 401))
        basis = BasisFamily("hermite", 2)
        pts = rng.standard_normal((N, d))
        y = inner_rank1(random_cp(rng, d, 2, 2), basis_vectors(basis, pts)) + 0.1 * rng.standard_normal(N)
        res = fit(Dataset(pts, y), basis, SolverConfig(initial_rank=int(rng.integers(1, 6)), n_init=1,
                                                       max_sweeps=50, seed=run))
        f = np.asarray(res.step_objectives)
        worst = max(worst, float(np.max((f[1:] - f[:-1]) / (1 + np.abs(f[:-1])))))
    ok = worst <= 1e-9
    acceptance.record(4, "f_hat never increases", ok, f"max normalized increase {worst:.2e}")
    assert ok


def test_criterion_05_rank_recovery(acceptance):
    t0 = time.perf_counter()
    basis = BasisFamily("hermite", 2)
    outcomes = []
    for seed in range(10):
        X_star = planted_tensor(6, 2, seed, rank=2)
        pts = to_standard_normal(latin_hypercube(300, 6, seed))
        y = inner_rank1(X_star, basis_vectors(basis, pts))
        res = fit(Dataset(pts, y), basis, SolverConfig(initial_rank=5, q=0.5, seed=seed))
        test = np.random.default_rng(seed).standard_normal((10_000, 6))
        err = SurrogateModel(res.model, basis).relative_error(test, inner_rank1(X_star, basis_vectors(basis, test)))
        outcomes.append((res.estimated_rank, err))
    elapsed = time.perf_counter() - t0
    hits = sum(r == 2 and e <= 1e-2 for r, e in outcomes)
    ok = hits >= 8 and elapsed < 60.0
    detail = f"{hits}/10 seeds, ranks {[r for r, _ in outcomes]}, max err {max(e for _, e in outcomes):.1e}, " \
             f"{elapsed:.1f} s"
    acceptance.record(5, "planted rank-2 recovery", ok, detail)
    assert ok


def test_criterion_06_structural_counts(acceptance):
    total = count_basis(57, 2)[1]
    params = CPTensor.zeros(57, 3, 5).n_parameters
    ok = total == 1711 and params == 855
    acceptance.record(6, "basis and parameter counts", ok, f"{total} / {params}")
    assert ok


def test_criterion_07_moments(acceptance):
    rng = np.random.default_rng(7)
    t0 = time.perf_counter()
    worst_mean = worst_std = 0.0
    for _ in range(20):
        d, p, R = int(rng.integers(1, 4)), int(rng.integers(1, 3)), int(rng.integers(1, 4))
        model = SurrogateModel(random_cp(rng, d, p, R), BasisFamily("hermite", p))
        y = model.predict(rng.standard_normal((10**6, d)))
        mean, var = model.moments()
        # mean measured on the scale of the output (RMS), std relative to itself
        worst_mean = max(worst_mean, abs(y.mean() - mean) / math.sqrt(mean**2 + var))
        worst_std = max(worst_std, abs(y.std() - math.sqrt(var)) / math.sqrt(var))
    elapsed = time.perf_counter() - t0
    ok = worst_mean <= 0.02 and worst_std <= 0.02 and elapsed < 30.0
    acceptance.record(7, "analytic moments vs Monte Carlo", ok,
                      f"mean {worst_mean:.1e}, std {worst_std:.1e}, {elapsed:.1f} s")
    assert ok


def test_criterion_08_dense_oracle(acceptance):
    rng = np.random.default_rng(8)
    worst = 0.0

    def rel(a, b):
        return abs(a - b) / max(abs(b), 1e-300)

    for _ in range(50):
        d, p = int(rng.integers(1, 5)), int(rng.integers(0, 3))
        X, Y = random_cp(rng, d, p, int(rng.integers(1, 4))), random_cp(rng, d, p, int(rng.integers(1, 4)))
        FX, FY = to_full(X), to_full(Y)
        worst = max(worst, rel(inner_cp(X, Y), float(np.sum(FX * FY))))
        b = [rng.standard_normal(p + 1) for _ in range(d)]
        worst = max(worst, rel(inner_rank1(X, b), float(np.sum(FX * outer_all(b)))))
        pts, y = rng.standard_normal((20, d)), rng.standard_normal(20)
        dense = 0.5 * float(np.sum((y - dense_gpc_value(FX, pts, p)) ** 2))
        worst = max(worst, rel(loss_h(X, Dataset(pts, y), BasisFamily("hermite", p)), dense))
    ok = worst <= 1e-10
    acceptance.record(8, "CP kernels vs dense brute force", ok, f"max rel err {worst:.2e}")
    assert ok


def test_criterion_09_sampling(acceptance):
    rng = np.random.default_rng(9)
    nn_ok = True
    for _ in range(100):
        d = int(rng.integers(1, 6))
        centers = rng.standard_normal((int(rng.integers(1, 21)), d))
        pool = rng.standard_normal((int(rng.integers(1, 201)), d))
        est = estimate_voronoi(centers, pool=pool)
        D = ((pool[:, None, :] - centers[None, :, :]) ** 2).sum(axis=-1)
        nn_ok &= bool(np.array_equal(est.assignment, np.argmin(D, axis=1)))
        nn_ok &= int(est.cell_counts.sum()) == len(pool)
    lh_ok = True
    for n in (4, 16, 256):
        U = latin_hypercube(n, 3, seed=n)
        lh_ok &= all(np.array_equal(np.sort(np.floor(U[:, j] * n)), np.arange(n)) for j in range(3))
    est = estimate_voronoi([[0.0], [1.0]], pool=[0.1, 0.2, 0.9])
    hand_ok = np.array_equal(est.cell_counts, [2, 1])
    hand_ok &= float(select_explore(est)[0]) == 0.2
    hand_ok &= float(select_explore(estimate_voronoi([[0.0]], pool=[-2.0, 0.1]))[0]) == -2.0
    hand_ok &= sorted(select_batch(est, None, None, 2, "explore")[:, 0].tolist()) == [0.2, 0.9]
    ok = nn_ok and lh_ok and hand_ok
    acceptance.record(9, "Voronoi, LH stratification, hand examples", ok,
                      f"nn={nn_ok}, lh={lh_ok}, hand={hand_ok}")
    assert ok


@pytest.mark.slow
def test_criterion_10_exploit_vs_random(acceptance, tmp_path):
    t0 = time.perf_counter()
    base = dict(dim=10, order=2, rank_init=4, q=0.5, init_samples=60, batches=6, batch_size=10,
                benchmark="quad-exp", test_size=100_000, record_timing=False)
    errors = {"exploit": [], "random": []}
    for seed in range(10):
        for mode in errors:
            out = tmp_path / f"{mode}-{seed}"
            hist = run_active_loop(RunConfig(mode=mode, seed=seed, out=str(out), **base))
            errors[mode].append(hist.final.test_err)
    repeat = tmp_path / "repeat"
    run_active_loop(RunConfig(mode="exploit", seed=0, out=str(repeat), **base))
    identical = (repeat / "history.csv").read_bytes() == (tmp_path / "exploit-0" / "history.csv").read_bytes()
    elapsed = time.perf_counter() - t0
    med_exploit, med_random = float(np.median(errors["exploit"])), float(np.median(errors["random"]))
    ok = med_exploit <= med_random and identical and elapsed < 600.0
    acceptance.record(10, "exploit median <= random median, reproducible history", ok,
                      f"exploit {med_exploit:.4f} vs random {med_random:.4f}, byte-identical={identical}, "
                      f"{elapsed:.0f} s")
    print("exploit errors:", ", ".join(f"{e:.4f}" for e in errors["exploit"]))
    print("random errors: ", ", ".join(f"{e:.4f}" for e in errors["random"]))
    assert ok
