import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tensorgpc.exceptions import DomainError
from tensorgpc.polybasis import (
    BasisFamily,
    MultiIndex,
    count_basis,
    eval_basis_vector,
    eval_univariate,
    eval_univariate_deriv,
    gram_matrix,
    quadrature_rule,
)

from conftest import hermite_oracle


@pytest.mark.parametrize(
    "degree, x, expected",
    [
        (0, 3.7, 1.0),
        (1, 1.5, 1.5),
        (2, 2.0, 2.1213203435596424),  # (4 - 1) / sqrt(2)
    ],
)
def test_eval_univariate_examples(degree, x, expected):
    assert eval_univariate(BasisFamily("hermite", 2), degree, x) == pytest.approx(expected, rel=1e-14)


def test_eval_univariate_matches_series_oracle(rng):
    fam = BasisFamily("hermite", 10)
    x = rng.uniform(-4, 4, size=50)
    V = fam.vander(x)
    for k in range(11):
        np.testing.assert_allclose(V[:, k], hermite_oracle(k, x), rtol=1e-12, atol=1e-12)


@pytest.mark.parametrize("degree", [-1, 3])
def test_degree_out_of_range(degree):
    fam = BasisFamily("hermite", 2)
    with pytest.raises(DomainError):
        eval_univariate(fam, degree, 0.0)
    with pytest.raises(DomainError):
        eval_univariate_deriv(fam, degree, 0.0)


def test_derivative_examples():
    fam = BasisFamily("hermite", 2)
    assert eval_univariate_deriv(fam, 0, -1.3) == 0.0
    assert eval_univariate_deriv(fam, 1, 9.9) == 1.0
    # central difference of eval_univariate at h = 1e-6 gives 2.82842712496
    assert eval_univariate_deriv(fam, 2, 2.0) == pytest.approx(2.8284271249567894, abs=1e-6)
    assert eval_univariate_deriv(fam, 2, 2.0) == pytest.approx(math.sqrt(2) * 2.0, rel=1e-14)


@pytest.mark.parametrize("kind", ["hermite", "legendre"])
def test_derivative_matches_finite_differences(kind, rng):
    fam = BasisFamily(kind, 8)
    lo, hi = (-3, 3) if kind == "hermite" else (-1, 1)
    x = rng.uniform(lo, hi, size=100)
    h = 1e-6
    fd = (fam.vander(x + h) - fam.vander(x - h)) / (2 * h)
    analytic = fam.vander_deriv(x)
    scale = np.maximum(1.0, np.abs(fam.vander(x)))
    assert np.all(np.abs(analytic - fd) <= 1e-6 * scale)


def test_basis_vector_examples():
    np.testing.assert_allclose(eval_basis_vector(BasisFamily("hermite", 2), 0.0), [1, 0, -1 / math.sqrt(2)],
                               atol=1e-15)
    np.testing.assert_array_equal(eval_basis_vector(BasisFamily("hermite", 0), 4.2), [1.0])
    np.testing.assert_allclose(eval_basis_vector(BasisFamily("hermite", 2), 1.0), [1, 1, 0], atol=1e-15)


@pytest.mark.parametrize("bad", [np.nan, np.inf, -np.inf])
def test_basis_vector_rejects_non_finite(bad):
    with pytest.raises(DomainError):
        eval_basis_vector(BasisFamily("hermite", 2), bad)


@given(st.floats(-50, 50), st.integers(0, 8))
def test_first_entry_is_one(x, p):
    assert eval_basis_vector(BasisFamily("hermite", p), x)[0] == 1.0


def test_count_basis_examples():
    assert count_basis(57, 2)[1] == 1711
    assert count_basis(19, 2)[0] == 1162261467
    for p in range(6):
        assert count_basis(1, p) == (p + 1, p + 1)


def test_count_basis_large_dimension_is_exact():
    full, _ = count_basis(57, 2)
    assert full == 3**57
    assert isinstance(full, int)


@given(st.integers(1, 500))
def test_count_basis_linear_total_degree(d):
    assert count_basis(d, 1)[1] == d + 1


def test_count_basis_rejects_bad_input():
    with pytest.raises(DomainError):
        count_basis(0, 2)
    with pytest.raises(DomainError):
        count_basis(3, -1)


def test_quadrature_examples():
    fam = BasisFamily("hermite", 2)
    nodes, weights = quadrature_rule(fam, 1)
    np.testing.assert_allclose(nodes, [0.0], atol=1e-15)
    np.testing.assert_allclose(weights, [1.0])
    # Jacobi matrix of He_k for n=2 is [[0, 1], [1, 0]]: eigenvalues -1, 1
    nodes, weights = quadrature_rule(fam, 2)
    np.testing.assert_allclose(nodes, [-1.0, 1.0], atol=1e-14)
    np.testing.assert_allclose(weights, [0.5, 0.5], atol=1e-14)


@pytest.mark.parametrize("n", [1, 3, 7, 20, 40])
@pytest.mark.parametrize("kind", ["hermite", "legendre"])
def test_quadrature_weights_sum_to_one(kind, n):
    _, w = quadrature_rule(BasisFamily(kind, 2), n)
    assert w.sum() == pytest.approx(1.0, abs=1e-13)


def test_quadrature_exactness():
    # E[x^(2m)] = (2m-1)!! under N(0,1); exact for 2m <= 2n - 1
    nodes, w = quadrature_rule(BasisFamily("hermite", 2), 6)
    for m in range(6):
        double_fact = math.prod(range(2 * m - 1, 0, -2)) if m else 1
        assert np.sum(w * nodes ** (2 * m)) == pytest.approx(double_fact, rel=1e-12)


@pytest.mark.parametrize("kind", ["hermite", "legendre"])
def test_orthonormality(kind):
    G = gram_matrix(BasisFamily(kind, 8), n_nodes=20)
    assert np.max(np.abs(G - np.eye(9))) <= 1e-10


def test_legendre_known_values():
    fam = BasisFamily("legendre", 2)
    # sqrt(3) x and sqrt(5) (3x^2 - 1)/2
    np.testing.assert_allclose(fam.vander(0.5), [1, math.sqrt(3) * 0.5, math.sqrt(5) * (-0.125)], rtol=1e-14)


def test_unknown_family():
    with pytest.raises(DomainError):
        BasisFamily("laguerre", 2)


def test_multi_index():
    alpha = MultiIndex((2, 0, 1))
    assert alpha.degree == 3
    assert alpha.in_full_set(2)
    assert not alpha.in_full_set(1)
    with pytest.raises(DomainError):
        MultiIndex((1, -1))


@settings(max_examples=50)
@given(st.lists(st.integers(0, 5), min_size=1, max_size=10))
def test_multi_index_degree(entries):
    assert MultiIndex(tuple(entries)).degree == sum(entries)
