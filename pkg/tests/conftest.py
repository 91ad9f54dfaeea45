import functools
import itertools
import math

import numpy as np
import pytest
from numpy.polynomial import hermite_e

from tensorgpc.cptensor import CPTensor
from tensorgpc.polybasis import BasisFamily


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture
def hermite2():
    return BasisFamily("hermite", 2)


def random_cp(rng, d, p, R, scale=1.0):
    return CPTensor([scale * rng.standard_normal((p + 1, R)) for _ in range(d)])


# ---------------------------------------------------------------------------
# Independent oracles (never routed through the package's recurrences)
# ---------------------------------------------------------------------------

def hermite_oracle(k, x):
    """He_k(x)/sqrt(k!) through numpy's HermiteE series evaluation."""
    c = np.zeros(k + 1)
    c[k] = 1.0
    return hermite_e.hermeval(x, c) / math.sqrt(math.factorial(k))


def outer_all(vectors):
    return functools.reduce(np.multiply.outer, vectors)


def dense_gpc_value(full, points, p):
    """Brute-force sum over every multi-index alpha of c_alpha * prod_k psi_{alpha_k}(xi_k)."""
    points = np.atleast_2d(points)
    d = points.shape[1]
    out = np.zeros(points.shape[0])
    for alpha in itertools.product(range(p + 1), repeat=d):
        psi = np.ones(points.shape[0])
        for k, a in enumerate(alpha):
            psi = psi * hermite_oracle(a, points[:, k])
        out += full[alpha] * psi
    return out


# ---------------------------------------------------------------------------
# Acceptance reporting: one PASS/FAIL line per criterion in the summary
# ---------------------------------------------------------------------------

class AcceptanceReport:
    def __init__(self):
        self.lines = {}

    def record(self, number, title, passed, detail=""):
        status = "PASS" if passed else "FAIL"
        self.lines[number] = f"[{status}] criterion {number:>2}: {title}" + (f"  ({detail})" if detail else "")
        print(self.lines[number])
        return passed


_REPORT = AcceptanceReport()


@pytest.fixture(scope="session")
def acceptance():
    return _REPORT


def pytest_terminal_summary(terminalreporter):
    if _REPORT.lines:
        terminalreporter.section("acceptance criteria")
        for key in sorted(_REPORT.lines):
            terminalreporter.write_line(_REPORT.lines[key])
