import numpy as np
import pytest

from lipdiff.maps import Box, EvaluableMap, MapPair, interval, tsinlog_scalar, whole_space


def make_map(fn, lo, hi, codim=1, name=""):
    lo = np.atleast_1d(np.asarray(lo, dtype=float))
    hi = np.atleast_1d(np.asarray(hi, dtype=float))
    return EvaluableMap(Box(lo, hi), codim, lambda p: np.atleast_1d(fn(p)), name)


def linear_map(A, sample_radius=1.0):
    A = np.atleast_2d(np.asarray(A, dtype=float))
    return EvaluableMap(whole_space(A.shape[1], sample_radius), A.shape[0], lambda p: A @ p,
                        "linear")


def tsinlog_composite():
    """g(t) = (t, 0) into R^2 followed by tsinlog on the first coordinate."""
    g = EvaluableMap(whole_space(1, 1.0), 2, lambda t: np.array([t[0], 0.0]), "embed")
    f = EvaluableMap(Box([-1.0, -1.0], [1.0, 1.0]), 1,
                     lambda y: np.atleast_1d(tsinlog_scalar(y[0])), "tsinlog-first")
    return MapPair(g, f, name="tsinlog-composite")


def broken_pair():
    """g = x^3 with f = x^2 on (0, 1): not inverses."""
    g = EvaluableMap(interval(0.0, 1.0), 1, lambda x: x**3, "cube")
    f = EvaluableMap(interval(0.0, 1.0), 1, lambda x: x**2, "square")
    return MapPair(g, f, name="broken")


@pytest.fixture
def rng():
    return np.random.default_rng(20181201)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
