"""Property-based invariants across modules."""

import itertools
import json

import numpy as np
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from lipdiff.cli import run_scenario
from lipdiff.derived import StepSchedule, derived_set_estimate
from lipdiff.karcher import geometric_mean_two, karcher_mean, karcher_residual
from lipdiff.linalg import expm, logm, random_spd, sqrtm, sym_to_vec, vec_to_sym
from lipdiff.maps import EvaluableMap, catalog_get, evaluate, rng_for
from lipdiff.regularity import fd_jacobian, invertibility_report, lipschitz_estimate

from conftest import linear_map

finite = st.floats(-5, 5, allow_nan=False, allow_infinity=False)
seeds = st.integers(0, 2**32 - 1)
FAST = settings(max_examples=40, deadline=None,
                suppress_health_check=[HealthCheck.function_scoped_fixture])


def matrices(m, n):
    return arrays(float, (m, n), elements=finite)


@st.composite
def linear_case(draw):
    m = draw(st.integers(1, 4))
    n = draw(st.integers(1, 4))
    A = draw(matrices(m, n))
    x = draw(arrays(float, n, elements=finite))
    v = draw(arrays(float, n, elements=finite).filter(lambda v: np.linalg.norm(v) > 1e-3))
    return A, x, v


@FAST
@given(linear_case())
def test_linear_derived_set_is_Av(case):
    A, x, v = case
    s = derived_set_estimate(linear_map(A), x, v, StepSchedule(0.5, 0.5, 20))
    assert s.verdict == "singleton"
    scale = 1 + np.abs(A).sum() * (1 + np.abs(x).max()) * 1e-12 / 0.5**19
    np.testing.assert_allclose(s.value, A @ v, atol=scale * 1e-9)


@FAST
@given(seeds, st.floats(-100, 100).filter(lambda c: abs(c) > 1e-6),
       st.integers(0, 8))
def test_lipschitz_scaling_law(seed, c, k):
    # power-of-two multiples are exact in floating point
    c2 = float(np.sign(c) * 2.0 ** k)
    f = catalog_get("poly2").g
    radii = [1.0, 0.1, 0.01]
    base = lipschitz_estimate(f, [0.1, 0.2], radii, 16, rng=rng_for(seed, "p"))
    for factor, rtol in ((c2, 0.0), (c, 1e-9)):
        cf = EvaluableMap(f.domain, 2, lambda p, a=factor: a * f.fn(p))
        est = lipschitz_estimate(cf, [0.1, 0.2], radii, 16, rng=rng_for(seed, "p"))
        np.testing.assert_allclose(est.estimates, abs(factor) * base.estimates, rtol=rtol,
                                   atol=0)


@FAST
@given(seeds, st.integers(1, 4), st.integers(2, 4))
def test_karcher_permutation_invariance(seed, d, n):
    rng = rng_for(seed, "perm")
    mats = [random_spd(d, rng, 20.0) for _ in range(n)]
    ref = karcher_mean(mats).mean
    for perm in itertools.islice(itertools.permutations(range(n)), 1, 6):
        other = karcher_mean([mats[i] for i in perm]).mean
        assert np.linalg.norm(other - ref) <= 1e-9


@FAST
@given(seeds, st.integers(1, 5), st.integers(1, 5))
def test_karcher_idempotence(seed, d, n):
    A = random_spd(d, rng_for(seed, "idem"), 100.0)
    tr = karcher_mean([A] * n)
    assert tr.converged
    np.testing.assert_allclose(tr.mean, A, atol=1e-10 * np.linalg.norm(A))


@FAST
@given(seeds, st.integers(2, 6))
def test_karcher_two_operand_oracle(seed, d):
    rng = rng_for(seed, "oracle")
    A, B = random_spd(d, rng, 50.0), random_spd(d, rng, 50.0)
    G = geometric_mean_two(A, B)
    tr = karcher_mean([A, B])
    assert np.linalg.norm(tr.mean - G) <= 1e-8 * np.linalg.norm(G)
    assert karcher_residual(tr.mean, [A, B])[1] <= 1e-10


@FAST
@given(seeds, st.integers(1, 6), st.floats(1.0, 1e6))
def test_spd_function_consistency(seed, d, cond):
    M = random_spd(d, rng_for(seed, "spd"), cond)
    scale = np.linalg.norm(M)
    S = sqrtm(M)
    np.testing.assert_allclose(S @ S, M, atol=1e-10 * scale, rtol=0)
    np.testing.assert_allclose(expm(logm(M)), M, atol=1e-10 * scale, rtol=0)
    np.testing.assert_allclose(vec_to_sym(sym_to_vec(M)), M, atol=1e-15 * scale, rtol=0)


@FAST
@given(matrices(3, 3), seeds)
def test_invertibility_orthogonal_invariance(J, seed):
    rng = rng_for(seed, "orth")
    Q, _ = np.linalg.qr(rng.standard_normal((3, 3)))
    a = invertibility_report(J)
    b = invertibility_report(Q @ J)
    smax = max(a.sigma_max, 1e-300)
    np.testing.assert_allclose(b.singular_values, a.singular_values, atol=1e-12 * smax)
    far = abs(a.sigma_min - a.threshold) > 1e-10 * smax
    if far:
        assert a.invertible == b.invertible


@FAST
@given(arrays(float, (2, 2, 2), elements=finite), arrays(float, 2, elements=finite))
def test_fd_exact_on_quadratics(Q, x):
    g = EvaluableMap(catalog_get("poly2").g.domain, 2,
                     lambda p: np.einsum("kij,i,j->k", Q, p, p))
    exact = np.einsum("kij,j->ki", Q + Q.transpose(0, 2, 1), x)
    J = fd_jacobian(g, x).matrix
    # rounding in the quotient is ~eps * |g| / h
    noise = 1e-9 * (1 + np.abs(Q).sum() * (1 + np.abs(x).max()) ** 2)
    assert np.linalg.norm(J - exact) <= max(1e-9 * np.linalg.norm(exact), noise)


@FAST
@given(arrays(float, 2, elements=st.floats(-0.6, 0.6)))
def test_evaluate_referentially_transparent(p):
    g = catalog_get("poly2").g
    assert evaluate(g, p).tobytes() == evaluate(g, p.copy()).tobytes()


@settings(max_examples=8, deadline=None,
          suppress_health_check=[HealthCheck.function_scoped_fixture])
@given(seeds, st.sampled_from(["exp-log", "poly2", "affine", "cube"]))
def test_cli_determinism(tmp_path_factory, seed, name):
    d = tmp_path_factory.mktemp("det")
    x = 0.0 if name in ("exp-log", "cube") else [0.1, -0.1]
    p = d / "s.json"
    p.write_text(json.dumps({"schema": "lipdiff.scenario/1", "name": name, "seed": seed,
                             "pipeline": "certify", "map": name, "x": x,
                             "config": {"inverse_samples": 20}}))
    a = run_scenario(p).to_json(include_wall_time=False)
    b = run_scenario(p).to_json(include_wall_time=False)
    assert a == b
