import numpy as np
import pytest

from lipdiff.errors import DomainViolation, UnknownScenario
from lipdiff.maps import (
    Ball,
    Box,
    EvaluableMap,
    MapPair,
    SpdCone,
    catalog_get,
    catalog_names,
    check_inverse_pair,
    evaluate,
    interval,
    register_map,
    rng_for,
)
from lipdiff.linalg import sym_to_vec

from conftest import broken_pair


def test_identity_evaluates_to_input():
    pair = catalog_get("identity-2")
    np.testing.assert_array_equal(evaluate(pair.g, [0.1, 0.2]), [0.1, 0.2])


def test_identity_on_unit_ball_of_r3():
    pair = catalog_get("identity-3")
    assert isinstance(pair.g.domain, Ball)
    assert pair.g.domain.radius == 1.0 and pair.g.dim == 3
    p = np.array([0.3, -0.2, 0.5])
    np.testing.assert_array_equal(pair.g(p), p)
    np.testing.assert_array_equal(pair.f(p), p)


def test_cube_values():
    cube = EvaluableMap(Box([-10.0], [10.0]), 1, lambda x: x**3)
    assert evaluate(cube, [2.0])[0] == 8.0
    assert catalog_get("cube").g([0.5])[0] == 0.125


def test_affine_inverse_value():
    pair = catalog_get("affine", A=[[2, 0], [0, 3]], b=[0, 0])
    np.testing.assert_allclose(pair.f([2.0, 3.0]), [1.0, 1.0], rtol=0, atol=1e-15)


def test_karcher_g_at_identity_operands():
    d = 2
    pair = catalog_get("karcher-pair", fixed=[np.eye(d), np.eye(d)], Y0=np.eye(d))
    I = sym_to_vec(np.eye(d))
    np.testing.assert_allclose(pair.g(I), I, atol=1e-14)


def test_boundary_point_is_outside():
    ball = Ball(np.zeros(2), 1.0)
    m = EvaluableMap(ball, 2, lambda p: p)
    with pytest.raises(DomainViolation):
        evaluate(m, [1.0, 0.0])
    with pytest.raises(DomainViolation):
        evaluate(m, [0.0, 1.5])
    with pytest.raises(DomainViolation):
        evaluate(catalog_get("cube").g, [1.0])


def test_domain_violation_records_step():
    m = catalog_get("exp-log").g
    with pytest.raises(DomainViolation) as exc:
        evaluate(m, [2.0], t=0.5)
    assert exc.value.t == 0.5


def test_evaluate_is_referentially_transparent():
    pair = catalog_get("poly2")
    p = np.array([0.31, -0.77])
    assert evaluate(pair.g, p).tobytes() == evaluate(pair.g, p).tobytes()
    before = p.copy()
    evaluate(pair.g, p)
    np.testing.assert_array_equal(p, before)


def test_domain_invariants():
    with pytest.raises(ValueError):
        Ball(np.zeros(2), 0.0)
    with pytest.raises(ValueError):
        Box([0.0, 1.0], [1.0, 1.0])
    with pytest.raises(ValueError):
        Box([-np.inf], [np.inf])  # unbounded without a sampling radius


def test_spd_cone_membership():
    cone = SpdCone(2)
    assert cone.contains(sym_to_vec(np.eye(2)))
    assert not cone.contains(sym_to_vec(np.diag([1.0, -1.0])))
    assert cone.margin(sym_to_vec(np.diag([2.0, 0.5]))) == pytest.approx(0.5)


def test_pair_dimension_invariant():
    g = EvaluableMap(Ball(np.zeros(2), 1.0), 2, lambda p: p)
    f = EvaluableMap(Ball(np.zeros(3), 1.0), 3, lambda p: p)
    with pytest.raises(ValueError):
        MapPair(g, f)


@pytest.mark.parametrize("name", ["cube", "exp-log", "affine", "poly2", "identity-4",
                                  "identity-n"])
def test_catalog_pairs_are_inverse(name):
    rep = check_inverse_pair(catalog_get(name), sample_count=1000, tol=1e-9)
    assert rep.passed
    assert rep.pair.declared_inverse


def test_karcher_pair_is_inverse():
    rep = check_inverse_pair(catalog_get("karcher-pair"), sample_count=50, tol=1e-9)
    assert rep.passed, rep.to_dict()


def test_cube_pair_tight_tolerance():
    rep = check_inverse_pair(catalog_get("cube"), sample_count=1000, tol=1e-12)
    assert rep.passed


def test_exp_log_tight_tolerance():
    rep = check_inverse_pair(catalog_get("exp-log"), sample_count=1000, tol=1e-12)
    assert rep.passed


def test_broken_pair_fails():
    rep = check_inverse_pair(broken_pair(), sample_count=1000, tol=1e-6)
    assert not rep.passed
    assert not rep.pair.declared_inverse
    # brute-force max of |x^6 - x| over the sampled interval (0.05, 0.95)
    grid = np.linspace(0.05, 0.95, 200001)
    oracle = np.max(np.abs(grid**6 - grid))
    assert rep.max_fg_residual >= 0.1
    assert rep.max_fg_residual <= oracle + 1e-12


def test_check_inverse_pair_is_seeded():
    a = check_inverse_pair(catalog_get("poly2"), 100, 1e-9, rng=rng_for(3, "x"))
    b = check_inverse_pair(catalog_get("poly2"), 100, 1e-9, rng=rng_for(3, "x"))
    assert a.max_fg_residual == b.max_fg_residual


def test_check_inverse_pair_arguments():
    with pytest.raises(ValueError):
        check_inverse_pair(catalog_get("cube"), 0, 1e-9)
    with pytest.raises(ValueError):
        check_inverse_pair(catalog_get("cube"), 10, 0.0)


def test_unknown_catalog_entry():
    with pytest.raises(UnknownScenario):
        catalog_get("no-such-map")


def test_tsinlog_is_standalone():
    assert catalog_names()["tsinlog"] == "map"
    m = catalog_get("tsinlog")
    assert isinstance(m, EvaluableMap)
    assert m([0.0])[0] == 0.0
    t = 0.3
    assert m([t])[0] == pytest.approx(t * np.sin(np.log(t)), rel=1e-15)


def test_plugin_registration():
    def factory(scale=2.0):
        g = EvaluableMap(interval(-1, 1), 1, lambda x: scale * x)
        f = EvaluableMap(interval(-scale, scale), 1, lambda y: y / scale)
        return MapPair(g, f, name="scale")

    register_map("test-scale", factory)
    pair = catalog_get("test-scale", scale=4.0)
    assert pair.g([0.25])[0] == 1.0
    assert check_inverse_pair(pair, 100, 1e-12).passed
