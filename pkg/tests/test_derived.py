import numpy as np
import pytest

from lipdiff.derived import (
    StepSchedule,
    bilateral_directional,
    delta_derived_set,
    derived_set_estimate,
    gateaux_assemble,
    one_sided_directional,
)
from lipdiff.errors import (
    DegenerateDirection,
    DomainViolation,
    NotDirectionallyDifferentiable,
)
from lipdiff.maps import catalog_get
from lipdiff.regularity import fd_jacobian

from conftest import linear_map, make_map

COARSE = StepSchedule(0.5, 0.5, 20)


def test_schedule_steps():
    s = StepSchedule()
    steps = s.steps
    assert len(steps) == 60 and steps[0] == 1e-2
    assert np.all(np.diff(steps) < 0) and np.all(steps > 0)
    assert s.tail_start == 30
    with pytest.raises(ValueError):
        StepSchedule(ratio=1.0)
    with pytest.raises(ValueError):
        StepSchedule(count=1)
    with pytest.raises(ValueError):
        StepSchedule(t0=0.0)


# -- delta-approximating sets ------------------------------------------------


def test_delta_set_identity():
    ident = catalog_get("identity-2").g
    s = delta_derived_set(ident, [0.0, 0.0], [1.0, 1.0], 0.5, 12)
    assert np.all(s.steps < 0.5)
    np.testing.assert_array_equal(s.quotients, np.ones((12, 2)))
    assert s.verdict is None


def test_delta_set_abs():
    absf = make_map(np.abs, -1, 1)
    s = delta_derived_set(absf, [0.0], [1.0], 0.1, 20)
    np.testing.assert_array_equal(s.quotients, 1.0)


def test_delta_set_tsinlog_matches_direct_evaluation():
    s = delta_derived_set(catalog_get("tsinlog"), [0.0], [1.0], 0.1, 40)
    expected = np.sin(np.log(s.steps))
    np.testing.assert_allclose(s.quotients[:, 0], expected, rtol=0, atol=1e-14)
    assert np.all(np.abs(s.quotients) <= 1.0)


def test_delta_set_empty_grid():
    s = delta_derived_set(catalog_get("tsinlog"), [0.0], [1.0], 0.1, 0)
    assert s.verdict == "empty" and s.quotients.shape == (0, 1)


def test_delta_set_reports_offending_step():
    cube = catalog_get("cube").g
    with pytest.raises(DomainViolation) as exc:
        delta_derived_set(cube, [0.9], [1.0], 5.0, 10)
    assert exc.value.t is not None and 0.9 + exc.value.t >= 1.0


def test_delta_sets_nest():
    f = catalog_get("tsinlog")
    big = delta_derived_set(f, [0.0], [1.0], 0.2, 40)
    small = delta_derived_set(f, [0.0], [1.0], 0.05, 20)
    assert set(small.steps.tolist()) <= set(big.steps.tolist())
    lookup = dict(zip(big.steps.tolist(), big.quotients[:, 0].tolist()))
    for t, q in zip(small.steps, small.quotients[:, 0]):
        assert lookup[t] == q


# -- derived set estimates ---------------------------------------------------


@pytest.mark.parametrize("v", [[1.0, 0.0], [3.0, 4.0], [-0.2, 0.7]])
def test_identity_is_singleton(v):
    ident = catalog_get("identity-2").g
    s = derived_set_estimate(ident, [0.1, -0.2], v)
    assert s.verdict == "singleton"
    np.testing.assert_allclose(s.value, v, atol=1e-9)


def test_tsinlog_multivalued_hull():
    f = catalog_get("tsinlog")
    sched = StepSchedule()
    s = derived_set_estimate(f, [0.0], [1.0], sched, cluster_tol=0.05)
    assert s.verdict == "multivalued"
    lo, hi = s.hull()
    assert lo[0] <= -0.9 and hi[0] >= 0.9
    # oracle: dense evaluation of sin(log t) across the same tail range
    tail = sched.steps[sched.tail_start:]
    t = np.geomspace(tail[-1], tail[0], 5000)
    dense = np.sin(np.log(t))
    assert lo[0] >= dense.min() - 1e-12 and hi[0] <= dense.max() + 1e-12
    assert -1.001 <= lo[0] and hi[0] <= 1.001


def test_cube_root_diverges():
    cbrt = catalog_get("cube").f
    s = derived_set_estimate(cbrt, [0.0], [1.0])
    assert s.verdict == "divergent"
    # the quotient at t is t^(-2/3); t = 1e-6 gives 1e4
    q = delta_derived_set(cbrt, [0.0], [1.0], 1.1e-6, 1)
    t = q.steps[0]
    assert q.quotients[0, 0] == pytest.approx(t ** (-2.0 / 3.0), rel=1e-12)
    assert (1e-6) ** (-2.0 / 3.0) == pytest.approx(1e4)


def test_zero_direction_rejected():
    with pytest.raises(DegenerateDirection):
        derived_set_estimate(catalog_get("identity-2").g, [0.0, 0.0], [0.0, 0.0])


def test_linear_map_singleton_exact():
    L = linear_map([[1.0, 2.0], [-3.0, 0.5], [0.0, 4.0]])
    v = np.array([0.25, -0.5])
    s = derived_set_estimate(L, [0.0, 0.0], v)
    assert s.verdict == "singleton"
    assert s.clusters[0].spread <= 1e-12
    np.testing.assert_allclose(s.value, L.fn(v), atol=1e-12)


# -- directional derivatives -------------------------------------------------


def test_one_sided_square():
    sq = make_map(lambda t: t**2, -3, 3)
    val = one_sided_directional(sq, [1.0], [1.0], tol=1e-6)
    assert val[0] == pytest.approx(2.0, abs=1e-6)


def test_one_sided_identity():
    ident = catalog_get("identity-2").g
    val = one_sided_directional(ident, [0.2, 0.1], [3.0, 4.0], tol=1e-6)
    np.testing.assert_allclose(val, [3.0, 4.0], atol=1e-8)


def test_one_sided_tsinlog_verdict():
    assert one_sided_directional(catalog_get("tsinlog"), [0.0], [1.0]) == "multivalued"


def test_abs_has_one_sided_but_no_bilateral():
    absf = make_map(np.abs, -1, 1)
    assert one_sided_directional(absf, [0.0], [1.0])[0] == 1.0
    assert one_sided_directional(absf, [0.0], [-1.0])[0] == 1.0
    assert bilateral_directional(absf, [0.0], [1.0]) is None
    sq = make_map(lambda t: t**2, -3, 3)
    assert bilateral_directional(sq, [1.0], [1.0])[0] == pytest.approx(2.0, abs=1e-6)


# -- Gateaux assembly --------------------------------------------------------


def test_gateaux_affine():
    A = np.array([[2.0, 1.0], [0.5, 3.0]])
    g = linear_map(A)
    cand = gateaux_assemble(g, [0.0, 0.0])
    np.testing.assert_allclose(cand.matrix, A, atol=1e-10)
    assert cand.linearity_residual <= 1e-10 and cand.homogeneity_residual <= 1e-10
    # away from the origin a coarser schedule keeps rounding below 1e-10
    cand = gateaux_assemble(g, [0.3, -0.4], COARSE)
    np.testing.assert_allclose(cand.matrix, A, atol=1e-10)
    assert cand.linearity_residual <= 1e-10 and cand.homogeneity_residual <= 1e-10


def test_gateaux_cube_at_zero():
    cand = gateaux_assemble(catalog_get("cube").g, [0.0])
    assert abs(cand.matrix[0, 0]) <= 1e-12
    assert cand.linearity_residual <= 1e-12 and cand.homogeneity_residual <= 1e-12


def test_gateaux_polynomial_matches_hand_jacobian():
    g = catalog_get("poly2").g
    x = np.array([0.0, 1.0])
    hand = np.array([[1.0, 2.0], [0.0, 1.0]])
    cand = gateaux_assemble(g, x)
    np.testing.assert_allclose(cand.matrix, hand, atol=1e-6)
    np.testing.assert_allclose(fd_jacobian(g, x).matrix, hand, atol=1e-9)
    assert cand.linearity_residual <= 1e-6


def test_gateaux_rejects_abs():
    absf = make_map(lambda p: np.abs(p), -1, 1)
    with pytest.raises(NotDirectionallyDifferentiable):
        gateaux_assemble(make_map(catalog_get("tsinlog").fn, -1, 1), [0.0])
    # |t| has one-sided derivatives; the homogeneity residual exposes the kink
    cand = gateaux_assemble(absf, [0.0])
    assert cand.homogeneity_residual == pytest.approx(2.0)
