"""Executable checks for the converse of the inverse function theorem.

Given inverse maps ``g: U -> V`` and ``f: V -> U`` these routines measure, at
a point, the chain rule for derived sets, the identity of the composite's
derived set, the density construction behind surjectivity of ``dg_x``, and
assemble everything into a certificate that ``dg_x`` is invertible with
``df_y = (dg_x)^-1``.

Lipschitzness of ``f`` is only ever checked on a ball around ``g(x)``, so a
certificate speaks to the local form of the hypothesis.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.spatial.distance import directed_hausdorff

from . import derived
from ._parallel import pmap
from .derived import StepSchedule, derived_set_estimate
from .errors import HypothesisFailure
from .maps import as_point, check_inverse_pair, compose, evaluate, rng_for
from .regularity import (
    LIPSCHITZ,
    default_radii,
    fd_jacobian,
    frechet_residual,
    lipschitz_estimate,
)

__all__ = [
    "ChainRuleReport",
    "IdentityCheckReport",
    "DensityProbeReport",
    "CertifyConfig",
    "ConverseIftCertificate",
    "probe_schedule",
    "chain_rule_check",
    "identity_derived_check",
    "density_probe",
    "converse_ift_certify",
]

EPS = float(np.finfo(float).eps)
CERTIFIED = "certified"
REFUTED = "refuted"
INCONCLUSIVE = "inconclusive"


def probe_schedule(domain, p, direction_norm=1.0, count=24, ratio=0.5):
    """Schedule for probes where the quotient has no truncation error to chase.

    Starts at a tenth of the distance to the domain boundary (capped at 0.1)
    so the tail stays in a range where rounding is negligible.
    """
    margin = domain.margin(as_point(p))
    t0 = min(0.1, 0.5 * margin) / max(direction_norm, 1e-300)
    return StepSchedule(t0, ratio, count)


def _set_gap(a, b):
    if len(a) == 0 or len(b) == 0:
        return float("inf")
    a = np.atleast_2d(a)
    b = np.atleast_2d(b)
    return float(max(directed_hausdorff(a, b)[0], directed_hausdorff(b, a)[0]))


@dataclass(frozen=True)
class ChainRuleReport:
    x: np.ndarray
    v: np.ndarray
    g_direction: np.ndarray
    lhs: derived.DerivedSetSample
    rhs: derived.DerivedSetSample
    kappa: float
    hausdorff_gap: float
    hull_gap: float
    trace: tuple  # of (t, quotient gap, kappa * directional error, slack)
    bound_holds: bool
    passed: bool

    def csv_rows(self):
        return (["t", "quotient_gap", "kappa_dir_err", "slack"],
                [list(map(float, row)) for row in self.trace])

    def to_dict(self):
        return {
            "x": self.x.tolist(),
            "v": self.v.tolist(),
            "g_direction": self.g_direction.tolist(),
            "kappa": self.kappa,
            "hausdorff_gap": self.hausdorff_gap,
            "hull_gap": self.hull_gap,
            "bound_holds": self.bound_holds,
            "passed": self.passed,
            "lhs": self.lhs.to_dict(),
            "rhs": self.rhs.to_dict(),
            "trace": [list(map(float, row)) for row in self.trace],
        }


def chain_rule_check(pair, x, v, schedule=None, tol=1e-6, cluster_tol=None,
                     lipschitz_radii=None, seed=0):
    """Compare the derived set of ``f o g`` at ``x`` along ``v`` with that of ``f``
    at ``g(x)`` along ``g'_+(x, v)``.

    Both sides are sampled on the same schedule.  For every step the trace
    records the gap between the two difference quotients next to
    ``kappa * |(g(x+tv) - g(x))/t - g'_+(x,v)|``, with ``kappa`` the measured
    local Lipschitz constant of ``f``; the gap may not exceed that bound
    beyond rounding slack.

    Raises
    ------
    HypothesisFailure
        ``g-not-directionally-differentiable`` or ``f-not-lipschitz``.
    """
    g, f = pair.g, pair.f
    schedule = schedule or StepSchedule()
    x = as_point(x, g.dim)
    v = as_point(v, g.dim)
    gs = derived_set_estimate(g, x, v, schedule)
    if gs.verdict != derived.SINGLETON:
        raise HypothesisFailure("g-not-directionally-differentiable",
                                f"derived set of g along {v.tolist()} is {gs.verdict}")
    d = gs.value
    y = evaluate(g, x)
    radii = default_radii(f.domain, y) if lipschitz_radii is None else lipschitz_radii
    lip = lipschitz_estimate(f, y, radii, rng=rng_for(seed, "chain-rule-lipschitz"))
    if lip.verdict != LIPSCHITZ:
        raise HypothesisFailure("f-not-lipschitz",
                                f"Lipschitz profile near g(x) is {lip.verdict}")
    kappa = lip.constant

    lhs = derived_set_estimate(compose(f, g), x, v, schedule, cluster_tol)
    rhs = derived_set_estimate(f, y, d, schedule, cluster_tol)

    fy = evaluate(f, y)
    scale = 1.0 + float(np.linalg.norm(fy)) + kappa * (1.0 + float(np.linalg.norm(y)))
    trace = []
    for t, ql, qr in zip(schedule.steps, lhs.quotients, rhs.quotients):
        dq = (evaluate(g, x + t * v) - y) / t
        err = float(np.linalg.norm(dq - d))
        slack = 64 * EPS * scale / t
        trace.append((float(t), float(np.linalg.norm(ql - qr)), kappa * err, slack))
    bound_holds = all(gap <= 1.01 * bound + slack for _, gap, bound, slack in trace)

    hgap = _set_gap(lhs.representatives, rhs.representatives)
    if lhs.clusters and rhs.clusters:
        (l0, l1), (r0, r1) = lhs.hull(), rhs.hull()
        hull_gap = float(max(np.max(np.abs(l0 - r0)), np.max(np.abs(l1 - r1))))
    else:
        hull_gap = float("inf")
    if lhs.verdict == derived.SINGLETON and rhs.verdict == derived.SINGLETON:
        passed = hgap <= max(tol, kappa * gs.stability)
    else:
        passed = lhs.verdict == rhs.verdict and hull_gap <= tol
    return ChainRuleReport(x, v, d, lhs, rhs, kappa, hgap, hull_gap, tuple(trace),
                           bound_holds, bool(passed and bound_holds))


@dataclass(frozen=True)
class IdentityCheckReport:
    x: np.ndarray
    directions: np.ndarray
    residuals: np.ndarray
    verdicts: tuple
    tol: float

    @property
    def max_residual(self):
        return float(np.max(self.residuals))

    @property
    def passed(self):
        return self.max_residual <= self.tol

    def csv_rows(self):
        n = self.directions.shape[1]
        header = [f"v{i}" for i in range(n)] + ["residual", "verdict"]
        rows = [[*map(float, d), float(r), s]
                for d, r, s in zip(self.directions, self.residuals, self.verdicts)]
        return header, rows

    def to_dict(self):
        return {
            "x": self.x.tolist(),
            "directions": self.directions.tolist(),
            "residuals": self.residuals.tolist(),
            "verdicts": list(self.verdicts),
            "max_residual": self.max_residual,
            "tol": self.tol,
            "passed": self.passed,
        }


def _direction_sample(n, count, seed):
    D = rng_for(seed, "identity-directions").standard_normal((count, n))
    return np.vstack([np.eye(n), D / np.linalg.norm(D, axis=1, keepdims=True)])


def identity_derived_check(pair, x, directions=None, schedule=None, tol=1e-9, seed=0):
    """Check that the derived set of ``f o g`` at ``x`` along each ``v`` is ``{v}``.

    Default directions are the standard basis plus eight seeded random unit
    vectors.  A non-singleton derived set counts as an infinite residual.
    """
    x = as_point(x, pair.g.dim)
    if directions is None:
        directions = _direction_sample(pair.g.dim, 8, seed)
    directions = np.atleast_2d(np.asarray(directions, dtype=float))
    fg = compose(pair.f, pair.g)

    def one(v):
        sched = schedule or probe_schedule(pair.g.domain, x, float(np.linalg.norm(v)))
        s = derived_set_estimate(fg, x, v, sched)
        if s.verdict != derived.SINGLETON:
            return float("inf"), s.verdict
        return float(np.linalg.norm(s.value - v)), s.verdict

    results = pmap(one, directions)
    residuals = np.array([r for r, _ in results])
    return IdentityCheckReport(x, directions, residuals, tuple(s for _, s in results), tol)


@dataclass(frozen=True)
class DensityProbeReport:
    x: np.ndarray
    y: np.ndarray
    w: np.ndarray
    jacobian: np.ndarray
    trace: tuple  # of (t, z_t, step-1 residual, |w - J z_t|)
    lipschitz_bound: float
    max_zt: float
    zt_growth: float
    bound_ok: bool
    gap_decreasing: bool

    @property
    def step1_max(self):
        return max(row[2] for row in self.trace)

    @property
    def final_gap(self):
        return self.trace[-1][3]

    def csv_rows(self):
        n = len(self.trace[0][1])
        header = ["t"] + [f"z{i}" for i in range(n)] + ["step1_residual", "gap"]
        rows = [[float(t), *map(float, z), float(s1), float(gap)]
                for t, z, s1, gap in self.trace]
        return header, rows

    def to_dict(self):
        return {
            "x": self.x.tolist(),
            "y": self.y.tolist(),
            "w": self.w.tolist(),
            "jacobian": self.jacobian.tolist(),
            "lipschitz_bound": self.lipschitz_bound,
            "max_zt": self.max_zt,
            "zt_growth": self.zt_growth,
            "bound_ok": self.bound_ok,
            "gap_decreasing": self.gap_decreasing,
            "step1_max": self.step1_max,
            "final_gap": self.final_gap,
            "trace": [[float(t), z.tolist(), float(s1), float(gap)]
                      for t, z, s1, gap in self.trace],
        }


def density_probe(pair, x, w, schedule=None, slack=0.5, seed=0):
    """Run the density construction at ``x`` for a target vector ``w``.

    With ``y = g(x)`` and ``z_t = (f(y + t w) - f(y)) / t``, the identity
    ``(g(x + t z_t) - g(x)) / t = w`` holds exactly for true inverses, and
    ``|w - J z_t|`` should shrink with ``t`` when ``g`` is differentiable and
    ``f`` Lipschitz.  ``|z_t|`` is compared with ``M_f |w|``, where ``M_f``
    is the Lipschitz estimate on the smallest ball holding the probes; the
    bound also fails when ``|z_t|`` grows tenfold along the schedule.
    ``gap_decreasing`` asks for a monotone gap that ends at least tenfold
    below where it started.  Failures are recorded in the report, not raised.
    """
    g, f = pair.g, pair.f
    x = as_point(x, g.dim)
    w = as_point(w, f.dim)
    wn = float(np.linalg.norm(w))
    y = evaluate(g, x)
    schedule = schedule or probe_schedule(f.domain, y, wn, count=16)
    J = fd_jacobian(g, x).matrix
    xf = evaluate(f, y)
    gx = evaluate(g, xf)
    trace = []
    for t in schedule.steps:
        z = (evaluate(f, y + t * w, t=float(t)) - xf) / t
        step1 = float(np.linalg.norm((evaluate(g, xf + t * z, t=float(t)) - gx) / t - w))
        gap = float(np.linalg.norm(w - J @ z))
        trace.append((float(t), z, step1, gap))

    r = schedule.t0 * wn
    lip = lipschitz_estimate(f, y, [r, r / 10, r / 100], rng=rng_for(seed, "density-lipschitz"))
    m_f = float(lip.estimates[0])
    znorms = np.array([np.linalg.norm(row[1]) for row in trace])
    growth = float(znorms[-1] / znorms[0]) if znorms[0] > 0 else float("inf")
    unbounded = growth >= 10.0 and bool(np.all(np.diff(znorms[-5:]) > 0))
    bound_ok = bool(znorms.max() <= m_f * wn * (1.0 + slack)) and not unbounded
    gaps = np.array([row[3] for row in trace])
    decreasing = bool(np.all(np.diff(gaps) <= 1e-12)) and gaps[-1] <= 0.1 * gaps[0]
    return DensityProbeReport(x, y, w, J, tuple(trace), m_f, float(znorms.max()), growth,
                              bound_ok, decreasing)


@dataclass(frozen=True)
class CertifyConfig:
    inverse_samples: int = 200
    inverse_tol: float = 1e-9
    fd_step: Optional[float] = None
    residual_radii: Optional[tuple] = None
    sphere_samples: int = 16
    lipschitz_radii: Optional[tuple] = None
    lipschitz_pairs: int = 64
    singular_threshold: Optional[float] = None
    consistency_tol: float = 1e-5
    identity_tol: float = 1e-6
    identity_schedule: Optional[StepSchedule] = None
    random_directions: int = 8
    seed: int = 0

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        for key in ("residual_radii", "lipschitz_radii"):
            if d.get(key) is not None:
                d[key] = tuple(d[key])
        if isinstance(d.get("identity_schedule"), dict):
            d["identity_schedule"] = StepSchedule(**d["identity_schedule"])
        return cls(**d)

    def to_dict(self):
        out = dict(self.__dict__)
        if self.identity_schedule is not None:
            out["identity_schedule"] = dict(self.identity_schedule.__dict__)
        for key in ("residual_radii", "lipschitz_radii"):
            if out[key] is not None:
                out[key] = list(out[key])
        return out


@dataclass(frozen=True)
class ConverseIftCertificate:
    """Outcome of the full certification pipeline at one point.

    ``clauses`` lists ``(name, status, detail)`` in pipeline order with
    status ``pass``, ``fail`` or ``unknown``.  A refuted verdict names the
    first failed clause in ``reason``.
    """

    x: np.ndarray
    y: np.ndarray
    verdict: str
    reason: str
    clauses: tuple
    inverse_check: object
    jacobian: object
    lipschitz: object
    inverse_jacobian: object
    inverse_consistency: float
    identity_check: object
    config: CertifyConfig = field(default_factory=CertifyConfig)
    scope: str = "local: f is checked for Lipschitz behaviour on a ball around g(x)"

    @property
    def df(self):
        return None if self.inverse_jacobian is None else self.inverse_jacobian.matrix

    def profiles(self):
        return {
            "jacobian_residual": self.jacobian.csv_rows(),
            "lipschitz_profile": self.lipschitz.csv_rows(),
            "direction_residuals": self.identity_check.csv_rows(),
        }

    def to_dict(self):
        return {
            "x": self.x.tolist(),
            "y": self.y.tolist(),
            "verdict": self.verdict,
            "reason": self.reason,
            "scope": self.scope,
            "clauses": [list(c) for c in self.clauses],
            "inverse_check": self.inverse_check.to_dict(),
            "jacobian": self.jacobian.to_dict(),
            "lipschitz": self.lipschitz.to_dict(),
            "inverse_jacobian": (None if self.inverse_jacobian is None
                                 else self.inverse_jacobian.to_dict()),
            "inverse_consistency": self.inverse_consistency,
            "identity_check": self.identity_check.to_dict(),
            "config": self.config.to_dict(),
        }


def converse_ift_certify(pair, x, config=None):
    """Certify, refute, or give up on invertibility of ``dg_x`` at ``x``.

    Pipeline: inverse-pair check, finite-difference Jacobian of ``g`` with
    its Frechet remainder curve, Lipschitz profile of ``f`` near ``y = g(x)``,
    SVD invertibility, finite-difference Jacobian of ``f`` at ``y`` compared
    with ``(dg_x)^-1``, and the identity check on the composite ``f o g``.
    """
    config = config or CertifyConfig()
    g, f = pair.g, pair.f
    x = as_point(x, g.dim)
    seed = config.seed

    inv = check_inverse_pair(pair, config.inverse_samples, config.inverse_tol,
                             rng=rng_for(seed, "inverse-check"))
    y = evaluate(g, x)

    jac = fd_jacobian(g, x, config.fd_step, singular_threshold=config.singular_threshold)
    radii = config.residual_radii or default_radii(g.domain, x, levels=4)
    jac = jac.with_residual(frechet_residual(g, x, jac.matrix, radii, config.sphere_samples,
                                             rng=rng_for(seed, "frechet-residual")))

    lradii = config.lipschitz_radii or default_radii(f.domain, y)
    lip = lipschitz_estimate(f, y, lradii, config.lipschitz_pairs,
                             rng=rng_for(seed, "lipschitz"))

    fjac = fd_jacobian(f, y, config.fd_step)
    consistency = float("inf")
    if jac.invertible:
        Jinv = np.linalg.inv(jac.matrix)
        consistency = float(np.linalg.norm(fjac.matrix - Jinv, 2) / np.linalg.norm(Jinv, 2))

    dirs = _direction_sample(g.dim, config.random_directions, seed)
    ident = identity_derived_check(pair, x, dirs, config.identity_schedule,
                                   config.identity_tol, seed)

    clauses = [
        ("inverse-check-failed", "pass" if inv.passed else "fail",
         f"max residuals {inv.max_fg_residual:.3e}, {inv.max_gf_residual:.3e}"),
        ("jacobian-singular", "pass" if jac.invertible else "fail",
         f"sigma_min {jac.invertibility.sigma_min:.3e}"),
        ("f-not-lipschitz",
         {"lipschitz": "pass", "blowup": "fail"}.get(lip.verdict, "unknown"),
         f"profile verdict {lip.verdict}"),
        ("inverse-inconsistent",
         "pass" if consistency <= config.consistency_tol else "fail",
         f"relative gap {consistency:.3e}"),
        ("identity-check-failed", "pass" if ident.passed else "fail",
         f"max residual {ident.max_residual:.3e}"),
    ]
    failed = [c for c in clauses if c[1] == "fail"]
    unknown = [c for c in clauses if c[1] == "unknown"]
    if failed:
        verdict, reason = REFUTED, failed[0][0]
    elif unknown:
        verdict, reason = INCONCLUSIVE, unknown[0][0]
    else:
        verdict, reason = CERTIFIED, ""
    return ConverseIftCertificate(x, y, verdict, reason, tuple(clauses), inv, jac, lip, fjac,
                                  consistency, ident, config)
