"""Derived sets of difference quotients and directional derivatives.

For a map ``f``, base point ``y`` and direction ``v`` the difference quotients
``(f(y + t v) - f(y)) / t`` are sampled along a decreasing geometric sequence
of steps.  Their accumulation points, the derived set, are estimated by
clustering the quotients from the tail of the sequence.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.cluster.hierarchy import fcluster, linkage

from .errors import DegenerateDirection, NotDirectionallyDifferentiable
from .maps import as_point, evaluate, rng_for

__all__ = [
    "StepSchedule",
    "Cluster",
    "DerivedSetSample",
    "GateauxCandidate",
    "difference_quotients",
    "delta_derived_set",
    "derived_set_estimate",
    "one_sided_directional",
    "bilateral_directional",
    "gateaux_assemble",
]

SINGLETON = "singleton"
MULTIVALUED = "multivalued"
DIVERGENT = "divergent"
EMPTY = "empty"

DIVERGENCE_FACTOR = 1e6
DIVERGENCE_WINDOW = 10


@dataclass(frozen=True)
class StepSchedule:
    """Steps ``t_k = t0 * ratio**k`` for ``k = 0 .. count-1``."""

    t0: float = 1e-2
    ratio: float = 0.7
    count: int = 60

    def __post_init__(self):
        if not self.t0 > 0:
            raise ValueError("t0 must be positive")
        if not 0 < self.ratio < 1:
            raise ValueError("ratio must lie in (0, 1)")
        if self.count < 2:
            raise ValueError("a schedule needs at least two steps")

    @property
    def steps(self):
        return self.t0 * self.ratio ** np.arange(self.count)

    @property
    def tail_start(self):
        return self.count // 2

    def scaled(self, c):
        return StepSchedule(self.t0 * c, self.ratio, self.count)


@dataclass(frozen=True)
class Cluster:
    representative: np.ndarray
    count: int
    spread: float
    lower: np.ndarray
    upper: np.ndarray

    def to_dict(self):
        return {
            "representative": self.representative.tolist(),
            "count": self.count,
            "spread": self.spread,
            "lower": self.lower.tolist(),
            "upper": self.upper.tolist(),
        }


@dataclass(frozen=True)
class DerivedSetSample:
    """Difference quotients at ``base`` along ``direction`` plus their cluster summary.

    ``steps`` decrease; ``quotients[k]`` belongs to ``steps[k]``.  Only
    quotients from ``tail_start`` on enter the clustering.  ``verdict`` is
    ``None`` for raw snapshots that were not clustered.
    """

    base: np.ndarray
    direction: np.ndarray
    steps: np.ndarray
    quotients: np.ndarray
    tail_start: int = 0
    clusters: tuple = ()
    verdict: Optional[str] = None
    cluster_tol: Optional[float] = None
    stability: float = float("nan")

    @property
    def tail(self):
        return self.quotients[self.tail_start:]

    @property
    def representatives(self):
        return np.array([c.representative for c in self.clusters])

    @property
    def value(self):
        """The one-sided directional derivative when the derived set is a singleton."""
        return self.clusters[0].representative if self.verdict == SINGLETON else None

    def hull(self):
        """Componentwise bounds of all clustered quotients."""
        if not self.clusters:
            tail = self.tail
            return tail.min(axis=0), tail.max(axis=0)
        lo = np.min([c.lower for c in self.clusters], axis=0)
        hi = np.max([c.upper for c in self.clusters], axis=0)
        return lo, hi

    def csv_rows(self):
        header = ["t"] + [f"q{i}" for i in range(self.quotients.shape[1])]
        rows = [[float(t), *map(float, q)] for t, q in zip(self.steps, self.quotients)]
        return header, rows

    def to_dict(self):
        out = {
            "base": self.base.tolist(),
            "direction": self.direction.tolist(),
            "steps": self.steps.tolist(),
            "quotients": self.quotients.tolist(),
            "tail_start": self.tail_start,
            "verdict": self.verdict,
            "cluster_tol": self.cluster_tol,
            "stability": self.stability,
            "clusters": [c.to_dict() for c in self.clusters],
        }
        if self.verdict is not None and self.verdict != EMPTY and self.verdict != DIVERGENT:
            lo, hi = self.hull()
            out["hull"] = [lo.tolist(), hi.tolist()]
        return out


def difference_quotients(f, y, v, steps):
    """Quotients ``(f(y + t v) - f(y)) / t`` for every ``t`` in ``steps``."""
    y = as_point(y, f.dim)
    v = as_point(v, f.dim)
    fy = evaluate(f, y)
    out = np.empty((len(steps), f.codomain_dim))
    for k, t in enumerate(steps):
        out[k] = (evaluate(f, y + t * v, t=float(t)) - fy) / t
    return out


def delta_derived_set(f, y, v, delta, grid_count, ratio=0.7):
    """Raw snapshot of the delta-approximating derived set.

    Steps lie on the lattice ``ratio**k`` (k integer), taking the
    ``grid_count`` largest lattice points below ``delta``.  Snapshots for
    different ``delta`` therefore share quotients wherever their grids overlap.
    """
    if not delta > 0:
        raise ValueError("delta must be positive")
    y = as_point(y, f.dim)
    v = as_point(v, f.dim)
    k0 = int(np.floor(np.log(delta) / np.log(ratio)))
    while ratio**k0 >= delta:
        k0 += 1
    while ratio ** (k0 - 1) < delta:
        k0 -= 1
    steps = np.power(ratio, np.arange(k0, k0 + grid_count, dtype=float))
    q = difference_quotients(f, y, v, steps) if grid_count else np.empty((0, f.codomain_dim))
    return DerivedSetSample(y, v, steps, q, verdict=EMPTY if grid_count == 0 else None)


def _cluster(points, tol):
    if len(points) == 1:
        return np.zeros(1, dtype=int)
    labels = fcluster(linkage(points, method="single"), t=tol, criterion="distance")
    # relabel by first appearance so the output order is deterministic
    order = {}
    for lab in labels:
        order.setdefault(lab, len(order))
    return np.array([order[lab] for lab in labels])


def _stable_index(q):
    """Index of the quotient whose neighbours agree best with it."""
    n = len(q)
    if n <= 2:
        return n - 1, float(np.linalg.norm(q[-1] - q[0])) if n == 2 else 0.0
    d = np.linalg.norm(np.diff(q, axis=0), axis=1)
    local = d[:-1] + d[1:]
    k = int(np.argmin(local))
    return k + 1, float(max(d[k], d[k + 1]))


def derived_set_estimate(f, y, v, schedule=None, cluster_tol=None):
    """Estimate the derived set of ``f`` at ``y`` in direction ``v``.

    Quotients from the second half of ``schedule`` are grouped by
    single-linkage clustering at radius ``cluster_tol`` (default
    ``1e-3 * max(1, |v|)``).  Verdicts:

    * ``divergent`` when tail norms exceed ``1e6 * (1 + |v|)`` and keep growing
      over the last ten steps;
    * ``singleton`` for one cluster of spread at most ``cluster_tol``; its
      representative is the most stable tail quotient;
    * ``multivalued`` otherwise.
    """
    schedule = schedule or StepSchedule()
    y = as_point(y, f.dim)
    v = as_point(v, f.dim)
    vnorm = float(np.linalg.norm(v))
    if vnorm == 0.0:
        raise DegenerateDirection("direction must be nonzero")
    if cluster_tol is None:
        cluster_tol = 1e-3 * max(1.0, vnorm)
    if not cluster_tol > 0:
        raise ValueError("cluster_tol must be positive")

    steps = schedule.steps
    q = difference_quotients(f, y, v, steps)
    start = schedule.tail_start
    tail = q[start:]
    norms = np.linalg.norm(tail, axis=1)
    window = norms[-DIVERGENCE_WINDOW:]
    if (not np.all(np.isfinite(norms))
            or (norms.max() > DIVERGENCE_FACTOR * (1.0 + vnorm) and np.all(np.diff(window) > 0))):
        return DerivedSetSample(y, v, steps, q, start, (), DIVERGENT, cluster_tol)

    labels = _cluster(tail, cluster_tol)
    clusters = []
    for lab in range(labels.max() + 1):
        members = tail[labels == lab]
        mean = members.mean(axis=0)
        spread = float(np.max(np.linalg.norm(members - mean, axis=1)))
        clusters.append(Cluster(mean, len(members), spread,
                                members.min(axis=0), members.max(axis=0)))

    stability = float("nan")
    if len(clusters) == 1 and clusters[0].spread <= cluster_tol:
        verdict = SINGLETON
        k, stability = _stable_index(tail)
        c = clusters[0]
        clusters = [Cluster(tail[k].copy(), c.count, c.spread, c.lower, c.upper)]
    else:
        verdict = MULTIVALUED
    return DerivedSetSample(y, v, steps, q, start, tuple(clusters), verdict,
                            cluster_tol, stability)


def one_sided_directional(f, y, v, schedule=None, tol=1e-6, cluster_tol=None):
    """One-sided directional derivative of ``f`` at ``y`` along ``v``.

    Returns the derivative vector, or the verdict string (``"multivalued"``,
    ``"divergent"``) when the derived set is not a single point resolved to
    within ``tol``.
    """
    s = derived_set_estimate(f, y, v, schedule, cluster_tol)
    if s.verdict == SINGLETON and s.stability <= tol:
        return s.value
    if s.verdict == SINGLETON:
        return MULTIVALUED
    return s.verdict


def bilateral_directional(f, y, v, schedule=None, tol=1e-6):
    """Two-sided directional derivative, or ``None`` if the one-sided ones disagree."""
    plus = one_sided_directional(f, y, v, schedule, tol)
    minus = one_sided_directional(f, y, -np.asarray(v, dtype=float), schedule, tol)
    if isinstance(plus, str) or isinstance(minus, str):
        return None
    if np.linalg.norm(plus + minus) > tol * max(1.0, float(np.linalg.norm(plus))):
        return None
    return 0.5 * (plus - minus)


@dataclass(frozen=True)
class GateauxCandidate:
    base: np.ndarray
    matrix: np.ndarray
    directional: dict = field(repr=False)
    linearity_residual: float = 0.0
    homogeneity_residual: float = 0.0

    def to_dict(self):
        return {
            "base": self.base.tolist(),
            "matrix": self.matrix.tolist(),
            "linearity_residual": self.linearity_residual,
            "homogeneity_residual": self.homogeneity_residual,
            "directional": [
                {"direction": list(k), "value": v if isinstance(v, str) else v.tolist()}
                for k, v in self.directional.items()
            ],
        }


def gateaux_assemble(g, x, schedule=None, tol=1e-6, probes=None, seed=0):
    """Assemble a Gateaux derivative candidate for ``g`` at ``x``.

    Columns come from the one-sided derivatives along ``+e_i``.  The
    derivatives along ``-e_i`` and along the probe directions (default: four
    seeded random unit vectors) measure how far the directional map is from
    being linear.
    """
    x = as_point(x, g.dim)
    n = g.dim
    if probes is None:
        P = rng_for(seed, "gateaux-probes").standard_normal((4, n))
        probes = P / np.linalg.norm(P, axis=1, keepdims=True)
    directional = {}
    cols, homog = [], 0.0
    for i in range(n):
        e = np.zeros(n)
        e[i] = 1.0
        plus = one_sided_directional(g, x, e, schedule, tol)
        minus = one_sided_directional(g, x, -e, schedule, tol)
        directional[tuple(e)] = plus
        directional[tuple(-e)] = minus
        for d, val in ((e, plus), (-e, minus)):
            if isinstance(val, str):
                raise NotDirectionallyDifferentiable(
                    f"derived set along {d.tolist()} is {val}")
        cols.append(plus)
        homog = max(homog, float(np.linalg.norm(plus + minus)))
    M = np.column_stack(cols)
    lin = 0.0
    for p in np.atleast_2d(probes):
        p = as_point(p, n)
        val = one_sided_directional(g, x, p, schedule, tol)
        directional[tuple(p)] = val
        lin = float("inf") if isinstance(val, str) else max(lin, float(np.linalg.norm(val - M @ p)))
    return GateauxCandidate(x, M, directional, lin, homog)
