"""Finite-difference Jacobians, Frechet remainders, invertibility and Lipschitz estimates."""

from dataclasses import dataclass, replace

import numpy as np

from .errors import DomainViolation
from .maps import as_point, evaluate, rng_for, vector_norm

__all__ = [
    "DEFAULT_FD_STEP",
    "JacobianReport",
    "InvertibilityReport",
    "LipschitzEstimate",
    "fd_jacobian",
    "frechet_residual",
    "invertibility_report",
    "lipschitz_estimate",
    "default_radii",
]

DEFAULT_FD_STEP = float(np.finfo(float).eps ** (1.0 / 3.0))

LIPSCHITZ = "lipschitz"
BLOWUP = "blowup"
INCONCLUSIVE = "inconclusive"

# Profile must stay under this multiple of its running minimum to count as stable.
STABLE_FACTOR = 1.5
# Growth across the profile that counts as blowup.
BLOWUP_FACTOR = 10.0
SHORT_SEPARATIONS = 10.0 ** -np.arange(1, 5)
DEGENERATE_SEPARATION = 1e-14


@dataclass(frozen=True)
class InvertibilityReport:
    singular_values: np.ndarray
    sigma_min: float
    sigma_max: float
    condition: float
    threshold: float
    invertible: bool
    reason: str = ""

    def to_dict(self):
        return {
            "singular_values": self.singular_values.tolist(),
            "sigma_min": self.sigma_min,
            "sigma_max": self.sigma_max,
            "condition": self.condition,
            "threshold": self.threshold,
            "invertible": self.invertible,
            "reason": self.reason,
        }


def invertibility_report(J, singular_threshold=None, abs_floor=1e-8):
    """SVD-based invertibility verdict for a derivative matrix.

    ``J`` is invertible when it is square and its smallest singular value
    exceeds ``singular_threshold``, which defaults to
    ``max(1e-8 * sigma_max, abs_floor)``.  The absolute floor matters for
    matrices whose every entry sits at the finite-difference noise level.
    """
    J = np.atleast_2d(np.asarray(J, dtype=float))
    if not np.all(np.isfinite(J)):
        raise ValueError("matrix has non-finite entries")
    s = np.linalg.svd(J, compute_uv=False)
    smax = float(s[0]) if s.size else 0.0
    smin = float(s[-1]) if s.size else 0.0
    if singular_threshold is None:
        singular_threshold = max(1e-8 * smax, abs_floor)
    cond = smax / smin if smin > 0 else float("inf")
    if J.shape[0] != J.shape[1]:
        return InvertibilityReport(s, smin, smax, cond, singular_threshold, False,
                                   f"non-square {J.shape[0]}x{J.shape[1]}")
    ok = smin > singular_threshold
    reason = "" if ok else f"sigma_min {smin:.3e} <= threshold {singular_threshold:.3e}"
    return InvertibilityReport(s, smin, smax, cond, singular_threshold, ok, reason)


@dataclass(frozen=True)
class JacobianReport:
    base: np.ndarray
    matrix: np.ndarray
    step: float
    scheme: str
    invertibility: InvertibilityReport
    residual_curve: tuple = ()

    @property
    def singular_values(self):
        return self.invertibility.singular_values

    @property
    def condition(self):
        return self.invertibility.condition

    @property
    def invertible(self):
        return self.invertibility.invertible

    def with_residual(self, curve):
        return replace(self, residual_curve=tuple(curve))

    def csv_rows(self):
        return ["radius", "residual"], [list(map(float, row)) for row in self.residual_curve]

    def to_dict(self):
        return {
            "base": self.base.tolist(),
            "matrix": self.matrix.tolist(),
            "step": self.step,
            "scheme": self.scheme,
            **self.invertibility.to_dict(),
            "residual_curve": [list(map(float, row)) for row in self.residual_curve],
        }


def fd_jacobian(g, x, step=None, scheme="central", singular_threshold=None):
    """Finite-difference Jacobian of ``g`` at ``x``.

    Coordinate ``i`` is perturbed by ``h = step * max(1, |x_i|)``; the default
    step is ``eps**(1/3)``.
    """
    x = as_point(x, g.dim)
    if step is None:
        step = DEFAULT_FD_STEP
    if scheme not in ("central", "forward"):
        raise ValueError(f"unknown scheme {scheme!r}")
    J = np.empty((g.codomain_dim, g.dim))
    gx = evaluate(g, x) if scheme == "forward" else None
    for i in range(g.dim):
        h = step * max(1.0, abs(x[i]))
        e = np.zeros(g.dim)
        e[i] = h
        if scheme == "central":
            J[:, i] = (evaluate(g, x + e, t=h) - evaluate(g, x - e, t=-h)) / (2 * h)
        else:
            J[:, i] = (evaluate(g, x + e, t=h) - gx) / h
    return JacobianReport(x, J, step, scheme, invertibility_report(J, singular_threshold))


def _unit_directions(rng, n, count):
    basis = np.vstack([np.eye(n), -np.eye(n)])
    if count <= 0:
        return basis
    D = rng.standard_normal((count, n))
    return np.vstack([basis, D / np.linalg.norm(D, axis=1, keepdims=True)])


def frechet_residual(g, x, J, radii, sphere_samples=32, rng=None):
    """Normalized first-order remainder ``|g(x+u) - g(x) - J u| / |u|`` per radius.

    For each radius the supremum is taken over ``±e_i`` and
    ``sphere_samples`` random unit directions (the same directions at every
    radius).  Returns a list of ``(radius, residual)`` pairs.
    """
    x = as_point(x, g.dim)
    J = np.atleast_2d(np.asarray(J, dtype=float))
    radii = np.asarray(radii, dtype=float)
    if np.any(np.diff(radii) >= 0) or np.any(radii <= 0):
        raise ValueError("radii must be positive and strictly decreasing")
    if rng is None:
        rng = rng_for(0, "frechet-residual")
    dirs = _unit_directions(rng, g.dim, sphere_samples)
    gx = evaluate(g, x)
    curve = []
    for r in radii:
        worst = 0.0
        for d in dirs:
            u = r * d
            rem = evaluate(g, x + u, t=float(r)) - gx - J @ u
            worst = max(worst, float(np.linalg.norm(rem) / np.linalg.norm(u)))
        curve.append((float(r), worst))
    return curve


@dataclass(frozen=True)
class LipschitzEstimate:
    center: np.ndarray
    profile: tuple  # of (radius, estimate, pair count)
    verdict: str
    norm: str = "euclidean"
    skipped_pairs: int = 0

    @property
    def radii(self):
        return np.array([p[0] for p in self.profile])

    @property
    def estimates(self):
        return np.array([p[1] for p in self.profile])

    @property
    def constant(self):
        """Largest estimate over the profile."""
        return float(self.estimates.max())

    def csv_rows(self):
        return ["radius", "estimate", "pairs"], [[float(r), float(m), int(c)]
                                                 for r, m, c in self.profile]

    def to_dict(self):
        return {
            "center": self.center.tolist(),
            "norm": self.norm,
            "profile": [[float(r), float(m), int(c)] for r, m, c in self.profile],
            "verdict": self.verdict,
            "constant": self.constant,
            "skipped_pairs": self.skipped_pairs,
        }


def _unit_pairs(rng, n, count):
    """Pairs in the unit ball: half uniform, half at short separations.

    Short pairs use separations 1e-1 .. 1e-4; every other one is anchored at
    the center, where isolated singularities sit.
    """
    n_uniform = count - count // 2
    out = []
    for _ in range(n_uniform):
        out.append(_ball_points(rng, n, 2, 1.0))
    for j in range(count // 2):
        s = SHORT_SEPARATIONS[j % len(SHORT_SEPARATIONS)]
        d = rng.standard_normal(n)
        d /= np.linalg.norm(d)
        if j % 2 == 0:
            a = np.zeros(n)
        else:
            a = _ball_points(rng, n, 1, 1.0 - s)[0]
        out.append(np.array([a, a + s * d]))
    return out


def _ball_points(rng, n, k, radius):
    d = rng.standard_normal((k, n))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    return radius * rng.uniform(size=(k, 1)) ** (1.0 / n) * d


def _classify(estimates):
    m = np.asarray(estimates, dtype=float)
    if m.size == 0 or not np.all(np.isfinite(m)):
        return BLOWUP if m.size else INCONCLUSIVE
    growth = max((m[j] / m[i] for i in range(m.size) for j in range(i + 1, m.size) if m[i] > 0),
                 default=1.0)
    if growth >= BLOWUP_FACTOR:
        return BLOWUP
    running_min = np.minimum.accumulate(m)
    if np.all(m[1:] <= STABLE_FACTOR * running_min[:-1]):
        return LIPSCHITZ
    return INCONCLUSIVE


def lipschitz_estimate(f, center, radii, pairs_per_radius=64, rng=None, norm="euclidean"):
    """Sampled local Lipschitz constants of ``f`` on shrinking balls around ``center``.

    The same normalized pairs are reused at every radius, scaled into the
    ball, so a map that is homogeneous about ``center`` produces an exactly
    scaled profile.  Verdict ``blowup`` when the estimate grows tenfold as
    the radius shrinks, ``lipschitz`` when it never exceeds 1.5 times its
    running minimum, ``inconclusive`` otherwise.
    """
    center = as_point(center, f.dim)
    radii = np.asarray(radii, dtype=float)
    if np.any(np.diff(radii) >= 0) or np.any(radii <= 0):
        raise ValueError("radii must be positive and strictly decreasing")
    if rng is None:
        rng = rng_for(0, "lipschitz-estimate")
    pairs = _unit_pairs(rng, f.dim, pairs_per_radius)
    profile, skipped = [], 0
    for r in radii:
        best, used = 0.0, 0
        for a, b in pairs:
            y1 = center + r * a
            y2 = center + r * b
            sep = vector_norm(y1 - y2, norm)
            if sep < DEGENERATE_SEPARATION:
                skipped += 1
                continue
            try:
                q = vector_norm(evaluate(f, y1) - evaluate(f, y2), norm) / sep
            except DomainViolation as exc:
                raise DomainViolation(f"Lipschitz probe ball of radius {r:g} leaves the "
                                      f"domain: {exc}", point=exc.point, t=float(r)) from exc
            best = max(best, q)
            used += 1
        profile.append((float(r), best, used))
    verdict = _classify([p[1] for p in profile])
    return LipschitzEstimate(center, tuple(profile), verdict, norm, skipped)


def default_radii(domain, y, levels=3, scale=None):
    """Decreasing radii ``r0 * 10**-k`` with ``r0`` well inside ``domain`` around ``y``."""
    r0 = 0.25 * domain.margin(y)
    r0 = min(r0, 0.1 * max(1.0, float(np.linalg.norm(y)))) if scale is None else min(r0, scale)
    if not r0 > 0:
        raise DomainViolation("point is not inside the domain", point=y)
    return r0 * 10.0 ** -np.arange(levels)
