"""Evaluable maps between open subsets of R^n, inverse pairs, and the catalog.

Points are 1-D float arrays.  Every map carries an open domain and refuses to
evaluate outside it (boundary points included).
"""

import re
import zlib
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

from .errors import DomainViolation, UnknownScenario
from .linalg import sym_to_vec, vec_to_sym

__all__ = [
    "as_point",
    "vector_norm",
    "rng_for",
    "Ball",
    "Box",
    "SpdCone",
    "EvaluableMap",
    "MapPair",
    "InverseCheckReport",
    "evaluate",
    "compose",
    "check_inverse_pair",
    "catalog_get",
    "catalog_names",
    "register_map",
]


def as_point(p, dim=None):
    """Coerce ``p`` to a finite 1-D float array."""
    p = np.atleast_1d(np.asarray(p, dtype=float))
    if p.ndim != 1 or p.size < 1:
        raise ValueError(f"a point must be a non-empty vector, got shape {p.shape}")
    if not np.all(np.isfinite(p)):
        raise ValueError("point has non-finite coordinates")
    if dim is not None and p.size != dim:
        raise ValueError(f"expected dimension {dim}, got {p.size}")
    return p


def vector_norm(v, kind="euclidean"):
    v = np.asarray(v, dtype=float)
    if kind == "euclidean":
        return float(np.linalg.norm(v))
    if kind == "sup":
        return float(np.max(np.abs(v))) if v.size else 0.0
    raise ValueError(f"unknown norm {kind!r}")


def rng_for(seed, label=""):
    """Generator derived from ``seed`` and a stable text label.

    Distinct labels give independent streams, so adding a consumer never
    shifts the randomness seen by another.
    """
    return np.random.default_rng([int(seed), zlib.crc32(label.encode())])


def _uniform_ball(rng, center, radius, n, norm="euclidean"):
    dim = center.size
    if norm == "sup":
        return center + radius * rng.uniform(-1.0, 1.0, size=(n, dim))
    g = rng.standard_normal((n, dim))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    r = radius * rng.uniform(size=(n, 1)) ** (1.0 / dim)
    return center + r * g


# -- domains -----------------------------------------------------------------


class _Domain:
    kind = ""
    sample_radius: Optional[float] = None

    def inscribed(self):
        """Center and radius of the ball used for sampling."""
        raise NotImplementedError

    def sample(self, rng, n):
        center, radius = self.inscribed()
        return _uniform_ball(rng, center, radius, n, getattr(self, "norm", "euclidean"))

    def check(self, p, t=None):
        if p.size != self.dim:
            raise DomainViolation(
                f"point of dimension {p.size} given to a {self.dim}-dimensional {self.kind}",
                point=p, t=t)
        if not self.contains(p):
            where = f" at t={t:.6g}" if t is not None else ""
            raise DomainViolation(f"point {p.tolist()} is not inside the open {self.kind}{where}",
                                  point=p, t=t)


@dataclass(frozen=True, eq=False)
class Ball(_Domain):
    center: np.ndarray
    radius: float
    norm: str = "euclidean"
    sample_radius: Optional[float] = None
    kind = "ball"

    def __post_init__(self):
        object.__setattr__(self, "center", as_point(self.center))
        if not self.radius > 0:
            raise ValueError("ball radius must be positive")

    @property
    def dim(self):
        return self.center.size

    def contains(self, p):
        return vector_norm(p - self.center, self.norm) < self.radius

    def margin(self, p):
        return self.radius - vector_norm(p - self.center, self.norm)

    def inscribed(self):
        r = self.sample_radius if self.sample_radius is not None else 0.9 * self.radius
        return self.center, r


@dataclass(frozen=True, eq=False)
class Box(_Domain):
    """Open box; bounds may be infinite, in which case ``sample_radius`` is required."""

    lower: np.ndarray
    upper: np.ndarray
    sample_center: Optional[np.ndarray] = None
    sample_radius: Optional[float] = None
    kind = "box"

    def __post_init__(self):
        lo = np.atleast_1d(np.asarray(self.lower, dtype=float))
        hi = np.atleast_1d(np.asarray(self.upper, dtype=float))
        if lo.shape != hi.shape or lo.ndim != 1:
            raise ValueError("box bounds must be vectors of equal length")
        if not np.all(lo < hi):
            raise ValueError("box needs lower < upper componentwise")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)
        if self.sample_center is not None:
            object.__setattr__(self, "sample_center", as_point(self.sample_center, lo.size))
        bounded = np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))
        if not bounded and self.sample_radius is None:
            raise ValueError("an unbounded box needs an explicit sample_radius")

    @property
    def dim(self):
        return self.lower.size

    def contains(self, p):
        return bool(np.all(p > self.lower) and np.all(p < self.upper))

    def margin(self, p):
        return float(min(np.min(p - self.lower), np.min(self.upper - p)))

    def inscribed(self):
        if self.sample_center is not None:
            c = self.sample_center
        elif np.all(np.isfinite(self.lower)) and np.all(np.isfinite(self.upper)):
            c = 0.5 * (self.lower + self.upper)
        else:
            c = np.clip(np.zeros(self.dim), self.lower, self.upper)
        if self.sample_radius is not None:
            return c, self.sample_radius
        return c, 0.9 * self.margin(c)


@dataclass(frozen=True, eq=False)
class SpdCone(_Domain):
    """The open SPD cone in scaled upper-triangle coordinates.

    Membership is positive definiteness.  Sampling uses a ball around
    ``center`` (a coordinate vector) of radius ``sample_radius``.
    """

    d: int
    center: Optional[np.ndarray] = None
    sample_radius: Optional[float] = None
    kind = "spd-cone"

    def __post_init__(self):
        if self.center is not None:
            object.__setattr__(self, "center", as_point(self.center, self.dim))

    @property
    def dim(self):
        return self.d * (self.d + 1) // 2

    def contains(self, p):
        return bool(np.linalg.eigvalsh(vec_to_sym(p))[0] > 0)

    def margin(self, p):
        # Frobenius distance to the boundary equals the smallest eigenvalue.
        return float(np.linalg.eigvalsh(vec_to_sym(p))[0])

    def inscribed(self):
        c = self.center if self.center is not None else sym_to_vec(np.eye(self.d))
        r = self.sample_radius if self.sample_radius is not None else 0.9 * self.margin(c)
        return c, r


def whole_space(dim, sample_radius=1.0, sample_center=None):
    return Box(np.full(dim, -np.inf), np.full(dim, np.inf),
               sample_center=sample_center, sample_radius=sample_radius)


def interval(lo, hi):
    return Box([lo], [hi])


# -- maps --------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class EvaluableMap:
    domain: _Domain
    codomain_dim: int
    fn: Callable[[np.ndarray], np.ndarray]
    name: str = ""

    @property
    def dim(self):
        return self.domain.dim

    def __call__(self, p):
        return evaluate(self, p)


def evaluate(m, p, t=None):
    """Evaluate ``m`` at ``p``; raise DomainViolation unless ``p`` is strictly inside."""
    p = np.atleast_1d(np.asarray(p, dtype=float))
    m.domain.check(p, t=t)
    out = np.atleast_1d(np.asarray(m.fn(p.copy()), dtype=float))
    if out.shape != (m.codomain_dim,):
        raise ValueError(f"map {m.name!r} returned shape {out.shape}, "
                         f"expected ({m.codomain_dim},)")
    return out


def compose(outer, inner, name=None):
    """The map ``outer o inner`` on ``inner``'s domain."""
    if inner.codomain_dim != outer.dim:
        raise ValueError("dimension mismatch in composition")

    def fn(p):
        return evaluate(outer, evaluate(inner, p))

    return EvaluableMap(inner.domain, outer.codomain_dim, fn,
                        name or f"{outer.name}∘{inner.name}")


@dataclass(frozen=True, eq=False)
class MapPair:
    g: EvaluableMap
    f: EvaluableMap
    declared_inverse: bool = False
    name: str = ""

    def __post_init__(self):
        if self.g.dim != self.f.codomain_dim or self.f.dim != self.g.codomain_dim:
            raise ValueError("g: U -> V and f: V -> U must have matching dimensions")


@dataclass(frozen=True, eq=False)
class InverseCheckReport:
    sample_count: int
    tol: float
    max_fg_residual: float
    max_gf_residual: float
    passed: bool
    pair: MapPair

    def to_dict(self):
        return {
            "sample_count": self.sample_count,
            "tol": self.tol,
            "max_fg_residual": self.max_fg_residual,
            "max_gf_residual": self.max_gf_residual,
            "passed": self.passed,
        }


def check_inverse_pair(pair, sample_count=1000, tol=1e-9, rng=None, norm="euclidean"):
    """Sample both domains and measure how far f∘g and g∘f are from the identity."""
    if sample_count < 1:
        raise ValueError("sample_count must be >= 1")
    if not tol > 0:
        raise ValueError("tol must be positive")
    if rng is None:
        rng = rng_for(0, "check_inverse_pair")
    xs = pair.g.domain.sample(rng, sample_count)
    ys = pair.f.domain.sample(rng, sample_count)
    fg = max(vector_norm(evaluate(pair.f, evaluate(pair.g, x)) - x, norm) for x in xs)
    gf = max(vector_norm(evaluate(pair.g, evaluate(pair.f, y)) - y, norm) for y in ys)
    passed = fg <= tol and gf <= tol
    return InverseCheckReport(sample_count, tol, fg, gf, passed,
                              replace(pair, declared_inverse=passed))


# -- catalog -----------------------------------------------------------------

_CATALOG = {}


def register_map(name, factory, standalone=False):
    """Register a catalog entry.

    ``factory(**params)`` returns a :class:`MapPair`, or an
    :class:`EvaluableMap` when ``standalone`` is true.
    """
    _CATALOG[name] = (factory, standalone)


def catalog_names():
    """Catalog keys with a flag telling standalone maps from inverse pairs."""
    return {name: ("map" if standalone else "pair") for name, (_, standalone) in _CATALOG.items()}


def catalog_get(name, **params):
    m = re.fullmatch(r"identity-(\d+)", name)
    if m:
        return _identity(int(m.group(1)))
    try:
        factory, _ = _CATALOG[name]
    except KeyError:
        raise UnknownScenario(f"no catalog entry named {name!r}") from None
    return factory(**params)


def _identity(n=2):
    dom = Ball(np.zeros(n), 1.0)
    ident = EvaluableMap(dom, n, lambda p: p, f"id{n}")
    return MapPair(ident, ident, name=f"identity-{n}")


def _cube(half_width=1.0):
    dom = interval(-half_width, half_width)
    cod = interval(-half_width**3, half_width**3)
    g = EvaluableMap(dom, 1, lambda p: p**3, "cube")
    f = EvaluableMap(cod, 1, np.cbrt, "cbrt")
    return MapPair(g, f, name="cube")


def _exp_log(lo=-1.0, hi=1.0):
    g = EvaluableMap(interval(lo, hi), 1, np.exp, "exp")
    f = EvaluableMap(interval(np.exp(lo), np.exp(hi)), 1, np.log, "log")
    return MapPair(g, f, name="exp-log")


def _affine(A=((2.0, 0.0), (0.0, 3.0)), b=None, sample_radius=1.0):
    A = np.array(A, dtype=float)
    n = A.shape[0]
    if A.shape != (n, n) or np.linalg.matrix_rank(A) < n:
        raise ValueError("affine map needs a square invertible matrix")
    b = np.zeros(n) if b is None else as_point(b, n)
    Ainv = np.linalg.inv(A)
    g = EvaluableMap(whole_space(n, sample_radius), n, lambda x: A @ x + b, "affine")
    f = EvaluableMap(whole_space(n, sample_radius, b), n, lambda y: Ainv @ (y - b),
                     "affine-inverse")
    return MapPair(g, f, name="affine")


def _poly2(c=1.0, sample_radius=1.0):
    # Triangular polynomial diffeomorphism of the plane with polynomial inverse.
    g = EvaluableMap(whole_space(2, sample_radius), 2,
                     lambda x: np.array([x[0] + c * x[1] ** 2, x[1]]), "poly2")
    f = EvaluableMap(whole_space(2, sample_radius), 2,
                     lambda y: np.array([y[0] - c * y[1] ** 2, y[1]]), "poly2-inverse")
    return MapPair(g, f, name="poly2")


def tsinlog_scalar(t):
    t = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = t * np.sin(np.log(np.abs(t)))
    return np.where(t == 0.0, 0.0, out)


def _tsinlog(half_width=1.0):
    """t sin(log|t|), extended by 0 at the origin (odd extension for t < 0)."""
    return EvaluableMap(interval(-half_width, half_width), 1, tsinlog_scalar, "tsinlog")


def _karcher_pair(**params):
    from .karcher import karcher_map_pair

    return karcher_map_pair(**params)


register_map("identity-n", _identity)
register_map("cube", _cube)
register_map("exp-log", _exp_log)
register_map("affine", _affine)
register_map("poly2", _poly2)
register_map("tsinlog", _tsinlog, standalone=True)
register_map("karcher-pair", _karcher_pair)
