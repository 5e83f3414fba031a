"""Karcher mean on the SPD cone and the regularity of the mean in one operand.

The Karcher mean of SPD matrices ``A_1 .. A_n`` is the SPD solution ``X`` of

    sum_i log(X^-1/2 A_i X^-1/2) = 0.

Fixing ``A_1 .. A_{n-1}`` and writing ``Y = A_n``, the equation can be solved
for ``Y`` in closed form (``solve_for_Y``), which gives a smooth map ``g:
X -> Y``.  Its inverse is ``f: Y -> mean(A_1, .., A_{n-1}, Y)``, known only
through the iterative solver.  ``karcher_regularity_pipeline`` feeds this pair
to the certifier.
"""

from dataclasses import dataclass, replace

import numpy as np

from .errors import ConeViolation, DomainViolation, NoConvergence, ParseError
from .linalg import (
    SpdMatrix,
    check_spd,
    expm,
    invsqrtm,
    sqrtm,
    sym_apply,
    sym_to_vec,
    symmetrize,
    vec_to_sym,
)
from .maps import EvaluableMap, MapPair, SpdCone

__all__ = [
    "KarcherProblem",
    "KarcherSolveTrace",
    "karcher_residual",
    "karcher_mean",
    "geometric_mean_two",
    "solve_for_Y",
    "karcher_map_pair",
    "karcher_regularity_pipeline",
    "read_matrix",
    "write_matrix",
]


def _arr(M):
    return M.array if isinstance(M, SpdMatrix) else np.asarray(M, dtype=float)


def _operands(mats):
    mats = [check_spd(_arr(A)) for A in mats]
    if not mats:
        raise ValueError("need at least one operand")
    d = mats[0].shape[0]
    if any(A.shape != (d, d) for A in mats):
        raise ValueError("operands must share one dimension")
    return mats


@dataclass(frozen=True)
class KarcherProblem:
    fixed: tuple
    variable: np.ndarray

    def __post_init__(self):
        mats = _operands([*self.fixed, self.variable])
        object.__setattr__(self, "fixed", tuple(mats[:-1]))
        object.__setattr__(self, "variable", mats[-1])
        if len(mats) < 2:
            raise ValueError("a Karcher problem needs n >= 2 operands")

    @property
    def n(self):
        return len(self.fixed) + 1

    @property
    def dim(self):
        return self.variable.shape[0]

    @property
    def operands(self):
        return [*self.fixed, self.variable]


def _log_sum(Xis, mats):
    return sum(sym_apply(symmetrize(Xis @ A @ Xis), np.log) for A in mats)


def karcher_residual(X, operands):
    """``sum_i log(X^-1/2 A_i X^-1/2)`` and its Frobenius norm."""
    X = check_spd(_arr(X))
    mats = _operands(operands)
    S = symmetrize(_log_sum(invsqrtm(X), mats))
    return S, float(np.linalg.norm(S))


@dataclass(frozen=True)
class KarcherSolveTrace:
    iterates: tuple  # of (k, X_k, residual norm)
    converged: bool
    tol: float

    @property
    def iterations(self):
        return self.iterates[-1][0]

    @property
    def mean(self):
        return self.iterates[-1][1]

    @property
    def residual(self):
        return self.iterates[-1][2]

    def csv_rows(self):
        return ["iteration", "residual"], [[k, float(r)] for k, _, r in self.iterates]

    def to_dict(self):
        return {
            "converged": self.converged,
            "iterations": self.iterations,
            "tol": self.tol,
            "mean": self.mean.tolist(),
            "residual": self.residual,
            "residuals": [float(r) for _, _, r in self.iterates],
        }


def karcher_mean(operands, tol=1e-10, max_iter=500, init=None):
    """Karcher mean by the fixed-point iteration

        X <- X^1/2 exp((1/n) sum_i log(X^-1/2 A_i X^-1/2)) X^1/2

    started from the arithmetic mean (or ``init``).  Stops once the
    Frobenius norm of the residual is at most ``tol``.  The returned trace
    has ``converged=False`` if ``max_iter`` updates were not enough.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    mats = _operands(operands)
    n = len(mats)
    X = sum(mats) / n if init is None else check_spd(_arr(init))
    iterates = []
    for k in range(max_iter + 1):
        w, V = np.linalg.eigh(X)
        if not w[0] > 0:
            raise ConeViolation("iterate left the SPD cone")
        Xs = symmetrize((V * np.sqrt(w)) @ V.T)
        Xis = symmetrize((V / np.sqrt(w)) @ V.T)
        S = _log_sum(Xis, mats)
        res = float(np.linalg.norm(S))
        iterates.append((k, X, res))
        if res <= tol:
            return KarcherSolveTrace(tuple(iterates), True, tol)
        if k == max_iter:
            break
        X = symmetrize(Xs @ expm(S / n) @ Xs)
    return KarcherSolveTrace(tuple(iterates), False, tol)


def geometric_mean_two(A, B):
    """``A # B = A^1/2 (A^-1/2 B A^-1/2)^1/2 A^1/2``."""
    A, B = _operands([A, B])
    As, Ais = sqrtm(A), invsqrtm(A)
    return symmetrize(As @ sqrtm(symmetrize(Ais @ B @ Ais)) @ As)


def solve_for_Y(X, fixed):
    """The operand ``Y`` that makes ``X`` the Karcher mean of ``(*fixed, Y)``.

    ``Y = X^1/2 exp(-sum_i log(X^-1/2 A_i X^-1/2)) X^1/2``.
    """
    X = check_spd(_arr(X))
    mats = _operands(fixed) if len(fixed) else []
    Xs, Xis = sqrtm(X), invsqrtm(X)
    S = _log_sum(Xis, mats) if mats else np.zeros_like(X)
    return symmetrize(Xs @ expm(-S) @ Xs)


def karcher_map_pair(fixed=None, Y0=None, radius_fraction=0.1, tol=1e-12, max_iter=2000):
    """``(g, f)`` in scaled upper-triangle coordinates on the SPD cone.

    ``g(X) = solve_for_Y(X, fixed)`` and ``f(Y) = mean(*fixed, Y)``.  Both
    domains are the whole cone; sampling balls sit around ``X0 = f(Y0)`` and
    ``Y0`` with radius ``radius_fraction`` times the smallest eigenvalue.
    """
    if fixed is None:
        fixed = [np.eye(2), np.diag([2.0, 0.5])]
    if Y0 is None:
        Y0 = np.array([[1.5, 0.3], [0.3, 1.0]])
    fixed = tuple(_operands(fixed))
    Y0 = check_spd(_arr(Y0))
    d = Y0.shape[0]
    if fixed[0].shape != Y0.shape:
        raise ValueError("Y0 must match the fixed operands' dimension")
    trace = karcher_mean([*fixed, Y0], tol=tol, max_iter=max_iter)
    if not trace.converged:
        raise NoConvergence("Karcher mean at Y0 did not converge", trace)
    X0 = trace.mean

    def g_fn(p):
        return sym_to_vec(solve_for_Y(vec_to_sym(p), fixed))

    def f_fn(p):
        tr = karcher_mean([*fixed, vec_to_sym(p)], tol=tol, max_iter=max_iter, init=X0)
        if not tr.converged:
            raise NoConvergence("inner Karcher solve did not converge", tr)
        return sym_to_vec(tr.mean)

    lam_x = float(np.linalg.eigvalsh(X0)[0])
    lam_y = float(np.linalg.eigvalsh(Y0)[0])
    U = SpdCone(d, sym_to_vec(X0), radius_fraction * lam_x)
    V = SpdCone(d, sym_to_vec(Y0), radius_fraction * lam_y)
    g = EvaluableMap(U, U.dim, g_fn, "karcher-solve-for-Y")
    f = EvaluableMap(V, V.dim, f_fn, "karcher-mean")
    return MapPair(g, f, name="karcher-pair")


def karcher_regularity_pipeline(fixed, Y0, config=None, radius_fraction=0.1, tol=1e-12,
                                max_retries=4):
    """Certify that the Karcher mean is C^1 in its last operand near ``Y0``.

    Probe radii (Frechet remainder, Lipschitz balls, identity-check steps)
    default to ``radius_fraction`` times the smallest eigenvalue of the
    matrix they are centered on.  When a probe leaves the cone the fraction
    is halved and the run repeated, at most ``max_retries`` times.
    """
    from .derived import StepSchedule
    from .theorems import CertifyConfig, converse_ift_certify

    base = config or CertifyConfig(inverse_samples=40)
    for _ in range(max_retries + 1):
        pair = karcher_map_pair(fixed, Y0, radius_fraction, tol)
        x0, rx = pair.g.domain.inscribed()
        y0, ry = pair.f.domain.inscribed()
        cfg = base
        if cfg.residual_radii is None:
            cfg = replace(cfg, residual_radii=tuple(rx * 10.0 ** -np.arange(4)))
        if cfg.lipschitz_radii is None:
            cfg = replace(cfg, lipschitz_radii=tuple(ry * 10.0 ** -np.arange(3)))
        if cfg.identity_schedule is None:
            cfg = replace(cfg, identity_schedule=StepSchedule(rx, 0.5, 24))
        try:
            return converse_ift_certify(pair, x0, cfg)
        except DomainViolation:
            radius_fraction *= 0.5
    raise ConeViolation(f"probes kept leaving the SPD cone after {max_retries} retries")


def read_matrix(path):
    """Read a matrix file: a dimension line ``d`` followed by ``d`` rows.

    Blank lines and ``#`` comments are ignored.
    """
    rows = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if line:
                rows.append((lineno, line.split()))
    if not rows:
        raise ParseError(f"{path}: empty matrix file")
    lineno, head = rows[0]
    try:
        d = int(head[0])
    except ValueError:
        raise ParseError(f"{path}: bad dimension header", line=lineno) from None
    if len(head) != 1 or d < 1:
        raise ParseError(f"{path}: bad dimension header", line=lineno)
    body = rows[1:]
    if len(body) != d:
        raise ParseError(f"{path}: expected {d} rows, found {len(body)}")
    M = np.empty((d, d))
    for i, (lineno, parts) in enumerate(body):
        if len(parts) != d:
            raise ParseError(f"{path}: expected {d} entries", line=lineno)
        try:
            M[i] = [float(p) for p in parts]
        except ValueError:
            raise ParseError(f"{path}: non-numeric entry", line=lineno) from None
    return M


def write_matrix(path, M):
    M = np.atleast_2d(np.asarray(M, dtype=float))
    with open(path, "w") as fh:
        fh.write(f"{M.shape[0]}\n")
        for row in M:
            fh.write(" ".join(repr(float(v)) for v in row) + "\n")
