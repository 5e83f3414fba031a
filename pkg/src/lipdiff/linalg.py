"""Symmetric-matrix primitives on the SPD cone.

All matrix functions go through a symmetric eigendecomposition and apply the
scalar function to the eigenvalues.  Matrices are plain ``ndarray`` objects;
validation happens at the public entry points.
"""

from collections import namedtuple

import numpy as np

from .errors import AsymmetricInput, NotSpd

__all__ = [
    "SpdMatrix",
    "SpdFunctions",
    "spd_functions",
    "check_symmetric",
    "check_spd",
    "symmetrize",
    "sym_apply",
    "sqrtm",
    "invsqrtm",
    "logm",
    "expm",
    "powm",
    "sym_to_vec",
    "vec_to_sym",
    "sym_dim",
    "random_spd",
]

SYM_TOL = 1e-12

SpdFunctions = namedtuple("SpdFunctions", "sqrt inv_sqrt log exp")


def symmetrize(M):
    return 0.5 * (M + M.T)


def check_symmetric(M, tol=SYM_TOL):
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise AsymmetricInput(f"expected a square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise AsymmetricInput("matrix has non-finite entries")
    scale = max(1.0, float(np.max(np.abs(M))))
    if np.max(np.abs(M - M.T)) > tol * scale:
        raise AsymmetricInput("matrix is not symmetric")
    return symmetrize(M)


def check_spd(M, tol=SYM_TOL):
    M = check_symmetric(M, tol)
    lam_min = np.linalg.eigvalsh(M)[0]
    if not lam_min > 0:
        raise NotSpd(f"smallest eigenvalue {lam_min:.3e} is not positive")
    return M


def sym_apply(M, fn):
    """Apply the scalar function ``fn`` to a symmetric matrix through its eigenvalues."""
    w, V = np.linalg.eigh(M)
    return symmetrize((V * fn(w)) @ V.T)


def _positive_eig(M):
    w, V = np.linalg.eigh(M)
    if not w[0] > 0:
        raise NotSpd(f"smallest eigenvalue {w[0]:.3e} is not positive")
    return w, V


def sqrtm(M):
    w, V = _positive_eig(M)
    return symmetrize((V * np.sqrt(w)) @ V.T)


def invsqrtm(M):
    w, V = _positive_eig(M)
    return symmetrize((V / np.sqrt(w)) @ V.T)


def logm(M):
    w, V = _positive_eig(M)
    return symmetrize((V * np.log(w)) @ V.T)


def powm(M, p):
    w, V = _positive_eig(M)
    return symmetrize((V * w**p) @ V.T)


def expm(S):
    """Matrix exponential of a symmetric matrix (no positivity required)."""
    return sym_apply(S, np.exp)


class SpdMatrix:
    """A validated symmetric positive-definite matrix.

    The eigendecomposition is computed once at construction and reused by
    :meth:`sqrt`, :meth:`inv_sqrt` and :meth:`log`.
    """

    __slots__ = ("array", "_w", "_V")

    def __init__(self, entries):
        A = check_symmetric(entries)
        w, V = np.linalg.eigh(A)
        if not w[0] > 0:
            raise NotSpd(f"smallest eigenvalue {w[0]:.3e} is not positive")
        A.setflags(write=False)
        self.array = A
        self._w = w
        self._V = V

    @property
    def dim(self):
        return self.array.shape[0]

    @property
    def eigenvalues(self):
        return self._w.copy()

    def _fn(self, values):
        return symmetrize((self._V * values) @ self._V.T)

    def sqrt(self):
        return self._fn(np.sqrt(self._w))

    def inv_sqrt(self):
        return self._fn(1.0 / np.sqrt(self._w))

    def log(self):
        return self._fn(np.log(self._w))

    def __array__(self, dtype=None, copy=None):
        return np.array(self.array, dtype=dtype)

    def __repr__(self):
        return f"SpdMatrix({self.array.tolist()!r})"


def spd_functions(M):
    """Square root, inverse square root and logarithm of ``M``, plus ``exp(M)``."""
    S = M if isinstance(M, SpdMatrix) else SpdMatrix(M)
    return SpdFunctions(S.sqrt(), S.inv_sqrt(), S.log(), expm(S.array))


def sym_dim(d):
    return d * (d + 1) // 2


def _dim_from_vec(k):
    d = int(round((np.sqrt(8 * k + 1) - 1) / 2))
    if sym_dim(d) != k:
        raise ValueError(f"{k} is not a triangular number")
    return d


def sym_to_vec(M):
    """Upper triangle of ``M`` with off-diagonals scaled by sqrt(2).

    The scaling makes the Euclidean norm of the vector equal to the
    Frobenius norm of the matrix.
    """
    M = np.asarray(M, dtype=float)
    i, j = np.triu_indices(M.shape[0])
    scale = np.where(i == j, 1.0, np.sqrt(2.0))
    return M[i, j] * scale


def vec_to_sym(v):
    v = np.asarray(v, dtype=float)
    d = _dim_from_vec(v.size)
    i, j = np.triu_indices(d)
    scale = np.where(i == j, 1.0, 1.0 / np.sqrt(2.0))
    M = np.zeros((d, d))
    M[i, j] = v * scale
    M[j, i] = v * scale
    return M


def random_spd(d, rng, cond=10.0):
    """Random SPD matrix with eigenvalues log-uniform in ``[1, cond]``.

    For ``d >= 2`` the extreme eigenvalues are pinned at 1 and ``cond``.
    """
    Q, _ = np.linalg.qr(rng.standard_normal((d, d)))
    w = np.exp(rng.uniform(0.0, np.log(cond), size=d))
    if d >= 2:
        w[:2] = 1.0, cond
    return symmetrize((Q * w) @ Q.T)
