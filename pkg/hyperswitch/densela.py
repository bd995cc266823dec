"""Small dense symmetric kernels: eigendecomposition, PSD margins, null spaces, minimal gamma.

Matrices here are tiny (at most a few dozen rows), so everything is explicit
and deterministic; no iterative generalized solvers are used.
"""

from __future__ import annotations

import logging
from typing import Literal, Tuple, Union

import numpy as np

from hyperswitch.config import get_settings
from hyperswitch.exceptions import KernelMismatch, NoConvergence

logger = logging.getLogger(__name__)

SYMMETRY_TOL = 1e-12
MAX_DIM = 64
JACOBI_MAX_SWEEPS = 60


class SymMatrix:
    """Read-only real symmetric matrix, symmetrized at construction."""

    __slots__ = ("_a",)

    def __init__(self, entries: np.ndarray | list):
        a = np.array(entries, dtype=float)
        if a.ndim == 0:
            a = a.reshape(1, 1)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"symmetric matrix must be square, got shape {a.shape}")
        if a.shape[0] > MAX_DIM:
            raise ValueError(f"dimension {a.shape[0]} exceeds supported maximum {MAX_DIM}")
        scale = max(1.0, float(np.max(np.abs(a), initial=0.0)))
        asym = float(np.max(np.abs(a - a.T), initial=0.0))
        if asym > SYMMETRY_TOL * scale:
            raise ValueError(f"matrix is not symmetric (max |M - M^T| = {asym:.3e})")
        a = 0.5 * (a + a.T)
        a.setflags(write=False)
        self._a = a

    @property
    def n(self) -> int:
        return self._a.shape[0]

    @property
    def entries(self) -> np.ndarray:
        return self._a

    def __array__(self, dtype=None, copy=None):
        return self._a if dtype is None else self._a.astype(dtype)

    def __repr__(self) -> str:
        return f"SymMatrix({self._a.tolist()!r})"


MatrixLike = Union[SymMatrix, np.ndarray]


def _as_sym(M: MatrixLike) -> np.ndarray:
    if isinstance(M, SymMatrix):
        return M.entries
    a = np.asarray(M, dtype=float)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    return 0.5 * (a + a.T)


def jacobi_eig(a: np.ndarray, max_sweeps: int = JACOBI_MAX_SWEEPS) -> Tuple[np.ndarray, np.ndarray]:
    """Cyclic Jacobi rotations; returns (eigenvalues, eigenvectors as columns), unsorted."""
    a = np.array(a, dtype=float)
    n = a.shape[0]
    p = np.eye(n)
    scale = max(1.0, float(np.linalg.norm(a)))
    for _ in range(max_sweeps):
        off = float(np.sqrt(np.sum(np.triu(a, 1) ** 2)))
        if off <= 1e-15 * scale:
            return np.diag(a).copy(), p
        for k in range(n - 1):
            for l in range(k + 1, n):
                akl = a[k, l]
                if abs(akl) <= 1e-300:
                    continue
                diff = a[l, l] - a[k, k]
                if abs(akl) < abs(diff) * 1.0e-36:
                    t = akl / diff
                else:
                    phi = diff / (2.0 * akl)
                    t = 1.0 / (abs(phi) + np.sqrt(phi**2 + 1.0))
                    if phi < 0.0:
                        t = -t
                c = 1.0 / np.sqrt(t**2 + 1.0)
                s = t * c
                rot = np.eye(n)
                rot[k, k] = c
                rot[l, l] = c
                rot[k, l] = s
                rot[l, k] = -s
                a = rot.T @ a @ rot
                a[k, l] = a[l, k] = 0.0
                p = p @ rot
    residual = float(np.sqrt(np.sum(np.triu(a, 1) ** 2)))
    raise NoConvergence(f"Jacobi iteration did not converge in {max_sweeps} sweeps", residual)


def sym_eig(
    M: MatrixLike, method: Literal["lapack", "jacobi"] = "lapack"
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Eigendecomposition of a symmetric matrix.

    Returns eigenvalues in ascending order and orthonormal eigenvectors (columns).
    The residual ||MV - VD|| is verified against 1e-10 * max(1, ||M||).

    Raises:
        NoConvergence: If the kernel fails or the residual check does not pass
    """
    a = _as_sym(M)
    if a.shape[0] < 1:
        raise ValueError("sym_eig needs n >= 1")
    if method == "jacobi":
        w, v = jacobi_eig(a)
    else:
        try:
            w, v = np.linalg.eigh(a)
        except np.linalg.LinAlgError as e:
            raise NoConvergence(f"LAPACK eigh failed: {e}", float("nan")) from e
    order = np.argsort(w, kind="stable")
    w, v = w[order], v[:, order]
    scale = max(1.0, float(np.linalg.norm(a, 2)))
    residual = float(np.linalg.norm(a @ v - v * w, 2))
    if residual > 1e-10 * scale:
        raise NoConvergence("eigen-residual check failed", residual)
    return w, v


def psd_margin(M: MatrixLike) -> float:
    """Smallest eigenvalue of a symmetric matrix; >= -tol_feas means PSD up to tolerance."""
    a = _as_sym(M)
    try:
        return float(np.linalg.eigvalsh(a)[0])
    except np.linalg.LinAlgError as e:
        raise NoConvergence(f"eigvalsh failed: {e}", float("nan")) from e


def min_eigpair(M: MatrixLike) -> Tuple[float, np.ndarray]:
    """Smallest eigenvalue and a unit eigenvector for it."""
    a = _as_sym(M)
    try:
        w, v = np.linalg.eigh(a)
    except np.linalg.LinAlgError as e:
        raise NoConvergence(f"eigh failed: {e}", float("nan")) from e
    return float(w[0]), v[:, 0]


def null_space_basis(E: np.ndarray, tol_rank: float | None = None) -> np.ndarray:
    """
    Orthonormal basis of ker(E) as the columns of a q x r matrix.

    Rank is decided at the relative threshold tol_rank on the singular values.
    """
    if tol_rank is None:
        tol_rank = get_settings().tol_rank
    E = np.atleast_2d(np.asarray(E, dtype=float))
    q = E.shape[1]
    if E.size == 0 or E.shape[0] == 0:
        return np.eye(q)
    _, s, vt = np.linalg.svd(E, full_matrices=True)
    smax = float(s[0]) if s.size else 0.0
    if smax == 0.0:
        return np.eye(q)
    rank = int(np.sum(s > tol_rank * smax))
    return vt[rank:].T.copy()


def range_basis(M: MatrixLike, tol_ker: float | None = None) -> Tuple[np.ndarray, np.ndarray]:
    """Orthonormal bases (range, kernel) of a PSD matrix at relative threshold tol_ker."""
    if tol_ker is None:
        tol_ker = get_settings().tol_ker
    w, v = sym_eig(M)
    top = float(max(w[-1], 0.0))
    if top == 0.0:
        return v[:, :0], v
    mask = w > tol_ker * top
    return v[:, mask], v[:, ~mask]


def min_gamma(Mi: MatrixLike, Mj: MatrixLike, tol_ker: float | None = None) -> float:
    """
    Smallest gamma with Mi <= gamma * Mj for PSD Mi, Mj.

    The comparison is done on the range of Mj: the kernel of Mj must lie in
    the kernel of Mi, otherwise no finite gamma exists.

    Raises:
        KernelMismatch: If ker(Mj) is not contained in ker(Mi)
    """
    if tol_ker is None:
        tol_ker = get_settings().tol_ker
    a = _as_sym(Mi)
    b = _as_sym(Mj)
    w, v = sym_eig(b)
    top = float(max(w[-1], 0.0))
    mask = w > tol_ker * top if top > 0.0 else np.zeros(w.shape, dtype=bool)
    kernel = v[:, ~mask]
    scale_a = float(np.linalg.norm(a, 2))
    if kernel.shape[1]:
        leak = float(np.linalg.norm(a @ kernel, 2))
        if leak > tol_ker * max(scale_a, top, 1e-300):
            raise KernelMismatch(f"ker(Mj) not contained in ker(Mi) (residual {leak:.3e})")
    if not mask.any():
        # Mj = 0 and Mi = 0 on the whole space.
        return 1.0
    r = v[:, mask]
    d = w[mask]
    restricted = r.T @ a @ r
    congruent = restricted / np.sqrt(np.outer(d, d))
    return float(np.linalg.eigvalsh(0.5 * (congruent + congruent.T))[-1])
