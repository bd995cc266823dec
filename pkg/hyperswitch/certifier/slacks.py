"""Slack matrices of every matrix inequality, and the single-mode checks built on them.

A slack is RHS - LHS of an inequality "LHS <= RHS"; the inequality holds when
the slack is positive semidefinite up to tol_feas.
"""

from __future__ import annotations

import logging
from typing import NamedTuple, Optional, Tuple

import numpy as np

from hyperswitch.certifier.schemas import XCheck
from hyperswitch.config import get_settings
from hyperswitch.densela import SymMatrix, psd_margin
from hyperswitch.exceptions import (
    CertificateMismatch,
    CommutationViolated,
    DimensionMismatch,
    VariantPreconditionViolated,
    WrongSignStructure,
)
from hyperswitch.model.schemas import Mode
from hyperswitch.utils.validators import is_diagonal

logger = logging.getLogger(__name__)


class XCheckResult(NamedTuple):
    ok: bool
    margin: float
    x: float
    method: str


def weight_matrix(Q, n: int) -> np.ndarray:
    """Accept a diagonal (vector) or a full weight matrix."""
    arr = np.asarray(Q, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.ndim == 1:
        if arr.size != n:
            raise DimensionMismatch(f"weight has {arr.size} entries, expected {n}")
        return np.diag(arr)
    if arr.shape != (n, n):
        raise DimensionMismatch(f"weight must be {n}x{n}, got {arr.shape}")
    return arr


def weight_profile(mode: Mode, mu: float, Q, x: float) -> np.ndarray:
    """Q(x) = diag(e^{2 mu x} Q-, e^{-2 mu x} Q+)."""
    W = weight_matrix(Q, mode.n).copy()
    m = mode.m
    W[:m, :m] *= np.exp(2.0 * mu * x)
    W[m:, m:] *= np.exp(-2.0 * mu * x)
    W[:m, m:] = 0.0
    W[m:, :m] = 0.0
    return W


def boundary_matrices(mode: Mode) -> Tuple[np.ndarray, np.ndarray]:
    """A0 = [[I, 0], [G+-, G++]] and A1 = [[G--, G-+], [0, I]].

    With u = (y-(0), y+(1)) the outgoing traces, A0 u = y(0) and A1 u = y(1).
    """
    n, m = mode.n, mode.m
    g_mm, g_mp, g_pm, g_pp = mode.g_blocks()
    A0 = np.zeros((n, n))
    A1 = np.zeros((n, n))
    A0[:m, :m] = np.eye(m)
    A0[m:, :m] = g_pm
    A0[m:, m:] = g_pp
    A1[:m, :m] = g_mm
    A1[:m, m:] = g_mp
    A1[m:, m:] = np.eye(n - m)
    return A0, A1


def _sym(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + a.T)


def interior_matrix(mode: Mode, mu: float, nu: float, Q, x: float) -> np.ndarray:
    W = weight_profile(mode, mu, Q, x)
    lhs = -2.0 * mu * W @ mode.lambda_plus + mode.F.T @ W + W @ mode.F
    return _sym(-(lhs + 2.0 * nu * W))


def boundary_matrix(mode: Mode, mu: float, Q) -> np.ndarray:
    A0, A1 = boundary_matrices(mode)
    W0 = weight_profile(mode, mu, Q, 0.0) @ mode.Lambda
    W1 = weight_profile(mode, mu, Q, 1.0) @ mode.Lambda
    return _sym(A1.T @ W1 @ A1 - A0.T @ W0 @ A0)


def interior_lmi_slack(mode: Mode, mu: float, nu: float, Q, x: float) -> SymMatrix:
    """Slack of -2 mu Q(x) L+ + F^T Q(x) + Q(x) F <= -2 nu Q(x) at one x."""
    return SymMatrix(interior_matrix(mode, mu, nu, Q, x))


def boundary_lmi_slack(mode: Mode, mu: float, Q) -> SymMatrix:
    """Slack A1^T Q(1) Lambda A1 - A0^T Q(0) Lambda A0 of the boundary inequality."""
    return SymMatrix(boundary_matrix(mode, mu, Q))


def source_matrix(mode: Mode, nu: float, Q) -> np.ndarray:
    """-(F^T Q + Q F) - 2 nu Q, the mu-free interior inequality."""
    W = weight_matrix(Q, mode.n)
    return _sym(-(mode.F.T @ W + W @ mode.F) - 2.0 * nu * W)


def normalized_interior_matrix(mode: Mode, mu: float, nu: float, Q) -> np.ndarray:
    """2 mu Q L+ - F^T Q - Q F - 2 nu I (the rate is taken against I, with Q <= I)."""
    W = weight_matrix(Q, mode.n)
    return _sym(2.0 * mu * W @ mode.lambda_plus - mode.F.T @ W - W @ mode.F - 2.0 * nu * np.eye(mode.n))


def lambda_plus_boundary_matrix(mode: Mode, mu: float, Q) -> np.ndarray:
    """e^{-2 mu} Q L+ - G^T Q L+ G."""
    W = weight_matrix(Q, mode.n) @ mode.lambda_plus
    return _sym(np.exp(-2.0 * mu) * W - mode.G.T @ W @ mode.G)


def diagonal_source_matrix(mode: Mode, mu: float, nu: float) -> np.ndarray:
    """mu L+ - F - nu I for diagonal F."""
    if not is_diagonal(mode.F):
        raise VariantPreconditionViolated("the diagonal-source test needs a diagonal F")
    return mu * mode.lambda_plus - np.diag(np.diag(mode.F)) - nu * np.eye(mode.n)


def block_weights(mode: Mode, Q) -> Tuple[np.ndarray, np.ndarray]:
    """M- = (S-)^T Q- S- and M+ = (S+)^T Q+ S+."""
    W = weight_matrix(Q, mode.n)
    m = mode.m
    m_minus = mode.S_minus.T @ W[:m, :m] @ mode.S_minus
    m_plus = mode.S_plus.T @ W[m:, m:] @ mode.S_plus
    return _sym(m_minus), _sym(m_plus)


def full_weight(mode: Mode, Q) -> np.ndarray:
    """S^T Q S."""
    return _sym(mode.S.T @ weight_matrix(Q, mode.n) @ mode.S)


def pair_matrix(Mi: np.ndarray, Mj: np.ndarray, gamma: float, basis: Optional[np.ndarray] = None) -> np.ndarray:
    """gamma Mj - Mi, optionally restricted to span(basis)."""
    d = gamma * Mj - Mi
    if basis is not None:
        d = basis.T @ d @ basis
    return _sym(d)


def x_exact(mode: Mode, mu: float) -> bool:
    """The interior margin over [0, 1] is attained at an endpoint."""
    return mu == 0.0 or is_diagonal(mode.F) or mode.m in (0, mode.n)


def _interval_bound(mode: Mode, mu: float, nu: float, Q, a: float, b: float) -> float:
    """Certified lower bound on lambda_min of the interior slack over x in [a, b].

    The slack is e^{2 mu x} T- + e^{-2 mu x} T+; each entry is bounded by the
    endpoint values of the two exponential terms.
    """
    n, m = mode.n, mode.m
    W = weight_matrix(Q, n)
    q_minus = np.zeros_like(W)
    q_plus = np.zeros_like(W)
    q_minus[:m, :m] = W[:m, :m]
    q_plus[m:, m:] = W[m:, m:]
    lo = np.zeros((n, n))
    hi = np.zeros((n, n))
    for part, rate in ((q_minus, 2.0 * mu), (q_plus, -2.0 * mu)):
        T = interior_matrix(mode, mu, nu, part, 0.0)
        ea, eb = np.exp(rate * a), np.exp(rate * b)
        lo += np.minimum(T * ea, T * eb)
        hi += np.maximum(T * ea, T * eb)
    mid = 0.5 * (lo + hi)
    rad = 0.5 * (hi - lo)
    return psd_margin(mid) - float(np.max(np.sum(np.abs(rad), axis=1)))


def _interval_check(
    mode: Mode, mu: float, nu: float, Q, max_depth: int, tol: float
) -> XCheckResult:
    pieces = [(0.0, 1.0, 0)]
    worst, worst_x = np.inf, 0.0
    while pieces:
        a, b, depth = pieces.pop()
        bound = _interval_bound(mode, mu, nu, Q, a, b)
        if bound >= -tol:
            if bound < worst:
                worst, worst_x = bound, 0.5 * (a + b)
            continue
        c = 0.5 * (a + b)
        point = psd_margin(interior_matrix(mode, mu, nu, Q, c))
        if point < -tol or depth >= max_depth:
            return XCheckResult(False, min(bound, point), c, "interval")
        pieces.extend([(a, c, depth + 1), (c, b, depth + 1)])
    return XCheckResult(True, float(worst), worst_x, "interval")


def check_interior_over_x(
    mode: Mode,
    mu: float,
    nu: float,
    Q,
    x_check: Optional[XCheck] = None,
    tol_feas: Optional[float] = None,
) -> XCheckResult:
    """Check the interior inequality for all x in [0, 1].

    Grid mode samples n_x points including both endpoints. Interval mode is
    sound: entrywise bounds over sub-intervals, subdivided on failure. When the
    margin is attained at an endpoint the two endpoints are evaluated exactly.
    """
    x_check = x_check or XCheck()
    tol = get_settings().tol_feas if tol_feas is None else tol_feas
    if x_exact(mode, mu):
        xs = [0.0] if mu == 0.0 else [0.0, 1.0]
        method = "exact"
    elif x_check.kind == "interval":
        return _interval_check(mode, mu, nu, Q, x_check.max_depth, tol)
    else:
        xs = list(np.linspace(0.0, 1.0, x_check.n_x))
        method = "grid"
    margins = [psd_margin(interior_matrix(mode, mu, nu, Q, x)) for x in xs]
    k = int(np.argmin(margins))
    return XCheckResult(margins[k] >= -tol, float(margins[k]), float(xs[k]), method)


def check_prop21(
    mode: Mode,
    mu: float,
    nu: float,
    Qminus,
    Qplus,
    x_check: Optional[XCheck] = None,
    tol_feas: Optional[float] = None,
) -> bool:
    """
    Single-mode exponential stability test: interior inequality over x and
    boundary inequality, for block weights Q = diag(Q-, Q+).

    Raises:
        ValueError: nu <= 0
        CommutationViolated: Q does not commute with Lambda
    """
    if nu <= 0.0:
        raise ValueError(f"nu must be positive, got {nu}")
    tol = get_settings().tol_feas if tol_feas is None else tol_feas
    m, n = mode.m, mode.n
    Q = np.zeros((n, n))
    if m:
        Q[:m, :m] = weight_matrix(Qminus, m)
    if n - m:
        Q[m:, m:] = weight_matrix(Qplus, n - m)
    scale = max(1.0, float(np.max(np.abs(Q))) * mode.max_speed)
    if float(np.max(np.abs(Q @ mode.Lambda - mode.Lambda @ Q))) > tol * scale:
        raise CommutationViolated("weights must commute with Lambda")
    if float(np.max(np.abs(Q - Q.T))) > tol * scale:
        raise CommutationViolated("weights must be symmetric")

    interior = check_interior_over_x(mode, mu, nu, Q, x_check, tol)
    boundary = psd_margin(boundary_matrix(mode, mu, Q))
    logger.debug(
        f"Single-mode check: interior {interior.margin:.3e}, boundary {boundary:.3e}",
        extra={"mu": mu, "nu": nu, "mode": mode.label},
    )
    return interior.ok and boundary >= -tol


def check_corollary22(
    mode: Mode, mu: float, M, tol_feas: Optional[float] = None
) -> bool:
    """
    Common quadratic Lyapunov function for y' = (L^-1 F - mu I) y and
    y+ = e^mu G y, positive velocities only.

    Raises:
        WrongSignStructure: m != 0
        CertificateMismatch: the equivalent single-mode test disagrees
    """
    if mode.m != 0:
        raise WrongSignStructure(f"needs all velocities positive, got m = {mode.m}")
    tol = get_settings().tol_feas if tol_feas is None else tol_feas
    n = mode.n
    Mw = weight_matrix(M, n)
    lam = mode.velocities
    Acont = np.diag(1.0 / lam) @ mode.F - mu * np.eye(n)
    continuous = psd_margin(-(Acont.T @ Mw + Mw @ Acont))
    discrete = psd_margin(Mw - np.exp(2.0 * mu) * mode.G.T @ Mw @ mode.G)
    holds = continuous > tol and discrete >= -tol
    if not holds:
        return False

    Q = Mw @ np.diag(1.0 / lam)
    P = -(-2.0 * mu * Q @ mode.Lambda + mode.F.T @ Q + Q @ mode.F)
    q_isqrt = np.diag(1.0 / np.sqrt(np.diag(Q)))
    nu = 0.5 * psd_margin(q_isqrt @ P @ q_isqrt) * (1.0 - 1e-6)
    if not check_prop21(mode, mu, nu, np.zeros((0, 0)), Q, tol_feas=tol):
        raise CertificateMismatch(
            f"single-mode test rejects Q = M Lambda^-1 at nu = {nu:.6g}"
        )
    return True
