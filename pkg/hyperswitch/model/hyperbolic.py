"""Conversions between the physical and the characteristic form of a mode."""

from __future__ import annotations

import logging
from typing import Optional, Tuple

import numpy as np

from hyperswitch.config import get_settings
from hyperswitch.densela import null_space_basis
from hyperswitch.exceptions import BadPartition, BoundaryNotReducible, NotHyperbolic
from hyperswitch.model.schemas import BoundaryPhysical, Mode
from hyperswitch.utils.validators import as_matrix, as_vector

logger = logging.getLogger(__name__)

# Eigenvalues closer than this (relative to the spectral scale) form one cluster.
CLUSTER_TOL = 1e-8


def _cluster(values: np.ndarray, scale: float) -> list[np.ndarray]:
    """Group ascending eigenvalues into index clusters of numerically equal values."""
    groups: list[list[int]] = []
    for k, v in enumerate(values):
        if groups and abs(v - values[groups[-1][0]]) <= CLUSTER_TOL * scale:
            groups[-1].append(k)
        else:
            groups.append([k])
    return [np.array(g) for g in groups]


def _orient(rows: np.ndarray) -> np.ndarray:
    """Unit-normalize rows and make the largest-magnitude entry of each positive."""
    rows = rows / np.linalg.norm(rows, axis=1, keepdims=True)
    idx = np.argmax(np.abs(rows), axis=1)
    signs = np.sign(rows[np.arange(rows.shape[0]), idx])
    signs[signs == 0] = 1.0
    return rows * signs[:, None]


def diagonalize_hyperbolic(L: np.ndarray) -> Tuple[np.ndarray, np.ndarray, int]:
    """
    Diagonalize a hyperbolic transport matrix as L = S^-1 Lambda S.

    Returns:
        (S, Lambda, m): S with unit-norm left-eigenvector rows, Lambda diagonal
        in ascending order (negatives first), m the number of negative velocities.

    Raises:
        NotHyperbolic: Complex or defective spectrum, or a speed below tol_hyp
    """
    settings = get_settings()
    L = as_matrix(L, name="L")
    n = L.shape[0]
    scale = max(float(np.linalg.norm(L, 2)), 1e-300)

    eigvals = np.linalg.eigvals(L)
    if np.max(np.abs(eigvals.imag), initial=0.0) > 1e-9 * scale:
        raise NotHyperbolic(f"L has complex eigenvalues {np.round(eigvals, 6).tolist()}")
    lam = np.sort(eigvals.real)
    if np.any(np.abs(lam) < settings.tol_hyp):
        raise NotHyperbolic(f"L has a characteristic speed below {settings.tol_hyp:g}")

    rows = np.zeros((n, n))
    values = np.zeros(n)
    for group in _cluster(lam, scale):
        center = float(np.mean(lam[group]))
        left = null_space_basis((L - center * np.eye(n)).T, tol_rank=1e-9)
        if left.shape[1] != group.size:
            raise NotHyperbolic(
                f"eigenvalue {center:.6g} has multiplicity {group.size} but "
                f"{left.shape[1]} independent eigenvectors"
            )
        rows[group] = left.T
        values[group] = center
    S = _orient(rows)
    Lambda = np.diag(values)

    try:
        s_inv = np.linalg.inv(S)
    except np.linalg.LinAlgError as e:
        raise NotHyperbolic("eigenvector matrix is singular") from e
    recon = float(np.max(np.abs(s_inv @ Lambda @ S - L)))
    if recon > settings.tol_recon * max(float(np.max(np.abs(L))), 1e-300):
        raise NotHyperbolic(f"eigen residual {recon:.3e} above tolerance")
    m = int(np.sum(values < 0.0))
    return S, Lambda, m


def boundary_templates(G: np.ndarray, m: int) -> Tuple[np.ndarray, np.ndarray]:
    """G0 = [[-G--, 0], [-G+-, I]] and G1 = [[I, -G-+], [0, -G++]]."""
    n = G.shape[0]
    G0 = np.zeros((n, n))
    G1 = np.zeros((n, n))
    G0[:m, :m] = -G[:m, :m]
    G0[m:, :m] = -G[m:, :m]
    G0[m:, m:] = np.eye(n - m)
    G1[:m, :m] = np.eye(m)
    G1[:m, m:] = -G[:m, m:]
    G1[m:, m:] = -G[m:, m:]
    return G0, G1


def mode_from_physical(
    L: np.ndarray, A: np.ndarray, bp: BoundaryPhysical, label: Optional[str] = None
) -> Mode:
    """
    Build a Mode from the physical form dw/dt + L dw/dx = A w, B0 w(t,0) + B1 w(t,1) = 0.

    The boundary rows may be any invertible row-combination of the template
    form; they are left-normalized by the block acting on the incoming
    characteristics (y-(1), y+(0)) before G is read off.

    Raises:
        NotHyperbolic: L is not hyperbolic
        BoundaryNotReducible: The boundary does not determine the incoming characteristics
    """
    settings = get_settings()
    L = as_matrix(L, name="L")
    n = L.shape[0]
    A = as_matrix(A, n, name="A")
    S, Lambda, m = diagonalize_hyperbolic(L)
    s_inv = np.linalg.inv(S)
    F = S @ A @ s_inv

    P0 = bp.B0 @ s_inv
    P1 = bp.B1 @ s_inv
    K = np.hstack([P1[:, :m], P0[:, m:]])
    cond = np.linalg.cond(K) if np.any(K) else np.inf
    if not np.isfinite(cond) or cond > 1.0 / settings.tol_recon:
        raise BoundaryNotReducible(
            f"boundary does not determine the incoming characteristics (condition {cond:.3e})"
        )
    P0n = np.linalg.solve(K, P0)
    P1n = np.linalg.solve(K, P1)

    G = np.zeros((n, n))
    G[:m, :m] = -P0n[:m, :m]
    G[m:, :m] = -P0n[m:, :m]
    G[:m, m:] = -P1n[:m, m:]
    G[m:, m:] = -P1n[m:, m:]

    G0, G1 = boundary_templates(G, m)
    scale = max(1.0, float(np.max(np.abs(P0n))), float(np.max(np.abs(P1n))))
    deviation = max(float(np.max(np.abs(P0n - G0))), float(np.max(np.abs(P1n - G1))))
    if deviation > settings.tol_recon * scale * max(1.0, cond):
        raise BoundaryNotReducible(f"boundary deviates from the template form by {deviation:.3e}")

    logger.debug("Built mode from physical form", extra={"mode": label})
    return Mode(n=n, L=L, A=A, S=S, Lambda=Lambda, m=m, F=F, G=G, label=label)


def mode_from_characteristic(
    Lambda: np.ndarray, m: int, F: np.ndarray, G: np.ndarray, label: Optional[str] = None
) -> Mode:
    """
    Build a Mode directly in characteristic variables (S = I, L = Lambda, A = F).

    Raises:
        BadPartition: The sign pattern of Lambda disagrees with m or a block is unsorted
    """
    lam = as_vector(Lambda, name="Lambda")
    n = lam.size
    if not 0 <= m <= n:
        raise BadPartition(f"m = {m} outside [0, {n}]")
    if np.any(lam[:m] >= 0.0) or np.any(lam[m:] <= 0.0):
        raise BadPartition(f"velocities {lam.tolist()} are not split at m = {m}")
    Lam = np.diag(lam)
    F = as_matrix(F, n, name="F")
    G = as_matrix(G, n, name="G")
    return Mode(n=n, L=Lam, A=F, S=np.eye(n), Lambda=Lam, m=m, F=F, G=G, label=label)


def to_physical(mode: Mode) -> Tuple[np.ndarray, np.ndarray, BoundaryPhysical]:
    """Emit (L, A, BoundaryPhysical) with B0 = G0 S and B1 = G1 S."""
    G0, G1 = boundary_templates(mode.G, mode.m)
    L = mode.S_inv @ mode.Lambda @ mode.S
    A = mode.S_inv @ mode.F @ mode.S
    return L, A, BoundaryPhysical(B0=G0 @ mode.S, B1=G1 @ mode.S)
