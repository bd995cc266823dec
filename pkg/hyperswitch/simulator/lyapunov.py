"""Lyapunov functionals of certificates evaluated along simulated traces."""

from __future__ import annotations

from typing import Tuple

import numpy as np
from scipy.integrate import trapezoid

from hyperswitch.certifier.bounds import jump_exponent
from hyperswitch.certifier.schemas import Certificate
from hyperswitch.exceptions import CertificateMismatch
from hyperswitch.model.schemas import Mode, SwitchedSystem
from hyperswitch.simulator.schemas import Trace


def _check(system: SwitchedSystem, certificate: Certificate) -> None:
    if len(certificate.Q) != len(system) or any(len(q) != system.n for q in certificate.Q):
        raise CertificateMismatch(
            f"certificate for {len(certificate.Q)} modes does not match a system of {len(system)} modes, n = {system.n}"
        )


def _profile(mode: Mode, mu: float, q: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Diagonal of Q(x) = diag(e^{2 mu x} Q-, e^{-2 mu x} Q+) on the grid, shape (n_x, n)."""
    signs = np.where(np.arange(mode.n) < mode.m, 1.0, -1.0)
    return q[None, :] * np.exp(2.0 * mu * np.outer(x, signs))


def functional(mode: Mode, mu: float, q: np.ndarray, w: np.ndarray, x: np.ndarray) -> float:
    """V(w) = int_0^1 w^T S^T Q(x) S w dx."""
    y = w @ mode.S.T
    return float(trapezoid(np.sum(_profile(mode, mu, q, x) * y * y, axis=1), x))


def lyapunov_trace(trace: Trace, certificate: Certificate) -> Trace:
    """
    Trace with V sampled at every recorded instant.

    At switch samples `lyap` uses the new mode's functional and `lyap_pre`
    the previous one's (the state w is continuous across switches).

    Raises:
        CertificateMismatch: The certificate does not fit the traced system
    """
    system = trace.system
    _check(system, certificate)
    lyap = np.empty(len(trace.times))
    lyap_pre = np.full(len(trace.times), np.nan)
    switch_set = set(trace.switch_indices())
    for k, (w, index) in enumerate(zip(trace.states, trace.modes)):
        lyap[k] = functional(system[index], certificate.mu_of(index), certificate.q_of(index), w, trace.x)
        if k in switch_set and k > 0:
            before = trace.modes[k - 1]
            lyap_pre[k] = functional(system[before], certificate.mu_of(before), certificate.q_of(before), w, trace.x)
    return trace.model_copy(update={"lyap": lyap, "lyap_pre": lyap_pre})


def certified_envelope(
    system: SwitchedSystem, certificate: Certificate, N0: int = 1, n_x: int = 201
) -> Tuple[float, float, float]:
    """
    Constants with alpha^2 |w|^2 <= V(w) <= beta^2 |w|^2 for every mode's functional.

    Returns (alpha, beta, C) where C = beta / alpha bounds the overshoot of
    the exponential estimate; dwell certificates multiply it by
    (gamma e^J)^(N0 / 2).

    Raises:
        CertificateMismatch: The certificate does not fit the system
    """
    _check(system, certificate)
    x = np.linspace(0.0, 1.0, n_x)
    lo, hi = np.inf, 0.0
    for i, mode in enumerate(system.modes):
        prof = _profile(mode, certificate.mu_of(i), certificate.q_of(i), x)
        for k in range(n_x):
            M = mode.S.T @ np.diag(prof[k]) @ mode.S
            w = np.linalg.eigvalsh(0.5 * (M + M.T))
            lo, hi = min(lo, float(w[0])), max(hi, float(w[-1]))
    if lo <= 0.0:
        raise CertificateMismatch("certificate weights are not positive definite")
    alpha, beta = float(np.sqrt(lo)), float(np.sqrt(hi))
    C = beta / alpha
    if certificate.variant.is_dwell:
        J = jump_exponent(certificate.variant, list(certificate.mu_vector))
        C *= float((certificate.gamma * np.exp(J)) ** (N0 / 2.0))
    return alpha, beta, C
