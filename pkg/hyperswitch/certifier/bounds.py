"""Jump factors and dwell-time bounds of multiple Lyapunov functions."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from hyperswitch.certifier import slacks
from hyperswitch.certifier.schemas import Variant
from hyperswitch.densela import min_gamma
from hyperswitch.model.schemas import SwitchedSystem


def jump_exponent(variant: Variant | str, mu: Sequence[float]) -> float:
    """Exponent J of the jump factor gamma * e^J the Lyapunov functional may take at a switch."""
    variant = Variant.parse(variant)
    mu = [float(v) for v in mu]
    if variant is Variant.DWELL_SIGN_FIXED:
        return 2.0 * (max(mu) - min(mu))
    if variant is Variant.DWELL_SIGN_FREE:
        if len(mu) == 1:
            return 2.0 * abs(mu[0])
        return 2.0 * max(abs(a) + abs(b) for i, a in enumerate(mu) for j, b in enumerate(mu) if i != j)
    return 0.0


def dwell_bound(variant: Variant | str, mu: Sequence[float], nu: float, gamma: float) -> float:
    """tau_D = (ln gamma + J) / (2 nu) for dwell variants, 0 otherwise."""
    variant = Variant.parse(variant)
    if not variant.is_dwell:
        return 0.0
    if nu <= 0.0:
        raise ValueError(f"nu must be positive, got {nu}")
    return (float(np.log(gamma)) + jump_exponent(variant, mu)) / (2.0 * nu)


def post_hoc_gamma(system: SwitchedSystem, variant: Variant, weights: Sequence[np.ndarray]) -> float:
    """
    Smallest gamma >= 1 satisfying every ordered pair inequality for fixed weights.

    Raises:
        KernelMismatch: Some pair admits no finite gamma
    """
    gamma = 1.0
    n_modes = len(system)
    for i in range(n_modes):
        for j in range(n_modes):
            if i == j:
                continue
            if variant is Variant.DWELL_SIGN_FIXED:
                Mi = slacks.block_weights(system[i], weights[i])
                Mj = slacks.block_weights(system[j], weights[j])
                for a, b in zip(Mi, Mj):
                    gamma = max(gamma, min_gamma(a, b))
            else:
                Mi = slacks.full_weight(system[i], weights[i])
                Mj = slacks.full_weight(system[j], weights[j])
                gamma = max(gamma, min_gamma(Mi, Mj))
    return gamma


def check_kernels(system: SwitchedSystem) -> None:
    """
    Sign-fixed multiple Lyapunov functions need matching kernels of the M- and M+ blocks.

    Raises:
        KernelMismatch: ker (S_j^b)^T S_j^b differs from ker (S_i^b)^T S_i^b for some pair
    """
    for i in range(len(system)):
        for j in range(len(system)):
            if i == j:
                continue
            for block in ("S_minus", "S_plus"):
                Si = getattr(system[i], block)
                Sj = getattr(system[j], block)
                if Si.shape[0] == 0:
                    continue
                min_gamma(Si.T @ Si, Sj.T @ Sj)
