"""Affine constraint assembly for the certificate search.

For fixed mu (per mode) and gamma every inequality of a variant is a symmetric
matrix depending affinely on the stacked diagonal weights q and on nu:

    slack(q, nu) = C0 + sum_j q_j C_j - nu * (W0 + sum_j q_j W_j)

The coefficients are read off the slack functions in `slacks` by evaluation at
unit weights, so the solver and the audit share one formula per inequality.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg

from hyperswitch.certifier import slacks
from hyperswitch.certifier.schemas import Variant, XCheck
from hyperswitch.densela import min_eigpair, psd_margin, range_basis
from hyperswitch.exceptions import VariantPreconditionViolated
from hyperswitch.model.schemas import SwitchedSystem
from hyperswitch.utils.validators import is_diagonal

SlackFn = Callable[[np.ndarray, float], np.ndarray]


@dataclass(frozen=True)
class LinearSlack:
    """One matrix inequality, affine in (q, nu)."""

    name: str
    kind: str
    offset: np.ndarray
    basis: np.ndarray
    nu_offset: np.ndarray
    nu_basis: np.ndarray
    mode: Optional[int] = None
    pair: Optional[Tuple[int, int]] = None
    x: Optional[float] = None

    @property
    def depends_on_nu(self) -> bool:
        return bool(np.any(self.nu_offset) or np.any(self.nu_basis))

    @property
    def q_free(self) -> bool:
        return not (np.any(self.basis) or np.any(self.nu_basis))

    @property
    def homogeneous(self) -> bool:
        """slack(s q, nu) = s slack(q, nu) for s > 0."""
        return not (np.any(self.offset) or np.any(self.nu_offset))

    def matrix(self, q: np.ndarray, nu: float) -> np.ndarray:
        C = self.offset + np.tensordot(q, self.basis, axes=1)
        if self.depends_on_nu:
            C = C - nu * (self.nu_offset + np.tensordot(q, self.nu_basis, axes=1))
        return C

    def margin(self, q: np.ndarray, nu: float) -> float:
        return psd_margin(self.matrix(q, nu))

    def cut(self, q: np.ndarray, nu: float, v: Optional[np.ndarray] = None) -> Tuple[float, np.ndarray]:
        """Linear upper bound t <= c0 + g.q of lambda_min, exact at q for the minimum eigenvector."""
        if v is None:
            _, v = min_eigpair(self.matrix(q, nu))
        c0 = float(v @ (self.offset - nu * self.nu_offset) @ v)
        g = np.einsum("i,jik,k->j", v, self.basis - nu * self.nu_basis, v)
        return c0, g

    def nu_limit(self, q: np.ndarray, tol: float) -> float:
        """Largest nu keeping this slack PSD at fixed q (inf if nu-free and holding)."""
        C = self.offset + np.tensordot(q, self.basis, axes=1)
        if not self.depends_on_nu:
            return np.inf if psd_margin(C) >= -tol else -np.inf
        W = self.nu_offset + np.tensordot(q, self.nu_basis, axes=1)
        try:
            return float(linalg.eigh(C, W, eigvals_only=True, subset_by_index=[0, 0])[0])
        except (linalg.LinAlgError, ValueError):
            lo, hi = -1e6, 1e6
            if psd_margin(C - lo * W) < -tol:
                return -np.inf
            for _ in range(100):
                mid = 0.5 * (lo + hi)
                if psd_margin(C - mid * W) >= -tol:
                    lo = mid
                else:
                    hi = mid
            return lo


def linearize(
    fn: SlackFn,
    nvars: int,
    index: Sequence[int],
    name: str,
    kind: str,
    mode: Optional[int] = None,
    pair: Optional[Tuple[int, int]] = None,
    x: Optional[float] = None,
) -> LinearSlack:
    """Build a LinearSlack from fn(q_local, nu), affine in q_local and nu.

    `index` maps the local weight entries to positions in the stacked vector.
    """
    k = len(index)
    zero = np.zeros(k)
    f00 = fn(zero, 0.0)
    f01 = fn(zero, 1.0)
    dim = f00.shape[0]
    basis = np.zeros((nvars, dim, dim))
    nu_basis = np.zeros((nvars, dim, dim))
    nu_offset = f00 - f01
    for local, j in enumerate(index):
        e = np.zeros(k)
        e[local] = 1.0
        fe0 = fn(e, 0.0)
        fe1 = fn(e, 1.0)
        basis[j] += fe0 - f00
        nu_basis[j] += (fe0 - fe1) - nu_offset
    return LinearSlack(
        name=name,
        kind=kind,
        offset=f00,
        basis=basis,
        nu_offset=nu_offset,
        nu_basis=nu_basis,
        mode=mode,
        pair=pair,
        x=x,
    )


@dataclass
class ConstraintSet:
    """All inequalities and equality couplings of one (variant, mu, gamma) instance."""

    variant: Variant
    n: int
    n_modes: int
    mu: Tuple[float, ...]
    gamma: float
    slacks: List[LinearSlack] = field(default_factory=list)
    equality: Optional[np.ndarray] = None

    @property
    def nvars(self) -> int:
        return self.n * self.n_modes

    def index(self, i: int) -> List[int]:
        return list(range(i * self.n, (i + 1) * self.n))

    @property
    def scale_free(self) -> bool:
        """Feasibility is invariant under q -> s q, so weights can be normalized to max(q) = 1."""
        return all(s.q_free or s.homogeneous for s in self.slacks)

    def split(self, q: np.ndarray) -> List[np.ndarray]:
        return [np.asarray(q[i * self.n : (i + 1) * self.n], dtype=float) for i in range(self.n_modes)]

    def margins(self, q: np.ndarray, nu: float) -> np.ndarray:
        return np.array([s.margin(q, nu) for s in self.slacks])

    def nu_limit(self, q: np.ndarray, tol: float) -> float:
        return min((s.nu_limit(q, tol) for s in self.slacks), default=np.inf)


def check_preconditions(system: SwitchedSystem, variant: Variant) -> None:
    """
    Raises:
        VariantPreconditionViolated: The system does not have the structure the variant needs
    """
    ms = system.m_values
    if variant is Variant.UNSWITCHED_PROP21 and len(system) != 1:
        raise VariantPreconditionViolated(
            f"{variant.value} certifies a single mode, got {len(system)} modes"
        )
    if variant.requires_equal_m and len(set(ms)) != 1:
        raise VariantPreconditionViolated(
            f"{variant.value} needs the same sign structure in every mode, got m = {list(ms)}"
        )
    if variant is Variant.DIAGONAL_SOURCE and not all(is_diagonal(mode.F) for mode in system.modes):
        raise VariantPreconditionViolated(f"{variant.value} needs a diagonal source in every mode")
    if variant is Variant.ONE_SIGNED and not (
        all(m == 0 for m in ms) or all(m == system.n for m in ms)
    ):
        raise VariantPreconditionViolated(
            f"{variant.value} needs all velocities of one sign, got m = {list(ms)}"
        )


def x_points(system: SwitchedSystem, mu: float, i: int, x_check: XCheck) -> List[float]:
    """Sample points for the interior inequality of mode i.

    Interval checks are only used on final certificates; the search samples the grid.
    """
    mode = system[i]
    if mu == 0.0:
        return [0.0]
    if slacks.x_exact(mode, mu):
        return [0.0, 1.0]
    return [float(x) for x in np.linspace(0.0, 1.0, x_check.n_x)]


def _coupling_rows(
    system: SwitchedSystem, split: bool
) -> np.ndarray:
    """Rows E with E q = 0 iff the weight matrices agree across consecutive modes."""
    n = system.n
    nvars = n * len(system)
    iu = np.triu_indices(n)
    rows: List[np.ndarray] = []

    def weight_basis(i: int) -> List[List[np.ndarray]]:
        mode = system[i]
        if split:
            groups = [range(mode.m), range(mode.m, n)]
        else:
            groups = [range(n)]
        out = []
        for group in groups:
            mats = []
            for k in range(n):
                if k in group:
                    r = mode.S[k]
                    mats.append(np.outer(r, r))
                else:
                    mats.append(np.zeros((n, n)))
            out.append(mats)
        return out

    for i in range(len(system) - 1):
        bi, bj = weight_basis(i), weight_basis(i + 1)
        for gi, gj in zip(bi, bj):
            block = np.zeros((len(iu[0]), nvars))
            for k in range(n):
                block[:, i * n + k] = gi[k][iu]
                block[:, (i + 1) * n + k] = -gj[k][iu]
            rows.append(block)
    if not rows:
        return np.zeros((0, nvars))
    E = np.vstack(rows)
    keep = np.any(np.abs(E) > 0.0, axis=1)
    return E[keep]


def _pair_slacks(
    system: SwitchedSystem, variant: Variant, gamma: float, nvars: int
) -> List[LinearSlack]:
    n = system.n
    out: List[LinearSlack] = []
    idx = [list(range(i * n, (i + 1) * n)) for i in range(len(system))]
    if variant is Variant.DWELL_SIGN_FIXED:
        m = system[0].m
        bases = []
        for b, (block, rows) in enumerate((("minus", slice(0, m)), ("plus", slice(m, n)))):
            S0 = system[0].S[rows]
            if S0.shape[0] == 0:
                continue
            rng, _ = range_basis(S0.T @ S0)
            bases.append((b, block, rng))
    for i in range(len(system)):
        for j in range(len(system)):
            if i == j:
                continue
            mi, mj = system[i], system[j]
            pair_index = idx[i] + idx[j]
            if variant is Variant.DWELL_SIGN_FIXED:
                for b, block, rng in bases:

                    def fn(q, nu, mi=mi, mj=mj, b=b, rng=rng):
                        Mi = slacks.block_weights(mi, q[:n])[b]
                        Mj = slacks.block_weights(mj, q[n:])[b]
                        return slacks.pair_matrix(Mi, Mj, gamma, rng)

                    out.append(
                        linearize(fn, nvars, pair_index, f"pair_{block}[{i},{j}]", "pair", pair=(i, j))
                    )
            else:

                def fn(q, nu, mi=mi, mj=mj):
                    return slacks.pair_matrix(
                        slacks.full_weight(mi, q[:n]), slacks.full_weight(mj, q[n:]), gamma
                    )

                out.append(linearize(fn, nvars, pair_index, f"pair[{i},{j}]", "pair", pair=(i, j)))
    return out


def build_constraints(
    system: SwitchedSystem,
    variant: Variant,
    mu: Sequence[float],
    x_check: Optional[XCheck] = None,
    gamma: float = 1.0,
) -> ConstraintSet:
    """
    Assemble the inequalities of `variant` at fixed per-mode mu and gamma.

    Equality couplings are returned as rows of `equality`. Dwell variants at
    gamma = 1 use the equality form of the pair inequalities.

    Raises:
        VariantPreconditionViolated: Structural requirements of the variant fail
    """
    check_preconditions(system, variant)
    x_check = x_check or XCheck()
    mu = tuple(float(v) for v in mu)
    if len(mu) == 1 and len(system) > 1:
        mu = mu * len(system)
    if len(mu) != len(system):
        raise ValueError(f"{len(mu)} mu values for {len(system)} modes")
    if variant.mu_fixed_zero and any(mu):
        raise ValueError(f"{variant.value} is stated at mu = 0")
    if gamma < 1.0:
        raise ValueError(f"gamma must be >= 1, got {gamma}")

    cset = ConstraintSet(variant=variant, n=system.n, n_modes=len(system), mu=mu, gamma=gamma)
    nvars = cset.nvars
    for i, mode in enumerate(system.modes):
        idx = cset.index(i)
        mu_i = mu[i]
        if variant in (Variant.COMMON_SIGN_FREE,):
            cset.slacks.append(
                linearize(
                    lambda q, nu, mode=mode: slacks.source_matrix(mode, nu, q),
                    nvars, idx, f"interior[{i}]", "interior", mode=i,
                )
            )
            cset.slacks.append(
                linearize(
                    lambda q, nu, mode=mode: slacks.lambda_plus_boundary_matrix(mode, 0.0, q),
                    nvars, idx, f"boundary[{i}]", "boundary", mode=i,
                )
            )
            continue
        if variant in (Variant.MU_ZERO, Variant.ONE_SIGNED):
            cset.slacks.append(
                linearize(
                    lambda q, nu, mode=mode, mu_i=mu_i: slacks.normalized_interior_matrix(mode, mu_i, nu, q),
                    nvars, idx, f"interior[{i}]", "interior", mode=i,
                )
            )
        elif variant is Variant.DIAGONAL_SOURCE:
            cset.slacks.append(
                linearize(
                    lambda q, nu, mode=mode, mu_i=mu_i: slacks.diagonal_source_matrix(mode, mu_i, nu),
                    nvars, idx, f"interior[{i}]", "interior", mode=i,
                )
            )
        else:
            for x in x_points(system, mu_i, i, x_check):
                cset.slacks.append(
                    linearize(
                        lambda q, nu, mode=mode, mu_i=mu_i, x=x: slacks.interior_matrix(mode, mu_i, nu, q, x),
                        nvars, idx, f"interior[{i}]@x={x:.6g}", "interior", mode=i, x=x,
                    )
                )
        def boundary_fn(q, nu, mode=mode, mu_i=mu_i):
            if variant is Variant.ONE_SIGNED:
                return slacks.lambda_plus_boundary_matrix(mode, mu_i, q)
            return slacks.boundary_matrix(mode, mu_i, q)

        cset.slacks.append(linearize(boundary_fn, nvars, idx, f"boundary[{i}]", "boundary", mode=i))

    if len(system) > 1:
        if variant.is_dwell and gamma > 1.0:
            cset.slacks.extend(_pair_slacks(system, variant, gamma, nvars))
            cset.equality = np.zeros((0, nvars))
        else:
            cset.equality = _coupling_rows(system, split=variant.split_coupling)
    else:
        cset.equality = np.zeros((0, nvars))
    return cset
