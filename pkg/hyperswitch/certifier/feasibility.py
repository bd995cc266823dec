"""Cutting-plane feasibility for fixed (mu, nu, gamma).

Maximizes the smallest slack eigenvalue t over the weights q, restricted to
the null space of the equality couplings (q = N z). Each iterate adds, for
every slack below the LP value, the supporting cut t <= v^T slack(q) v built
from its minimum eigenvector v. The LP value is an upper bound on the
achievable margin, so a negative LP value certifies infeasibility.

When every slack is homogeneous in q (or independent of it) the LP fixes the
scale by mean(q) = 1 and the returned weights are rescaled to max(q) = 1;
margins are always judged at that scale. Otherwise the weights stay in the
box q_floor <= q <= 1.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np
from scipy.optimize import linprog

from hyperswitch.certifier.constraints import ConstraintSet, build_constraints
from hyperswitch.certifier.schemas import SearchOptions, Variant
from hyperswitch.config import get_settings
from hyperswitch.densela import null_space_basis, sym_eig
from hyperswitch.exceptions import Infeasible, StructuralInfeasible
from hyperswitch.model.schemas import SwitchedSystem

logger = logging.getLogger(__name__)

GAP_TOL = 1e-10
T_CAP = 1e6
# Keeps LP iterates strictly inside q_floor <= q <= 1 despite the LP feasibility tolerance.
BOX_PAD = 1e-6


@dataclass(frozen=True)
class FeasibilityResult:
    feasible: bool
    q: np.ndarray
    margin: float
    bound: float
    iterations: int

    def weights(self, n: int) -> List[np.ndarray]:
        return [self.q[i : i + n].copy() for i in range(0, self.q.size, n)]


class CuttingPlaneSolver:
    """Kelley cutting planes over the reduced weights of one ConstraintSet."""

    def __init__(self, cset: ConstraintSet, tol_feas: float, q_floor: float, tol_rank: float):
        self.cset = cset
        self.tol_feas = tol_feas
        self.q_floor = q_floor
        E = cset.equality if cset.equality is not None else np.zeros((0, cset.nvars))
        self.N = null_space_basis(E, tol_rank=tol_rank) if E.shape[0] else np.eye(cset.nvars)
        if self.N.shape[1] == 0:
            raise StructuralInfeasible("the equality couplings admit only q = 0")
        self.scale_free = cset.scale_free

    def normalize(self, q: np.ndarray) -> np.ndarray:
        if not self.scale_free:
            return q
        top = float(np.max(q))
        return q / top if top > 0.0 else q

    def _start(self) -> np.ndarray:
        ones = np.ones(self.cset.nvars)
        q0 = self.N @ (self.N.T @ ones)
        if np.all(q0 <= 0.0):
            q0 = -q0
        top = float(np.max(q0))
        return q0 / top if top > 0.0 else q0

    def _admissible(self, q: np.ndarray) -> bool:
        return bool(np.min(q) >= self.q_floor)

    def _initial_cuts(self, q0: np.ndarray, nu: float) -> list:
        cuts = []
        for s in self.cset.slacks:
            _, vecs = sym_eig(s.matrix(q0, nu))
            dim = vecs.shape[0]
            for v in list(vecs.T) + list(np.eye(dim)):
                cuts.append(s.cut(q0, nu, v))
        return cuts

    def _lp(self, cuts: list) -> Optional[np.ndarray]:
        r = self.N.shape[1]
        nv = self.cset.nvars
        rows = []
        rhs = []
        for c0, g in cuts:
            rows.append(np.concatenate([-(g @ self.N), [1.0]]))
            rhs.append(c0)
        A_eq = b_eq = None
        if self.scale_free:
            # mean(q) = 1 keeps max(q) <= nv, so the floor survives rescaling to max(q) = 1.
            rows.extend(np.hstack([-self.N, np.zeros((nv, 1))]))
            rhs.extend(np.full(nv, -nv * (self.q_floor + BOX_PAD)))
            A_eq = np.concatenate([self.N.sum(axis=0), [0.0]])[None, :]
            b_eq = np.array([float(nv)])
        else:
            rows.extend(np.hstack([self.N, np.zeros((nv, 1))]))
            rhs.extend(np.full(nv, 1.0 - BOX_PAD))
            rows.extend(np.hstack([-self.N, np.zeros((nv, 1))]))
            rhs.extend(np.full(nv, -(self.q_floor + BOX_PAD)))
        c = np.zeros(r + 1)
        c[-1] = -1.0
        bounds = [(None, None)] * r + [(None, T_CAP)]
        res = linprog(
            c, A_ub=np.array(rows), b_ub=np.array(rhs), A_eq=A_eq, b_eq=b_eq, bounds=bounds, method="highs"
        )
        if res.status == 2:
            return None
        if res.status != 0:
            logger.debug(f"LP ended with status {res.status}: {res.message}")
            if res.x is None:
                return None
        return res.x

    def solve(
        self,
        nu: float,
        max_iters: int,
        warm: Optional[np.ndarray] = None,
        stop_when_feasible: bool = False,
    ) -> FeasibilityResult:
        """
        Raises:
            StructuralInfeasible: No q in the coupling null space satisfies the box
        """
        if warm is not None:
            warm = self.normalize(self.N @ (self.N.T @ np.asarray(warm, dtype=float)))
            if not self._admissible(warm):
                warm = None
            elif stop_when_feasible:
                margin = float(np.min(self.cset.margins(warm, nu)))
                if margin >= -self.tol_feas:
                    return FeasibilityResult(True, warm, margin, np.inf, 0)

        q0 = self._start() if warm is None else warm
        cuts = self._initial_cuts(q0, nu)
        best_q, best_margin = q0, -np.inf
        if self._admissible(q0):
            best_margin = float(np.min(self.cset.margins(q0, nu)))
        bound = np.inf
        it = 0
        for it in range(1, max_iters + 1):
            x = self._lp(cuts)
            if x is None:
                if it == 1:
                    raise StructuralInfeasible("no positive weights satisfy the equality couplings")
                break
            z, t_lp = x[:-1], float(x[-1])
            bound = min(bound, t_lp)
            q = self.N @ z
            margins = self.cset.margins(q, nu)
            true = float(np.min(margins))
            q_unit = self.normalize(q)
            unit = float(np.min(self.cset.margins(q_unit, nu))) if self.scale_free else true
            if unit > best_margin and self._admissible(q_unit):
                best_q, best_margin = q_unit, unit
            if stop_when_feasible and best_margin >= -self.tol_feas:
                break
            if t_lp < -self.tol_feas:
                break
            if t_lp - true <= GAP_TOL:
                break
            for s, mg in zip(self.cset.slacks, margins):
                if mg < t_lp - GAP_TOL:
                    cuts.append(s.cut(q, nu))
        logger.debug(
            f"Cutting planes: {it} iterations, margin {best_margin:.3e}, bound {bound:.3e}",
            extra={"nu": nu, "variant": self.cset.variant.value},
        )
        return FeasibilityResult(best_margin >= -self.tol_feas, best_q, best_margin, bound, it)


def make_solver(cset: ConstraintSet, options: Optional[SearchOptions] = None) -> CuttingPlaneSolver:
    settings = get_settings()
    options = options or SearchOptions()
    tol = options.tol_feas if options.tol_feas is not None else settings.tol_feas
    return CuttingPlaneSolver(cset, tol, settings.q_floor, settings.tol_rank)


def feasibility_fixed(
    system: SwitchedSystem,
    variant: Variant,
    mu: Sequence[float] | float,
    nu: float,
    options: Optional[SearchOptions] = None,
    gamma: float = 1.0,
    warm: Optional[np.ndarray] = None,
) -> FeasibilityResult:
    """
    Find diagonal weights Q_i satisfying every inequality of `variant` at fixed mu and nu.

    Returns:
        FeasibilityResult with the stacked diagonals q (mode-major) and the best margin

    Raises:
        Infeasible: No weights reach margin >= -tol_feas (carries the best margin)
        StructuralInfeasible: The equality couplings leave no admissible weights
        VariantPreconditionViolated: The system lacks the structure the variant needs
    """
    if nu < 0.0:
        raise ValueError(f"nu must be nonnegative, got {nu}")
    options = options or SearchOptions()
    mus = [float(mu)] if np.isscalar(mu) else [float(v) for v in mu]
    cset = build_constraints(system, variant, mus, options.x_check, gamma)
    solver = make_solver(cset, options)
    result = solver.solve(nu, options.max_feas_iters, warm=warm)
    if not result.feasible:
        raise Infeasible(
            f"{variant.value} infeasible at mu = {list(cset.mu)}, nu = {nu:g}",
            best_margin=result.margin,
        )
    return result
