"""Certificate search: line search over mu, bisection over nu and, for dwell variants, over gamma."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from hyperswitch.certifier.audit import check_certificate
from hyperswitch.certifier.bounds import check_kernels, dwell_bound, jump_exponent, post_hoc_gamma
from hyperswitch.certifier.constraints import ConstraintSet, build_constraints, check_preconditions
from hyperswitch.certifier.feasibility import make_solver
from hyperswitch.certifier.planner import (
    ModeTable,
    MuPoint,
    candidate_tuples,
    dwell_lower_bound,
    feasible_edges,
    initial_grid,
    local_spacing,
    zoom_grid,
)
from hyperswitch.certifier.schemas import Certificate, SearchOptions, Variant
from hyperswitch.config import get_settings
from hyperswitch.exceptions import (
    CertificateMismatch,
    DimensionMismatch,
    Infeasible,
    StructuralInfeasible,
)
from hyperswitch.model.schemas import SwitchedSystem

logger = logging.getLogger(__name__)

# Cap on cutting-plane iterations for a single gamma test; an inconclusive test counts as infeasible.
GAMMA_TEST_ITERS = 60
# Rates tried, relative to the search result, when the final interval check rejects a certificate.
NU_BACKOFF = (0.99, 0.9, 0.75, 0.5, 0.25)


def dwell_time_bound(certificate: Certificate) -> float:
    """Average dwell time above which the certificate proves GUES (0 = arbitrary switching)."""
    return dwell_bound(certificate.variant, list(certificate.mu_vector), certificate.nu, certificate.gamma)


def effective_rate(certificate: Certificate, tau_D: float) -> float:
    """
    Decay rate guaranteed on signals with average dwell time tau_D.

    Raises:
        ValueError: tau_D does not exceed the certificate's dwell-time bound
    """
    if not certificate.variant.is_dwell:
        return certificate.nu
    bound = dwell_time_bound(certificate)
    if tau_D <= bound:
        raise ValueError(f"tau_D = {tau_D:g} does not exceed the certified bound {bound:g}")
    J = jump_exponent(certificate.variant, list(certificate.mu_vector))
    return certificate.nu - (float(np.log(certificate.gamma)) + J) / (2.0 * tau_D)


# nu bisection


def _nu_upper(system: SwitchedSystem, mu: Sequence[float], options: SearchOptions) -> float:
    if options.nu_bisect.hi is not None:
        return options.nu_bisect.hi
    f_norm = max(float(np.linalg.norm(mode.F, 2)) for mode in system.modes)
    speed = max(mode.max_speed for mode in system.modes)
    return f_norm + max(abs(v) for v in mu) * speed + 1.0


def max_nu(
    cset: ConstraintSet,
    options: SearchOptions,
    hi: float,
    warm: Optional[np.ndarray] = None,
) -> MuPoint:
    """
    Largest feasible nu for one constraint set.

    Bisection on nu; after every feasible test the lower end jumps to the
    largest rate the weights just found still satisfy.

    Raises:
        StructuralInfeasible: The equality couplings leave no admissible weights
    """
    solver = make_solver(cset, options)
    tol = solver.tol_feas
    bis = options.nu_bisect
    lo = bis.lo
    first = solver.solve(lo, options.max_feas_iters, warm=warm)
    if not first.feasible:
        return MuPoint(cset.mu, lo, False, None, first.margin)

    best_q = first.q
    lo = max(lo, min(cset.nu_limit(best_q, tol), hi))
    step_above = True
    for it in range(bis.iters):
        if hi - lo <= bis.tol:
            break
        # A step just above lo confirms optimality of the last jump in one test.
        trial = lo + bis.tol if step_above else 0.5 * (lo + hi)
        res = solver.solve(trial, options.max_feas_iters, warm=best_q, stop_when_feasible=True)
        if res.feasible:
            best_q = res.q
            lo = max(trial, min(cset.nu_limit(res.q, tol), hi))
        else:
            hi = trial
        step_above = res.feasible and not step_above
        logger.debug(
            f"nu bisection step {it}: [{lo:.6g}, {hi:.6g}]",
            extra={"mu": list(cset.mu), "variant": cset.variant.value},
        )
    return MuPoint(cset.mu, lo, lo > bis.tol, best_q, first.margin)


def _evaluate(system: SwitchedSystem, variant: Variant, mu: Tuple[float, ...], options: SearchOptions) -> MuPoint:
    cset = build_constraints(system, variant, mu, options.x_check)
    point = max_nu(cset, options, _nu_upper(system, cset.mu, options))
    return MuPoint(tuple(mu), point.nu, point.feasible, point.q, point.margin)


def _evaluate_all(
    fn: Callable[[Tuple[float, ...]], MuPoint], mus: List[Tuple[float, ...]], jobs: int
) -> List[MuPoint]:
    if jobs > 1 and len(mus) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, mus))
    return [fn(mu) for mu in mus]


def _key(mu: float) -> float:
    return round(float(mu), 12)


def bisect_edges(
    table: ModeTable,
    center: float,
    run: Callable[[Sequence[float]], None],
    options: SearchOptions,
    adjacent_only: bool = False,
) -> List[float]:
    """
    Feasible mu values within `edge_tol` of the edges of the feasible range around `center`.

    Each bracket (last feasible, first infeasible) of the table is bisected; `run`
    evaluates the midpoints into `table`.
    """
    edges = []
    for a, b in feasible_edges(table, center, adjacent_only):
        for _ in range(options.edge_steps):
            mid = _key(0.5 * (a + b))
            if abs(b - a) <= options.edge_tol or mid in (a, b):
                break
            run([mid])
            if table.points[mid].feasible:
                a = mid
            else:
                b = mid
        edges.append(a)
    return edges


def line_search(system: SwitchedSystem, variant: Variant, options: SearchOptions) -> ModeTable:
    """
    nu*(mu) over the grid plus `refine_rounds` zooms around the best mu.

    The system is searched with one shared mu; dwell variants call this once
    per single-mode subsystem.
    """
    table = ModeTable()

    def run(values: Sequence[float]) -> None:
        todo = [(_key(v),) for v in values if _key(v) not in table.points]
        for p in _evaluate_all(lambda mu: _evaluate(system, variant, mu, options), todo, options.jobs):
            table.add(p)

    if variant.mu_fixed_zero:
        run([0.0])
        return table

    grid = initial_grid(options)
    run(grid)
    best = table.best()
    spacing = local_spacing(grid, best.mu[0])
    for r in range(options.refine_rounds):
        run(zoom_grid(table.best().mu[0], spacing, options.refine_points))
        spacing = 2.0 * spacing / (options.refine_points - 1)
        logger.debug(f"Refinement round {r + 1}: best {table.best()}", extra={"variant": variant.value})
    best = table.best()
    if best is not None and best.feasible:
        bisect_edges(table, best.mu[0], run, options, adjacent_only=True)
    return table


# Common-Lyapunov variants


def _certify_common(system: SwitchedSystem, variant: Variant, options: SearchOptions) -> Certificate:
    table = line_search(system, variant, options)
    best = table.best()
    if best is None or not best.feasible:
        margin = best.margin if best is not None else float("-inf")
        raise Infeasible(f"{variant.value}: no mu in the search admits a positive rate", best_margin=margin)
    logger.info(
        f"{variant.value}: nu = {best.nu:.6g} at mu = {best.mu[0]:.6g}",
        extra={"variant": variant.value, "evaluated": len(table.points)},
    )
    n = system.n
    weights = [best.q[i * n : (i + 1) * n] for i in range(len(system))]
    return _finalize(system, variant, [best.mu[0]] * len(system), best.nu, weights, 1.0, options)


# Multiple-Lyapunov (dwell) variants


@dataclass
class DwellCandidate:
    mu: Tuple[float, ...]
    nu: float
    gamma: float
    q: np.ndarray
    tau_D: float


class DwellSearch:
    """Branch-and-bound over per-mode mu tuples, minimizing tau_D."""

    def __init__(self, system: SwitchedSystem, variant: Variant, options: SearchOptions):
        self.system = system
        self.variant = variant
        self.options = options
        self.subsystems = [SwitchedSystem.of([mode], name=mode.label) for mode in system.modes]
        self.tables = [ModeTable() for _ in system.modes]
        self.incumbent: Optional[DwellCandidate] = None
        self.tried: Dict[Tuple[float, ...], Optional[DwellCandidate]] = {}

    def evaluate_mode(self, i: int, values: Sequence[float]) -> None:
        sub = self.subsystems[i]
        todo = [(_key(v),) for v in values if _key(v) not in self.tables[i].points]
        fn = lambda mu: _evaluate(sub, self.variant, mu, self.options)  # noqa: E731
        for p in _evaluate_all(fn, todo, self.options.jobs):
            self.tables[i].add(p)

    def _gamma_test(self, mus: Tuple[float, ...], nu: float, gamma: float, warm: np.ndarray) -> Optional[np.ndarray]:
        cset = build_constraints(self.system, self.variant, mus, self.options.x_check, gamma)
        try:
            solver = make_solver(cset, self.options)
            res = solver.solve(
                nu, min(self.options.max_feas_iters, GAMMA_TEST_ITERS), warm=warm, stop_when_feasible=True
            )
        except StructuralInfeasible:
            return None
        return res.q if res.feasible else None

    def evaluate_tuple(self, mus: Tuple[float, ...]) -> Optional[DwellCandidate]:
        """Smallest gamma for one mu tuple at nu = min nu_i*(mu_i), or None when pruned."""
        points = [self.tables[i].points[m] for i, m in enumerate(mus)]
        nu = min(p.nu for p in points)
        J = jump_exponent(self.variant, mus)
        best_tau = self.incumbent.tau_D if self.incumbent else np.inf
        if dwell_lower_bound(J, nu) >= best_tau:
            return None

        stacked = np.concatenate([p.q for p in points])
        g_hi = post_hoc_gamma(self.system, self.variant, [p.q for p in points])
        q_best = stacked
        if np.isfinite(best_tau):
            g_cut = float(np.exp(2.0 * nu * best_tau - J))
            if g_cut < g_hi:
                q = self._gamma_test(mus, nu, max(g_cut, 1.0), stacked)
                if q is None:
                    return None
                g_hi, q_best = max(g_cut, 1.0), q

        g_lo = 1.0
        if g_hi > 1.0:
            q = self._gamma_test(mus, nu, 1.0, q_best)
            if q is not None:
                g_hi, q_best = 1.0, q
        steps = 0
        while g_hi - g_lo > self.options.gamma_tol * g_hi and steps < 60:
            mid = 0.5 * (g_lo + g_hi)
            q = self._gamma_test(mus, nu, mid, q_best)
            if q is None:
                g_lo = mid
            else:
                g_hi, q_best = mid, q
            steps += 1

        n = self.system.n
        weights = [q_best[i * n : (i + 1) * n] for i in range(len(self.system))]
        # gamma of the weights themselves; the bisection bound can sit slightly below it.
        gamma = max(1.0, post_hoc_gamma(self.system, self.variant, weights))
        tau = dwell_bound(self.variant, mus, nu, gamma)
        return DwellCandidate(tuple(mus), nu, gamma, q_best, tau)

    def branch_and_bound(self, grids: List[List[float]]) -> None:
        anchor = self.incumbent.mu if self.incumbent else None
        tuples = candidate_tuples(grids, self.options.max_mu_tuples, anchor)

        def lower_bound(t: Tuple[float, ...]) -> Tuple[float, float]:
            nu = min(self.tables[i].points[m].nu for i, m in enumerate(t))
            return dwell_lower_bound(jump_exponent(self.variant, t), nu), -nu

        for t in sorted(tuples, key=lower_bound):
            if t in self.tried:
                continue
            best_tau = self.incumbent.tau_D if self.incumbent else np.inf
            if lower_bound(t)[0] >= best_tau:
                break
            cand = self.evaluate_tuple(t)
            self.tried[t] = cand
            if cand is not None and (self.incumbent is None or cand.tau_D < self.incumbent.tau_D):
                self.incumbent = cand
                logger.debug(f"New incumbent tau_D = {cand.tau_D:.6g} at mu = {cand.mu}")

    def feasible_grid(self, i: int, values: Sequence[float]) -> List[float]:
        table = self.tables[i]
        return sorted(_key(v) for v in values if table.points[_key(v)].feasible)

    def refine_edges(self) -> None:
        """Add the edges of each mode's feasible mu range around the incumbent as candidates."""
        if self.incumbent is None or self.variant.mu_fixed_zero:
            return
        grids = []
        for i in range(len(self.system)):
            center = self.incumbent.mu[i]
            edges = bisect_edges(self.tables[i], center, lambda v, i=i: self.evaluate_mode(i, v), self.options)
            grids.append(sorted({center, *edges}))
        self.branch_and_bound(grids)

    def run(self) -> DwellCandidate:
        grid = [0.0] if self.variant.mu_fixed_zero else initial_grid(self.options)
        for i in range(len(self.system)):
            self.evaluate_mode(i, grid)
        grids = [self.feasible_grid(i, grid) for i in range(len(self.system))]
        for i, g in enumerate(grids):
            if not g:
                best = self.tables[i].best()
                raise Infeasible(
                    f"{self.variant.value}: mode {i} has no mu with a positive rate",
                    best_margin=best.margin if best else float("-inf"),
                )
        self.branch_and_bound(grids)
        if self.incumbent is None:
            raise Infeasible(f"{self.variant.value}: no mu tuple admits a finite gamma")
        self.refine_edges()

        spacings = [local_spacing(grid, self.incumbent.mu[i]) for i in range(len(self.system))]
        for r in range(self.options.refine_rounds):
            zooms = []
            for i in range(len(self.system)):
                values = zoom_grid(self.incumbent.mu[i], spacings[i], self.options.refine_points)
                self.evaluate_mode(i, values)
                zooms.append(self.feasible_grid(i, values) or [self.incumbent.mu[i]])
                spacings[i] = 2.0 * spacings[i] / (self.options.refine_points - 1)
            self.branch_and_bound(zooms)
            self.refine_edges()
            logger.debug(f"Dwell refinement round {r + 1}: tau_D = {self.incumbent.tau_D:.6g}")
        return self.incumbent


def _certify_dwell(system: SwitchedSystem, variant: Variant, options: SearchOptions) -> Certificate:
    if variant is Variant.DWELL_SIGN_FIXED:
        check_kernels(system)
    search = DwellSearch(system, variant, options)
    best = search.run()
    logger.info(
        f"{variant.value}: tau_D = {best.tau_D:.6g} (nu = {best.nu:.6g}, gamma = {best.gamma:.6g})",
        extra={"variant": variant.value, "mu": list(best.mu), "tuples": len(search.tried)},
    )
    n = system.n
    weights = [best.q[i * n : (i + 1) * n] for i in range(len(system))]
    return _finalize(system, variant, list(best.mu), best.nu, weights, best.gamma, options)


# Certificates


def _build(
    system: SwitchedSystem,
    variant: Variant,
    mu: Sequence[float],
    nu: float,
    weights: Sequence[np.ndarray],
    gamma: float,
    options: SearchOptions,
) -> Certificate:
    return Certificate(
        variant=variant,
        Q=[[float(v) for v in w] for w in weights],
        mu=[float(v) for v in mu],
        nu=nu,
        gamma=gamma,
        tau_D=dwell_bound(variant, mu, nu, gamma),
        x_check=options.x_check.describe(),
        system=system.name,
    )


def _finalize(
    system: SwitchedSystem,
    variant: Variant,
    mu: Sequence[float],
    nu: float,
    weights: Sequence[np.ndarray],
    gamma: float,
    options: SearchOptions,
) -> Certificate:
    """Audit the search result; with interval x-checks, back off nu until the audit passes."""
    worst = float("-inf")
    for factor in (1.0,) + (NU_BACKOFF if options.x_check.kind == "interval" else ()):
        cert = _build(system, variant, mu, nu * factor, weights, gamma, options)
        report = check_certificate(system, cert, options)
        if report.passed:
            if factor < 1.0:
                logger.warning(f"Interval check accepted the weights only at nu = {cert.nu:.6g}")
            return cert.model_copy(update={"margins": report.margin_summary()})
        if report.worst is not None:
            worst = report.worst.margin
    raise Infeasible(f"{variant.value}: search result failed the final check", best_margin=worst)


def certify(
    system: SwitchedSystem,
    variant: Variant | str,
    options: Optional[SearchOptions] = None,
) -> Certificate:
    """
    Search diagonal weights, mu and the largest rate nu proving stability of `system`.

    Common variants maximize nu; dwell variants minimize the dwell-time bound.

    Raises:
        Infeasible: No certificate on the searched mu range
        StructuralInfeasible: The equality couplings leave no admissible weights
        KernelMismatch: No finite gamma exists
        VariantPreconditionViolated: The system lacks the structure the variant needs
    """
    variant = Variant.parse(variant)
    options = options or SearchOptions()
    check_preconditions(system, variant)
    logger.info(
        f"Certifying {system.name or 'system'} with {variant.value}",
        extra={"modes": len(system), "n": system.n, "grid_points": len(options.mu_grid)},
    )
    if variant.is_dwell:
        return _certify_dwell(system, variant, options)
    return _certify_common(system, variant, options)


def certificate_from_weights(
    system: SwitchedSystem,
    variant: Variant | str,
    Q: Sequence[Sequence[float]],
    mu: Sequence[float] | float,
    nu: float,
    options: Optional[SearchOptions] = None,
) -> Certificate:
    """
    Certificate for user-supplied weights; gamma and tau_D are computed, not trusted.

    Raises:
        Infeasible: The weights fail the audit (carries the worst margin)
        CertificateMismatch: Weight shapes disagree with the system
        KernelMismatch: No finite gamma exists for these weights
    """
    variant = Variant.parse(variant)
    options = options or SearchOptions()
    check_preconditions(system, variant)
    if len(Q) != len(system) or any(len(q) != system.n for q in Q):
        raise CertificateMismatch(f"expected {len(system)} weight diagonals of length {system.n}")
    mus = [float(mu)] * len(system) if np.isscalar(mu) else [float(v) for v in mu]
    if len(mus) == 1:
        mus = mus * len(system)
    if len(mus) != len(system):
        raise DimensionMismatch(f"{len(mus)} mu values for {len(system)} modes")
    weights = [np.asarray(q, dtype=float) for q in Q]
    gamma = post_hoc_gamma(system, variant, weights) if variant.is_dwell else 1.0
    cert = _build(system, variant, mus, nu, weights, gamma, options)
    report = check_certificate(system, cert, options)
    if not report.passed:
        worst = report.failures[0] if report.failures else None
        raise Infeasible(
            f"{variant.value}: supplied weights fail {worst.name if worst else 'the audit'}",
            best_margin=worst.margin if worst else float("-inf"),
        )
    logger.info(
        f"Weights accepted: gamma = {gamma:.6g}, tau_D = {cert.tau_D:.6g}",
        extra={"variant": variant.value, "tol_feas": get_settings().tol_feas},
    )
    return cert.model_copy(update={"margins": report.margin_summary()})
