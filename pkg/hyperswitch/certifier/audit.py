"""Independent re-verification of certificates.

Every inequality of the certificate's variant is evaluated directly from the
slack formulas (not from the search's affine representation) and reported with
its lambda_min margin.
"""

from __future__ import annotations

import logging
from typing import List, Optional

import numpy as np

from hyperswitch.certifier import slacks
from hyperswitch.certifier.bounds import dwell_bound, post_hoc_gamma
from hyperswitch.certifier.constraints import check_preconditions, x_points
from hyperswitch.certifier.schemas import AuditEntry, AuditReport, Certificate, SearchOptions, Variant
from hyperswitch.config import get_settings
from hyperswitch.densela import psd_margin, range_basis
from hyperswitch.exceptions import CertificateMismatch, KernelMismatch, VariantPreconditionViolated
from hyperswitch.model.schemas import SwitchedSystem

logger = logging.getLogger(__name__)

# Relative agreement required between recorded and recomputed gamma / tau_D.
RECOMPUTE_RTOL = 1e-9

SHARED_MU = (
    Variant.UNSWITCHED_PROP21,
    Variant.COMMON_SIGN_FIXED,
    Variant.DIAGONAL_SOURCE,
    Variant.ONE_SIGNED,
)


def _entry(name: str, kind: str, margin: float, tol: float, **kw) -> AuditEntry:
    return AuditEntry(name=name, kind=kind, margin=float(margin), passed=bool(margin >= -tol), **kw)


def _invariants(system: SwitchedSystem, cert: Certificate, tol: float) -> List[AuditEntry]:
    q_floor = get_settings().q_floor
    out = []
    for i in range(len(cert.Q)):
        q = cert.q_of(i)
        low = float(np.min(q)) - q_floor if np.all(np.isfinite(q)) else -np.inf
        out.append(_entry(f"q_floor[{i}]", "invariant", low, 0.0, mode=i, detail=f"min Q = {np.min(q):.6g}"))
        if cert.variant in (Variant.MU_ZERO, Variant.ONE_SIGNED):
            out.append(_entry(f"q_le_one[{i}]", "invariant", 1.0 - float(np.max(q)), tol, mode=i))

    mu = cert.mu_vector
    if cert.variant.mu_fixed_zero:
        out.append(_entry("mu_zero", "invariant", -float(np.max(np.abs(mu))), 0.0))
    elif cert.variant in SHARED_MU:
        out.append(_entry("mu_shared", "invariant", -float(np.ptp(mu)), 0.0))

    try:
        check_preconditions(system, cert.variant)
        out.append(_entry("preconditions", "invariant", 0.0, 0.0))
    except VariantPreconditionViolated as e:
        out.append(AuditEntry(name="preconditions", kind="invariant", margin=-np.inf, passed=False, detail=str(e)))
    return out


def _interior(
    system: SwitchedSystem, cert: Certificate, i: int, options: SearchOptions, tol: float
) -> List[AuditEntry]:
    mode = system[i]
    mu, nu, Q = cert.mu_of(i), cert.nu, cert.q_of(i)
    variant = cert.variant
    name = f"interior[{i}]"
    if variant is Variant.COMMON_SIGN_FREE:
        return [_entry(name, "interior", psd_margin(slacks.source_matrix(mode, nu, Q)), tol, mode=i)]
    if variant in (Variant.MU_ZERO, Variant.ONE_SIGNED):
        S = slacks.normalized_interior_matrix(mode, mu, nu, Q)
        return [_entry(name, "interior", psd_margin(S), tol, mode=i)]
    if variant is Variant.DIAGONAL_SOURCE:
        S = slacks.diagonal_source_matrix(mode, mu, nu)
        return [_entry(name, "interior", psd_margin(S), tol, mode=i)]

    if options.x_check.kind == "interval" and not slacks.x_exact(mode, mu):
        res = slacks.check_interior_over_x(mode, mu, nu, Q, options.x_check, tol)
        return [
            AuditEntry(
                name=name, kind="interior", margin=res.margin, passed=res.ok, mode=i, x=res.x, detail=res.method
            )
        ]
    method = "exact" if slacks.x_exact(mode, mu) else "grid"
    return [
        _entry(
            f"{name}@x={x:.6g}",
            "interior",
            psd_margin(slacks.interior_matrix(mode, mu, nu, Q, x)),
            tol,
            mode=i,
            x=x,
            detail=method,
        )
        for x in x_points(system, mu, i, options.x_check)
    ]


def _boundary(system: SwitchedSystem, cert: Certificate, i: int, tol: float) -> AuditEntry:
    mode, mu, Q = system[i], cert.mu_of(i), cert.q_of(i)
    if cert.variant is Variant.COMMON_SIGN_FREE:
        S = slacks.lambda_plus_boundary_matrix(mode, 0.0, Q)
    elif cert.variant is Variant.ONE_SIGNED:
        S = slacks.lambda_plus_boundary_matrix(mode, mu, Q)
    else:
        S = slacks.boundary_matrix(mode, mu, Q)
    return _entry(f"boundary[{i}]", "boundary", psd_margin(S), tol, mode=i)


def _couplings(system: SwitchedSystem, cert: Certificate, tol: float) -> List[AuditEntry]:
    out = []
    for i in range(len(system) - 1):
        j = i + 1
        if cert.variant.split_coupling:
            Mi = slacks.block_weights(system[i], cert.q_of(i))
            Mj = slacks.block_weights(system[j], cert.q_of(j))
            pairs = [("minus", Mi[0], Mj[0]), ("plus", Mi[1], Mj[1])]
        else:
            pairs = [("full", slacks.full_weight(system[i], cert.q_of(i)), slacks.full_weight(system[j], cert.q_of(j)))]
        for block, a, b in pairs:
            scale = max(1.0, float(np.max(np.abs(a))), float(np.max(np.abs(b))))
            residual = float(np.max(np.abs(a - b))) if a.size else 0.0
            out.append(_entry(f"coupling_{block}[{i},{j}]", "coupling", -residual, tol * scale, pair=(i, j)))
    return out


def _pairs(system: SwitchedSystem, cert: Certificate, tol: float) -> List[AuditEntry]:
    out = []
    n_modes = len(system)
    bases = {}
    if cert.variant is Variant.DWELL_SIGN_FIXED:
        m = system[0].m
        for b, (block, rows) in enumerate((("minus", slice(0, m)), ("plus", slice(m, system.n)))):
            S0 = system[0].S[rows]
            if S0.shape[0]:
                bases[b] = (block, range_basis(S0.T @ S0)[0])
    for i in range(n_modes):
        for j in range(n_modes):
            if i == j:
                continue
            if cert.variant is Variant.DWELL_SIGN_FIXED:
                Mi = slacks.block_weights(system[i], cert.q_of(i))
                Mj = slacks.block_weights(system[j], cert.q_of(j))
                for b, (block, rng) in bases.items():
                    D = slacks.pair_matrix(Mi[b], Mj[b], cert.gamma, rng)
                    out.append(_entry(f"pair_{block}[{i},{j}]", "pair", psd_margin(D), tol, pair=(i, j)))
            else:
                D = slacks.pair_matrix(
                    slacks.full_weight(system[i], cert.q_of(i)), slacks.full_weight(system[j], cert.q_of(j)), cert.gamma
                )
                out.append(_entry(f"pair[{i},{j}]", "pair", psd_margin(D), tol, pair=(i, j)))
    return out


def _rel_gap(a: float, b: float) -> float:
    return abs(a - b) / max(abs(a), abs(b), 1.0)


def check_certificate(
    system: SwitchedSystem,
    certificate: Certificate,
    options: Optional[SearchOptions] = None,
) -> AuditReport:
    """
    Re-verify every inequality of the certificate's variant on `system`.

    Failures are reported, not raised.

    Raises:
        CertificateMismatch: Mode count or weight dimensions disagree with the system
    """
    options = options or SearchOptions()
    tol = options.tol_feas if options.tol_feas is not None else get_settings().tol_feas
    if len(certificate.Q) != len(system):
        raise CertificateMismatch(f"certificate has {len(certificate.Q)} weights for {len(system)} modes")
    if any(len(q) != system.n for q in certificate.Q):
        raise CertificateMismatch(f"weight diagonals must have length {system.n}")

    cert = certificate
    entries = _invariants(system, cert, tol)
    for i in range(len(system)):
        entries.extend(_interior(system, cert, i, options, tol))
        entries.append(_boundary(system, cert, i, tol))

    notes: List[str] = []
    gamma_star: Optional[float] = None
    if len(system) > 1:
        if cert.variant.is_dwell:
            entries.extend(_pairs(system, cert, tol))
        elif cert.variant is not Variant.UNSWITCHED_PROP21:
            entries.extend(_couplings(system, cert, tol))

    if cert.variant.is_dwell:
        try:
            gamma_star = post_hoc_gamma(system, cert.variant, [cert.q_of(i) for i in range(len(system))])
            entries.append(
                _entry(
                    "gamma",
                    "recompute",
                    -_rel_gap(cert.gamma, gamma_star),
                    RECOMPUTE_RTOL,
                    detail=f"recorded {cert.gamma:.17g}, recomputed {gamma_star:.17g}",
                )
            )
        except KernelMismatch as e:
            entries.append(AuditEntry(name="gamma", kind="recompute", margin=-np.inf, passed=False, detail=str(e)))
    else:
        entries.append(_entry("gamma", "recompute", -abs(cert.gamma - 1.0), RECOMPUTE_RTOL, detail="must be 1"))

    tau_star = dwell_bound(cert.variant, list(cert.mu_vector), cert.nu, cert.gamma)
    entries.append(
        _entry(
            "tau_D",
            "recompute",
            -_rel_gap(cert.tau_D, tau_star),
            RECOMPUTE_RTOL,
            detail=f"recorded {cert.tau_D:.17g}, recomputed {tau_star:.17g}",
        )
    )

    if options.x_check.kind == "grid" and any(
        not slacks.x_exact(system[i], cert.mu_of(i)) for i in range(len(system))
    ) and cert.variant not in (Variant.COMMON_SIGN_FREE, Variant.MU_ZERO, Variant.ONE_SIGNED, Variant.DIAGONAL_SOURCE):
        notes.append(
            f"interior inequalities checked on {options.x_check.n_x} samples of [0, 1] only; "
            "use the interval check for a proof over the whole interval"
        )

    report = AuditReport(
        variant=cert.variant,
        passed=all(e.passed for e in entries),
        tol_feas=tol,
        x_check=options.x_check.describe(),
        entries=entries,
        gamma_recomputed=gamma_star,
        tau_D_recomputed=tau_star,
        notes=notes,
    )
    logger.debug(
        f"Audit {'passed' if report.passed else 'failed'}: {len(report.failures)} failures",
        extra={"variant": cert.variant.value, "entries": len(entries)},
    )
    return report
