"""Tests for the certificate search, dwell-time bounds and effective rates."""

import numpy as np
import pytest

from hyperswitch.certifier.bounds import dwell_bound, jump_exponent, post_hoc_gamma
from hyperswitch.certifier.engine import (
    certificate_from_weights,
    certify,
    dwell_time_bound,
    effective_rate,
)
from hyperswitch.certifier.schemas import Certificate, SearchOptions, Variant
from hyperswitch.exceptions import (
    CertificateMismatch,
    Infeasible,
    KernelMismatch,
    VariantPreconditionViolated,
)
from hyperswitch.model.hyperbolic import mode_from_characteristic
from hyperswitch.model.schemas import Mode, SwitchedSystem

REFERENCE_Q = [[0.75, 2.0], [1.5, 1.0]]


def test_jump_exponents():
    assert jump_exponent(Variant.DWELL_SIGN_FIXED, [0.1, 0.4]) == pytest.approx(0.6)
    assert jump_exponent(Variant.DWELL_SIGN_FREE, [-0.5]) == pytest.approx(1.0)
    assert jump_exponent(Variant.DWELL_SIGN_FREE, [-0.5, 0.2, 0.1]) == pytest.approx(1.4)
    assert jump_exponent(Variant.COMMON_SIGN_FIXED, [0.3, 0.3]) == 0.0


def test_dwell_bound_formula():
    assert dwell_bound(Variant.DWELL_SIGN_FIXED, [0.15, 0.15], 0.15, 2.0) == pytest.approx(np.log(2.0) / 0.3)
    mu = -np.log(2.0)
    tau = dwell_bound(Variant.DWELL_SIGN_FREE, [mu, mu], mu + 1.0, 1.0)
    assert tau == pytest.approx(2.0 * np.log(2.0) / (1.0 - np.log(2.0)), rel=1e-12)
    assert tau == pytest.approx(4.5178, abs=1e-4)


def test_dwell_bound_rejects_nonpositive_rate():
    with pytest.raises(ValueError):
        dwell_bound(Variant.DWELL_SIGN_FIXED, [0.0, 0.0], 0.0, 2.0)


def test_reference_weights_give_gamma_two(undamped):
    weights = [np.array(q) for q in REFERENCE_Q]
    assert post_hoc_gamma(undamped, Variant.DWELL_SIGN_FIXED, weights) == 2.0


def test_dwell_bound_regression_from_weights(undamped):
    cert = certificate_from_weights(undamped, Variant.DWELL_SIGN_FIXED, REFERENCE_Q, 0.15, 0.15)
    assert cert.gamma == 2.0
    assert cert.tau_D == pytest.approx(2.3105, abs=1e-3)
    assert dwell_time_bound(cert) == pytest.approx(cert.tau_D)
    assert min(cert.margins.values()) >= -1e-9


def test_weights_that_fail_are_rejected(undamped):
    with pytest.raises(Infeasible):
        certificate_from_weights(undamped, Variant.DWELL_SIGN_FIXED, REFERENCE_Q, 0.15, 0.3)


def test_weights_with_wrong_shape(undamped):
    with pytest.raises(CertificateMismatch):
        certificate_from_weights(undamped, Variant.DWELL_SIGN_FIXED, [[1.0, 1.0]], 0.15, 0.15)


def test_damped_certificate_from_weights(damped):
    cert = certificate_from_weights(damped, Variant.COMMON_SIGN_FIXED, [[1.5, 1.0], [1.5, 1.0]], -0.2, 0.1)
    assert cert.gamma == 1.0
    assert cert.tau_D == 0.0
    assert min(cert.margins.values()) >= -1e-9


def test_effective_rate(undamped):
    cert = certificate_from_weights(undamped, Variant.DWELL_SIGN_FIXED, REFERENCE_Q, 0.15, 0.15)
    assert effective_rate(cert, 2.0 * cert.tau_D) == pytest.approx(0.075)
    with pytest.raises(ValueError):
        effective_rate(cert, cert.tau_D)


def test_effective_rate_of_common_certificate_is_nu():
    cert = Certificate(variant=Variant.COMMON_SIGN_FIXED, Q=[[1.0]], mu=[0.0], nu=0.2)
    assert effective_rate(cert, 1.0) == 0.2


def test_certificate_json_round_trip(undamped):
    cert = certificate_from_weights(undamped, Variant.DWELL_SIGN_FIXED, REFERENCE_Q, 0.15, 0.15)
    again = Certificate.from_json(cert.to_json())
    assert again == cert


def test_unswitched_variant_needs_one_mode(damped):
    with pytest.raises(VariantPreconditionViolated):
        certify(damped, Variant.UNSWITCHED_PROP21)


def test_kernel_mismatch_for_sign_fixed_dwell():
    a = mode_from_characteristic([-1.0, 1.0], 1, -np.eye(2), np.zeros((2, 2)))
    # The second mode mixes the components in its negative characteristic.
    S2 = np.array([[1.0, 1.0], [0.0, 1.0]]) / np.array([[np.sqrt(2.0)], [1.0]])
    L2 = np.linalg.inv(S2) @ np.diag([-1.0, 1.0]) @ S2
    b = Mode(n=2, L=L2, A=-np.eye(2), S=S2, Lambda=np.diag([-1.0, 1.0]), m=1, F=-np.eye(2), G=np.zeros((2, 2)))
    with pytest.raises(KernelMismatch):
        certify(SwitchedSystem.of([a, b]), Variant.DWELL_SIGN_FIXED)


def test_single_mode_certificate():
    mode = mode_from_characteristic([1.0], 0, [[-1.0]], [[2.0]])
    options = SearchOptions(mu_grid=list(np.linspace(-1.0, -0.7, 7)), refine_rounds=1)
    cert = certify(SwitchedSystem.of([mode]), Variant.UNSWITCHED_PROP21, options)
    # nu <= mu + 1 and mu <= -ln 2
    assert cert.nu <= 1.0 - np.log(2.0) + 1e-6
    assert cert.nu > 0.25


def test_common_sign_free_on_scalar_decaying_source(example_b_decaying):
    """F = -1 with mu = 0: the boundary needs G^2 <= 1, which fails for G = 2."""
    with pytest.raises(Infeasible):
        certify(example_b_decaying, Variant.COMMON_SIGN_FREE)


def test_common_sign_free_contracting_boundary():
    modes = [
        mode_from_characteristic([1.0], 0, [[-0.5]], [[0.5]]),
        mode_from_characteristic([-1.0], 1, [[-0.5]], [[0.5]]),
    ]
    cert = certify(SwitchedSystem.of(modes), Variant.COMMON_SIGN_FREE)
    assert cert.nu == pytest.approx(0.5, abs=1e-5)
    assert cert.mu == [0.0, 0.0]


@pytest.mark.slow
def test_damped_common_certificate(damped):
    cert = certify(damped, Variant.COMMON_SIGN_FIXED)
    assert cert.nu >= 0.1
    assert cert.mu[0] == cert.mu[1]
    assert min(cert.margins.values()) >= -1e-9


@pytest.mark.slow
def test_undamped_has_no_common_certificate(undamped):
    with pytest.raises(Infeasible):
        certify(undamped, Variant.COMMON_SIGN_FIXED)


@pytest.mark.slow
@pytest.mark.parametrize("F, G", [(-1.0, 2.0), (0.1, 0.5)])
def test_scalar_dwell_optimum(F, G):
    """Test that the default search reaches the analytic optimum at the edge mu = -ln G."""
    modes = [
        mode_from_characteristic([1.0], 0, [[F]], [[G]]),
        mode_from_characteristic([-1.0], 1, [[F]], [[G]]),
    ]
    cert = certify(SwitchedSystem.of(modes), Variant.DWELL_SIGN_FREE)
    edge = -np.log(G)
    optimum = 2.0 * abs(edge) / (edge - F)
    assert cert.tau_D == pytest.approx(optimum, abs=5e-3)
    assert cert.tau_D >= optimum - 1e-6
    assert cert.gamma == pytest.approx(1.0, abs=1e-4)
    # nu <= mu |Lambda| - F holds exactly for a scalar mode
    assert cert.nu <= min(cert.mu) - F + 1e-8
    assert max(max(q) for q in cert.Q) == pytest.approx(1.0)


@pytest.mark.slow
def test_dwell_sign_fixed_search(undamped):
    """Test that the searched certificate records the gamma its own weights need."""
    cert = certify(undamped, Variant.DWELL_SIGN_FIXED)
    weights = [np.array(q) for q in cert.Q]
    assert cert.gamma == pytest.approx(post_hoc_gamma(undamped, cert.variant, weights), rel=1e-9)
    assert cert.tau_D == pytest.approx(dwell_time_bound(cert), rel=1e-12)
    assert cert.tau_D <= np.log(2.0) / 0.3 + 1e-3
    assert min(cert.margins.values()) >= -1e-9


def _rightward_pair():
    """Two positive-velocity scalar modes, F = -0.5 and G = 0.5."""
    modes = [
        mode_from_characteristic([1.0], 0, [[-0.5]], [[0.5]]),
        mode_from_characteristic([2.0], 0, [[-0.5]], [[0.5]]),
    ]
    return SwitchedSystem.of(modes)


def test_mu_zero_certificate():
    # nu <= -F q with q <= 1
    cert = certify(_rightward_pair(), Variant.MU_ZERO)
    assert cert.mu == [0.0, 0.0]
    assert cert.nu == pytest.approx(0.5, abs=1e-5)
    assert max(max(q) for q in cert.Q) <= 1.0


@pytest.mark.slow
@pytest.mark.parametrize("variant", [Variant.DIAGONAL_SOURCE, Variant.ONE_SIGNED])
def test_edge_of_boundary_range(variant):
    """Test that nu = mu + 1/2 is pushed to the boundary edge mu = ln 2."""
    cert = certify(_rightward_pair(), variant)
    assert cert.mu[0] == pytest.approx(np.log(2.0), abs=1e-4)
    assert cert.nu == pytest.approx(0.5 + np.log(2.0), abs=1e-4)
    assert cert.nu <= 0.5 + np.log(2.0) + 1e-8
