"""Tests for Lyapunov functionals along simulated traces."""

import numpy as np
import pytest

from hyperswitch.certifier.bounds import jump_exponent
from hyperswitch.certifier.constraints import build_constraints
from hyperswitch.certifier.engine import certificate_from_weights, max_nu
from hyperswitch.certifier.schemas import Certificate, SearchOptions, Variant
from hyperswitch.exceptions import CertificateMismatch
from hyperswitch.model.hyperbolic import mode_from_characteristic
from hyperswitch.model.schemas import SwitchedSystem
from hyperswitch.signals import periodic_signal, random_dwell_signal
from hyperswitch.simulator.engine import l2_norm, simulate
from hyperswitch.simulator.lyapunov import certified_envelope, functional, lyapunov_trace
from hyperswitch.simulator.schemas import GridSpec, InitialProfile

DAMPED_CERT = Certificate(variant=Variant.COMMON_SIGN_FIXED, Q=[[1.5, 1.0], [1.5, 1.0]], mu=[-0.2, -0.2], nu=0.1)
REFERENCE_Q = [[0.75, 2.0], [1.5, 1.0]]


def _decay_excess(trace, nu):
    """Largest relative excess of V over V(t_k) e^{-2 nu (t - t_k)} between consecutive switches."""
    starts = [0] + trace.switch_indices()
    ends = trace.switch_indices() + [len(trace.times)]
    worst = 0.0
    for a, b in zip(starts, ends):
        t = trace.times[a:b]
        bound = trace.lyap[a] * np.exp(-2.0 * nu * (t - t[0]))
        worst = max(worst, float(np.max(trace.lyap[a:b] / bound)) - 1.0)
    return worst


def _random_certified(rng, n):
    """Two-mode system with a CommonSignFixed certificate at 90% of the best rate for a random mu."""
    for _ in range(100):
        m = int(rng.integers(0, n + 1))
        modes = []
        for _ in range(2):
            speeds = np.concatenate([-np.sort(rng.uniform(0.5, 2.0, m))[::-1], np.sort(rng.uniform(0.5, 2.0, n - m))])
            F = -np.diag(rng.uniform(0.3, 1.0, n)) + rng.uniform(-0.15, 0.15, (n, n)) * (1.0 - np.eye(n))
            modes.append(mode_from_characteristic(speeds, m, F, rng.uniform(-0.6, 0.6, (n, n))))
        system = SwitchedSystem.of(modes)
        mu = float(rng.uniform(-0.3, 0.3))
        cset = build_constraints(system, Variant.COMMON_SIGN_FIXED, [mu])
        point = max_nu(cset, SearchOptions(), hi=3.0)
        if point.feasible and point.nu > 0.05:
            weights = cset.split(point.q)
            return system, certificate_from_weights(system, Variant.COMMON_SIGN_FIXED, weights, mu, 0.9 * point.nu)
    raise AssertionError("no certified instance drawn")


def test_functional_is_weighted_norm(undamped, rng):
    """Test that with S = I and mu = 0 the functional is the Q-weighted L2 norm."""
    x = np.linspace(0.0, 1.0, 101)
    w = rng.standard_normal((101, 2))
    assert functional(undamped[0], 0.0, np.ones(2), w, x) == pytest.approx(l2_norm(w, x) ** 2)
    weighted = functional(undamped[0], 0.0, np.array([2.0, 3.0]), w, x)
    expected = 2.0 * l2_norm(w[:, :1], x) ** 2 + 3.0 * l2_norm(w[:, 1:], x) ** 2
    assert weighted == pytest.approx(expected)
    assert functional(undamped[0], 0.4, np.ones(2), np.zeros((101, 2)), x) == 0.0


def test_lyapunov_trace_marks_switches(damped):
    grid = GridSpec(n_x=51)
    trace = simulate(damped, periodic_signal(1.0, [0, 1], 3.0), InitialProfile(amplitude=[1.0, 1.0]).sample(grid.x, 2), grid)
    traced = lyapunov_trace(trace, DAMPED_CERT)
    assert traced.lyap.shape == trace.l2.shape
    idx = trace.switch_indices()
    assert np.all(np.isfinite(traced.lyap_pre[idx]))
    mask = np.ones(len(trace.times), dtype=bool)
    mask[idx] = False
    assert np.all(np.isnan(traced.lyap_pre[mask]))


def test_certified_envelope_constants(damped):
    alpha, beta, C = certified_envelope(damped, DAMPED_CERT)
    assert alpha == pytest.approx(1.0)
    assert beta == pytest.approx(np.sqrt(1.5))
    assert C == pytest.approx(np.sqrt(1.5))


def test_certificate_mismatch(damped):
    cert = Certificate(variant=Variant.COMMON_SIGN_FIXED, Q=[[1.0, 1.0]] * 3, mu=[0.0], nu=0.1)
    with pytest.raises(CertificateMismatch):
        certified_envelope(damped, cert)
    grid = GridSpec(n_x=21)
    trace = simulate(damped, periodic_signal(1.0, [0, 1], 2.0), np.zeros((21, 2)), grid)
    with pytest.raises(CertificateMismatch):
        lyapunov_trace(trace, cert)


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(4))
def test_damped_certificate_decays_along_random_signals(damped, seed):
    """Test that the certified functional decays at rate 2 nu between switches."""
    grid = GridSpec(n_x=201)
    signal = random_dwell_signal(seed, tau_D=0.3, horizon=6.0)
    w0 = InitialProfile(amplitude=[1.0, -0.5]).sample(grid.x, 2)
    trace = lyapunov_trace(simulate(damped, signal, w0, grid), DAMPED_CERT)
    assert _decay_excess(trace, DAMPED_CERT.nu) <= 0.05


@pytest.mark.slow
def test_damped_certificate_decays_along_periodic_signal(damped):
    excess = {}
    for n_x in (101, 201, 401):
        grid = GridSpec(n_x=n_x)
        w0 = InitialProfile(amplitude=[1.0, 1.0]).sample(grid.x, 2)
        trace = lyapunov_trace(simulate(damped, periodic_signal(1.0, [0, 1], 12.0), w0, grid), DAMPED_CERT)
        excess[n_x] = _decay_excess(trace, DAMPED_CERT.nu)
        assert trace.lyap[-1] < trace.lyap[0]
    assert excess[201] <= 0.05
    assert excess[401] <= max(excess[201], 1e-3)


@pytest.mark.slow
@pytest.mark.parametrize("k", range(20))
def test_random_certificates_decay(k):
    """Test certified decay on random scalar and 2x2 instances, and that refinement does not worsen it."""
    rng = np.random.default_rng(100 + k)
    system, cert = _random_certified(rng, 1 if k % 2 else 2)
    signal = random_dwell_signal(k, tau_D=0.4, horizon=3.0)
    excess = {}
    for n_x in (201, 401):
        grid = GridSpec(n_x=n_x)
        w0 = InitialProfile(amplitude=[1.0, -0.7][: system.n]).sample(grid.x, system.n)
        trace = lyapunov_trace(simulate(system, signal, w0, grid), cert)
        excess[n_x] = _decay_excess(trace, cert.nu)
    assert excess[201] <= 0.05
    assert excess[401] <= max(excess[201], 1e-3)


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(3))
def test_dwell_certificate_jumps_and_decay(undamped, seed):
    """Test V(t_k) <= gamma e^J V(t_k-) at switches and the certified decay in between."""
    cert = certificate_from_weights(undamped, Variant.DWELL_SIGN_FIXED, REFERENCE_Q, 0.15, 0.15)
    grid = GridSpec(n_x=201)
    signal = random_dwell_signal(seed, tau_D=0.5, horizon=4.0)
    w0 = InitialProfile(amplitude=[1.0, -0.5]).sample(grid.x, 2)
    trace = lyapunov_trace(simulate(undamped, signal, w0, grid), cert)
    jump = cert.gamma * np.exp(jump_exponent(cert.variant, list(cert.mu_vector)))
    idx = trace.switch_indices()
    assert idx
    assert np.all(trace.lyap[idx] <= jump * trace.lyap_pre[idx] * 1.05)
    assert _decay_excess(trace, cert.nu) <= 0.05
