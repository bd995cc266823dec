"""Tests for the upwind simulator and its trace artifacts."""

import csv

import numpy as np
import pytest

from hyperswitch.exceptions import CFLViolation, DimensionMismatch
from hyperswitch.signals import SwitchingSignal, periodic_signal
from hyperswitch.simulator.decay import estimate_decay
from hyperswitch.simulator.engine import l2_norm, simulate, upwind_step
from hyperswitch.simulator.renderer import plot_trace, write_states_csv, write_trace_csv
from hyperswitch.simulator.schemas import GridSpec, InitialProfile

from tests.conftest import scalar_sign_change, wave_split

GRID = GridSpec(n_x=201, cfl=0.9)


def _fitted_rate(system, period, horizon=12.0, grid=GRID):
    signal = periodic_signal(period, [0, 1], horizon)
    w0 = InitialProfile(amplitude=[1.0] * system.n).sample(grid.x, system.n)
    trace = simulate(system, signal, w0, grid)
    return estimate_decay(trace).rate


@pytest.mark.slow
@pytest.mark.parametrize(
    "system, period, decays",
    [
        (wave_split(0.0), 1.0, False),
        (wave_split(0.0), 2.4, True),
        (wave_split(0.3), 1.0, True),
        (scalar_sign_change(-1.0, 2.0), 1.2, False),
        (scalar_sign_change(-1.0, 2.0), 4.6, True),
        (scalar_sign_change(0.1, 0.5), 0.9, False),
        (scalar_sign_change(0.1, 0.5), 2.4, True),
    ],
)
def test_simulated_decay_sign(system, period, decays):
    """Test that the fitted rate has the sign the switching period predicts."""
    rate = _fitted_rate(system, period)
    assert (rate > 0.0) == decays


def test_undamped_period_one_grows(undamped):
    signal = periodic_signal(1.0, [0, 1], 12.0)
    w0 = InitialProfile(amplitude=[1.0, 1.0]).sample(GRID.x, 2)
    trace = simulate(undamped, signal, w0, GRID)
    assert trace.growth_ratio() > 1.0


def test_absorbing_boundary_empties_domain():
    """Test that a zero boundary gain flushes the state out within a few transit times."""
    system = scalar_sign_change(0.0, 0.0)
    grid = GridSpec(n_x=101)
    signal = SwitchingSignal(initial_mode=0, horizon=3.0)
    trace = simulate(system, signal, InitialProfile().sample(grid.x, 1), grid)
    assert trace.l2[0] > 0.1
    assert trace.l2[-1] < 1e-10


def test_first_order_convergence():
    """Test that the error against the exact translate halves when the grid is refined."""
    system = scalar_sign_change(0.0, 0.0)
    profile = InitialProfile(kind="bump")
    horizon = 0.25
    errors = []
    for n_x in (101, 201, 401):
        grid = GridSpec(n_x=n_x, cfl=0.8)
        trace = simulate(system, SwitchingSignal(initial_mode=0, horizon=horizon), profile.sample(grid.x, 1), grid)
        exact = profile.sample(grid.x - horizon, 1)
        exact[grid.x < horizon] = 0.0
        errors.append(l2_norm(trace.states[-1] - exact, grid.x))
    assert errors[0] > errors[1] > errors[2]
    for coarse, fine in zip(errors, errors[1:]):
        assert 1.7 <= coarse / fine <= 2.3


def test_switch_times_are_sampled(undamped):
    signal = periodic_signal(1.5, [0, 1], 6.0)
    grid = GridSpec(n_x=51, stride=7)
    trace = simulate(undamped, signal, InitialProfile(amplitude=[1.0, 1.0]).sample(grid.x, 2), grid)
    assert trace.switch_times == signal.times
    for k, t in zip(trace.switch_indices(), signal.times):
        assert trace.times[k] == pytest.approx(t)
        assert trace.modes[k] == signal.mode_at(t)
    assert trace.times[0] == 0.0
    assert trace.horizon == pytest.approx(6.0)
    assert np.all(np.diff(trace.times) > 0.0)


def test_switch_sample_takes_new_mode():
    """Test that the sample at a switch instant is labelled with the incoming mode."""
    system = scalar_sign_change(-1.0, 2.0)
    grid = GridSpec(n_x=51)
    signal = SwitchingSignal(initial_mode=0, switches=[(0.5, 1)], horizon=1.0)
    trace = simulate(system, signal, InitialProfile().sample(grid.x, 1), grid)
    k = trace.switch_indices()[0]
    assert trace.states[k].shape == (51, 1)
    assert np.isfinite(trace.l2).all()
    assert trace.modes[k - 1] == 0 and trace.modes[k] == 1


def test_upwind_step_rejects_cfl_violation(undamped):
    y = np.zeros((11, 2))
    with pytest.raises(CFLViolation):
        upwind_step(undamped[0], y, dt=0.2, dx=0.1)


def test_upwind_step_applies_boundary_closure(undamped):
    """Test that incoming characteristics are set from the outgoing ones through G."""
    y = np.ones((11, 2))
    out = upwind_step(undamped[0], y, dt=0.05, dx=0.1)
    assert out[-1, 0] == pytest.approx(-1.2)
    assert out[0, 1] == pytest.approx(0.6)


def test_simulate_rejects_bad_inputs(undamped):
    grid = GridSpec(n_x=21)
    with pytest.raises(DimensionMismatch):
        simulate(undamped, periodic_signal(1.0), np.zeros((21, 3)), grid)
    with pytest.raises(DimensionMismatch):
        simulate(undamped, periodic_signal(1.0, cycle=[0, 4]), np.zeros((21, 2)), grid)


def test_trace_csv_outputs(tmp_path, damped):
    grid = GridSpec(n_x=41, stride=5)
    trace = simulate(damped, periodic_signal(1.0, [0, 1], 3.0), InitialProfile(amplitude=[1.0, 1.0]).sample(grid.x, 2), grid)
    path = write_trace_csv(trace, tmp_path / "trace.csv")
    with path.open() as fh:
        rows = list(csv.DictReader(fh))
    assert list(rows[0]) == ["t", "l2", "V", "mode"]
    assert len(rows) == len(trace.times)
    assert rows[0]["V"] == ""

    states = write_states_csv(trace, tmp_path / "states.csv", every=10)
    with states.open() as fh:
        header = fh.readline().strip().split(",")
    assert header == ["t", "x", "w_0", "w_1", "u"]


def test_plot_trace_writes_svg(tmp_path, damped):
    grid = GridSpec(n_x=41)
    trace = simulate(damped, periodic_signal(1.0, [0, 1], 4.0), InitialProfile(amplitude=[1.0, 1.0]).sample(grid.x, 2), grid)
    trace = trace.model_copy(update={"fit": estimate_decay(trace)})
    path = plot_trace(trace, tmp_path / "plots" / "trace.svg", title="damped")
    assert path.exists()
    assert path.read_text().lstrip().startswith("<?xml")
