"""Shared fixtures: the worked example systems and a clean settings cache."""

import numpy as np
import pytest

from hyperswitch.config import get_settings
from hyperswitch.model.hyperbolic import mode_from_characteristic
from hyperswitch.model.schemas import SwitchedSystem

G1 = [[0.0, -1.2], [0.6, 0.0]]
G2 = [[0.0, -0.6], [1.2, 0.0]]


def wave_split(damping: float = 0.0) -> SwitchedSystem:
    F = -damping * np.eye(2)
    modes = [
        mode_from_characteristic([-1.0, 1.0], 1, F, G1, label="mode 1"),
        mode_from_characteristic([-1.0, 1.0], 1, F, G2, label="mode 2"),
    ]
    return SwitchedSystem.of(modes, name="wave split")


def scalar_sign_change(F: float, G: float) -> SwitchedSystem:
    modes = [
        mode_from_characteristic([1.0], 0, [[F]], [[G]], label="rightward"),
        mode_from_characteristic([-1.0], 1, [[F]], [[G]], label="leftward"),
    ]
    return SwitchedSystem.of(modes, name=f"scalar F={F} G={G}")


@pytest.fixture(autouse=True)
def _fresh_settings(monkeypatch):
    """Settings come from defaults, not from the caller's environment."""
    for key in ("HYPERSWITCH_LOG_LEVEL", "HYPERSWITCH_OUTPUT_DIR", "HYPERSWITCH_TOL_FEAS"):
        monkeypatch.delenv(key, raising=False)
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.fixture
def undamped():
    return wave_split(0.0)


@pytest.fixture
def damped():
    return wave_split(0.3)


@pytest.fixture
def example_b_decaying():
    """F = -1, G = 2."""
    return scalar_sign_change(-1.0, 2.0)


@pytest.fixture
def example_b_growing_source():
    """F = 0.1, G = 0.5."""
    return scalar_sign_change(0.1, 0.5)


@pytest.fixture
def rng():
    return np.random.default_rng(0)
