"""Tests for the system model and physical/characteristic conversions."""

import json

import numpy as np
import pytest

from hyperswitch.exceptions import BadPartition, BoundaryNotReducible, DimensionMismatch, NotHyperbolic
from hyperswitch.model.hyperbolic import (
    boundary_templates,
    diagonalize_hyperbolic,
    mode_from_characteristic,
    mode_from_physical,
    to_physical,
)
from hyperswitch.model.io import load_system, system_from_dict, system_to_dict
from hyperswitch.model.schemas import BoundaryPhysical, SwitchedSystem

G1 = np.array([[0.0, -1.2], [0.6, 0.0]])


def test_diagonal_transport_is_its_own_characteristic_form():
    S, Lam, m = diagonalize_hyperbolic(np.diag([-1.0, 1.0]))
    assert np.allclose(S, np.eye(2))
    assert np.allclose(Lam, np.diag([-1.0, 1.0]))
    assert m == 1


def test_symmetric_transport_reconstructs():
    L = np.array([[0.0, 1.0], [1.0, 0.0]])
    S, Lam, m = diagonalize_hyperbolic(L)
    assert m == 1
    assert np.allclose(np.diag(Lam), [-1.0, 1.0])
    assert np.max(np.abs(np.linalg.inv(S) @ Lam @ S - L)) <= 1e-10
    assert np.allclose(np.linalg.norm(S, axis=1), 1.0)


def test_rotation_is_not_hyperbolic():
    with pytest.raises(NotHyperbolic):
        diagonalize_hyperbolic(np.array([[0.0, 1.0], [-1.0, 0.0]]))


def test_zero_speed_is_not_hyperbolic():
    with pytest.raises(NotHyperbolic):
        diagonalize_hyperbolic(np.diag([0.0, 1.0]))


def test_defective_matrix_is_not_hyperbolic():
    with pytest.raises(NotHyperbolic):
        diagonalize_hyperbolic(np.array([[1.0, 1.0], [0.0, 1.0]]))


def test_random_transport_matrices_reconstruct(rng):
    """Random well-conditioned similarity transforms of distinct speeds."""
    for _ in range(100):
        S0 = np.eye(4) + 0.3 * rng.standard_normal((4, 4))
        speeds = np.array([-2.0, -0.7, 0.5, 1.6]) + 0.05 * rng.standard_normal(4)
        L = np.linalg.inv(S0) @ np.diag(speeds) @ S0
        S, Lam, m = diagonalize_hyperbolic(L)
        assert m == 2
        assert np.allclose(np.diag(Lam), np.sort(speeds), atol=1e-8)
        assert np.max(np.abs(np.linalg.inv(S) @ Lam @ S - L)) <= 1e-10 * max(1.0, np.max(np.abs(L)))


def test_repeated_speeds_with_full_eigenspace_are_accepted():
    S, Lam, m = diagonalize_hyperbolic(np.diag([2.0, 2.0, -1.0]))
    assert m == 1
    assert np.allclose(np.diag(Lam), [-1.0, 2.0, 2.0])


def test_physical_boundary_round_trip():
    G0, G1t = boundary_templates(G1, 1)
    mode = mode_from_physical(np.diag([-1.0, 1.0]), np.zeros((2, 2)), BoundaryPhysical(B0=G0, B1=G1t))
    assert mode.m == 1
    assert np.allclose(mode.G, G1)


def test_physical_boundary_accepts_row_combinations():
    G0, G1t = boundary_templates(G1, 1)
    R = np.array([[2.0, 1.0], [0.5, 3.0]])
    mode = mode_from_physical(np.diag([-1.0, 1.0]), np.zeros((2, 2)), BoundaryPhysical(B0=R @ G0, B1=R @ G1t))
    assert np.allclose(mode.G, G1)


def test_scalar_physical_mode():
    mode = mode_from_physical(1.0, -1.0, BoundaryPhysical(B0=np.array([[1.0]]), B1=np.array([[-2.0]])))
    assert mode.m == 0
    assert mode.G[0, 0] == pytest.approx(2.0)
    assert mode.F[0, 0] == pytest.approx(-1.0)


def test_degenerate_boundary_is_rejected():
    with pytest.raises(BoundaryNotReducible):
        mode_from_physical(np.diag([-1.0, 1.0]), np.zeros((2, 2)), BoundaryPhysical(B0=np.zeros((2, 2)), B1=np.zeros((2, 2))))


def test_characteristic_mode_validates_partition():
    mode = mode_from_characteristic([-1.0, 1.0], 1, -0.3 * np.eye(2), G1)
    assert np.allclose(mode.S, np.eye(2))
    with pytest.raises(BadPartition):
        mode_from_characteristic([1.0, -1.0], 1, np.zeros((2, 2)), G1)


def test_lambda_plus_is_absolute_velocity():
    mode = mode_from_characteristic([-2.0, 3.0], 1, np.zeros((2, 2)), G1)
    assert np.allclose(mode.lambda_plus, np.diag([2.0, 3.0]))


def test_to_physical_round_trip(rng):
    L = np.array([[0.5, 1.0], [1.0, -0.5]])
    A = rng.standard_normal((2, 2))
    S, _, m = diagonalize_hyperbolic(L)
    G = rng.standard_normal((2, 2))
    G0, G1t = boundary_templates(G, m)
    mode = mode_from_physical(L, A, BoundaryPhysical(B0=G0 @ S, B1=G1t @ S))
    L2, A2, bp = to_physical(mode)
    again = mode_from_physical(L2, A2, bp)
    assert np.allclose(again.G, mode.G, atol=1e-9)
    assert np.allclose(again.F, mode.F, atol=1e-9)
    assert again.m == mode.m


def test_system_needs_equal_dimensions():
    a = mode_from_characteristic([1.0], 0, [[0.0]], [[0.5]])
    b = mode_from_characteristic([-1.0, 1.0], 1, np.zeros((2, 2)), G1)
    with pytest.raises(DimensionMismatch):
        SwitchedSystem.of([a, b])


def test_system_file_round_trip(tmp_path, undamped):
    doc = system_to_dict(undamped)
    path = tmp_path / "system.json"
    path.write_text(json.dumps(doc))
    loaded = load_system(path)
    assert len(loaded) == 2
    assert np.allclose(loaded[1].G, undamped[1].G)


def test_system_file_physical_form(undamped):
    loaded = system_from_dict(system_to_dict(undamped, physical=True))
    assert np.allclose(loaded[0].G, undamped[0].G)


def test_mode_spec_needs_exactly_one_form():
    with pytest.raises(ValueError):
        system_from_dict({"n": 1, "modes": [{"L": 1.0, "Lambda": [1.0]}]})
