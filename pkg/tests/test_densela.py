"""Tests for the dense symmetric kernels."""

import numpy as np
import pytest

from hyperswitch.densela import (
    SymMatrix,
    jacobi_eig,
    min_eigpair,
    min_gamma,
    null_space_basis,
    psd_margin,
    range_basis,
    sym_eig,
)
from hyperswitch.exceptions import KernelMismatch


@pytest.mark.parametrize("method", ["lapack", "jacobi"])
def test_sym_eig_sorts_diagonal(method):
    w, v = sym_eig(np.diag([3.0, 1.0, 2.0]), method=method)
    assert np.allclose(w, [1.0, 2.0, 3.0])
    assert np.allclose(v.T @ v, np.eye(3), atol=1e-10)


@pytest.mark.parametrize("method", ["lapack", "jacobi"])
def test_sym_eig_swap_matrix(method):
    w, _ = sym_eig(np.array([[0.0, 1.0], [1.0, 0.0]]), method=method)
    assert np.allclose(w, [-1.0, 1.0])


def test_jacobi_matches_lapack_on_random_matrices(rng):
    for _ in range(20):
        a = rng.standard_normal((5, 5))
        a = a + a.T
        w, v = jacobi_eig(a)
        order = np.argsort(w)
        assert np.allclose(w[order], np.linalg.eigvalsh(a), atol=1e-10)
        assert np.linalg.norm(a @ v - v * w) <= 1e-10 * max(1.0, np.linalg.norm(a))


def test_symmetry_is_enforced():
    with pytest.raises(ValueError):
        SymMatrix([[1.0, 2.0], [0.0, 1.0]])
    assert SymMatrix([[1.0, 2.0], [2.0, 1.0]]).n == 2


def test_psd_margin_values():
    assert psd_margin(np.eye(3)) == pytest.approx(1.0)
    assert psd_margin(np.diag([0.0, 2.0])) == pytest.approx(0.0)
    assert psd_margin(SymMatrix([[1.0, 2.0], [2.0, 1.0]])) == pytest.approx(-1.0)


def test_min_eigpair_vector():
    value, vec = min_eigpair(np.array([[1.0, 2.0], [2.0, 1.0]]))
    assert value == pytest.approx(-1.0)
    assert abs(abs(vec[0]) - abs(vec[1])) < 1e-12


def test_null_space_of_difference_row():
    basis = null_space_basis(np.array([[1.0, -1.0]]))
    assert basis.shape == (2, 1)
    assert np.allclose(np.abs(basis[:, 0]), [1.0 / np.sqrt(2.0)] * 2)


def test_null_space_of_zero_is_everything():
    assert np.allclose(null_space_basis(np.zeros((3, 4))), np.eye(4))


def test_null_space_of_rank_deficient_matrix(rng):
    E = rng.standard_normal((4, 2)) @ rng.standard_normal((2, 6))
    basis = null_space_basis(E)
    assert basis.shape == (6, 4)
    assert np.allclose(basis.T @ basis, np.eye(4), atol=1e-10)
    assert np.linalg.norm(E @ basis) <= 1e-9 * np.linalg.norm(E)


def test_range_basis_splits_kernel():
    rng_, ker = range_basis(np.diag([0.0, 3.0]))
    assert rng_.shape == (2, 1) and ker.shape == (2, 1)
    assert abs(ker[0, 0]) == pytest.approx(1.0)


def test_min_gamma_on_common_kernel():
    assert min_gamma(np.diag([0.0, 2.0]), np.diag([0.0, 1.0])) == pytest.approx(2.0)


def test_min_gamma_of_equal_matrices_is_one():
    M = np.array([[2.0, 0.5], [0.5, 1.0]])
    assert min_gamma(M, M) == pytest.approx(1.0)


def test_min_gamma_rejects_incompatible_kernels():
    with pytest.raises(KernelMismatch):
        min_gamma(np.diag([1.0, 0.0]), np.diag([0.0, 1.0]))


def test_min_gamma_agrees_with_bisection(rng):
    for _ in range(20):
        B = rng.standard_normal((3, 2))
        Mi = B @ np.diag(rng.uniform(0.5, 2.0, 2)) @ B.T
        Mj = B @ np.diag(rng.uniform(0.5, 2.0, 2)) @ B.T
        gamma = min_gamma(Mi, Mj)
        lo, hi = 0.0, 100.0
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            if psd_margin(mid * Mj - Mi) >= -1e-12 * np.linalg.norm(Mi):
                hi = mid
            else:
                lo = mid
        assert gamma == pytest.approx(hi, rel=1e-6)
        assert psd_margin(gamma * Mj - Mi) >= -1e-8
        assert psd_margin(gamma * (1.0 - 1e-3) * Mj - Mi) < 0.0
