"""Pydantic models for switched linear hyperbolic systems."""

from __future__ import annotations

from functools import cached_property
from typing import Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from hyperswitch.config import get_settings
from hyperswitch.exceptions import BadPartition, DimensionMismatch, ModelError


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


class BoundaryPhysical(BaseModel):
    """Coefficients of B0 w(t,0) + B1 w(t,1) = 0."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    B0: np.ndarray = Field(..., description="Coefficient of the trace at x = 0")
    B1: np.ndarray = Field(..., description="Coefficient of the trace at x = 1")

    @model_validator(mode="after")
    def _check_shapes(self) -> "BoundaryPhysical":
        if self.B0.shape != self.B1.shape or self.B0.ndim != 2 or self.B0.shape[0] != self.B0.shape[1]:
            raise DimensionMismatch(f"B0 {self.B0.shape} and B1 {self.B1.shape} must be equal square matrices")
        object.__setattr__(self, "B0", _frozen(self.B0))
        object.__setattr__(self, "B1", _frozen(self.B1))
        return self


class Mode(BaseModel):
    """
    One hyperbolic mode: transport L, source A and characteristic data.

    L = S^-1 Lambda S with Lambda = diag(lambda_1..lambda_n), the first m
    velocities negative and the rest positive, each block ascending.
    F = S A S^-1 and G couples outgoing to incoming characteristics:
    (y-(1), y+(0)) = G (y-(0), y+(1)).
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    n: int = Field(..., ge=1)
    L: np.ndarray
    A: np.ndarray
    S: np.ndarray
    Lambda: np.ndarray
    m: int = Field(..., ge=0)
    F: np.ndarray
    G: np.ndarray
    label: Optional[str] = None

    @model_validator(mode="after")
    def _check_invariants(self) -> "Mode":
        settings = get_settings()
        n = self.n
        for name in ("L", "A", "S", "Lambda", "F", "G"):
            arr = getattr(self, name)
            if arr.shape != (n, n):
                raise DimensionMismatch(f"{name} must be {n}x{n}, got {arr.shape}")
            object.__setattr__(self, name, _frozen(arr))
        if self.m > n:
            raise BadPartition(f"m = {self.m} exceeds n = {n}")

        lam = np.diag(self.Lambda)
        if np.max(np.abs(self.Lambda - np.diag(lam)), initial=0.0) > 0.0:
            raise BadPartition("Lambda must be diagonal")
        if np.any(np.abs(lam) < settings.tol_hyp):
            raise BadPartition(f"characteristic speed below {settings.tol_hyp:g} in magnitude")
        neg, pos = lam[: self.m], lam[self.m :]
        if np.any(neg >= 0.0) or np.any(pos <= 0.0):
            raise BadPartition(f"velocities {lam.tolist()} are not split at m = {self.m}")
        if np.any(np.diff(neg) < 0.0) or np.any(np.diff(pos) < 0.0):
            raise BadPartition("velocities must be ascending within each sign block")

        try:
            s_inv = np.linalg.inv(self.S)
        except np.linalg.LinAlgError as e:
            raise ModelError("S is singular") from e
        tol = settings.tol_recon
        l_scale = max(float(np.max(np.abs(self.L), initial=0.0)), 1e-300)
        recon = float(np.max(np.abs(s_inv @ self.Lambda @ self.S - self.L), initial=0.0))
        if recon > tol * l_scale * max(1.0, float(np.linalg.cond(self.S))):
            raise ModelError(f"S^-1 Lambda S does not reconstruct L (residual {recon:.3e})")
        a_scale = float(np.max(np.abs(self.A), initial=0.0))
        f_err = float(np.max(np.abs(self.S @ self.A @ s_inv - self.F), initial=0.0))
        if f_err > tol * a_scale * max(1.0, float(np.linalg.cond(self.S))):
            raise ModelError(f"F differs from S A S^-1 (residual {f_err:.3e})")
        return self

    @cached_property
    def S_inv(self) -> np.ndarray:
        return _frozen(np.linalg.inv(self.S))

    @property
    def velocities(self) -> np.ndarray:
        return np.diag(self.Lambda).copy()

    @property
    def lambda_plus(self) -> np.ndarray:
        """Lambda^+ = |Lambda| (diagonal matrix)."""
        return np.abs(self.Lambda)

    @property
    def S_minus(self) -> np.ndarray:
        return self.S[: self.m]

    @property
    def S_plus(self) -> np.ndarray:
        return self.S[self.m :]

    def g_blocks(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """(G--, G-+, G+-, G++) per the partition at m."""
        m = self.m
        return self.G[:m, :m], self.G[:m, m:], self.G[m:, :m], self.G[m:, m:]

    @property
    def max_speed(self) -> float:
        return float(np.max(np.abs(np.diag(self.Lambda))))


class SwitchedSystem(BaseModel):
    """Ordered, non-empty set of modes sharing the state dimension n (index set I = 0..len-1)."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    modes: Tuple[Mode, ...]
    n: int = Field(..., ge=1)
    name: Optional[str] = None

    @model_validator(mode="after")
    def _check_modes(self) -> "SwitchedSystem":
        if not self.modes:
            raise DimensionMismatch("a switched system needs at least one mode")
        for i, mode in enumerate(self.modes):
            if mode.n != self.n:
                raise DimensionMismatch(f"mode {i} has n = {mode.n}, expected {self.n}")
        return self

    @classmethod
    def of(cls, modes, name: Optional[str] = None) -> "SwitchedSystem":
        modes = tuple(modes)
        if not modes:
            raise DimensionMismatch("a switched system needs at least one mode")
        return cls(modes=modes, n=modes[0].n, name=name)

    def __len__(self) -> int:
        return len(self.modes)

    def __getitem__(self, i: int) -> Mode:
        return self.modes[i]

    @property
    def m_values(self) -> Tuple[int, ...]:
        return tuple(mode.m for mode in self.modes)

    @property
    def sign_fixed(self) -> bool:
        """True when every mode has the same number of negative velocities."""
        return len(set(self.m_values)) == 1
