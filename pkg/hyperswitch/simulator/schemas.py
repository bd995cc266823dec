"""Pydantic schemas for simulation grids, traces and decay fits."""

from __future__ import annotations

from typing import List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from hyperswitch.model.schemas import Mode, SwitchedSystem


class GridSpec(BaseModel):
    """Uniform grid on [0, 1] and explicit time-step control."""

    model_config = ConfigDict(frozen=True)

    n_x: int = Field(default=201, ge=3, description="Grid points including both boundaries")
    cfl: float = Field(default=0.9, gt=0.0, le=1.0, description="Courant number")
    stride: int = Field(default=1, ge=1, description="Record every stride-th step (switch times always)")

    @property
    def dx(self) -> float:
        return 1.0 / (self.n_x - 1)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.n_x)

    def dt_for(self, mode: Mode) -> float:
        """Largest step the Courant number allows in `mode`."""
        return self.cfl * self.dx / mode.max_speed


class InitialProfile(BaseModel):
    """Initial state w0(x): componentwise sin(2 pi k x) by default."""

    kind: Literal["sine", "constant", "bump"] = "sine"
    wavenumber: float = Field(default=1.0, description="k in sin(2 pi k x)")
    amplitude: List[float] = Field(default_factory=lambda: [1.0], min_length=1)

    def sample(self, x: np.ndarray, n: int) -> np.ndarray:
        """Profile on the grid, shape (len(x), n)."""
        amp = np.resize(np.asarray(self.amplitude, dtype=float), n)
        if self.kind == "sine":
            base = np.sin(2.0 * np.pi * self.wavenumber * x)
        elif self.kind == "constant":
            base = np.ones_like(x)
        else:
            base = np.exp(-((x - 0.5) ** 2) / 0.01)
        return np.outer(base, amp)


class DecayFit(BaseModel):
    """Least-squares fit of ln l2 against t on a time window."""

    model_config = ConfigDict(frozen=True)

    rate: float = Field(..., description="Negated slope; positive means decay")
    intercept: float
    residual: float = Field(..., description="RMS residual of the log fit")
    C: float = Field(..., description="Empirical overshoot exp(intercept) / l2(0)")
    window: Tuple[float, float]
    samples: int
    vanished: bool = Field(default=False, description="l2 reached zero inside the window")

    @property
    def decaying(self) -> bool:
        return self.vanished or self.rate > 0.0


class Trace(BaseModel):
    """
    Simulation output. States are physical variables w, shape (samples, n_x, n).

    `modes[k]` is the mode active at `times[k]`; at a switch time it is the new
    mode. `lyap_pre` holds V with the previous mode's functional at switch
    samples (NaN elsewhere).
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    system: SwitchedSystem
    grid: GridSpec
    x: np.ndarray
    times: np.ndarray
    states: np.ndarray
    l2: np.ndarray
    modes: List[int]
    switch_times: List[float] = Field(default_factory=list)
    steps: int = 0
    lyap: Optional[np.ndarray] = None
    lyap_pre: Optional[np.ndarray] = None
    fit: Optional[DecayFit] = None

    @property
    def horizon(self) -> float:
        return float(self.times[-1])

    @property
    def u(self) -> np.ndarray:
        """Sum of the state components, shape (samples, n_x)."""
        return self.states.sum(axis=2)

    def switch_indices(self) -> List[int]:
        return [int(np.searchsorted(self.times, t)) for t in self.switch_times]

    def growth_ratio(self) -> float:
        """l2(T) / l2(0)."""
        return float(self.l2[-1] / self.l2[0]) if self.l2[0] > 0.0 else float("nan")
