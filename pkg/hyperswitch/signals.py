"""Switching signals and the average-dwell-time signal class."""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

logger = logging.getLogger(__name__)

# Relative slack on the dwell inequality for floating-point switch times.
DWELL_RTOL = 1e-12


class SwitchingSignal(BaseModel):
    """
    Piecewise constant, right-continuous mode index on [0, horizon].

    `switches` holds (time, new mode) pairs with strictly increasing times in
    (0, horizon); the signal takes the new mode at the switch instant.
    """

    model_config = ConfigDict(frozen=True)

    initial_mode: int = Field(default=0, ge=0)
    switches: List[Tuple[float, int]] = Field(default_factory=list)
    horizon: float = Field(..., ge=0.0)

    @model_validator(mode="after")
    def _check_switches(self) -> "SwitchingSignal":
        prev_t, prev_mode = 0.0, self.initial_mode
        for t, mode in self.switches:
            if t <= prev_t:
                raise ValueError(f"switch times must be strictly increasing and positive, got {t}")
            if t >= self.horizon:
                raise ValueError(f"switch at {t} lies outside (0, {self.horizon})")
            if mode < 0:
                raise ValueError(f"mode index must be nonnegative, got {mode}")
            if mode == prev_mode:
                raise ValueError(f"switch at {t} keeps mode {mode}")
            prev_t, prev_mode = t, mode
        return self

    @property
    def times(self) -> List[float]:
        return [t for t, _ in self.switches]

    @property
    def modes_used(self) -> List[int]:
        return sorted({self.initial_mode, *(m for _, m in self.switches)})

    def mode_at(self, t: float) -> int:
        """sigma(t) with right-continuity: the new mode holds from its switch instant on."""
        mode = self.initial_mode
        for s, m in self.switches:
            if s <= t:
                mode = m
            else:
                break
        return mode

    def segments(self) -> List[Tuple[float, float, int]]:
        """(start, end, mode) of every constant piece on [0, horizon]."""
        out = []
        start, mode = 0.0, self.initial_mode
        for t, m in self.switches:
            out.append((start, t, mode))
            start, mode = t, m
        out.append((start, self.horizon, mode))
        return out

    def to_dict(self) -> dict:
        return {
            "initial_mode": self.initial_mode,
            "switches": [[t, m] for t, m in self.switches],
            "horizon": self.horizon,
        }


def periodic_signal(period: float, cycle: Sequence[int] = (0, 1), horizon: float = 12.0) -> SwitchingSignal:
    """
    Switches at k * period, k >= 1, visiting the modes of `cycle` in turn.

    Raises:
        ValueError: period <= 0 or a cycle without two distinct consecutive modes
    """
    if period <= 0.0:
        raise ValueError(f"period must be positive, got {period}")
    cycle = list(cycle)
    if not cycle:
        raise ValueError("mode cycle must not be empty")
    if len(cycle) > 1 and any(a == b for a, b in zip(cycle, cycle[1:] + cycle[:1])):
        raise ValueError(f"consecutive modes of the cycle must differ, got {cycle}")
    switches = []
    if len(cycle) > 1:
        k = 1
        while k * period < horizon * (1.0 - 1e-12):
            switches.append((k * period, cycle[k % len(cycle)]))
            k += 1
    return SwitchingSignal(initial_mode=cycle[0], switches=switches, horizon=horizon)


def count_switches(signal: SwitchingSignal, tau: float, t: float) -> int:
    """Number of discontinuities of the signal on (tau, t]."""
    if not 0.0 <= tau <= t:
        raise ValueError(f"need 0 <= tau <= t, got tau = {tau}, t = {t}")
    times = np.asarray(signal.times, dtype=float)
    return int(np.searchsorted(times, t, side="right") - np.searchsorted(times, tau, side="right"))


def validate_dwell(
    signal: SwitchingSignal, tau_D: float, N0: int
) -> Tuple[bool, Optional[Tuple[float, float]]]:
    """
    Membership in the average-dwell-time class: N(tau, t) <= N0 + (t - tau) / tau_D.

    Checked over switch-time pairs s_a <= s_b with (b - a + 1) switches on
    [s_a, s_b]. Returns the verdict and the worst violating pair of switch times.
    """
    if tau_D <= 0.0:
        raise ValueError(f"tau_D must be positive, got {tau_D}")
    if N0 < 0:
        raise ValueError(f"N0 must be nonnegative, got {N0}")
    s = np.asarray(signal.times, dtype=float)
    if s.size == 0:
        return True, None
    a, b = np.triu_indices(s.size)
    count = (b - a + 1).astype(float)
    allowed = N0 + (s[b] - s[a]) / tau_D
    excess = count - allowed - DWELL_RTOL * np.maximum(1.0, allowed)
    k = int(np.argmax(excess))
    if excess[k] > 0.0:
        return False, (float(s[a[k]]), float(s[b[k]]))
    return True, None


def random_dwell_signal(
    seed: int,
    tau_D: float,
    N0: int = 1,
    horizon: float = 12.0,
    n_modes: int = 2,
    initial_mode: int = 0,
) -> SwitchingSignal:
    """
    Random signal with gaps uniform on [tau_D, 2 tau_D]; a member of the class for N0 >= 1.

    Each new mode is drawn uniformly among the modes other than the current one.
    """
    if tau_D <= 0.0:
        raise ValueError(f"tau_D must be positive, got {tau_D}")
    if n_modes < 1:
        raise ValueError(f"need at least one mode, got {n_modes}")
    rng = np.random.default_rng(seed)
    switches = []
    t, mode = 0.0, initial_mode
    if n_modes > 1:
        while True:
            t += float(rng.uniform(tau_D, 2.0 * tau_D))
            if t >= horizon:
                break
            choices = [m for m in range(n_modes) if m != mode]
            mode = int(choices[rng.integers(len(choices))])
            switches.append((t, mode))
    signal = SwitchingSignal(initial_mode=initial_mode, switches=switches, horizon=horizon)
    ok, _ = validate_dwell(signal, tau_D, max(N0, 1))
    if not ok:
        logger.warning(f"Generated signal violates the dwell class (seed {seed})")
    return signal


def signal_from_dict(data: dict) -> SwitchingSignal:
    return SwitchingSignal.model_validate(data)


def load_signal(path: Union[str, Path]) -> SwitchingSignal:
    return signal_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def dump_signal(signal: SwitchingSignal, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(signal.to_dict(), indent=2), encoding="utf-8")
    return path
