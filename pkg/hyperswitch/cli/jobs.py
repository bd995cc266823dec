"""Concurrent simulation sweeps over the switching period."""

import logging
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from hyperswitch.exceptions import HyperswitchError
from hyperswitch.model.schemas import SwitchedSystem
from hyperswitch.signals import periodic_signal
from hyperswitch.simulator.decay import estimate_decay
from hyperswitch.simulator.engine import simulate
from hyperswitch.simulator.schemas import DecayFit, GridSpec, InitialProfile

logger = logging.getLogger(__name__)

_progress_lock = threading.Lock()


@dataclass
class SweepPoint:
    period: float
    fit: Optional[DecayFit] = None
    error: Optional[str] = None

    @property
    def rate(self) -> Optional[float]:
        return None if self.fit is None else self.fit.rate


@dataclass
class SweepResult:
    points: List[SweepPoint] = field(default_factory=list)

    @property
    def bracket(self) -> Optional[Tuple[float, float]]:
        return sign_change_bracket(self.points)

    def rows(self) -> List[dict]:
        return [
            {
                "period": p.period,
                "rate": p.fit.rate if p.fit else None,
                "intercept": p.fit.intercept if p.fit else None,
                "residual": p.fit.residual if p.fit else None,
            }
            for p in self.points
        ]


def sweep_grid(start: float, stop: float, steps: int) -> List[float]:
    """
    Raises:
        ValueError: steps < 1, a nonpositive start or an empty range
    """
    if steps < 1:
        raise ValueError(f"sweep needs at least one step, got {steps}")
    if start <= 0.0 or stop < start:
        raise ValueError(f"invalid sweep range [{start}, {stop}]")
    return [float(v) for v in np.linspace(start, stop, steps)]


def sign_change_bracket(points: Sequence[SweepPoint]) -> Optional[Tuple[float, float]]:
    """First pair of consecutive fitted periods whose rates change sign (growth to decay or back)."""
    fitted = [p for p in sorted(points, key=lambda p: p.period) if p.fit is not None]
    for a, b in zip(fitted, fitted[1:]):
        if (a.fit.decaying) != (b.fit.decaying):
            return a.period, b.period
    return None


def run_sweep(
    system: SwitchedSystem,
    periods: Sequence[float],
    cycle: Sequence[int] = (0, 1),
    horizon: float = 12.0,
    grid: Optional[GridSpec] = None,
    initial: Optional[InitialProfile] = None,
    window: Optional[Tuple[float, float]] = None,
    jobs: int = 1,
) -> SweepResult:
    """
    Simulate one periodic signal per period and fit its decay rate.

    A failed point is logged and kept with its error message; the others go on.
    Points come back sorted by period.
    """
    grid = grid or GridSpec()
    initial = initial or InitialProfile()
    w0 = initial.sample(grid.x, system.n)
    total = len(periods)
    done = [0]

    def run_one(period: float) -> SweepPoint:
        try:
            signal = periodic_signal(period, cycle, horizon)
            trace = simulate(system, signal, w0, grid)
            point = SweepPoint(period=period, fit=estimate_decay(trace, window))
        except (HyperswitchError, ValueError) as e:
            logger.error(f"Sweep point {period:.6g} failed: {e}", extra={"period": period})
            point = SweepPoint(period=period, error=str(e))
        with _progress_lock:
            done[0] += 1
            logger.info(
                f"Sweep {done[0]}/{total}: period {period:.6g}, rate "
                f"{'n/a' if point.rate is None else f'{point.rate:.6g}'}",
                extra={"period": period},
            )
        return point

    if jobs > 1 and total > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            points = list(pool.map(run_one, periods))
    else:
        points = [run_one(p) for p in periods]
    return SweepResult(points=sorted(points, key=lambda p: p.period))
