"""Empirical decay rates from L2 traces."""

from __future__ import annotations

import logging
from typing import Optional, Tuple

import numpy as np

from hyperswitch.exceptions import DegenerateWindow
from hyperswitch.simulator.schemas import DecayFit, Trace

logger = logging.getLogger(__name__)

MIN_SAMPLES = 8


def fit_decay(
    times: np.ndarray, l2: np.ndarray, window: Optional[Tuple[float, float]] = None
) -> DecayFit:
    """
    Least squares of ln l2 against t on `window` (default [T/2, T]).

    Raises:
        DegenerateWindow: Fewer than 8 samples in the window
    """
    times = np.asarray(times, dtype=float)
    l2 = np.asarray(l2, dtype=float)
    T = float(times[-1])
    a, b = window if window is not None else (0.5 * T, T)
    mask = (times >= a) & (times <= b)
    count = int(np.count_nonzero(mask))
    if count < MIN_SAMPLES:
        raise DegenerateWindow(f"{count} samples in [{a:g}, {b:g}], need at least {MIN_SAMPLES}")
    t, v = times[mask], l2[mask]
    if np.any(v <= 0.0):
        logger.warning(f"l2 vanishes inside [{a:g}, {b:g}]")
        return DecayFit(
            rate=float("-inf"), intercept=float("-inf"), residual=0.0, C=0.0, window=(a, b), samples=count, vanished=True
        )
    slope, intercept = np.polyfit(t, np.log(v), 1)
    resid = np.log(v) - (slope * t + intercept)
    C = float(np.exp(intercept) / l2[0]) if l2[0] > 0.0 else float("nan")
    return DecayFit(
        rate=float(-slope),
        intercept=float(intercept),
        residual=float(np.sqrt(np.mean(resid**2))),
        C=C,
        window=(a, b),
        samples=count,
    )


def estimate_decay(trace: Trace, window: Optional[Tuple[float, float]] = None) -> DecayFit:
    """Fit the decay rate of a trace's l2 samples.

    Raises:
        DegenerateWindow: Fewer than 8 samples in the window
    """
    fit = fit_decay(trace.times, trace.l2, window)
    logger.info(f"Fitted rate {fit.rate:.6g} on [{fit.window[0]:g}, {fit.window[1]:g}]")
    return fit
