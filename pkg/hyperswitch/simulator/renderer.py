"""Trace artifacts: CSV time series, state snapshots and an SVG plot."""

from __future__ import annotations

import logging
from pathlib import Path
from typing import List, Optional

import numpy as np

from hyperswitch.simulator.schemas import Trace
from hyperswitch.utils.csv_export import TRACE_FIELDS, write_csv

logger = logging.getLogger(__name__)


def trace_rows(trace: Trace) -> List[dict]:
    lyap = trace.lyap if trace.lyap is not None else [None] * len(trace.times)
    return [
        {"t": float(t), "l2": float(v), "V": None if V is None else float(V), "mode": int(m)}
        for t, v, V, m in zip(trace.times, trace.l2, lyap, trace.modes)
    ]


def write_trace_csv(trace: Trace, path: Path) -> Path:
    """`t, l2, V, mode` per recorded instant (V empty without a certificate)."""
    return write_csv(Path(path), TRACE_FIELDS, trace_rows(trace))


def write_states_csv(trace: Trace, path: Path, every: int = 1) -> Path:
    """Long-format snapshots: t, x, w_0..w_{n-1}, u = sum of components."""
    n = trace.system.n
    fields = ["t", "x"] + [f"w_{k}" for k in range(n)] + ["u"]
    rows = []
    for k in range(0, len(trace.times), max(1, every)):
        t = float(trace.times[k])
        w = trace.states[k]
        u = w.sum(axis=1)
        for j, xj in enumerate(trace.x):
            row = {"t": t, "x": float(xj), "u": float(u[j])}
            row.update({f"w_{c}": float(w[j, c]) for c in range(n)})
            rows.append(row)
    return write_csv(Path(path), fields, rows)


def plot_trace(trace: Trace, path: Path, title: Optional[str] = None) -> Path:
    """Semilog plot of l2 (and V when present) against t, switch instants marked."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.semilogy(trace.times, np.maximum(trace.l2, 1e-300), label="L2 norm")
    if trace.lyap is not None:
        ax.semilogy(trace.times, np.maximum(trace.lyap, 1e-300), label="V", linestyle="--")
    for t in trace.switch_times:
        ax.axvline(t, color="0.8", linewidth=0.6)
    if trace.fit is not None and not trace.fit.vanished:
        a, b = trace.fit.window
        tt = np.linspace(a, b, 50)
        ax.semilogy(tt, np.exp(trace.fit.intercept - trace.fit.rate * tt), label=f"fit, rate {trace.fit.rate:.3g}")
    ax.set_xlabel("t")
    ax.set_title(title or (trace.system.name or "trace"))
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)
    logger.info(f"Plot written to {path}")
    return path
