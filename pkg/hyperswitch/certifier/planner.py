"""Line-search planning over mu: grids, zoom refinement and candidate tuples."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from hyperswitch.certifier.schemas import SearchOptions

# Relative tolerance under which two rates count as equal when ranking.
RANK_RTOL = 1e-9


@dataclass
class MuPoint:
    """Outcome of the nu bisection at one mu (or mu tuple)."""

    mu: Tuple[float, ...]
    nu: float
    feasible: bool
    q: Optional[np.ndarray]
    margin: float

    def key(self) -> Tuple[int, float]:
        """Feasible points rank by rate, the rest by their best margin at nu = lo."""
        return (1, self.nu) if self.feasible else (0, self.margin)


def better(a: MuPoint, b: Optional[MuPoint]) -> bool:
    """True if `a` ranks strictly above `b`; ties go to the smallest |mu|, then mode order."""
    if b is None:
        return True
    ka, kb = a.key(), b.key()
    if ka[0] != kb[0]:
        return ka[0] > kb[0]
    scale = max(abs(ka[1]), abs(kb[1]), 1e-300)
    if abs(ka[1] - kb[1]) > RANK_RTOL * scale:
        return ka[1] > kb[1]
    return (sum(abs(v) for v in a.mu), a.mu) < (sum(abs(v) for v in b.mu), b.mu)


def best_point(points: Sequence[MuPoint]) -> Optional[MuPoint]:
    best: Optional[MuPoint] = None
    for p in points:
        if better(p, best):
            best = p
    return best


def initial_grid(options: SearchOptions) -> List[float]:
    return list(options.mu_grid)


def local_spacing(grid: Sequence[float], center: float) -> float:
    """Distance from `center` to its nearest distinct grid neighbour."""
    others = [abs(g - center) for g in grid if g != center]
    return min(others) if others else 1.0


def zoom_grid(center: float, spacing: float, points: int) -> List[float]:
    """Uniform grid of `points` values on [center - spacing, center + spacing]."""
    return [float(v) for v in np.linspace(center - spacing, center + spacing, points)]


@dataclass
class ModeTable:
    """nu_i*(mu) for one mode, collected over every mu evaluated so far."""

    points: Dict[float, MuPoint] = field(default_factory=dict)

    def add(self, p: MuPoint) -> None:
        self.points[p.mu[0]] = p

    def feasible(self) -> List[MuPoint]:
        return [p for p in self.points.values() if p.feasible]

    def best(self) -> Optional[MuPoint]:
        return best_point(list(self.points.values()))


def dwell_lower_bound(jump: float, nu: float) -> float:
    """tau_D can not fall below jump / (2 nu) since gamma >= 1."""
    return jump / (2.0 * nu) if nu > 0.0 else np.inf


def candidate_tuples(
    grids: Sequence[Sequence[float]],
    max_tuples: int,
    anchor: Optional[Tuple[float, ...]] = None,
) -> List[Tuple[float, ...]]:
    """
    Per-mode mu tuples to evaluate jointly.

    The full product is used when it fits `max_tuples`; otherwise shared-mu
    tuples, tuples varying one mode at a time around `anchor`, and the anchor
    itself.
    """
    sizes = [len(g) for g in grids]
    if int(np.prod(sizes)) <= max_tuples:
        return [tuple(t) for t in itertools.product(*grids)]
    out: List[Tuple[float, ...]] = []
    shared = set(grids[0]).intersection(*map(set, grids[1:]))
    out.extend(tuple([v] * len(grids)) for v in sorted(shared))
    if anchor is not None:
        out.append(anchor)
        for i, g in enumerate(grids):
            for v in g:
                t = list(anchor)
                t[i] = v
                out.append(tuple(t))
    seen = set()
    unique = []
    for t in out:
        if t not in seen:
            seen.add(t)
            unique.append(t)
    return unique


def feasible_edges(
    table: ModeTable, center: float, adjacent_only: bool = False
) -> List[Tuple[float, float]]:
    """
    (last feasible, first infeasible) mu pairs bounding the feasible run of `table` around `center`.

    With `adjacent_only`, only sides where `center` itself borders an infeasible mu are returned.
    """
    mus = sorted(table.points)
    if center not in table.points or not table.points[center].feasible:
        return []
    k = mus.index(center)
    out: List[Tuple[float, float]] = []
    for step in (-1, 1):
        j = k
        while 0 <= j + step < len(mus) and table.points[mus[j + step]].feasible:
            j += step
        nxt = j + step
        if 0 <= nxt < len(mus) and not (adjacent_only and j != k):
            out.append((mus[j], mus[nxt]))
    return out
