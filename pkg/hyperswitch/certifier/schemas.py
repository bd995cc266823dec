"""Pydantic schemas for Lyapunov certificates and their search."""

from __future__ import annotations

from enum import Enum
from typing import Dict, List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class Variant(str, Enum):
    """Stability test a certificate was obtained from."""

    UNSWITCHED_PROP21 = "UnswitchedProp21"
    COMMON_SIGN_FIXED = "CommonSignFixed"
    DWELL_SIGN_FIXED = "DwellSignFixed"
    COMMON_SIGN_FREE = "CommonSignFree"
    DWELL_SIGN_FREE = "DwellSignFree"
    MU_ZERO = "MuZero"
    DIAGONAL_SOURCE = "DiagonalSource"
    ONE_SIGNED = "OneSigned"

    @property
    def is_dwell(self) -> bool:
        return self in (Variant.DWELL_SIGN_FIXED, Variant.DWELL_SIGN_FREE)

    @property
    def mu_fixed_zero(self) -> bool:
        """Variants without a mu parameter (mu is reported as zeros)."""
        return self in (Variant.MU_ZERO, Variant.COMMON_SIGN_FREE)

    @property
    def requires_equal_m(self) -> bool:
        return self in (
            Variant.COMMON_SIGN_FIXED,
            Variant.DWELL_SIGN_FIXED,
            Variant.MU_ZERO,
            Variant.DIAGONAL_SOURCE,
        )

    @property
    def split_coupling(self) -> bool:
        """Couplings act separately on the negative and positive weight blocks."""
        return self not in (Variant.COMMON_SIGN_FREE, Variant.DWELL_SIGN_FREE)

    @classmethod
    def parse(cls, value: "str | Variant") -> "Variant":
        if isinstance(value, Variant):
            return value
        for v in cls:
            if value.lower() in (v.value.lower(), v.name.lower()):
                return v
        raise ValueError(f"unknown variant {value!r}; expected one of {[v.value for v in cls]}")


def default_mu_grid() -> List[float]:
    return [float(v) for v in np.linspace(-3.0, 3.0, 41)]


class NuBisect(BaseModel):
    """Bisection on the decay rate nu."""

    lo: float = Field(default=0.0, ge=0.0)
    hi: Optional[float] = Field(default=None, gt=0.0, description="None = automatic upper bound")
    iters: int = Field(default=40, ge=1)
    tol: float = Field(default=1e-7, gt=0.0, description="Stop when hi - lo falls below tol")


class XCheck(BaseModel):
    """How x-dependent interior inequalities are verified over [0, 1]."""

    kind: Literal["grid", "interval"] = "grid"
    n_x: int = Field(default=65, ge=2, description="Grid points including both endpoints")
    max_depth: int = Field(default=8, ge=0, description="Interval subdivision depth")

    @classmethod
    def grid(cls, n_x: int = 65) -> "XCheck":
        return cls(kind="grid", n_x=n_x)

    @classmethod
    def interval(cls, max_depth: int = 8) -> "XCheck":
        return cls(kind="interval", max_depth=max_depth)

    def describe(self) -> str:
        return f"grid:{self.n_x}" if self.kind == "grid" else f"interval:{self.max_depth}"


class SearchOptions(BaseModel):
    """Line search over mu, bisection over nu and cutting-plane feasibility settings."""

    mu_grid: List[float] = Field(default_factory=default_mu_grid, min_length=1)
    nu_bisect: NuBisect = Field(default_factory=NuBisect)
    x_check: XCheck = Field(default_factory=XCheck)
    tol_feas: Optional[float] = Field(default=None, gt=0.0, description="None = settings value")
    max_feas_iters: int = Field(default=200, ge=1)
    refine_rounds: int = Field(default=3, ge=0)
    refine_points: int = Field(default=21, ge=3)
    max_mu_tuples: int = Field(default=64, ge=1)
    gamma_tol: float = Field(default=1e-6, gt=0.0)
    edge_tol: float = Field(default=1e-6, gt=0.0, description="Resolution of the bisection on the edge of the feasible mu range")
    edge_steps: int = Field(default=30, ge=0)
    jobs: int = Field(default=1, ge=1, description="Concurrent mu evaluations")

    @field_validator("mu_grid")
    @classmethod
    def _sorted_unique(cls, v: List[float]) -> List[float]:
        grid = sorted({float(x) for x in v})
        if not all(np.isfinite(grid)):
            raise ValueError("mu_grid must be finite")
        return grid


class Certificate(BaseModel):
    """A proved Lyapunov certificate.

    Q holds the diagonal of each Q_i. mu has one entry per mode (equal entries
    for shared-mu variants, zeros for MuZero and CommonSignFree).
    """

    model_config = ConfigDict(frozen=True)

    variant: Variant
    Q: List[List[float]]
    mu: List[float]
    nu: float = Field(..., gt=0.0)
    gamma: float = Field(default=1.0, ge=1.0)
    tau_D: float = Field(default=0.0, ge=0.0)
    margins: Dict[str, float] = Field(default_factory=dict)
    x_check: str = "grid:65"
    system: Optional[str] = None

    @model_validator(mode="after")
    def _check_lengths(self) -> "Certificate":
        if not self.Q:
            raise ValueError("a certificate needs at least one weight")
        if len(self.mu) not in (1, len(self.Q)):
            raise ValueError(f"mu has {len(self.mu)} entries for {len(self.Q)} modes")
        return self

    def mu_of(self, i: int) -> float:
        return self.mu[0] if len(self.mu) == 1 else self.mu[i]

    def q_of(self, i: int) -> np.ndarray:
        return np.asarray(self.Q[i], dtype=float)

    @property
    def mu_vector(self) -> np.ndarray:
        return np.array([self.mu_of(i) for i in range(len(self.Q))])

    def to_json(self) -> str:
        return self.model_dump_json(indent=2)

    @classmethod
    def from_json(cls, text: str) -> "Certificate":
        return cls.model_validate_json(text)


class AuditEntry(BaseModel):
    """One re-verified inequality."""

    name: str
    kind: Literal["interior", "boundary", "coupling", "pair", "invariant", "recompute"]
    margin: float
    passed: bool
    mode: Optional[int] = None
    pair: Optional[Tuple[int, int]] = None
    x: Optional[float] = None
    detail: str = ""


class AuditReport(BaseModel):
    """Independent re-verification of a certificate."""

    variant: Variant
    passed: bool
    tol_feas: float
    x_check: str
    entries: List[AuditEntry] = Field(default_factory=list)
    gamma_recomputed: Optional[float] = None
    tau_D_recomputed: Optional[float] = None
    notes: List[str] = Field(default_factory=list)

    @property
    def failures(self) -> List[AuditEntry]:
        return [e for e in self.entries if not e.passed]

    @property
    def worst(self) -> Optional[AuditEntry]:
        finite = [e for e in self.entries if e.kind in ("interior", "boundary", "pair")]
        return min(finite, key=lambda e: e.margin) if finite else None

    def margin_summary(self) -> Dict[str, float]:
        """Worst margin per inequality name prefix (interior, boundary, ...)."""
        summary: Dict[str, float] = {}
        for e in self.entries:
            key = e.name.split("[")[0]
            summary[key] = min(summary.get(key, np.inf), e.margin)
        return summary
