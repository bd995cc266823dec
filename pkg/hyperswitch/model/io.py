"""System description files.

A system file is a JSON document::

    {"name": "...", "n": 2, "modes": [
        {"L": [[...]], "A": [[...]], "B0": [[...]], "B1": [[...]]},
        {"Lambda": [...], "m": 1, "F": [[...]], "G": [[...]]}
    ]}

Each mode is given either in physical form or directly in characteristic form.
"""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Any, List, Optional, Union

from pydantic import BaseModel, Field, model_validator

from hyperswitch.exceptions import DimensionMismatch
from hyperswitch.model.hyperbolic import (
    mode_from_characteristic,
    mode_from_physical,
    to_physical,
)
from hyperswitch.model.schemas import BoundaryPhysical, Mode, SwitchedSystem
from hyperswitch.utils.validators import as_matrix

logger = logging.getLogger(__name__)

Matrix = Union[float, List[float], List[List[float]]]


class ModeSpec(BaseModel):
    """One entry of `modes[]`: physical or characteristic form."""

    label: Optional[str] = None
    L: Optional[Matrix] = None
    A: Optional[Matrix] = None
    B0: Optional[Matrix] = None
    B1: Optional[Matrix] = None
    Lambda: Optional[Matrix] = None
    m: Optional[int] = Field(None, ge=0)
    F: Optional[Matrix] = None
    G: Optional[Matrix] = None

    @model_validator(mode="after")
    def _check_form(self) -> "ModeSpec":
        physical = all(v is not None for v in (self.L, self.A, self.B0, self.B1))
        characteristic = all(v is not None for v in (self.Lambda, self.m, self.F, self.G))
        if physical == characteristic:
            raise ValueError(
                "a mode needs exactly one of {L, A, B0, B1} or {Lambda, m, F, G}"
            )
        return self

    @property
    def is_physical(self) -> bool:
        return self.L is not None

    def build(self, n: int, label: Optional[str] = None) -> Mode:
        label = self.label or label
        if self.is_physical:
            bp = BoundaryPhysical(
                B0=as_matrix(self.B0, n, name="B0"), B1=as_matrix(self.B1, n, name="B1")
            )
            return mode_from_physical(
                as_matrix(self.L, n, name="L"), as_matrix(self.A, n, name="A"), bp, label=label
            )
        return mode_from_characteristic(self.Lambda, self.m, self.F, self.G, label=label)


class SystemSpec(BaseModel):
    """Top-level system description."""

    name: Optional[str] = None
    n: int = Field(..., ge=1)
    modes: List[ModeSpec] = Field(..., min_length=1)

    def build(self) -> SwitchedSystem:
        modes = [spec.build(self.n, label=f"mode {i}") for i, spec in enumerate(self.modes)]
        for i, mode in enumerate(modes):
            if mode.n != self.n:
                raise DimensionMismatch(f"mode {i} has n = {mode.n}, expected {self.n}")
        return SwitchedSystem.of(modes, name=self.name)


def system_from_dict(data: dict[str, Any]) -> SwitchedSystem:
    """Validate and build a SwitchedSystem from a decoded system document."""
    system = SystemSpec.model_validate(data).build()
    logger.debug(f"Loaded system with {len(system)} modes", extra={"command": "load"})
    return system


def load_system(path: Path | str) -> SwitchedSystem:
    """Read a system description file."""
    with open(path, encoding="utf-8") as f:
        data = json.load(f)
    return system_from_dict(data)


def system_to_dict(system: SwitchedSystem, physical: bool = False) -> dict[str, Any]:
    """Serialize a system; characteristic form by default, physical form on request."""
    modes: list[dict[str, Any]] = []
    for mode in system.modes:
        entry: dict[str, Any] = {"label": mode.label} if mode.label else {}
        if physical:
            L, A, bp = to_physical(mode)
            entry.update(L=L.tolist(), A=A.tolist(), B0=bp.B0.tolist(), B1=bp.B1.tolist())
        else:
            entry.update(
                Lambda=mode.velocities.tolist(), m=mode.m, F=mode.F.tolist(), G=mode.G.tolist()
            )
        modes.append(entry)
    doc: dict[str, Any] = {"n": system.n, "modes": modes}
    if system.name:
        doc["name"] = system.name
    return doc


def dump_system(system: SwitchedSystem, path: Path | str, physical: bool = False) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(system_to_dict(system, physical), indent=2), encoding="utf-8")
    return path
