"""Scenario files: one JSON document wiring a system to a search, a signal and a grid."""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Any, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, Field, model_validator

from hyperswitch.certifier.schemas import SearchOptions, Variant
from hyperswitch.exceptions import ConfigurationError
from hyperswitch.model.io import load_system, system_from_dict
from hyperswitch.model.schemas import SwitchedSystem
from hyperswitch.signals import SwitchingSignal, load_signal, periodic_signal, random_dwell_signal
from hyperswitch.simulator.schemas import GridSpec, InitialProfile

logger = logging.getLogger(__name__)

BUNDLED_DIR = Path(__file__).resolve().parent.parent / "scenarios"


class WarmStart(BaseModel):
    """User-supplied weights: diagonal entries per mode, mu (scalar or per mode) and nu."""

    Q: List[List[float]] = Field(..., min_length=1)
    mu: Union[float, List[float]] = 0.0
    nu: float = Field(..., gt=0.0)


class SignalSpec(BaseModel):
    """How the switching signal of a simulation is produced."""

    kind: Literal["periodic", "random", "file", "explicit"] = "periodic"
    period: Optional[float] = Field(default=None, gt=0.0)
    cycle: List[int] = Field(default_factory=lambda: [0, 1], min_length=1)
    horizon: float = Field(default=12.0, ge=0.0)
    tau_D: Optional[float] = Field(default=None, gt=0.0, description="Dwell time of random signals")
    N0: int = Field(default=1, ge=0)
    n_modes: Optional[int] = Field(default=None, ge=1)
    path: Optional[str] = None
    initial_mode: int = Field(default=0, ge=0)
    switches: List[Tuple[float, int]] = Field(default_factory=list)

    @model_validator(mode="after")
    def _check_kind(self) -> "SignalSpec":
        if self.kind == "periodic" and self.period is None:
            raise ValueError("a periodic signal needs 'period'")
        if self.kind == "random" and self.tau_D is None:
            raise ValueError("a random signal needs 'tau_D'")
        if self.kind == "file" and not self.path:
            raise ValueError("a file signal needs 'path'")
        return self

    def build(self, n_modes: int, seed: int = 0, base_dir: Optional[Path] = None) -> SwitchingSignal:
        if self.kind == "periodic":
            return periodic_signal(self.period, self.cycle, self.horizon)
        if self.kind == "random":
            return random_dwell_signal(
                seed, self.tau_D, self.N0, self.horizon, self.n_modes or n_modes, self.initial_mode
            )
        if self.kind == "file":
            return load_signal(_resolve(self.path, base_dir))
        return SwitchingSignal(initial_mode=self.initial_mode, switches=self.switches, horizon=self.horizon)


class SweepSpec(BaseModel):
    """Period sweep: `steps` periods evenly spaced on [start, stop]."""

    start: float = Field(..., gt=0.0)
    stop: float = Field(..., gt=0.0)
    steps: int = Field(default=15, ge=1)

    @model_validator(mode="after")
    def _check_range(self) -> "SweepSpec":
        if self.stop < self.start:
            raise ValueError(f"sweep range [{self.start}, {self.stop}] is empty")
        return self


class ScenarioConfig(BaseModel):
    """Top-level scenario document."""

    name: Optional[str] = None
    system: Optional[dict[str, Any]] = Field(default=None, description="Inline system description")
    system_file: Optional[str] = Field(default=None, description="Path to a system file, relative to the scenario")
    variant: Variant = Variant.COMMON_SIGN_FIXED
    search: SearchOptions = Field(default_factory=SearchOptions)
    warm_start: Optional[WarmStart] = None
    signal: Optional[SignalSpec] = None
    grid: GridSpec = Field(default_factory=GridSpec)
    initial: InitialProfile = Field(default_factory=InitialProfile)
    sweep: Optional[SweepSpec] = None
    fit_window: Optional[Tuple[float, float]] = None
    output_dir: Optional[str] = None
    certificate: Optional[str] = Field(default=None, description="Certificate used for V traces")

    base_dir: Optional[Path] = Field(default=None, exclude=True)

    @model_validator(mode="before")
    @classmethod
    def _parse_variant(cls, data: Any) -> Any:
        if isinstance(data, dict) and isinstance(data.get("variant"), str):
            data = dict(data, variant=Variant.parse(data["variant"]))
        return data

    @model_validator(mode="after")
    def _check_system(self) -> "ScenarioConfig":
        if (self.system is None) == (self.system_file is None):
            raise ValueError("a scenario needs exactly one of 'system' or 'system_file'")
        return self

    def load_system(self) -> SwitchedSystem:
        if self.system is not None:
            return system_from_dict(self.system)
        path = _resolve(self.system_file, self.base_dir)
        if not path.exists():
            raise ConfigurationError(f"system file not found: {path}")
        return load_system(path)

    def build_signal(self, n_modes: int, seed: int = 0) -> SwitchingSignal:
        """
        Raises:
            ConfigurationError: The scenario has no signal
        """
        if self.signal is None:
            raise ConfigurationError(f"scenario {self.name or '<inline>'} has no 'signal' section")
        return self.signal.build(n_modes, seed, self.base_dir)

    def certificate_path(self) -> Optional[Path]:
        return _resolve(self.certificate, self.base_dir) if self.certificate else None


def _resolve(path: str, base_dir: Optional[Path]) -> Path:
    p = Path(path)
    if not p.is_absolute() and base_dir is not None and not p.exists():
        p = base_dir / p
    return p


def bundled_scenarios() -> List[str]:
    return sorted(p.stem for p in BUNDLED_DIR.glob("*.json"))


def find_scenario(ref: Union[str, Path]) -> Path:
    """
    A scenario path, or the name of a bundled scenario (with or without `.json`).

    Raises:
        ConfigurationError: Neither a file nor a bundled scenario
    """
    path = Path(ref)
    if path.is_file():
        return path
    name = path.name if path.suffix == ".json" else f"{path.name}.json"
    bundled = BUNDLED_DIR / name
    if bundled.is_file():
        return bundled
    raise ConfigurationError(f"scenario not found: {ref} (bundled: {', '.join(bundled_scenarios())})")


def load_scenario(ref: Union[str, Path]) -> ScenarioConfig:
    """
    Raises:
        ConfigurationError: The scenario cannot be found
        json.JSONDecodeError: The file is not JSON
        pydantic.ValidationError: The document is not a valid scenario
    """
    path = find_scenario(ref)
    data = json.loads(path.read_text(encoding="utf-8"))
    config = ScenarioConfig.model_validate(data)
    logger.debug(f"Loaded scenario {path}", extra={"command": "load"})
    return config.model_copy(update={"base_dir": path.parent, "name": config.name or path.stem})
