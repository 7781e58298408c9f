"""Analysis configuration: a JSON document validated against a fixed schema.

Example (every key shown; all but ``inertia`` and the orbit's
``semi_major_axis`` / ``inclination_mag`` have defaults)::

    {
      "inertia": [5.0, 4.0, 3.0],
      "orbit": {
        "omega0": 1.078e-3,
        "semi_major_axis": 7.0e6,
        "inclination_mag": 0.7853981633974483,
        "dipole_strength": 7.9e15
      },
      "numerics": {"rank_tol": 1e-8, "steps_per_orbit": 10000, "gramian_nodes": 4001}
    }

``omega0`` may be omitted, in which case it is derived from the semi-major
axis as a circular two-body rate and written back into the loaded config.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Annotated, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .model import DIPOLE_STRENGTH, MU_EARTH, InertiaTensor, OrbitConfig
from .numerics import DEFAULT_GRAMIAN_NODES, DEFAULT_RANK_TOL, DEFAULT_STEPS_PER_ORBIT

PositiveFloat = Annotated[float, Field(gt=0.0, allow_inf_nan=False)]


class ConfigError(ValueError):
    """Configuration could not be parsed or failed validation."""


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class OrbitSection(_Strict):
    omega0: Optional[PositiveFloat] = None
    semi_major_axis: PositiveFloat
    inclination_mag: Annotated[float, Field(ge=0.0, le=math.pi, allow_inf_nan=False)]
    dipole_strength: Annotated[float, Field(ge=0.0, allow_inf_nan=False)] = DIPOLE_STRENGTH

    @model_validator(mode="after")
    def _derive_rate(self):
        if self.omega0 is None:
            object.__setattr__(self, "omega0", math.sqrt(MU_EARTH / self.semi_major_axis**3))
        return self


class NumericsSection(_Strict):
    rank_tol: Annotated[float, Field(gt=0.0, lt=1.0)] = DEFAULT_RANK_TOL
    steps_per_orbit: Annotated[int, Field(ge=1)] = DEFAULT_STEPS_PER_ORBIT
    gramian_nodes: Annotated[int, Field(ge=3)] = DEFAULT_GRAMIAN_NODES

    @model_validator(mode="after")
    def _odd_nodes(self):
        if self.gramian_nodes % 2 == 0:
            raise ValueError(f"gramian_nodes must be odd, got {self.gramian_nodes}")
        return self


class AnalysisConfig(_Strict):
    inertia: tuple[PositiveFloat, PositiveFloat, PositiveFloat]
    orbit: OrbitSection
    numerics: NumericsSection = NumericsSection()

    @property
    def inertia_tensor(self) -> InertiaTensor:
        return InertiaTensor(*self.inertia)

    @property
    def orbit_config(self) -> OrbitConfig:
        o = self.orbit
        return OrbitConfig(omega0=o.omega0, a=o.semi_major_axis,
                           i_m=o.inclination_mag, mu_f=o.dipole_strength)

    def with_numerics(self, **overrides) -> "AnalysisConfig":
        """Copy with the given numerics fields replaced (``None`` values skipped)."""
        changes = {k: v for k, v in overrides.items() if v is not None}
        if not changes:
            return self
        data = self.to_dict()
        data["numerics"].update(changes)
        return from_dict(data)

    def to_dict(self) -> dict:
        return self.model_dump(mode="json")


DEFAULT_CONFIG = {
    "inertia": [5.0, 4.0, 3.0],
    "orbit": {
        "omega0": 1.078e-3,
        "semi_major_axis": 7.0e6,
        "inclination_mag": math.pi / 4,
        "dipole_strength": DIPOLE_STRENGTH,
    },
}


def _describe(err: ValidationError) -> str:
    lines = []
    for e in err.errors():
        loc = ".".join(str(p) for p in e["loc"]) or "<root>"
        lines.append(f"  {loc}: {e['msg']}")
    return "invalid configuration:\n" + "\n".join(lines)


def from_dict(data: dict) -> AnalysisConfig:
    try:
        return AnalysisConfig.model_validate(data)
    except ValidationError as err:
        raise ConfigError(_describe(err)) from None


def loads(text: str) -> AnalysisConfig:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as err:
        raise ConfigError(
            f"config is not valid JSON (line {err.lineno}, column {err.colno}): {err.msg}"
        ) from None
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    return from_dict(data)


def load(path: str | Path) -> AnalysisConfig:
    try:
        text = Path(path).read_text()
    except OSError as err:
        raise ConfigError(f"cannot read config {path}: {err}") from None
    return loads(text)


def dumps(cfg: AnalysisConfig) -> str:
    return json.dumps(cfg.to_dict(), indent=2)


def default() -> AnalysisConfig:
    return from_dict(DEFAULT_CONFIG)
