"""
Run configuration.

Settings come from environment variables; simulation inputs come from a flat text
file with one `section.key = value [unit]` per line. Quantities carry units that are
checked against the field's declared unit and converted to it.
"""

import os
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Tuple, Type, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from quartonsim.circuit import CircuitParams
from quartonsim.decoherence import EchoSettings, EnvironmentParams
from quartonsim.dynamics import ReadoutConfig
from quartonsim.log import get_logger
from quartonsim.validation import ConfigError


logger = get_logger("config")


class Settings:
    """Process settings loaded from environment variables."""

    def __init__(self):
        # Root directory for run outputs
        self.OUTPUT_DIR: str = os.environ.get("QUARTONSIM_OUTPUT_DIR", "runs")

        # Default log level for every component logger
        self.LOG_LEVEL: str = os.environ.get("QUARTONSIM_LOG_LEVEL", "INFO")

        # Process-pool size for sweeps and trajectories
        self.WORKERS: int = int(os.environ.get("QUARTONSIM_WORKERS", "1"))


settings = Settings()


def _unit(unit: str) -> dict:
    return {"unit": unit}


class SolverSettings(BaseModel):
    """Truncation, basis and integration settings."""
    model_config = ConfigDict(extra="forbid", frozen=True)

    dims_a: int = Field(25, ge=2, json_schema_extra=_unit(""))
    dims_b: int = Field(25, ge=2, json_schema_extra=_unit(""))
    order: int = Field(8, json_schema_extra=_unit(""))
    mode: str = Field("exact", json_schema_extra=_unit(""))
    heuristic: str = Field("min_adag_a", json_schema_extra=_unit(""))
    n_levels: int = Field(10, ge=1, json_schema_extra=_unit(""))
    optimize_tilt: bool = Field(True, json_schema_extra=_unit(""))
    tilt_min: float = Field(0.8, gt=0, json_schema_extra=_unit(""))
    tilt_max: float = Field(1.3, gt=0, json_schema_extra=_unit(""))
    tilt_points: int = Field(11, ge=3, json_schema_extra=_unit(""))
    label_na: int = Field(14, ge=2, json_schema_extra=_unit(""))
    label_nb: int = Field(7, ge=2, json_schema_extra=_unit(""))
    n_star: int = Field(7, ge=2, json_schema_extra=_unit(""))
    delta_t: float = Field(10.0, ge=0, json_schema_extra=_unit("ns"))
    rtol: float = Field(1e-8, gt=0, json_schema_extra=_unit(""))
    atol: float = Field(1e-10, gt=0, json_schema_extra=_unit(""))

    @field_validator("mode")
    @classmethod
    def _check_mode(cls, v: str) -> str:
        if v not in ("exact", "taylor"):
            raise ValueError(f"mode must be 'exact' or 'taylor', got {v!r}")
        return v

    @property
    def dims(self) -> Tuple[int, int]:
        return (self.dims_a, self.dims_b)

    @property
    def label_range(self) -> Tuple[int, int]:
        return (self.label_na, self.label_nb)

    @property
    def tilt_range(self) -> Tuple[float, float]:
        return (self.tilt_min, self.tilt_max)


class RunConfig(BaseModel):
    """Everything a run needs; every quantity carries its unit."""
    model_config = ConfigDict(extra="forbid", frozen=True)

    name: str = "run"
    circuit: CircuitParams = Field(default_factory=CircuitParams)
    environment: EnvironmentParams = Field(default_factory=EnvironmentParams)
    readout: ReadoutConfig = Field(default_factory=ReadoutConfig)
    solver: SolverSettings = Field(default_factory=SolverSettings)
    echo: EchoSettings = Field(default_factory=EchoSettings)


SECTIONS: Dict[str, Type[BaseModel]] = {
    "circuit": CircuitParams,
    "environment": EnvironmentParams,
    "readout": ReadoutConfig,
    "solver": SolverSettings,
    "echo": EchoSettings,
}
TOP_LEVEL = ("name",)


# ── Units ────────────────────────────────────────────────────────

# Each family maps unit spellings to a factor in the family's base unit
UNIT_FAMILIES: Dict[str, Dict[str, float]] = {
    "frequency": {"Hz": 1.0, "kHz": 1e3, "MHz": 1e6, "GHz": 1e9},
    "capacitance": {"fF": 1.0, "pF": 1e3},
    "time": {"ns": 1.0, "us": 1e3, "ms": 1e6, "s": 1e9},
    "temperature": {"mK": 1.0, "K": 1e3},
    "resistance": {"uOhm": 1.0, "mOhm": 1e3, "Ohm": 1e6},
    "flux_noise": {"uPhi0/rtHz": 1.0},
}


def unit_family(unit: str) -> Optional[str]:
    for family, units in UNIT_FAMILIES.items():
        if unit in units:
            return family
    return None


def convert(value: float, unit: str, target: str) -> float:
    """
    Convert value from unit to target within one family.

    Raises:
        ValueError: If the units belong to different families
    """
    if unit == target:
        return value
    family = unit_family(target)
    if family is None or unit not in UNIT_FAMILIES[family]:
        raise ValueError(f"unit {unit!r} is not convertible to {target!r}")
    units = UNIT_FAMILIES[family]
    return value * units[unit] / units[target]


def field_unit(model: Type[BaseModel], name: str) -> str:
    extra = model.model_fields[name].json_schema_extra or {}
    return extra.get("unit", "")


# ── Parsing ──────────────────────────────────────────────────────


def _split_value(text: str) -> Tuple[str, str]:
    parts = text.split()
    if not parts:
        return "", ""
    if len(parts) == 1:
        return parts[0], ""
    if len(parts) == 2:
        return parts[0], parts[1]
    raise ValueError(f"expected 'value [unit]', got {text!r}")


def _coerce(model: Type[BaseModel], name: str, raw: str, unit: str) -> Any:
    declared = field_unit(model, name)
    if raw.lower() == "none":
        return None
    if not declared:
        if unit:
            raise ValueError(f"dimensionless, got unit {unit!r}")
        return raw
    if not unit:
        raise ValueError(f"missing unit (expected {declared})")
    return convert(float(raw), unit, declared)


def parse_entry(line: str, lineno: int = 0) -> Tuple[Optional[str], str, Any]:
    """
    Parse one `section.key = value [unit]` line into (section, key, converted value).

    Raises:
        ConfigError: On malformed syntax, unknown key, bad unit or bad number
    """
    if "=" not in line:
        raise ConfigError(f"Expected 'key = value': {line.strip()!r}", line=lineno)
    lhs, rhs = line.split("=", 1)
    key = lhs.strip()
    if "." in key:
        section, name = key.split(".", 1)
        model = SECTIONS.get(section)
        if model is None:
            raise ConfigError(f"Unknown section {section!r}", key=key, line=lineno)
        if name not in model.model_fields:
            raise ConfigError(f"Unknown key {key!r}", key=key, line=lineno)
    else:
        section, name, model = None, key, None
        if name not in TOP_LEVEL:
            raise ConfigError(f"Unknown key {key!r}", key=key, line=lineno)
    try:
        raw, unit = _split_value(rhs.strip())
        if not raw:
            raise ValueError("missing value")
        value = raw if model is None else _coerce(model, name, raw, unit)
    except ValueError as e:
        raise ConfigError(f"Bad value for {key}: {e}", key=key, line=lineno)
    return section, name, value


def _assemble(entries: Dict[str, Any], lines: Dict[str, int],
              base: Optional[RunConfig] = None) -> RunConfig:
    data: Dict[str, Any] = base.model_dump(exclude_none=True) if base else {}
    for key, value in entries.items():
        if "." in key:
            section, name = key.split(".", 1)
            data.setdefault(section, {})[name] = value
        else:
            data[key] = value
    try:
        return RunConfig.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        key = ".".join(str(p) for p in first["loc"])
        raise ConfigError(f"Invalid value for {key}: {first['msg']}", key=key,
                          line=lines.get(key))


def parse_config(text: str) -> RunConfig:
    """
    Parse configuration text.

    Args:
        text: Lines of `section.key = value [unit]`; '#' starts a comment

    Returns:
        Validated RunConfig (unspecified keys keep their defaults)

    Raises:
        ConfigError: Naming the offending key and line number
    """
    entries: Dict[str, Any] = {}
    lines: Dict[str, int] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        section, name, value = parse_entry(stripped, lineno)
        key = f"{section}.{name}" if section else name
        if key in entries:
            raise ConfigError(f"Duplicate key {key!r}", key=key, line=lineno)
        entries[key] = value
        lines[key] = lineno
    return _assemble(entries, lines)


def read_config(path: Union[str, Path]) -> RunConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"Config file not found: {path}")
    logger.debug(f"Reading config {path}")
    return parse_config(path.read_text())


def _format_value(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_config(cfg: RunConfig) -> str:
    """Canonical text form; parse_config(write_config(cfg)) == cfg."""
    out: List[str] = [f"name = {cfg.name}"]
    for section, model in SECTIONS.items():
        values = getattr(cfg, section)
        out.append("")
        for name in model.model_fields:
            value = getattr(values, name)
            if value is None:
                continue
            unit = field_unit(model, name)
            text = f"{section}.{name} = {_format_value(value)}"
            out.append(f"{text} {unit}" if unit else text)
    return "\n".join(out) + "\n"


def apply_overrides(cfg: RunConfig, overrides: Iterable[str]) -> RunConfig:
    """
    Apply CLI overrides of the form `section.key=value [unit]`.

    Raises:
        ConfigError: On any invalid override
    """
    entries: Dict[str, Any] = {}
    for text in overrides:
        section, name, value = parse_entry(text)
        entries[f"{section}.{name}" if section else name] = value
    if not entries:
        return cfg
    return _assemble(entries, {}, cfg)
