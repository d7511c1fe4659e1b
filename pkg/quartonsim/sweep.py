"""
Parameter sweeps over a grid of operating points.

Each grid point is solved independently: tilt and basis are re-optimized, the
spectrum is labeled, metrics and Q̄ estimates are computed. A point that fails
on physics keeps its row with a failure status.
"""

import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from quartonsim.api import ReadoutSimulator
from quartonsim.config import SECTIONS, RunConfig
from quartonsim.log import get_logger, log_sweep_point
from quartonsim.util import harmonic_frequency
from quartonsim.validation import PHYSICS_ERRORS, ConfigError


logger = get_logger("sweep")

CONSTRAINT_RTOL = 1e-3

# Derived circuit paths accepted besides plain section.field names
DERIVED_PATHS = ("circuit.E_Ja_eff", "circuit.ratio_Ja_eff_Ca")

SWEEP_COLUMNS = [
    "index", "axis1", "axis2", "status", "error", "tilt", "tilt_at_boundary",
    "zpf_a", "zpf_b", "omega_r_ghz", "omega_q_ghz", "spread_q0_mhz", "spread_q1_mhz",
    "cross_kerr_2chi_mhz", "self_kerr_Kb_mhz", "qbar_0", "qbar_1", "ambiguous",
]


@dataclass(frozen=True)
class SweepAxis:
    """A parameter path and the values it takes."""
    path: str
    values: Tuple[float, ...]

    @classmethod
    def parse(cls, text: str) -> 'SweepAxis':
        """
        Parse 'PATH:START:STOP:N' (inclusive linspace) or 'PATH:v1,v2,...'.

        Raises:
            ConfigError: On a malformed axis
        """
        parts = text.split(":")
        try:
            if len(parts) == 4:
                path, start, stop, n = parts
                values = tuple(float(v) for v in np.linspace(float(start), float(stop), int(n)))
            elif len(parts) == 2:
                path = parts[0]
                values = tuple(float(v) for v in parts[1].split(","))
            else:
                raise ValueError("expected PATH:START:STOP:N or PATH:v1,v2")
        except ValueError as e:
            raise ConfigError(f"Bad sweep axis {text!r}: {e}", key=parts[0])
        if not values:
            raise ConfigError(f"Sweep axis {text!r} has no values", key=path)
        check_path(path)
        return cls(path, values)


@dataclass
class SweepSpec:
    """One or two axes, constraints applied per point, and the worker count."""
    axis1: SweepAxis
    axis2: Optional[SweepAxis] = None
    constraints: List[str] = field(default_factory=list)
    workers: int = 1

    def __post_init__(self):
        unknown = [c for c in self.constraints if c not in CONSTRAINTS]
        if unknown:
            raise ConfigError(f"Unknown constraints {unknown}; known: {sorted(CONSTRAINTS)}")

    def grid(self) -> List[Tuple[float, Optional[float]]]:
        second: Sequence[Optional[float]] = self.axis2.values if self.axis2 else (None,)
        return list(itertools.product(self.axis1.values, second))


@dataclass
class SweepResult:
    columns: List[str]
    rows: List[Dict[str, Any]]

    @property
    def failed(self) -> List[Dict[str, Any]]:
        return [row for row in self.rows if row["status"] != "ok"]


# ── Parameter paths ──────────────────────────────────────────────


def check_path(path: str) -> None:
    if path in DERIVED_PATHS:
        return
    section, _, name = path.partition(".")
    model = SECTIONS.get(section)
    if model is None or name not in model.model_fields:
        raise ConfigError(f"Unknown sweep parameter {path!r}", key=path)


def _update_section(cfg: RunConfig, section: str, updates: Dict[str, Any]) -> RunConfig:
    model = SECTIONS[section]
    current = getattr(cfg, section).model_dump(exclude_none=True)
    current.update(updates)
    return cfg.model_copy(update={section: model.model_validate(current)})


def apply_parameter(cfg: RunConfig, path: str, value: float,
                    nominal: Optional[RunConfig] = None) -> RunConfig:
    """
    Set one parameter.

    circuit.E_Q also moves E_J so that E_Q = E_J (1/n_S - 1/n_S³). circuit.E_Ja_eff sets
    E_Ja = value·n_Ja. circuit.ratio_Ja_eff_Ca sets E_Ja_eff/E_Ca = value while holding
    the harmonic resonator frequency of `nominal` (default cfg) fixed.
    """
    check_path(path)
    circuit = cfg.circuit
    if path == "circuit.E_Q":
        return cfg.model_copy(update={"circuit": circuit.with_quartic_energy(value)})
    if path == "circuit.E_Ja_eff":
        return _update_section(cfg, "circuit", {"E_Ja": value * circuit.n_Ja})
    if path == "circuit.ratio_Ja_eff_Ca":
        ref = (nominal or cfg).circuit
        omega_a = harmonic_frequency(ref.E_Ca, ref.E_Ja_eff)
        e_ja_eff = omega_a * math.sqrt(value / 8.0)
        e_ca = omega_a / math.sqrt(8.0 * value)
        return _update_section(cfg, "circuit", {"E_Ja": e_ja_eff * circuit.n_Ja, "E_Ca": e_ca})
    section, _, name = path.partition(".")
    return _update_section(cfg, section, {name: value})


# ── Constraints ──────────────────────────────────────────────────


def _hold_omega_a(cfg: RunConfig, nominal: RunConfig) -> RunConfig:
    """Co-vary E_Ca so sqrt(8 E_Ca E_Ja_eff) stays at its nominal value."""
    ref = nominal.circuit
    omega_a = harmonic_frequency(ref.E_Ca, ref.E_Ja_eff)
    e_ca = omega_a ** 2 / (8.0 * cfg.circuit.E_Ja_eff)
    return _update_section(cfg, "circuit", {"E_Ca": e_ca})


def _check_omega_a(cfg: RunConfig, nominal: RunConfig) -> float:
    ref = nominal.circuit
    target = harmonic_frequency(ref.E_Ca, ref.E_Ja_eff)
    return abs(harmonic_frequency(cfg.circuit.E_Ca, cfg.circuit.E_Ja_eff) / target - 1.0)


CONSTRAINTS = {
    "constant_omega_a": (_hold_omega_a, _check_omega_a),
}


def apply_constraints(cfg: RunConfig, nominal: RunConfig, names: Sequence[str]) -> RunConfig:
    for name in names:
        enforce, _ = CONSTRAINTS[name]
        cfg = enforce(cfg, nominal)
    return cfg


def verify_constraints(cfg: RunConfig, nominal: RunConfig, names: Sequence[str],
                       rtol: float = CONSTRAINT_RTOL) -> None:
    """
    Raises:
        ValueError: If a constraint is violated by more than rtol
    """
    for name in names:
        _, check = CONSTRAINTS[name]
        deviation = check(cfg, nominal)
        if deviation > rtol:
            raise ValueError(f"Constraint {name} violated by {deviation:.2%}")


def point_config(base: RunConfig, spec: SweepSpec, values: Tuple[float, Optional[float]]
                 ) -> RunConfig:
    cfg = apply_parameter(base, spec.axis1.path, values[0], base)
    if spec.axis2 is not None and values[1] is not None:
        cfg = apply_parameter(cfg, spec.axis2.path, values[1], base)
    cfg = apply_constraints(cfg, base, spec.constraints)
    verify_constraints(cfg, base, spec.constraints)
    return cfg


# ── Solving ──────────────────────────────────────────────────────


def _empty_row(index: int, values: Tuple[float, Optional[float]]) -> Dict[str, Any]:
    row: Dict[str, Any] = {column: None for column in SWEEP_COLUMNS}
    row.update({"index": index, "axis1": values[0], "axis2": values[1], "status": "ok",
                "error": ""})
    return row


def solve_point(task: Tuple[int, Tuple[float, Optional[float]], RunConfig, SweepSpec]
                ) -> Dict[str, Any]:
    """Solve one grid point; a pure function of the task."""
    index, values, base, spec = task
    row = _empty_row(index, values)
    try:
        cfg = point_config(base, spec, values)
    except (ValueError, ConfigError) as e:
        row.update({"status": "constraint", "error": str(e)})
        log_sweep_point(index, "constraint", values)
        return row
    sim = ReadoutSimulator(cfg)
    try:
        metrics = sim.metrics()
        row.update({
            "tilt": sim.params.tilt,
            "tilt_at_boundary": bool(sim.tilt_result.at_boundary) if sim.tilt_result else False,
            "zpf_a": sim.basis.zpf_a,
            "zpf_b": sim.basis.zpf_b,
            "omega_r_ghz": metrics.omega_r,
            "omega_q_ghz": metrics.omega_q,
            "spread_q0_mhz": metrics.spread_q0,
            "spread_q1_mhz": metrics.spread_q1,
            "cross_kerr_2chi_mhz": metrics.cross_kerr_2chi,
            "self_kerr_Kb_mhz": metrics.self_kerr_Kb,
            "ambiguous": " ".join(f"{a},{b}" for a, b in metrics.ambiguity_flags),
        })
        estimates = sim.qnd()
        row.update({"qbar_0": estimates[0].qbar, "qbar_1": estimates[1].qbar})
    except PHYSICS_ERRORS as e:
        row.update({"status": f"failed:{type(e).__name__}", "error": str(e)})
    log_sweep_point(index, row["status"], values)
    return row


def run_sweep(base: RunConfig, spec: SweepSpec) -> SweepResult:
    """
    Solve every grid point.

    Rows come back in grid order whatever the worker count.
    """
    grid = spec.grid()
    if not grid:
        raise ConfigError("Sweep grid is empty")
    tasks = [(i, values, base, spec) for i, values in enumerate(grid)]
    logger.info(f"Sweeping {len(tasks)} points with {spec.workers} worker(s)")
    if spec.workers > 1:
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            rows = list(pool.map(solve_point, tasks))
    else:
        rows = [solve_point(task) for task in tasks]
    result = SweepResult(list(SWEEP_COLUMNS), rows)
    if result.failed:
        logger.warning(f"{len(result.failed)} of {len(rows)} points failed")
    return result


def spread_minimum(result: SweepResult, column: str = "spread_q0_mhz") -> Optional[Dict[str, Any]]:
    """Row with the smallest value of `column` among successful points."""
    ok = [row for row in result.rows if row["status"] == "ok" and row[column] is not None]
    if not ok:
        return None
    return min(ok, key=lambda row: row[column])
