"""
quartonsim command-line interface.

Subcommands:
    quartonsim spectrum       Tilt, basis, labeled spectrum and readout metrics
    quartonsim sweep          1D/2D parameter sweep with per-point re-optimization
    quartonsim qnd            Analytic QND estimates from the decay matrix
    quartonsim dynamics       Master-equation readout per prepared qubit state
    quartonsim trajectories   Heterodyne trajectories and IQ statistics
    quartonsim decoherence    Decoherence budget
    quartonsim validate       Built-in invariant suite

Exit status: 0 success, 1 unexpected error, 2 configuration error, 3 infeasible physics.
"""

import argparse
import json
import sys
from pathlib import Path
from typing import List, Optional

from quartonsim import __version__
from quartonsim.api import ReadoutSimulator
from quartonsim.config import RunConfig, apply_overrides, read_config, settings, write_config
from quartonsim.log import get_logger, parse_level, set_global_level
from quartonsim.qnd import dominant_entries
from quartonsim.record import SCHEMAS, Provenance, write_csv, write_json
from quartonsim.selfcheck import run_selfcheck
from quartonsim.spectrum import analytic_kerr_estimates
from quartonsim.sweep import SweepAxis, SweepSpec, run_sweep, spread_minimum
from quartonsim.validation import PHYSICS_ERRORS, ConfigError, error_record


EXIT_OK = 0
EXIT_ERROR = 1
EXIT_CONFIG = 2
EXIT_PHYSICS = 3

logger = get_logger("cli")


# ── Helpers ──────────────────────────────────────────────────────


def _resolve_config(args: argparse.Namespace) -> RunConfig:
    """Config file (or defaults) plus --set overrides and subcommand flags."""
    cfg = read_config(args.config) if args.config else RunConfig()
    overrides = list(args.set or [])
    if getattr(args, "n_traj", None) is not None:
        overrides.append(f"readout.n_traj={args.n_traj}")
    if getattr(args, "seed", None) is not None:
        overrides.append(f"readout.seed={args.seed}")
    return apply_overrides(cfg, overrides)


def _run_dir(args: argparse.Namespace) -> Path:
    path = Path(args.out) / args.command
    path.mkdir(parents=True, exist_ok=True)
    return path


def _provenance(cfg: Optional[RunConfig]) -> Provenance:
    return Provenance(__version__, write_config(cfg) if cfg is not None else "")


def _label_column(label) -> str:
    return f"p_{label[0]}_{label[1]}"


def _print_summary(title: str, payload: dict) -> None:
    print(f"{title}:")
    for key, value in payload.items():
        if isinstance(value, float):
            print(f"  {key:28s} {value:.6g}")
        elif not isinstance(value, (dict, list)):
            print(f"  {key:28s} {value}")


# ── Commands ─────────────────────────────────────────────────────


def cmd_spectrum(args: argparse.Namespace, cfg: RunConfig, out: Path) -> int:
    sim = ReadoutSimulator(cfg)
    summary = sim.summary()
    summary["kerr_estimates"] = analytic_kerr_estimates(sim.params).to_dict()
    spec = sim.spectrum()
    summary["levels"] = [
        {"label": list(label), "energy_ghz": spec.energy(label), "overlap": spec.overlap[label]}
        for label in spec.labels()
    ]
    write_json(out / "spectrum.json", summary, _provenance(cfg))
    _print_summary("Spectrum metrics", sim.metrics().to_dict())
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace, cfg: RunConfig, out: Path) -> int:
    spec = SweepSpec(
        axis1=SweepAxis.parse(args.axis1),
        axis2=SweepAxis.parse(args.axis2) if args.axis2 else None,
        constraints=list(args.constraint or []),
        workers=args.workers or settings.WORKERS,
    )
    result = run_sweep(cfg, spec)
    provenance = _provenance(cfg)
    write_csv(out / "sweep.csv", result.columns, result.rows, provenance, SCHEMAS["sweep"])
    best = spread_minimum(result)
    write_json(out / "sweep.json", {
        "axis1": {"path": spec.axis1.path, "values": list(spec.axis1.values)},
        "axis2": ({"path": spec.axis2.path, "values": list(spec.axis2.values)}
                  if spec.axis2 else None),
        "constraints": spec.constraints,
        "points": len(result.rows),
        "failed": len(result.failed),
        "spread_minimum": best,
    }, provenance)
    print(f"Swept {len(result.rows)} points ({len(result.failed)} failed)")
    return EXIT_OK


def cmd_qnd(args: argparse.Namespace, cfg: RunConfig, out: Path) -> int:
    sim = ReadoutSimulator(cfg)
    estimates = sim.qnd()
    payload = {
        "estimates": [e.to_dict() for e in estimates],
        "dominant": [
            {"transition": t.describe(), "frequency_ghz": t.frequency, "rate_ghz": t.rate}
            for t in dominant_entries(sim.decay_matrix, args.top)
        ],
    }
    write_json(out / "qnd.json", payload, _provenance(cfg))
    for e in estimates:
        print(f"Q̄_{e.k} = {e.qbar:.5f}")
    return EXIT_OK


def cmd_dynamics(args: argparse.Namespace, cfg: RunConfig, out: Path) -> int:
    sim = ReadoutSimulator(cfg)
    provenance = _provenance(cfg)
    states = args.state or [0, 1]
    summary = {"drive": {"omega_d_ghz": sim.drive.omega_d, "eps0_ghz": sim.drive.eps0,
                         "length_ns": sim.drive.length}, "states": {}}
    for k in states:
        result = sim.dynamics(k, converge=args.converge)
        columns = ["time_ns", "photon_number"] + [_label_column(lab) for lab in result.labels]
        rows = []
        for i, t in enumerate(result.times):
            row = {"time_ns": float(t), "photon_number": float(result.photon_number[i])}
            row.update({_label_column(lab): float(p)
                        for lab, p in zip(result.labels, result.populations[i])})
            rows.append(row)
        write_csv(out / f"populations_{k}.csv", columns, rows, provenance,
                  SCHEMAS["populations"])
        summary["states"][str(k)] = {
            "qnd_fidelity": result.qnd_fidelity,
            "leakage": {str(q): p for q, p in result.leakage().items()},
            "trace_error": result.trace_error,
            "min_eigenvalue": result.min_eigenvalue,
        }
        print(f"|{k}>: QND fidelity {result.qnd_fidelity:.5f}")
    write_json(out / "dynamics.json", summary, provenance)
    write_csv(out / "baths.csv", ["bath", "frequency_ghz", "total_rate_ghz", "members",
                                  "monitored"], sim.bath_table(), provenance, SCHEMAS["baths"])
    return EXIT_OK


def cmd_trajectories(args: argparse.Namespace, cfg: RunConfig, out: Path) -> int:
    sim = ReadoutSimulator(cfg, workers=args.workers or settings.WORKERS)
    provenance = _provenance(cfg)
    ensemble = sim.trajectories()
    points = ensemble.integrate(cfg.readout.integration_time)
    rows = []
    for k in ensemble.states:
        for idx, (i_val, q_val) in enumerate(points[k]):
            rows.append({"state": k, "trajectory": idx, "I": float(i_val), "Q": float(q_val)})
    write_csv(out / "iq.csv", ["state", "trajectory", "I", "Q"], rows, provenance, SCHEMAS["iq"])
    stats = sim.readout_statistics()
    payload = stats.to_dict()
    payload.update({"n_traj": cfg.readout.n_traj, "seed": cfg.readout.seed,
                    "final_populations": {str(k): ensemble.mean_populations[k][-1]
                                          for k in ensemble.states}})
    write_json(out / "readout.json", payload, provenance)
    print(f"Readout fidelity |0>: {stats.fidelity_0:.5f}, |1>: {stats.fidelity_1:.5f}, "
          f"SNR {stats.snr:.3f}")
    return EXIT_OK


def cmd_decoherence(args: argparse.Namespace, cfg: RunConfig, out: Path) -> int:
    sim = ReadoutSimulator(cfg)
    budget = sim.decoherence(include_echo=not args.no_echo)
    provenance = _provenance(cfg)
    write_csv(out / "budget.csv", ["channel", "kind", "rate_per_s", "time_s"], budget.rows(),
              provenance, SCHEMAS["budget"])
    write_json(out / "decoherence.json", budget.to_dict(), provenance)
    for row in budget.rows():
        print(f"  {row['channel']:16s} {row['kind']}  {row['time_s']:.4g} s")
    return EXIT_OK


def cmd_validate(args: argparse.Namespace, cfg: RunConfig, out: Path) -> int:
    results = run_selfcheck()
    provenance = _provenance(cfg)
    payload = {"checks": [r.to_dict() for r in results],
               "passed": all(r.passed for r in results)}
    if args.baths:
        sim = ReadoutSimulator(cfg)
        write_csv(out / "baths.csv", ["bath", "frequency_ghz", "total_rate_ghz", "members",
                                      "monitored"], sim.bath_table(), provenance,
                  SCHEMAS["baths"])
    write_json(out / "validate.json", payload, provenance)
    for r in results:
        print(f"  {'PASS' if r.passed else 'FAIL'}  {r.name}")
    return EXIT_OK if payload["passed"] else EXIT_ERROR


COMMANDS = {
    "spectrum": cmd_spectrum,
    "sweep": cmd_sweep,
    "qnd": cmd_qnd,
    "dynamics": cmd_dynamics,
    "trajectories": cmd_trajectories,
    "decoherence": cmd_decoherence,
    "validate": cmd_validate,
}


# ── Entry point ──────────────────────────────────────────────────


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="quartonsim - quarton-coupled qubit readout simulation",
        prog="quartonsim",
    )
    parser.add_argument("--version", action="version", version=f"quartonsim {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="Run configuration file")
    common.add_argument("--out", default=settings.OUTPUT_DIR,
                        help="Output root (default: $QUARTONSIM_OUTPUT_DIR or ./runs)")
    common.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="Override a config key, e.g. --set 'circuit.E_Q=70 GHz'")
    common.add_argument("--log-level", default=settings.LOG_LEVEL, help="Log level")

    subparsers = parser.add_subparsers(dest="command", help="Available commands")

    subparsers.add_parser("spectrum", parents=[common], help="Spectrum and readout metrics")

    sp_sweep = subparsers.add_parser("sweep", parents=[common], help="Parameter sweep")
    sp_sweep.add_argument("--axis1", required=True, help="PATH:START:STOP:N or PATH:v1,v2")
    sp_sweep.add_argument("--axis2", help="Second axis, same syntax")
    sp_sweep.add_argument("--constraint", action="append", help="e.g. constant_omega_a")
    sp_sweep.add_argument("--workers", type=int, help="Process-pool size")

    sp_qnd = subparsers.add_parser("qnd", parents=[common], help="Analytic QND estimates")
    sp_qnd.add_argument("--top", type=int, default=5, help="Dominant decay entries to report")

    sp_dyn = subparsers.add_parser("dynamics", parents=[common], help="Master-equation readout")
    sp_dyn.add_argument("--state", type=int, action="append", help="Prepared qubit state")
    sp_dyn.add_argument("--converge", action="store_true", help="Grow truncation to convergence")

    sp_traj = subparsers.add_parser("trajectories", parents=[common],
                                    help="Stochastic heterodyne readout")
    sp_traj.add_argument("--n-traj", type=int, help="Trajectories per prepared state")
    sp_traj.add_argument("--seed", type=int, help="Master seed")
    sp_traj.add_argument("--workers", type=int, help="Process-pool size")

    sp_dec = subparsers.add_parser("decoherence", parents=[common], help="Decoherence budget")
    sp_dec.add_argument("--no-echo", action="store_true", help="Skip the flux-noise echo")

    sp_val = subparsers.add_parser("validate", parents=[common], help="Invariant suite")
    sp_val.add_argument("--baths", action="store_true",
                        help="Also write the bath table of the configured point")
    return parser


def main(args: Optional[List[str]] = None) -> int:
    """
    Main entry point, registered as the 'quartonsim' console script.
    """
    parser = build_parser()
    if args is None:
        args = sys.argv[1:]
    parsed = parser.parse_args(args)

    if parsed.command is None:
        parser.print_help()
        return EXIT_OK

    cfg: Optional[RunConfig] = None
    out = _run_dir(parsed)
    try:
        set_global_level(parse_level(parsed.log_level))
        cfg = _resolve_config(parsed)
        (out / "resolved.cfg").write_text(write_config(cfg))
        return COMMANDS[parsed.command](parsed, cfg, out)
    except ConfigError as e:
        status = EXIT_CONFIG
        record = error_record(e)
    except PHYSICS_ERRORS as e:
        status = EXIT_PHYSICS
        record = error_record(e)
    except Exception as e:
        logger.error(f"Unexpected failure: {e}")
        status = EXIT_ERROR
        record = error_record(e)
    write_json(out / "error.json", record, _provenance(cfg))
    print(json.dumps(record, sort_keys=True), file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())
