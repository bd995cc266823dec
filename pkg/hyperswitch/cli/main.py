"""
Command-line entry point.

    hyperswitch certify --config example_a_damped
    hyperswitch dwell-bound --config example_a_undamped --variant DwellSignFixed
    hyperswitch simulate --config example_a_undamped --plot
    hyperswitch sweep --config example_b_f-1_g2 --start 1 --stop 6 --steps 11 --jobs 4
    hyperswitch validate-signal --signal signal.json --tau-d 2.3105 --n0 1

Exit status: 0 success, 2 infeasible or outside the dwell class, 1 error.
Results go to stdout, logs to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
import uuid
from pathlib import Path
from typing import Callable, Dict, List, Optional

from pydantic import ValidationError

from hyperswitch.certifier.audit import check_certificate
from hyperswitch.certifier.engine import certificate_from_weights, certify
from hyperswitch.certifier.renderer import render_audit
from hyperswitch.certifier.schemas import Certificate, SearchOptions, Variant
from hyperswitch.certifier.store import load_certificate, persist_report, save_certificate
from hyperswitch.cli.jobs import run_sweep, sweep_grid
from hyperswitch.cli.scenarios import ScenarioConfig, SweepSpec, load_scenario
from hyperswitch.config import Settings, get_settings
from hyperswitch.exceptions import (
    ConfigurationError,
    HyperswitchError,
    Infeasible,
    KernelMismatch,
    StructuralInfeasible,
)
from hyperswitch.model.schemas import SwitchedSystem
from hyperswitch.signals import load_signal, validate_dwell
from hyperswitch.simulator.decay import estimate_decay
from hyperswitch.simulator.engine import simulate
from hyperswitch.simulator.lyapunov import lyapunov_trace
from hyperswitch.simulator.renderer import plot_trace, write_states_csv, write_trace_csv
from hyperswitch.utils.csv_export import SWEEP_FIELDS, write_csv
from hyperswitch.utils.logging import StructuredLogger, setup_logging

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INFEASIBLE = 2

INFEASIBLE_FILE = "infeasible.json"

logger = StructuredLogger(__name__)


def _out_dir(args: argparse.Namespace, config: Optional[ScenarioConfig], settings: Settings) -> Path:
    if args.out:
        return Path(args.out)
    if config is not None and config.output_dir:
        return Path(config.output_dir)
    name = config.name if config is not None and config.name else "run"
    return Path(settings.output_dir) / name


def _search_options(config: ScenarioConfig, args: argparse.Namespace) -> SearchOptions:
    return config.search.model_copy(update={"jobs": args.jobs})


def _require_config(args: argparse.Namespace) -> ScenarioConfig:
    if not args.config:
        raise ConfigurationError(f"{args.command} needs --config")
    return load_scenario(args.config)


def _write_certificate(
    system: SwitchedSystem, cert: Certificate, options: SearchOptions, out: Path
) -> Path:
    report = check_certificate(system, cert, options)
    persist_report(report, out, render_audit(report, cert))
    return save_certificate(cert, out)


def _write_infeasible(out: Path, variant: Variant, error: Exception) -> None:
    out.mkdir(parents=True, exist_ok=True)
    doc = {
        "variant": variant.value,
        "error": type(error).__name__,
        "message": str(error),
        "best_margin": getattr(error, "best_margin", None),
    }
    (out / INFEASIBLE_FILE).write_text(json.dumps(doc, indent=2), encoding="utf-8")


def _print_certificate(cert: Certificate, path: Path) -> None:
    print(f"variant = {cert.variant.value}")
    print(f"nu = {cert.nu:.6g}")
    print("mu = " + ", ".join(f"{v:.6g}" for v in cert.mu))
    if cert.variant.is_dwell:
        print(f"gamma = {cert.gamma:.6g}")
        print(f"tau_D = {cert.tau_D:.6g}")
    print(f"certificate = {path}")


def _run_certify(
    args: argparse.Namespace, settings: Settings, variant: Variant, config: ScenarioConfig
) -> int:
    system = config.load_system()
    options = _search_options(config, args)
    out = _out_dir(args, config, settings)
    try:
        if args.command == "dwell-bound" and config.warm_start is not None:
            ws = config.warm_start
            cert = certificate_from_weights(system, variant, ws.Q, ws.mu, ws.nu, options)
        else:
            cert = certify(system, variant, options)
    except (Infeasible, StructuralInfeasible, KernelMismatch) as e:
        _write_infeasible(out, variant, e)
        print(f"infeasible: {e}")
        return EXIT_INFEASIBLE
    path = _write_certificate(system, cert, options, out)
    _print_certificate(cert, path)
    return EXIT_OK


def cmd_certify(args: argparse.Namespace, settings: Settings) -> int:
    config = _require_config(args)
    variant = Variant.parse(args.variant) if args.variant else config.variant
    return _run_certify(args, settings, variant, config)


def cmd_dwell_bound(args: argparse.Namespace, settings: Settings) -> int:
    config = _require_config(args)
    if args.variant:
        variant = Variant.parse(args.variant)
    elif config.variant.is_dwell:
        variant = config.variant
    else:
        variant = Variant.DWELL_SIGN_FIXED if config.load_system().sign_fixed else Variant.DWELL_SIGN_FREE
    if not variant.is_dwell:
        raise ConfigurationError(f"dwell-bound needs a dwell variant, got {variant.value}")
    return _run_certify(args, settings, variant, config)


def _load_cli_certificate(args: argparse.Namespace, config: ScenarioConfig) -> Optional[Certificate]:
    if args.certificate:
        return load_certificate(args.certificate)
    path = config.certificate_path()
    return load_certificate(path) if path is not None else None


def cmd_simulate(args: argparse.Namespace, settings: Settings) -> int:
    config = _require_config(args)
    system = config.load_system()
    signal = load_signal(args.signal) if args.signal else config.build_signal(len(system), args.seed)
    w0 = config.initial.sample(config.grid.x, system.n)
    trace = simulate(system, signal, w0, config.grid)
    trace = trace.model_copy(update={"fit": estimate_decay(trace, config.fit_window)})
    cert = _load_cli_certificate(args, config)
    if cert is not None:
        trace = lyapunov_trace(trace, cert)

    out = _out_dir(args, config, settings)
    write_trace_csv(trace, out / "trace.csv")
    if args.states:
        write_states_csv(trace, out / "states.csv", every=args.states)
    if args.plot:
        plot_trace(trace, out / "trace.svg", title=config.name)

    fit = trace.fit
    verdict = "decay" if fit.decaying else "growth"
    print(f"rate = {fit.rate:.6g} ({verdict})")
    print(f"growth_ratio = {trace.growth_ratio():.6g}")
    print(f"trace = {out / 'trace.csv'}")
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace, settings: Settings) -> int:
    config = _require_config(args)
    base = config.sweep or SweepSpec(start=args.start or 0.5, stop=args.stop or 4.0)
    start = args.start if args.start is not None else base.start
    stop = args.stop if args.stop is not None else base.stop
    steps = args.steps if args.steps is not None else base.steps
    periods = sweep_grid(start, stop, steps)

    system = config.load_system()
    cycle = config.signal.cycle if config.signal else [0, 1]
    horizon = config.signal.horizon if config.signal else 12.0
    result = run_sweep(
        system, periods, cycle, horizon, config.grid, config.initial, config.fit_window, args.jobs
    )
    out = _out_dir(args, config, settings)
    path = write_csv(out / "sweep.csv", SWEEP_FIELDS, result.rows())

    bracket = result.bracket
    if bracket is None:
        print("sign_change = none")
    else:
        print(f"sign_change = [{bracket[0]:.6g}, {bracket[1]:.6g}]")
    cert = _load_cli_certificate(args, config)
    if cert is not None and cert.variant.is_dwell:
        print(f"certified_tau_D = {cert.tau_D:.6g}")
    print(f"sweep = {path}")
    failed = [p for p in result.points if p.error]
    return EXIT_ERROR if failed and len(failed) == len(result.points) else EXIT_OK


def cmd_validate_signal(args: argparse.Namespace, settings: Settings) -> int:
    if args.signal:
        signal = load_signal(args.signal)
    else:
        config = _require_config(args)
        signal = config.build_signal(len(config.load_system()), args.seed)
    if args.tau_d is None:
        raise ConfigurationError("validate-signal needs --tau-d")
    ok, pair = validate_dwell(signal, args.tau_d, args.n0)
    if ok:
        print(f"valid: {len(signal.switches)} switches within tau_D = {args.tau_d:.6g}, N0 = {args.n0}")
        return EXIT_OK
    print(f"invalid: switches at {pair[0]:.6g} .. {pair[1]:.6g} exceed N0 + (t - tau) / tau_D")
    return EXIT_INFEASIBLE


COMMANDS: Dict[str, Callable[[argparse.Namespace, Settings], int]] = {
    "certify": cmd_certify,
    "dwell-bound": cmd_dwell_bound,
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "validate-signal": cmd_validate_signal,
}


def build_parser(settings: Settings) -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="Scenario file or bundled scenario name")
    common.add_argument("--variant", help="Certificate variant, e.g. CommonSignFixed")
    common.add_argument("--out", help="Output directory")
    common.add_argument("--seed", type=int, default=settings.default_seed)
    common.add_argument("--jobs", type=int, default=settings.default_jobs)
    common.add_argument("--plot", action="store_true", help="Write an SVG plot of the trace")
    common.add_argument("--certificate", help="Certificate file for V traces")
    common.add_argument("--log-level", default=settings.log_level)
    common.add_argument("--log-json", action="store_true", default=settings.log_json)

    parser = argparse.ArgumentParser(
        prog="hyperswitch", description="Certify and simulate switched linear hyperbolic systems."
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("certify", parents=[common], help="Search a Lyapunov certificate")
    sub.add_parser("dwell-bound", parents=[common], help="Certificate with the smallest dwell-time bound")

    sim = sub.add_parser("simulate", parents=[common], help="Simulate one switching signal")
    sim.add_argument("--signal", help="Signal file overriding the scenario's signal")
    sim.add_argument("--states", type=int, default=0, metavar="EVERY", help="Also write every k-th state snapshot")

    sweep = sub.add_parser("sweep", parents=[common], help="Fit decay rates over a range of periods")
    sweep.add_argument("--start", type=float)
    sweep.add_argument("--stop", type=float)
    sweep.add_argument("--steps", type=int)

    val = sub.add_parser("validate-signal", parents=[common], help="Check average-dwell-time membership")
    val.add_argument("--signal", help="Signal file")
    val.add_argument("--tau-d", type=float, dest="tau_d")
    val.add_argument("--n0", type=int, default=1)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    settings = get_settings()
    args = build_parser(settings).parse_args(argv)
    setup_logging(level=args.log_level, json_format=args.log_json, log_file=settings.log_file)
    logger.set_run_id(uuid.uuid4().hex[:12])
    logger.info(f"Running {args.command}", extra={"command": args.command})
    if args.jobs < 1:
        print("error: --jobs must be at least 1", file=sys.stderr)
        return EXIT_ERROR
    try:
        return COMMANDS[args.command](args, settings)
    except (HyperswitchError, ValidationError, ValueError, OSError) as e:
        logger.error(f"{args.command} failed: {type(e).__name__}: {e}", extra={"command": args.command})
        print(f"error: {type(e).__name__}: {str(e).splitlines()[0] if str(e) else ''}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
