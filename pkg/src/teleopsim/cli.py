"""Command line interface: run one experiment, sweep a grid, or serve live.

Exit codes: 0 success, 2 configuration error, 3 runtime invariant violation
(e.g. a passivity breach in a wave run).
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from .configfile import load_config, load_delay_profile_csv
from .energy import PassivityError
from .harness import (
    Architecture,
    ConfigError,
    ExperimentConfig,
    analytic_equilibrium,
    compute_metrics,
    run_experiment,
    sweep,
    write_metrics_csv,
    write_sweep_csv,
)
from .plant import InputSignal
from .predictors import HorizonError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INVARIANT = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="teleopsim",
        description="Bilateral teleoperation simulator with wave-variable "
                    "transmission and delay-compensating predictors.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run one experiment and write its trace CSV")
    _add_experiment_flags(run_p)
    run_p.add_argument("--out", required=True, help="trace CSV output path")
    run_p.add_argument("--metrics", help="also write a one-row metrics CSV")

    sweep_p = sub.add_parser("sweep", help="run a grid of experiments")
    _add_experiment_flags(sweep_p)
    sweep_p.add_argument("--axis", required=True, choices=["delay", "arch", "b"])
    sweep_p.add_argument("--values", required=True,
                         help="comma-separated axis values")
    sweep_p.add_argument("--out", required=True, help="metrics table CSV path")

    serve_p = sub.add_parser("serve", help="serve the live telemetry loop")
    serve_p.add_argument("--bind", default="127.0.0.1:8080", help="host:port")
    serve_p.add_argument("--config", help="flat key=value config file")
    serve_p.add_argument("--telemetry-hz", type=float, default=30.0)
    return parser


def _add_experiment_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat key=value config file (flags override it)")
    p.add_argument("--arch", help="raw | wave | wave+smith | wave+mj | wave+pred")
    p.add_argument("--b", type=float, help="wave impedance")
    p.add_argument("--delay", type=float, help="constant one-way delay (s)")
    p.add_argument("--delay-profile", help="piecewise delay CSV with header t,tau")
    p.add_argument("--input", help="step:A[:T0] | sine:A:FREQ | trace:FILE")
    p.add_argument("--duration", type=float, help="run length (s)")
    p.add_argument("--dt", type=float, help="control period (s)")
    p.add_argument("--band", type=float, help="settling band fraction")


def _config_from_args(args) -> ExperimentConfig:
    cfg = ExperimentConfig()
    if args.config:
        cfg = load_config(args.config, base=cfg)
    updates = {}
    if args.arch is not None:
        updates["arch"] = Architecture.parse(args.arch)
    if args.b is not None:
        updates["b"] = args.b
    if args.delay is not None:
        updates["delay"] = args.delay
        updates["delay_breakpoints"] = None
    if getattr(args, "delay_profile", None):
        updates["delay_breakpoints"] = load_delay_profile_csv(args.delay_profile)
    if args.input is not None:
        try:
            updates["input"] = InputSignal.parse(args.input)
        except ValueError as exc:
            raise ConfigError(f"input: {exc}") from exc
    if args.duration is not None:
        updates["duration"] = args.duration
    if args.dt is not None:
        updates["dt"] = args.dt
    if args.band is not None:
        updates["band"] = args.band
    cfg = replace(cfg, **updates)
    cfg.validate()
    return cfg


def _cmd_run(args) -> int:
    cfg = _config_from_args(args)
    log = run_experiment(cfg)
    log.write_csv(args.out)
    if args.metrics:
        y_inf, _ = analytic_equilibrium(cfg)
        metrics = compute_metrics(log, y_inf, band=cfg.band)
        write_metrics_csv(metrics, cfg, args.metrics)
    print(f"wrote {len(log)} rows to {args.out} ({cfg.describe()})")
    return EXIT_OK


def _cmd_sweep(args) -> int:
    # --arch may be a comma-separated list here; keep it away from the
    # single-run config builder.
    arch_spec = args.arch
    args.arch = None
    cfg = _config_from_args(args)
    raw_values = [v.strip() for v in args.values.split(",") if v.strip()]
    if not raw_values:
        raise ConfigError("values: sweep needs at least one value")
    if args.axis == "arch":
        values = raw_values
        archs = None
    else:
        try:
            values = [float(v) for v in raw_values]
        except ValueError as exc:
            raise ConfigError(f"values: {exc}") from exc
        archs = (
            [Architecture.parse(a) for a in arch_spec.split(",")]
            if arch_spec else None
        )
    rows = sweep(cfg, args.axis, values, archs=archs)
    write_sweep_csv(rows, args.out)
    print(f"wrote {len(rows)} sweep rows to {args.out}")
    return EXIT_OK


def _cmd_serve(args) -> int:
    from .service import serve  # deferred: pulls in fastapi/uvicorn

    cfg = ExperimentConfig()
    if args.config:
        cfg = load_config(args.config, base=cfg)
    cfg.validate()
    serve(args.bind, cfg, telemetry_hz=args.telemetry_hz)
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on bad flags, which matches the config-error code
        return int(exc.code or 0)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "sweep":
            return _cmd_sweep(args)
        return _cmd_serve(args)
    except (ConfigError, FileNotFoundError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (PassivityError, HorizonError) as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    raise SystemExit(main())
