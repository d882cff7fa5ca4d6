"""Command-line front end: ``eomsim {spectrum,simulate,synthesize,metrics,target}``."""

from __future__ import annotations

import argparse
import json
import shlex
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import modulation_metrics, spectrum_sweep
from .dynamics import SolverConfig, simulate, INITIAL_MODES, METHODS
from .errors import (
    EomsimError, MaxStepsExceeded, NonFinite, ParameterError, ReachabilityError, SingularM,
    StepRejected, UndersampledWaveform, WaveformError, NonPositiveVoltage, NegativeVoltageSquared,
)
from .io import RunManifest, manifest_path_for, read_columns, write_csv, write_json
from .params import load_config
from .synthesis import DriveWaveform, TargetWaveform, compile_target

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_BAND = 0, 2, 3, 4
NUMERIC_ERRORS = (NonFinite, MaxStepsExceeded, StepRejected, SingularM, FloatingPointError)
DEFAULT_STEPS_PER_PERIOD = 4000


class UsageError(Exception):
    pass


def _add_config(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="JSON parameter file (missing keys take defaults)")
    p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                   help="override one parameter; may be repeated")


def _add_solver(p: argparse.ArgumentParser) -> None:
    p.add_argument("--dt", type=float, help="integrator step (s); default period/4000")
    p.add_argument("--method", choices=METHODS, default="exponential-piecewise")
    p.add_argument("--record-stride", type=int, default=1)
    p.add_argument("--initial", choices=INITIAL_MODES, default="rest")
    p.add_argument("--delta-p", type=float, default=0.0, help="probe detuning (rad/s)")
    p.add_argument("--rel-tol", type=float, default=1e-6)
    p.add_argument("--abs-tol", type=float, default=1e-9)
    p.add_argument("--max-steps", type=int, default=50_000_000)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="eomsim", description=__doc__)
    parser.add_argument("--version", action="version", version=f"eomsim {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("spectrum", help="normalized susceptibility over (delta_p, U^2)")
    _add_config(sp)
    sp.add_argument("--dp-min", type=float, required=True)
    sp.add_argument("--dp-max", type=float, required=True)
    sp.add_argument("--dp-steps", type=int, required=True)
    sp.add_argument("--dp-unit", choices=("rad/s", "gamma"), default="rad/s")
    sp.add_argument("--u2-min", type=float, required=True)
    sp.add_argument("--u2-max", type=float, required=True)
    sp.add_argument("--u2-steps", type=int, required=True)
    sp.add_argument("--out", type=Path, required=True)

    sm = sub.add_parser("simulate", help="time-domain response to a U^2 program")
    _add_config(sm)
    src = sm.add_mutually_exclusive_group(required=True)
    src.add_argument("--kind", choices=("sine", "sawtooth", "square"))
    src.add_argument("--table", type=Path, help="CSV with header t,u_sq")
    sm.add_argument("--peak", type=float, help="U_m^2 (V^2)")
    sm.add_argument("--floor", type=float, default=0.0)
    sm.add_argument("--period", type=float, help="drive period (s); default 200/gamma_m")
    sm.add_argument("--cycles", type=float, default=4.0)
    sm.add_argument("--phase", type=float, default=0.0)
    _add_solver(sm)
    sm.add_argument("--out", type=Path, required=True)

    sy = sub.add_parser("synthesize", help="compile a target absorption waveform into U^2(t)")
    _add_config(sy)
    sy.add_argument("--target", type=Path, required=True, help="CSV with header t,a_target")
    sy.add_argument("--clamp", action="store_true")
    sy.add_argument("--out", type=Path, required=True)
    sy.add_argument("--replay", action="store_true", help="also simulate the compiled program")
    sy.add_argument("--replay-out", type=Path)
    _add_solver(sy)

    mt = sub.add_parser("metrics", help="extinction ratio, window width, polariton figures")
    _add_config(mt)
    mt.add_argument("--um-sq", type=float, required=True)
    mt.add_argument("--u2", type=float, default=0.0, help="operating point for width/polariton")
    mt.add_argument("--manifest", type=Path)

    tg = sub.add_parser("target", help="write a standard target absorption waveform")
    _add_config(tg)
    tg.add_argument("--kind", choices=("sine", "sawtooth", "square"), required=True)
    tg.add_argument("--lo", type=float, default=0.1, help="lower level as band fraction")
    tg.add_argument("--hi", type=float, default=0.9, help="upper level as band fraction")
    tg.add_argument("--period", type=float, help="period (s); default 200/gamma_m")
    tg.add_argument("--cycles", type=float, default=4.0)
    tg.add_argument("--samples-per-period", type=int, default=2000)
    tg.add_argument("--out", type=Path, required=True)
    return parser


def _solver(args, default_dt: float) -> SolverConfig:
    try:
        return SolverConfig(
            dt=args.dt if args.dt is not None else default_dt,
            method=args.method, rel_tol=args.rel_tol, abs_tol=args.abs_tol,
            max_steps=args.max_steps, record_stride=args.record_stride,
            initial=args.initial, delta_p=args.delta_p,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _finish(manifest: RunManifest, out: Path) -> None:
    manifest.write(manifest_path_for(out))


def cmd_spectrum(args, params, manifest) -> int:
    if args.dp_steps < 1 or args.u2_steps < 1:
        raise UsageError("--dp-steps and --u2-steps must be >= 1")
    scale = params.medium.gamma if args.dp_unit == "gamma" else 1.0
    dp = np.linspace(args.dp_min, args.dp_max, args.dp_steps) * scale
    u2 = np.linspace(args.u2_min, args.u2_max, args.u2_steps)
    try:
        table = spectrum_sweep(dp, u2, params)
    except (ValueError, NegativeVoltageSquared) as exc:
        raise UsageError(str(exc)) from None
    rows = table.to_csv(args.out)
    manifest.add_output(args.out, rows)
    _finish(manifest, args.out)
    return EXIT_OK


def _drive_from_args(args, params) -> DriveWaveform:
    period = args.period if args.period is not None else 200.0 / params.mech.gamma_m
    if args.table is not None:
        data = read_columns(args.table, ("t", "u_sq"))
        if data.shape[0] < 1:
            raise UsageError(f"{args.table}: no samples")
        return DriveWaveform.from_table(data[:, 0], data[:, 1])
    if args.peak is None:
        raise UsageError("--peak is required with --kind")
    if not args.cycles > 0:
        raise UsageError("--cycles must be > 0")
    return DriveWaveform(args.kind, u_sq_peak=args.peak, u_sq_floor=args.floor, period=period,
                         duration=args.cycles * period, phase=args.phase)


def cmd_simulate(args, params, manifest) -> int:
    drive = _drive_from_args(args, params)
    default_dt = (drive.period if drive.kind != "table" else drive.duration) / DEFAULT_STEPS_PER_PERIOD
    traj = simulate(drive, params, _solver(args, default_dt))
    rows = traj.to_csv(args.out)
    manifest.add_output(args.out, rows)
    _finish(manifest, args.out)
    return EXIT_OK


def cmd_synthesize(args, params, manifest) -> int:
    data = read_columns(args.target, ("t", "a_target"))
    target = TargetWaveform(data[:, 0], data[:, 1])
    program = compile_target(target, params, clamp=args.clamp)
    rows = write_csv(args.out, ("t", "u_sq"), np.column_stack([program.t, program.u_sq]))
    manifest.add_output(args.out, rows)
    if program.clips:
        clip_path = args.out.with_name(args.out.name + ".clips.json")
        write_json(clip_path, program.clips)
        manifest.add_output(clip_path, len(program.clips))
        print(f"clipped {len(program.clips)} out-of-band samples; see {clip_path}", file=sys.stderr)
    if args.replay:
        drive = program.as_drive()
        if program.t.size < 2:
            raise UsageError("replay needs at least two target samples")
        dt = np.min(np.diff(program.t)) / 2.0
        traj = simulate(drive, params, _solver(args, dt))
        replay_out = args.replay_out or args.out.with_name(args.out.stem + ".replay.csv")
        manifest.add_output(replay_out, traj.to_csv(replay_out))
    _finish(manifest, args.out)
    return EXIT_OK


def cmd_metrics(args, params, manifest) -> int:
    if not args.um_sq > 0:
        raise UsageError("--um-sq must be > 0")
    if args.u2 < 0:
        raise UsageError("--u2 must be >= 0")
    metrics = modulation_metrics(args.um_sq, params, u_sq=args.u2)
    print(json.dumps(metrics.to_dict(), indent=2, sort_keys=True))
    if args.manifest is not None:
        manifest.write(args.manifest)
    return EXIT_OK


def cmd_target(args, params, manifest) -> int:
    period = args.period if args.period is not None else 200.0 / params.mech.gamma_m
    if not (0.0 <= args.lo <= args.hi < 1.0):
        raise UsageError("need 0 <= --lo <= --hi < 1")
    if args.samples_per_period < 16:
        raise UsageError("--samples-per-period must be >= 16")
    target = TargetWaveform.periodic(args.kind, params, period, args.cycles * period,
                                     args.samples_per_period / period, args.lo, args.hi)
    rows = write_csv(args.out, ("t", "a_target"), np.column_stack([target.t, target.a_target]))
    manifest.add_output(args.out, rows)
    _finish(manifest, args.out)
    return EXIT_OK


COMMANDS = {
    "spectrum": cmd_spectrum,
    "simulate": cmd_simulate,
    "synthesize": cmd_synthesize,
    "metrics": cmd_metrics,
    "target": cmd_target,
}


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        params = load_config(args.config, args.overrides)
    except FileNotFoundError as exc:
        print(f"eomsim: config not found: {exc.filename}", file=sys.stderr)
        return EXIT_USAGE
    except (ParameterError, OSError, TypeError) as exc:
        print(f"eomsim: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_USAGE
    manifest = RunManifest(config=params.to_mapping(),
                           command_line=shlex.join(["eomsim", *argv]))
    try:
        with np.errstate(over="raise", invalid="raise"):
            return COMMANDS[args.command](args, params, manifest)
    except ReachabilityError as exc:
        print(f"eomsim: {exc}", file=sys.stderr)
        return EXIT_BAND
    except NUMERIC_ERRORS as exc:
        print(f"eomsim: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (UsageError, WaveformError, UndersampledWaveform, NonPositiveVoltage,
            NegativeVoltageSquared, ValueError, OSError) as exc:
        print(f"eomsim: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except EomsimError as exc:
        print(f"eomsim: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
