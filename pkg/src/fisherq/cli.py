"""Command-line interface.

Every subcommand accepts ``--spec``, ``--out``, ``--grid-n``, ``--grid-width``
and ``--seed``.  Outputs go to ``--out`` (a directory), defaulting to
``$FISHERQ_OUT`` and then the working directory.

Exit codes: 0 success, 1 input error, 2 an identity check failed.
"""
from __future__ import annotations

import argparse
import hashlib
import os
import sys
from typing import Optional, Sequence

from . import __version__
from .continuity import EvolutionConfig
from .diffusion import DiffusionConfig, debruijn_report, phase_space_entropies, trajectory_csv, trajectory_times
from .errors import SpecError, TruncationError
from .grid import GridSpec, WaveFunction
from .reports import (
    OSCILLATOR_COLUMNS,
    SWEEP_FIELDS,
    RunManifest,
    continuity_report,
    csv_text,
    flatten_measure,
    grid_dict,
    json_text,
    measure_report,
    oscillator_checks,
    oscillator_row,
)
from .specfile import StateSpec, load_spec
from .states import gaussian

OUT_ENV = "FISHERQ_OUT"
EXIT_OK, EXIT_INPUT, EXIT_IDENTITY = 0, 1, 2
MAX_OSCILLATOR_LEVEL = 50


class _InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--spec", help="state specification file")
    common.add_argument("--out", help=f"output directory (default ${OUT_ENV} or .)")
    common.add_argument("--grid-n", type=int, help="grid points, overriding the spec")
    common.add_argument("--grid-width", type=float,
                        help="full grid width; the grid becomes [-W/2, W/2)")
    common.add_argument("--seed", type=int, help="seed for random states")

    parser = _Parser(prog="fisherq", description="Fisher-information nonclassicality measures")
    parser.add_argument("--version", action="version", version=f"fisherq {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sub.add_parser("measure", parents=[common], help="nonclassicality report of one state")

    table = sub.add_parser("oscillator-table", parents=[common], help="oscillator eigenstate table")
    table.add_argument("--n-max", type=int, default=10)

    diff = sub.add_parser("diffuse", parents=[common], help="entropy rates under phase-space diffusion")
    diff.add_argument("--gamma", type=float, default=1.0, help="position diffusion rate")
    diff.add_argument("--sigma-rate", type=float, default=1.0, help="momentum diffusion rate")
    diff.add_argument("--times", type=_floats, help="comma-separated geometric time ladder")

    sweep = sub.add_parser("sweep", parents=[common], help="measure over a parameter range")
    sweep.add_argument("--param", required=True)
    sweep.add_argument("--values", default="", help="comma-separated values")

    cont = sub.add_parser("continuity", parents=[common], help="continuity-equation residual")
    cont.add_argument("--potential", choices=("free", "harmonic"), default="free")
    cont.add_argument("--mass", type=float, default=None)
    cont.add_argument("--omega", type=float, default=None)
    cont.add_argument("--dt", type=float, default=1e-3)
    cont.add_argument("--steps", type=int, default=1000)
    cont.add_argument("--no-refine", action="store_true", help="skip the refinement study")
    return parser


# --- helpers ----------------------------------------------------------------

def _out_dir(args) -> str:
    path = args.out or os.environ.get(OUT_ENV) or "."
    os.makedirs(path, exist_ok=True)
    return path


def _write(directory: str, name: str, text: str) -> str:
    path = os.path.join(directory, name)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return path


def _spec(args, required: bool = True) -> Optional[StateSpec]:
    if not args.spec:
        if required:
            raise _InputError("--spec is required")
        return None
    spec = load_spec(args.spec)
    return spec.with_grid(args.grid_n, args.grid_width).with_seed(args.seed)


def _spec_record(spec: Optional[StateSpec]) -> Optional[dict]:
    if spec is None:
        return None
    record = spec.as_dict()
    if spec.kind == "tabulated":
        path = spec.params["file"]
        path = path if os.path.isabs(path) else os.path.join(spec.base_dir, path)
        with open(path, "rb") as fh:
            record["file_sha256"] = hashlib.sha256(fh.read()).hexdigest()
    return record


def _report_checks(checks) -> list[dict]:
    return [c.as_dict() for c in checks]


def _fail_summary(checks) -> int:
    failed = [c for c in checks if not c.ok]
    for c in failed:
        print(f"identity failed: {c.name} residual={c.residual!r} tol={c.tol!r} {c.note}".rstrip(),
              file=sys.stderr)
    return EXIT_IDENTITY if failed else EXIT_OK


# --- commands ---------------------------------------------------------------

def cmd_measure(args) -> int:
    spec = _spec(args)
    state = spec.build()
    body, checks = measure_report(state)
    outputs = ("measure.json",)
    manifest = RunManifest("measure", _spec_record(spec), grid_dict(state.grid), {},
                           outputs, args.seed)
    body["checks"] = _report_checks(checks)
    body["ok"] = all(c.ok for c in checks)
    _write(_out_dir(args), outputs[0], json_text(manifest.meta(), body))
    return _fail_summary(checks)


def cmd_oscillator_table(args) -> int:
    if not 0 <= args.n_max <= MAX_OSCILLATOR_LEVEL:
        raise _InputError(f"--n-max must lie in 0..{MAX_OSCILLATOR_LEVEL}")
    spec = _spec(args, required=False)
    hbar, mass, omega = (spec.hbar, spec.mass, spec.omega) if spec else (1.0, 1.0, 1.0)
    points = args.grid_n or 2048
    rows, checks = [], []
    for n in range(args.n_max + 1):
        try:
            row = oscillator_row(n, points, hbar, mass, omega, args.grid_width)
        except TruncationError as exc:
            print(f"level {n}: {exc}", file=sys.stderr)
            return EXIT_IDENTITY
        rows.append(row)
        checks += oscillator_checks(row, hbar)
    config = {"n_max": args.n_max, "points": points, "width": args.grid_width,
              "hbar": hbar, "mass": mass, "omega": omega}
    outputs = ("oscillator_table.csv",)
    manifest = RunManifest("oscillator-table", _spec_record(spec), None, config, outputs, args.seed)
    _write(_out_dir(args), outputs[0], csv_text(manifest.header_lines(), OSCILLATOR_COLUMNS, rows))
    return _fail_summary(checks)


def cmd_diffuse(args) -> int:
    spec = _spec(args)
    if not (args.gamma > 0 and args.sigma_rate > 0):
        raise _InputError("--gamma and --sigma-rate must both be positive")
    config = DiffusionConfig(args.gamma, args.sigma_rate, tuple(args.times) if args.times else None)
    state = spec.build()
    report = debruijn_report(state, config)
    times = trajectory_times(state, config)
    rows = phase_space_entropies(state, config, times)
    outputs = ("trajectory.csv", "debruijn.json")
    manifest = RunManifest("diffuse", _spec_record(spec), grid_dict(state.grid),
                           {"gamma": args.gamma, "sigma_rate": args.sigma_rate,
                            "times": list(config.times) if config.times else None},
                           outputs, args.seed)
    out = _out_dir(args)
    _write(out, outputs[0], trajectory_csv(rows, manifest.header_lines()))
    body = report.to_dict()
    body["diagnostics"] = {k: v for k, v in report.to_dict(extended=True).items() if k not in body}
    _write(out, outputs[1], json_text(manifest.meta(), body))
    if report.flagged:
        print(f"de Bruijn mismatch flagged: x={report.mismatch_x:.3e} p={report.mismatch_p:.3e}",
              file=sys.stderr)
        return EXIT_IDENTITY
    return EXIT_OK


def cmd_sweep(args) -> int:
    spec = _spec(args)
    values = [v.strip() for v in args.values.split(",") if v.strip()]
    if args.param not in spec.params and args.param not in ("hbar", "mass", "omega"):
        raise SpecError(f"parameter {args.param!r} is not set in the template")
    rows, code = [], EXIT_OK
    for value in values:
        row = {args.param: value}
        try:
            body, checks = measure_report(spec.with_parameter(args.param, value).build())
            row.update(flatten_measure(body, checks))
            failed = row["failed_checks"]
            row["status"] = "identity_failure" if failed else "ok"
            if failed:
                code = EXIT_IDENTITY
        except ArithmeticError as exc:
            row["status"] = f"identity_failure: {exc}"
            code = EXIT_IDENTITY
        except ValueError as exc:
            row["status"] = f"input_error: {exc}"
        rows.append(row)
    columns = (args.param, "status") + SWEEP_FIELDS
    outputs = ("sweep.csv",)
    manifest = RunManifest("sweep", _spec_record(spec), None,
                           {"param": args.param, "values": values}, outputs, args.seed)
    _write(_out_dir(args), outputs[0], csv_text(manifest.header_lines(), columns, rows))
    return code


CONTINUITY_RESIDUAL_LIMIT = 1e-4


def cmd_continuity(args) -> int:
    spec = _spec(args, required=False)
    mass = args.mass if args.mass is not None else (spec.mass if spec else 1.0)
    omega = args.omega if args.omega is not None else (spec.omega if spec else 1.0)
    config = EvolutionConfig(args.potential, mass, omega, args.dt, args.steps)
    if spec is None:
        width = args.grid_width or 80.0
        grid = GridSpec.centered(width / 2, args.grid_n or 1024)
        state = gaussian(grid, 0.0, 1.0, 1.0)
    else:
        state = spec.build()
        if not isinstance(state, WaveFunction):
            raise _InputError("continuity needs a pure state")
    body = continuity_report(state, config, refine=not args.no_refine)
    outputs = ("continuity.json",)
    manifest = RunManifest("continuity", _spec_record(spec), grid_dict(state.grid),
                           {"potential": config.potential, "mass": mass, "omega": omega,
                            "dt": config.dt, "steps": config.steps, "refine": not args.no_refine},
                           outputs, args.seed)
    body["ok"] = bool(body["residual"] < CONTINUITY_RESIDUAL_LIMIT)
    _write(_out_dir(args), outputs[0], json_text(manifest.meta(), body))
    if not body["ok"]:
        print(f"continuity residual {body['residual']:.3e} exceeds {CONTINUITY_RESIDUAL_LIMIT:g}",
              file=sys.stderr)
        return EXIT_IDENTITY
    return EXIT_OK


COMMANDS = {
    "measure": cmd_measure,
    "oscillator-table": cmd_oscillator_table,
    "diffuse": cmd_diffuse,
    "sweep": cmd_sweep,
    "continuity": cmd_continuity,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (_InputError, ValueError, OSError) as exc:
        print(f"fisherq: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ArithmeticError as exc:
        print(f"fisherq: identity failure: {exc}", file=sys.stderr)
        return EXIT_IDENTITY


if __name__ == "__main__":
    sys.exit(main())
