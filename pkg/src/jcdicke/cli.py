"""Command-line front end.

Exit codes: 0 success, 1 configuration error, 2 solver/ED failure,
3 validation failure.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import asdict, replace

from . import exact_diag as ed
from .exceptions import ConfigError, JCDickeError, ParameterError
from .params import ModelParams
from .sweep import (
    Axis,
    expand_series,
    load_config,
    record_lines,
    resolve_point,
    run_point,
    run_sweep,
    series_output,
    spec_from_settings,
)
from .validate import run_validate

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_VALIDATION = 0, 1, 2, 3

_MODE_OF = {"solve": "point", "sweep1d": "sweep1d", "sweep2d": "sweep2d",
            "ed": "ed", "validate": "validate"}


def _float_list(text: str):
    items = [t for t in text.split(",") if t.strip()]
    try:
        values = [float(t) for t in items]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number (or comma list): {text!r}") from None
    return values if len(values) > 1 else values[0]


def _axis(text: str) -> Axis:
    try:
        return Axis.parse(text)
    except ConfigError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key = value config file; flags override it")
    p.add_argument("--omega-a", dest="omega_a", type=_float_list)
    p.add_argument("--omega-b", dest="omega_b", type=_float_list)
    p.add_argument("--eta", type=_float_list)
    p.add_argument("--lambda", dest="lambda_", type=_float_list)
    p.add_argument("--omega-mw-coupling", dest="Omega", type=_float_list,
                   help="microwave coupling Omega")
    p.add_argument("--w", type=_float_list, help="composite coupling eta + lambda^2/omega_a")
    p.add_argument("--n-atoms", dest="N", type=int)
    p.add_argument("--out", help="output path (CSV for sweeps, JSON otherwise)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="jcdicke",
        description="Extended JC-Dicke model: mean-field ground states, "
                    "phase-diagram sweeps and exact diagonalization.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="mean-field ground state at one point")
    _add_common(p)
    p.add_argument("--json", action="store_true", help="also print the record as JSON")

    for name, help_ in (("sweep1d", "sweep one parameter"), ("sweep2d", "sweep two parameters")):
        p = sub.add_parser(name, help=help_)
        _add_common(p)
        p.add_argument("--axis", action="append", type=_axis, default=None,
                       help="name:from:to:steps[:log]; repeat for sweep2d")
        p.add_argument("--plot-script", action="store_true", default=None,
                       help="write a gnuplot script next to the CSV")
        p.add_argument("--jobs", type=int, help="worker processes")

    p = sub.add_parser("ed", help="finite-N exact diagonalization")
    _add_common(p)
    p.add_argument("--n-max", type=int, help="photon cutoff (default: auto-converged)")
    p.add_argument("--max-dim", type=int, default=ed.DEFAULT_MAX_DIM)
    p.add_argument("--dump-matrix", help="write the Hamiltonian as a coordinate list")

    p = sub.add_parser("validate", help="run the invariant suite")
    p.add_argument("--out", help="write the JSON summary here instead of stdout")
    return parser


def _settings(args) -> dict:
    settings = load_config(args.config) if getattr(args, "config", None) else {"axis": []}
    overrides = {
        "omega_a": args.omega_a, "omega_b": args.omega_b, "eta": args.eta,
        "lambda": args.lambda_, "Omega": args.Omega, "w": args.w, "N": args.N,
        "out": args.out,
    }
    if getattr(args, "axis", None):
        overrides["axis"] = args.axis
    if getattr(args, "plot_script", None) is not None:
        overrides["plot_script"] = args.plot_script
    if getattr(args, "jobs", None) is not None:
        overrides["jobs"] = args.jobs
    for key, value in overrides.items():
        if value is not None:
            settings[key] = value
    settings["mode"] = _MODE_OF[args.command]
    return settings


def _cmd_solve(args) -> int:
    spec = spec_from_settings(_settings(args))
    problem, _ = resolve_point(spec.grid()[0])
    rec = run_point(spec)
    print("\n".join(record_lines(rec, problem)))
    payload = {"omega_b": problem.omega_b, "Omega": problem.Omega, "w": problem.w,
               **{k: v for k, v in asdict(rec).items() if k not in ("coordinates", "error")}}
    payload = {k: None if isinstance(v, float) and math.isnan(v) else v
               for k, v in payload.items()}
    if args.json:
        print(json.dumps(payload))
    if spec.out:
        with open(spec.out, "w") as fh:
            json.dump(payload, fh, indent=2)
    return EXIT_OK


def _cmd_sweep(args) -> int:
    settings = _settings(args)
    status = EXIT_OK
    for suffix, run in expand_series(settings):
        spec = spec_from_settings(run)
        spec = replace(spec, out=series_output(spec.out, suffix))
        outcome = run_sweep(spec)
        msg = f"wrote {outcome.csv_path} ({len(outcome.records)} rows"
        msg += f", {outcome.failures} failed)" if outcome.failures else ")"
        if outcome.plot_path:
            msg += f"; plot script {outcome.plot_path}"
        print(msg)
        if outcome.failures:
            status = EXIT_SOLVER
    return status


def _cmd_ed(args) -> int:
    settings = _settings(args)
    spec = spec_from_settings(settings)
    fixed = spec.fixed
    missing = [k for k in ("omega_a", "omega_b", "eta", "lambda", "Omega", "N") if k not in fixed]
    if missing:
        raise ConfigError(f"ed needs the full model; missing {missing}")
    params = ModelParams(omega_a=fixed["omega_a"], omega_b=fixed["omega_b"], eta=fixed["eta"],
                         lam=fixed["lambda"], Omega=fixed["Omega"], N=int(fixed["N"]))
    res = ed.ground_state(params, args.n_max, max_dim=args.max_dim)
    for key, value in asdict(res).items():
        print(f"{key}={value}")
    if args.dump_matrix:
        ed.write_coo(args.dump_matrix, ed.build_hamiltonian(params, res.n_max_used))
    if spec.out:
        with open(spec.out, "w") as fh:
            json.dump(asdict(res), fh, indent=2)
    return EXIT_OK


def _cmd_validate(args) -> int:
    report = run_validate()
    print(report.text())
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(report.to_json() + "\n")
    else:
        print(report.to_json())
    return EXIT_OK if report.passed else EXIT_VALIDATION


_COMMANDS = {"solve": _cmd_solve, "sweep1d": _cmd_sweep, "sweep2d": _cmd_sweep,
             "ed": _cmd_ed, "validate": _cmd_validate}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    try:
        return _COMMANDS[args.command](args)
    except (ConfigError, ParameterError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except JCDickeError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
