"""Command-line front end.

    stokes-squeeze analyze  --state fock5.json
    stokes-squeeze scan     --state fock5.json --grid 100x100 --out scan.csv
    stokes-squeeze cone     --state qubit.json
    stokes-squeeze simulate --state fock5.json --theta 45deg --phi 0 --shots 100000 --seed 7 --out sim.json
    stokes-squeeze witness  --state mixture.json --grid 40x40

Exit codes: 0 success, 2 input error, 3 numerical-safety rejection.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .criteria import (
    DEFAULT_TOLERANCE,
    mandel_q,
    scan,
    scan_arrays,
    scan_grid,
    squeezing_cone,
    squeezing_function,
)
from .errors import NumericalSafetyError, SpecError
from .measurement import (
    estimate_from_table,
    estimate_squeezing,
    joint_distribution,
    rotated_basis,
    sample_counts,
)
from .polarization import direction_from_angles, parse_angle
from .states import POLARIZED_TOL, build, parse_state_spec, verify_polarized
from .stokes import stokes_moments
from .witness import nonclassicality_flag, p_functional, parse_coherent_mixture, witness_value

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3
SCAN_COLUMNS = ("theta", "phi", "cos_big_phi", "mean", "variance", "transverse_bound", "f", "squeezed")


def fmt_float(x: float) -> str:
    return format(x, ".17g")


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON with floats at 17 significant digits; NaN and infinities become null."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        if all(isinstance(v, (int, float, np.number)) and not isinstance(v, bool) for v in seq):
            return "[" + ", ".join(dumps(v) for v in seq) + "]"
        return "[\n" + ",\n".join(pad + dumps(v, indent, _level + 1) for v in seq) + "\n" + end + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return fmt_float(x) if math.isfinite(x) else "null"
    if obj is None:
        return "null"
    return json.dumps(str(obj))


def _parse_grid(text: str) -> tuple[int, int]:
    try:
        r, c = (int(v) for v in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid must look like 50x50, got {text!r}") from None
    if r < 2 or c < 2:
        raise argparse.ArgumentTypeError("grid must be at least 2x2")
    return r, c


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _seed(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("seed must be an unsigned integer")
    return v


def _read_json(path: str):
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise SpecError(f"cannot read {path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


def _load_spec(args):
    spec = parse_state_spec(_read_json(args.state))
    if args.cutoff is not None:
        spec = replace(spec, cutoff=args.cutoff)
    return spec


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _direction_dict(theta: float, phi: float) -> dict:
    return {"theta": theta, "phi": phi, "n": direction_from_angles(theta, phi).as_array().tolist()}


def cmd_analyze(args) -> dict:
    spec = _load_spec(args)
    ens = build(spec)
    mom = stokes_moments(ens)
    m = mom.mean_direction()
    try:
        q = mandel_q(ens, spec.eps)
        q_error = None
    except NumericalSafetyError as exc:
        q, q_error = None, str(exc)
    residual = verify_polarized(ens, spec.eps)
    out = {
        "schema": 1,
        "command": "analyze",
        "state": spec.to_dict(),
        "cutoff": ens.cutoff,
        "stokes": {"s0": mom.s0, "s": mom.s.tolist(), "s2": mom.s2.tolist(), "anti": mom.anti.tolist()},
        "poincare_m": None if m is None else m.as_array().tolist(),
        "degree_of_polarization": mom.degree_of_polarization(),
        "mandel_q": q,
        "polarized_residual": residual,
        "polarized": residual <= POLARIZED_TOL,
    }
    if q_error:
        out["mandel_q_error"] = q_error
    return out


def cmd_scan(args) -> str:
    ens = build(_load_spec(args))
    cols = scan_arrays(ens, args.grid, args.tolerance)
    if args.format == "json":
        rows = [
            {"theta": r.theta, "phi": r.phi, "n": list(r.n), "cos_big_phi": r.cos_big_phi, "mean": r.mean,
             "variance": r.variance, "transverse_bound": r.transverse_bound, "f": r.f,
             "squeezed": r.squeezed, "chirkin": r.chirkin, "heersink": r.heersink, "luis": r.luis,
             "luis_n_perp": list(r.luis_n_perp)}
            for r in scan(ens, args.grid, args.tolerance)
        ]
        return dumps({"schema": 1, "command": "scan", "grid": list(args.grid), "rows": rows}) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SCAN_COLUMNS)
    data = zip(*(cols[k] for k in SCAN_COLUMNS[:-1]), cols["squeezed"])
    for *vals, sq in data:
        writer.writerow([fmt_float(v) for v in vals] + [int(sq)])
    return buf.getvalue()


def cmd_cone(args) -> dict:
    spec = _load_spec(args)
    ens = build(spec)
    cone = squeezing_cone(mandel_q(ens, spec.eps))
    return {"schema": 1, "command": "cone", **cone.to_dict()}


def cmd_simulate(args) -> dict:
    if args.shots < 2:
        raise SpecError("simulate needs --shots >= 2")
    ens = build(_load_spec(args))
    theta, phi = parse_angle(args.theta), parse_angle(args.phi)
    table = joint_distribution(ens, rotated_basis(theta, phi))
    rec = sample_counts(table, args.shots, args.seed, theta, phi)
    est = estimate_squeezing(rec)
    out = {
        "schema": 1,
        "command": "simulate",
        "direction": _direction_dict(theta, phi),
        "shots": args.shots,
        "seed": args.seed,
        "estimate": est.to_dict(),
        "exact_estimator_limit": estimate_from_table(table),
        "squeezing_function": squeezing_function(ens, direction_from_angles(theta, phi)),
    }
    counts = args.counts
    if counts is None and args.out is not None:
        counts = str(Path(args.out).with_suffix("")) + ".counts.csv"
    if counts is not None:
        csv_path, side = rec.write(counts)
        out["counts_csv"] = str(csv_path)
        out["counts_sidecar"] = str(side)
    return out


def cmd_witness(args) -> dict:
    obj = _read_json(args.state)
    if isinstance(obj, dict) and "components" in obj:
        mix = parse_coherent_mixture(obj)
        theta, phi = scan_grid(*args.grid)
        dirs = [direction_from_angles(t, p) for t, p in zip(theta, phi)]
        wv = np.array([witness_value(mix, n) for n in dirs])
        pf = np.array([p_functional(mix, n) for n in dirs])
        i = int(np.argmin(wv))
        return {
            "schema": 1,
            "command": "witness",
            "input": "coherent-mixture",
            "min_witness_value": float(wv.min()),
            "min_witness_direction": _direction_dict(float(theta[i]), float(phi[i])),
            "min_p_functional": float(pf.min()),
            "nonnegative": bool(wv.min() >= -1e-12),
            "nonclassical": False,
        }
    spec = parse_state_spec(obj)
    if args.cutoff is not None:
        spec = replace(spec, cutoff=args.cutoff)
    ens = build(spec)
    reports = scan(ens, args.grid, args.tolerance)
    flag, best = nonclassicality_flag(ens, reports)
    return {
        "schema": 1,
        "command": "witness",
        "input": "state",
        "nonclassical": flag,
        "witness_direction": None if best is None else {**_direction_dict(best.theta, best.phi), "f": best.f},
    }


COMMANDS = {"analyze": cmd_analyze, "scan": cmd_scan, "cone": cmd_cone, "simulate": cmd_simulate,
            "witness": cmd_witness}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--state", required=True, help="state spec JSON (or coherent mixture JSON for witness)")
    common.add_argument("--grid", type=_parse_grid, default=(50, 50), help="theta x phi scan grid, e.g. 100x100")
    common.add_argument("--cutoff", type=int, default=None, help="override the Fock cutoff")
    common.add_argument("--tolerance", type=float, default=DEFAULT_TOLERANCE,
                        help="relative margin f must fall below zero to count as squeezed")
    common.add_argument("--seed", type=_seed, default=0)
    common.add_argument("--shots", type=_positive_int, default=10000)
    common.add_argument("--out", default=None, help="output file (default: stdout)")
    common.add_argument("--format", choices=("json", "csv"), default=None)

    parser = argparse.ArgumentParser(prog="stokes-squeeze", description=__doc__.splitlines()[0] if __doc__ else None)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, parents=[common])
        if name == "simulate":
            p.add_argument("--theta", default="0", help="direction polar angle (radians, or suffix deg)")
            p.add_argument("--phi", default="0", help="direction azimuth (radians, or suffix deg)")
            p.add_argument("--counts", default=None, help="CSV path for the raw counts")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.format is None:
        args.format = "csv" if args.command == "scan" else "json"
    if args.format == "csv" and args.command != "scan":
        parser.error(f"{args.command} only writes json")
    try:
        result = COMMANDS[args.command](args)
    except NumericalSafetyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (SpecError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    text = result if isinstance(result, str) else dumps(result) + "\n"
    try:
        _emit(text, args.out)
    except OSError as exc:
        print(f"error: cannot write {args.out}: {exc.strerror}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
