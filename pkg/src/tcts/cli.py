"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 invalid input, 3 verification failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

import numpy as np

from . import closed_form as cf
from . import consistency, fock
from .core import StateSpec, ValidationError, spec_from_dict
from .io import csv_table, dumps

EXIT_OK, EXIT_USAGE, EXIT_INVALID, EXIT_VERIFY = 0, 1, 2, 3
DEFAULT_PRECISION = 12
REPORT_PRECISION = 17
BOX = {
    "alphas": "0,1,1+0.5j,2j",
    "theta1s": "0,0.5493061",
    "theta2s": "0,0.3",
    "ts": "0,0.7,2.0",
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass(frozen=True)
class GridSpec:
    min: float
    max: float
    points: int

    def __post_init__(self):
        if not (math.isfinite(self.min) and math.isfinite(self.max)) or not self.min < self.max:
            raise ValidationError("grid", f"need min < max, got min={self.min!r} max={self.max!r}")
        if self.points < 2:
            raise ValidationError("points", f"need at least 2 points, got {self.points}")

    def values(self) -> np.ndarray:
        return np.linspace(self.min, self.max, self.points)


# ---------------------------------------------------------------- config


_STATE_FLAGS = ("alpha_re", "alpha_im", "theta1", "theta2", "temp1", "temp2", "mass", "omega", "hbar", "kb")


def load_state(args: argparse.Namespace) -> StateSpec:
    """Merge ``--spec`` file contents with inline flags; flags win."""
    data: Dict[str, object] = {}
    if args.spec:
        try:
            with open(args.spec, encoding="utf-8") as fh:
                data = json.load(fh)
        except OSError as exc:
            raise ValidationError("spec", f"cannot read {args.spec}: {exc.strerror}") from None
        except json.JSONDecodeError as exc:
            raise ValidationError("spec", f"invalid JSON in {args.spec}: {exc.msg}") from None
        if not isinstance(data, dict):
            raise ValidationError("spec", "must contain a JSON object")
    for i in (1, 2):
        theta, temp = getattr(args, f"theta{i}"), getattr(args, f"temp{i}")
        if theta is not None and temp is not None:
            raise ValidationError(f"theta{i}", f"--theta{i} and --temp{i} are mutually exclusive")
        # an inline value for a channel replaces whatever the file said about it
        if theta is not None or temp is not None:
            data.pop(f"theta{i}", None)
            data.pop(f"temp{i}", None)
    for flag in _STATE_FLAGS:
        value = getattr(args, flag)
        if value is not None:
            data["k_b" if flag == "kb" else flag] = value
    if any(data.get(k) is not None for k in ("mass", "omega", "hbar", "k_b")) and "units" not in data:
        natural = all(float(data.get(k) or 1.0) == 1.0 for k in ("mass", "omega", "hbar", "k_b"))
        data["units"] = "natural" if natural else "custom"
    return spec_from_dict(data)


def _emit(text: str, args: argparse.Namespace) -> None:
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _precision(args, default=DEFAULT_PRECISION) -> int:
    p = default if args.precision is None else args.precision
    if not 1 <= p <= 17:
        raise ValidationError("precision", f"must be between 1 and 17, got {p}")
    return p


def _pairs(items: Optional[List[str]], what: str) -> Dict[str, float]:
    out = {}
    for item in items or []:
        name, sep, value = item.partition("=")
        if not sep:
            raise ValidationError(what, f"expected NAME=VALUE, got {item!r}")
        if name not in consistency.DEFAULT_TOLERANCES:
            raise ValidationError(what, f"unknown quantity {name!r}")
        try:
            out[name] = float(value)
        except ValueError:
            raise ValidationError(what, f"not a number: {value!r}") from None
    return out


def default_cutoff() -> int:
    raw = os.environ.get("TCTS_DEFAULT_CUTOFF")
    if raw is None:
        return fock.DEFAULT_CUTOFF
    try:
        return int(raw)
    except ValueError:
        raise ValidationError("TCTS_DEFAULT_CUTOFF", f"not an integer: {raw!r}") from None


# ---------------------------------------------------------------- commands


def cmd_moments(args) -> int:
    spec = load_state(args)
    digits = _precision(args)
    rep = cf.moments_report(args.t, spec).as_dict()
    if args.format == "json":
        _emit(dumps(rep, digits), args)
    else:
        _emit(csv_table(list(rep), [list(rep.values())], digits), args)
    return EXIT_OK


def _density_rows(spec, obs, args):
    if obs == "n":
        if args.nmax is None or args.nmax < 0:
            raise ValidationError("nmax", f"need --nmax >= 0, got {args.nmax}")
        ns = np.arange(args.nmax + 1)
        return ("n", "probability"), list(zip(ns.tolist(), cf.number_distribution(ns, spec).tolist()))
    if obs == "x":
        mean, var = cf.position_moments(args.t, spec)
    else:
        mean, var = cf.momentum_moments(args.t, spec)
    lo = mean - 6.0 * math.sqrt(var) if args.min is None else args.min
    hi = mean + 6.0 * math.sqrt(var) if args.max is None else args.max
    grid = GridSpec(lo, hi, 101 if args.points is None else args.points).values()
    f = cf.position_density if obs == "x" else cf.momentum_density
    return ("coordinate", "density"), list(zip(grid.tolist(), f(grid, args.t, spec).tolist()))


def cmd_density(args) -> int:
    spec = load_state(args)
    digits = _precision(args)
    header, rows = _density_rows(spec, args.obs, args)
    if args.format == "json":
        _emit(dumps([list(r) for r in rows], digits), args)
    else:
        _emit(csv_table(header, rows, digits), args)
    return EXIT_OK


def cmd_evolve(args) -> int:
    spec = load_state(args)
    digits = _precision(args)
    if not args.t0 < args.t1:
        raise ValidationError("t1", f"need t0 < t1, got t0={args.t0} t1={args.t1}")
    if args.steps < 2:
        raise ValidationError("steps", f"need at least 2 steps, got {args.steps}")
    rows = []
    for t in np.linspace(args.t0, args.t1, args.steps):
        x_mean, x_var = cf.position_moments(t, spec)
        p_mean, p_var = cf.momentum_moments(t, spec)
        rows.append((float(t), x_mean, p_mean, x_var, p_var))
    header = ("t", "x_mean", "p_mean", "x_var", "p_var")
    if args.format == "json":
        _emit(dumps([dict(zip(header, r)) for r in rows], digits), args)
    else:
        _emit(csv_table(header, rows, digits), args)
    return EXIT_OK


def cmd_verify(args) -> int:
    spec = load_state(args)
    digits = _precision(args, REPORT_PRECISION)
    cutoff = default_cutoff() if args.cutoff is None else args.cutoff
    report = consistency.compare_point(
        spec, args.t, cutoff, _pairs(args.tol, "tol"),
        epsilon=args.epsilon, grow_cutoff=args.grow_cutoff, perturb=_pairs(args.inject_fault, "inject-fault"),
    )
    _emit(dumps(report.as_dict(), digits), args)
    for name in report.failures:
        print(f"FAIL {name}", file=sys.stderr)
    return EXIT_OK if report.overall_pass else EXIT_VERIFY


def _parse_list(text: str, what: str, kind=float) -> list:
    try:
        return [kind(item.strip().replace(" ", "")) for item in text.split(",") if item.strip()]
    except ValueError:
        raise ValidationError(what, f"cannot parse list {text!r}") from None


def cmd_sweep(args) -> int:
    base = load_state(args)
    digits = _precision(args, REPORT_PRECISION)
    cutoff = default_cutoff() if args.cutoff is None else args.cutoff
    result = consistency.sweep_compare(
        _parse_list(args.alphas, "alphas", complex),
        _parse_list(args.theta1s, "theta1s"),
        _parse_list(args.theta2s, "theta2s"),
        _parse_list(args.ts, "ts"),
        cutoff,
        _pairs(args.tol, "tol"),
        osc=base.osc,
        workers=args.workers,
        epsilon=args.epsilon,
        grow_cutoff=not args.strict_cutoff,
    )
    _emit(dumps(result.as_dict(), digits), args)
    return EXIT_OK if result.overall_pass else EXIT_VERIFY


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    g = common.add_argument_group("state")
    g.add_argument("--alpha-re", type=float, help="real part of the displacement alpha")
    g.add_argument("--alpha-im", type=float, help="imaginary part of alpha")
    g.add_argument("--theta1", type=float, help="thermal angle applied before the displacement")
    g.add_argument("--theta2", type=float, help="thermal angle applied after the displacement")
    g.add_argument("--temp1", type=float, help="temperature of the first stage (instead of --theta1)")
    g.add_argument("--temp2", type=float, help="temperature of the second stage (instead of --theta2)")
    g.add_argument("--mass", type=float, help="oscillator mass (default 1)")
    g.add_argument("--omega", type=float, help="angular frequency (default 1)")
    g.add_argument("--hbar", type=float, help="reduced Planck constant (default 1)")
    g.add_argument("--kb", type=float, help="Boltzmann constant for temperature input (default 1)")
    g.add_argument("--spec", metavar="FILE", help="JSON state file; inline flags override it")
    o = common.add_argument_group("output")
    o.add_argument("--out", metavar="PATH", help="write to PATH instead of stdout")
    o.add_argument("--format", choices=("csv", "json"), default="csv")
    o.add_argument("--precision", type=int, help="significant digits (default 12; reports 17)")

    parser = _Parser(prog="tcts", description="Thermalized coherent thermal state calculator.")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("moments", parents=[common], help="means, variances, purity at time t")
    p.add_argument("--t", type=float, default=0.0)
    p.set_defaults(func=cmd_moments)

    for name, help_text in (("density", "position, momentum or number distribution"),
                            ("number-dist", "photon-number distribution (density --obs n)")):
        p = sub.add_parser(name, parents=[common], help=help_text)
        if name == "density":
            p.add_argument("--obs", choices=("x", "p", "n"), default="x")
            p.add_argument("--min", type=float, help="grid start (default mean - 6 sigma)")
            p.add_argument("--max", type=float, help="grid end (default mean + 6 sigma)")
            p.add_argument("--points", type=int, help="grid points (default 101)")
            p.add_argument("--t", type=float, default=0.0)
        else:
            p.set_defaults(obs="n", min=None, max=None, points=None, t=0.0)
        p.add_argument("--nmax", type=int, help="largest photon number for --obs n")
        p.set_defaults(func=cmd_density)

    p = sub.add_parser("evolve", parents=[common], help="mean and variance trajectories")
    p.add_argument("--t0", type=float, default=0.0)
    p.add_argument("--t1", type=float, default=2.0 * math.pi)
    p.add_argument("--steps", type=int, default=65, help="number of time samples including both ends")
    p.set_defaults(func=cmd_evolve)

    def verify_flags(p):
        p.add_argument("--cutoff", type=int, help="Fock levels per mode (default $TCTS_DEFAULT_CUTOFF or 64)")
        p.add_argument("--epsilon", type=float, default=fock.DEFAULT_EPSILON, help="allowed tail mass")
        p.add_argument("--tol", action="append", metavar="NAME=VALUE", help="override one tolerance")

    p = sub.add_parser("verify", parents=[common], help="compare closed forms with the Fock oracle")
    p.add_argument("--t", type=float, default=0.0)
    verify_flags(p)
    p.add_argument("--grow-cutoff", action="store_true", help="raise the cutoff until the tail fits")
    p.add_argument("--inject-fault", action="append", metavar="NAME=DELTA",
                   help="self-test: add DELTA to one closed-form quantity")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sweep", parents=[common], help="verify over a parameter grid")
    p.add_argument("--alphas", default=BOX["alphas"], help="comma list of complex alphas, e.g. 1+0.5j")
    p.add_argument("--theta1s", default=BOX["theta1s"])
    p.add_argument("--theta2s", default=BOX["theta2s"])
    p.add_argument("--ts", default=BOX["ts"])
    verify_flags(p)
    p.add_argument("--strict-cutoff", action="store_true", help="fail a point instead of raising its cutoff")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
