"""Command-line front end.

Every command writes CSV or JSON to ``--out`` (default stdout). The
``separable`` command encodes its verdict in the exit status: 0 separable,
1 entangled, 2 inconclusive, 3 usage or input error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from typing import Sequence

import numpy as np

from . import compare, model, separability
from .fock import StateVector, phase_distance

EXIT_SEPARABLE = 0
EXIT_ENTANGLED = 1
EXIT_INCONCLUSIVE = 2
EXIT_USAGE = 3

EXIT_CODES = {
    separability.Status.SEPARABLE: EXIT_SEPARABLE,
    separability.Status.ENTANGLED: EXIT_ENTANGLED,
    separability.Status.INCONCLUSIVE: EXIT_INCONCLUSIVE,
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def fmt(x: float) -> str:
    return format(float(x) + 0.0, ".17g")


def _csv(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def _json_rows(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    return json.dumps([dict(zip(header, row)) for row in rows], indent=1) + "\n"


def _table(args, header, rows) -> str:
    return _json_rows(header, rows) if args.format == "json" else _csv(header, rows)


def _params(args) -> model.JCParams:
    try:
        return model.JCParams(args.omega_f, args.omega_b, complex(args.kappa_re, args.kappa_im))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("QUASISEP_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError as exc:
        raise UsageError(f"QUASISEP_SEED is not an integer: {env!r}") from exc


def cmd_bands(args) -> tuple[str, int]:
    if args.steps < 1 or args.ratio_max < args.ratio_min:
        raise UsageError("empty kappa/delta range")
    delta = args.omega_f - args.omega_b
    if delta == 0:
        raise UsageError("the kappa/delta parameterization needs nonzero detuning")
    ratios = np.linspace(args.ratio_min, args.ratio_max, args.steps)
    phase = complex(args.kappa_re, args.kappa_im)
    phase = phase / abs(phase) if phase != 0 else 1.0
    rows = []
    for r in ratios:
        params = model.JCParams(args.omega_f, args.omega_b, r * abs(delta) * phase)
        bands = model.energy_bands(params)
        rows.append((float(r), bands.e_plus / delta, bands.e_minus / delta))
    header = ["kappa_over_delta", "E_plus_over_hbar_delta", "E_minus_over_hbar_delta"]
    return _table(args, header, rows), 0


NOON_HEADER = ["kind", "t", "psi_0", "psi_N", "fb_0N_re", "fb_0N_im", "fb_1N_re", "fb_1N_im",
               "status", "m", "n"]


def noon_rows(N: int, samples: int, params: model.JCParams, tol: float) -> list[tuple]:
    """Sampled circle points (psi_0, psi_N) = (cos t, sin t), then the exact products."""
    cutoff = model.default_cutoff(N)
    ref_n0 = model.product_state_pm(N, 0, params, cutoff)
    ref_0n = model.product_state_pm(0, N, params, cutoff)

    def row(kind, t, psi_0, psi_n):
        state = (psi_0 * ref_n0 + psi_n * ref_0n).normalize()
        verdict = separability.separability_fixed_N(state, params, tol)
        w = verdict.witness or {"m": "", "n": ""}
        a, c = state[(0, N)], state[(1, N - 1)]
        return (kind, float(t), float(psi_0), float(psi_n), a.real, a.imag, c.real, c.imag,
                verdict.status.value, w["m"], w["n"])

    rows = []
    for k in range(samples):
        t = 2 * math.pi * k / samples
        rows.append(row("sample", t, math.cos(t), math.sin(t)))
    for m in range(N, -1, -1):
        n = N - m
        if m == 0:
            psi_0, psi_n = 0.0, 1.0
        elif n == 0:
            psi_0, psi_n = 1.0, 0.0
        else:
            psi_0, psi_n = model.noon_coefficients(m, n, params)
        rows.append(row("exact", math.atan2(psi_n, psi_0), psi_0, psi_n))
    return rows


def cmd_noon_circle(args) -> tuple[str, int]:
    if args.n < 1:
        raise UsageError("N must be >= 1")
    if args.samples < 0:
        raise UsageError("samples must be nonnegative")
    rows = noon_rows(args.n, args.samples, _params(args), args.tol)
    return _table(args, NOON_HEADER, rows), 0


def cmd_expand(args) -> tuple[str, int]:
    kind = compare.Picture(args.picture)
    try:
        if kind is compare.Picture.FB_QUASI:
            state = model.product_state_pm(args.m, args.n, _params(args), args.cutoff)
        else:
            state = compare.pm_number_state(kind, args.m, args.n, args.cutoff)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    rows = compare.expansion_rows(kind, args.m, args.n, state)
    header = ["picture", "m", "n", "ket", "re", "im"]
    return _table(args, header, [tuple(r[h] for h in header) for r in rows]), 0


def _load_state(path: str) -> StateVector:
    try:
        with open(path) as fh:
            return StateVector.from_dict(json.load(fh))
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"cannot read state file {path}: {exc}") from exc


def _match_eigenstate(state: StateVector, params: model.JCParams, tol: float):
    N = separability._sector_of(state)
    target = state.normalize()
    for branch in model.BRANCHES:
        eig = model.eigenstate(N, branch, params, state.modes[1].cutoff)
        if phase_distance(target, eig) <= max(tol, 1e-9) * 10:
            return N, branch
    raise UsageError("state is not a dressed eigenstate for these parameters")


def cmd_separable(args) -> tuple[str, int]:
    state = _load_state(args.state)
    if state.is_zero:
        raise UsageError("zero state")
    params = _params(args)
    try:
        if args.method == "fixed_n":
            verdict = separability.separability_fixed_N(state, params, args.tol)
        elif args.method == "condition":
            N, branch = _match_eigenstate(state, params, args.tol)
            verdict = separability.eigenstate_verdict(N, branch, params, args.tol)
        else:
            verdict = separability.separability_bilinear(
                state, args.left_degree, args.right_degree, params, tol=args.tol,
                restarts=args.restarts, seed=_seed(args))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    return verdict.to_json() + "\n", EXIT_CODES[verdict.status]


def cmd_eigencheck(args) -> tuple[str, int]:
    if args.n_min < 1 or args.n_max < args.n_min:
        raise UsageError("need 1 <= n-min <= n-max")
    params = _params(args)
    rows = []
    for N in range(args.n_min, args.n_max + 1):
        for branch in model.BRANCHES:
            pairs = separability.eigenstate_factorization_conditions(N, params, branch, args.tol)
            m, n = pairs[0] if pairs else ("", "")
            rows.append((N, branch, "true" if pairs else "false", m, n))
    return _table(args, ["N", "branch", "separable", "m", "n"], rows), 0


def cmd_state(args) -> tuple[str, int]:
    params = _params(args)
    try:
        if args.kind == "product":
            state = model.product_state_pm(args.m, args.n, params, args.cutoff)
        else:
            state = model.eigenstate(args.n, args.branch, params, args.cutoff)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    return json.dumps(state.to_dict(), indent=1) + "\n", 0


def _common() -> argparse.ArgumentParser:
    # a fresh parent per subcommand: set_defaults mutates the shared actions
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--omega-f", type=float, default=1.0)
    common.add_argument("--omega-b", type=float, default=1.0)
    common.add_argument("--kappa-re", type=float, default=1.0)
    common.add_argument("--kappa-im", type=float, default=0.0)
    common.add_argument("--cutoff", type=int, default=None)
    common.add_argument("--tol", type=float, default=None)
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--restarts", type=int, default=separability.DEFAULT_RESTARTS)
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--out", default=None, help="output path (default: stdout)")
    return common


def build_parser() -> argparse.ArgumentParser:

    parser = _Parser(prog="quasisep", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("bands", parents=[_common()], help="energy bands vs |kappa|/delta")
    p.add_argument("--ratio-min", type=float, default=0.0)
    p.add_argument("--ratio-max", type=float, default=3.0)
    p.add_argument("--steps", type=int, default=61)
    p.set_defaults(func=cmd_bands, omega_f=2.0, omega_b=1.0)

    p = sub.add_parser("noon-circle", parents=[_common()], help="NOON states on the real circle")
    p.add_argument("--n", type=int, default=5)
    p.add_argument("--samples", type=int, default=360)
    p.set_defaults(func=cmd_noon_circle, tol=separability.RATIO_TOL)

    p = sub.add_parser("expand", parents=[_common()], help="pm number state expansion")
    p.add_argument("picture", choices=[k.value for k in compare.Picture])
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.set_defaults(func=cmd_expand)

    p = sub.add_parser("separable", parents=[_common()], help="separability verdict for a state file")
    p.add_argument("state")
    p.add_argument("--method", choices=("fixed_n", "condition", "bilinear"), default="fixed_n")
    p.add_argument("--left-degree", type=int, default=None)
    p.add_argument("--right-degree", type=int, default=None)
    p.set_defaults(func=cmd_separable, format="json")

    p = sub.add_parser("eigencheck", parents=[_common()], help="eigenstate factorization table")
    p.add_argument("--n-min", type=int, default=1)
    p.add_argument("--n-max", type=int, default=20)
    p.set_defaults(func=cmd_eigencheck, tol=separability.RATIO_TOL)

    p = sub.add_parser("state", parents=[_common()], help="write a product or eigenstate file")
    p.add_argument("kind", choices=("product", "eigenstate"))
    p.add_argument("--m", type=int, default=0)
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--branch", choices=model.BRANCHES, default=model.PLUS)
    p.set_defaults(func=cmd_state, format="json")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # --help exits 0, parse errors exit EXIT_USAGE
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    if args.tol is None:
        args.tol = (separability.BILINEAR_TOL if getattr(args, "method", None) == "bilinear"
                    else separability.RATIO_TOL)
    try:
        text, code = args.func(args)
    except UsageError as exc:
        print(f"quasisep: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
