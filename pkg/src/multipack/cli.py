"""Command-line interface.

Exit codes: 0 success or verified, 1 verification failure, 2 input error.
Reports are flat JSON objects with sorted keys, so a fixed ``--seed``
gives byte-identical output.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from decimal import Decimal, InvalidOperation

from .bounds import BOUNDED, UNBOUNDED, BoundName, DomainError, eval_bound
from .codefile import CodeFileError, curve_table, format_code, read_code, write_code, write_curve_csv
from .covering import cap_code_identity, plotkin_cap_check
from .ensembles import EnsembleSpec, sample, sample_cap
from .expurgation import DEFAULT_M_CAP, choose_eps, construct, initial_size
from .geometry import GeometryError, PackingParams, verify_packing
from .montecarlo import gaussian_tail_exact, mc_tail

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2

_NOTIONS = {"cheb": "chebyshev", "avg": "average-radius"}
_ENSEMBLES = {"gaussian": "gaussian", "sphere": "sphere", "ball": "ball", "trunc-gaussian": "truncated-gaussian"}

log = logging.getLogger("multipack")


class InputError(Exception):
    pass


def parse_grid(text: str) -> list:
    """``lo:hi:step`` to the inclusive grid lo, lo + step, ..., computed in
    decimal so that e.g. 0.01:0.80:0.01 ends exactly at 0.8."""
    try:
        lo, hi, step = (Decimal(t) for t in text.split(":"))
    except (ValueError, InvalidOperation):
        raise InputError(f"grid must be lo:hi:step, got {text!r}") from None
    if step <= 0 or hi < lo:
        raise InputError("grid needs step > 0 and hi >= lo")
    count = int((hi - lo) / step) + 1
    if count > 10**7:
        raise InputError("grid too long")
    return [float(lo + k * step) for k in range(count)]


def parse_rate(text: str, L: int, x: float) -> float:
    """A rate in nats, either a number or ``<factor>*<bound name>`` with the
    bound evaluated at (L, x)."""
    if "*" in text:
        f, name = text.split("*", 1)
        try:
            return float(f) * eval_bound(BoundName(name.strip()), L, x)
        except ValueError as e:
            raise InputError(f"bad rate {text!r}: {e}") from None
    try:
        return float(text)
    except ValueError:
        raise InputError(f"bad rate {text!r}") from None


def _dump(doc: dict, out=None) -> None:
    out = out or sys.stdout
    out.write(json.dumps(doc, sort_keys=True, allow_nan=False) + "\n")


def _finite(v):
    return v if v is not None and math.isfinite(v) else None


def _spec(args, eps=None) -> EnsembleSpec:
    if eps is None:
        if args.eps == "auto":
            raise InputError("--eps auto is only meaningful for construct")
        try:
            eps = float(args.eps)
        except ValueError:
            raise InputError(f"bad --eps {args.eps!r}") from None
    return EnsembleSpec(
        _ENSEMBLES[args.ensemble], args.n, args.P, args.seed,
        shell_delta=args.delta if args.ensemble == "trunc-gaussian" else None,
        eps=eps,
    )


def _params(args, n) -> PackingParams:
    return PackingParams(n, args.L, args.N, args.P, _NOTIONS[args.notion])


# --------------------------------------------------------------------------
# Commands


def _check_ordering(names, rows):
    """Lower bounds below ub_eb and the spherical pair in order, before writing."""
    col = {n: i + 1 for i, n in enumerate(names)}
    for row in rows:
        def v(name):
            i = col.get(name)
            return None if i is None else row[i]
        ub = v(BoundName.ub_eb) if BoundName.ub_eb in col else v(BoundName.ub_eb_unbdd)
        for name in names:
            lo = v(name)
            if name.value.startswith("lb_") and lo is not None and ub is not None and lo > ub + 1e-12 * max(1, abs(ub)):
                raise ArithmeticError(f"{name} exceeds the upper bound at x={row[0]}")
        a, b = v(BoundName.lb_spherical), v(BoundName.lb_spherical_improved)
        if a is not None and b is not None and a > b + 1e-12 * max(1, abs(b)):
            raise ArithmeticError(f"lb_spherical exceeds lb_spherical_improved at x={row[0]}")


def cmd_bounds(args) -> int:
    names = BOUNDED if args.family == "bounded" else UNBOUNDED
    grid = parse_grid(args.grid)
    rows = curve_table(names, args.L, grid, args.units)
    _check_ordering(names, rows)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as f:
            write_curve_csv(names, rows, f)
    else:
        write_curve_csv(names, rows, sys.stdout)
    return EXIT_OK


def cmd_construct(args) -> int:
    x = args.N / args.P
    rate = parse_rate(args.rate, args.L, x)
    params = _params(args, args.n)
    eps = None
    if args.eps == "auto":
        eps = choose_eps(args.n, args.L, args.P, args.N, initial_size(args.n, rate, args.M_cap))
    spec = _spec(args, eps)
    code, report = construct(spec, params, rate, args.M_cap, args.workers)
    doc = report.as_dict()
    doc.update(eps=spec.eps, ensemble=_ENSEMBLES[args.ensemble], L=args.L, N=args.N, P=args.P, notion=params.notion,
               seed=args.seed, target_rate_nats=rate, units=args.units)
    if args.units == "bits" and doc["rate_nats"] is not None:
        doc["rate_bits"] = doc["rate_nats"] / math.log(2.0)
    if args.out:
        if code is not None:
            write_code(code, args.out)
        _dump(doc)
    else:
        if code is not None:
            sys.stdout.write(format_code(code))
        _dump(doc, sys.stderr)
    return EXIT_OK if report.verified else EXIT_FAIL


def cmd_verify(args) -> int:
    code = read_code(args.code)
    P = args.P if args.P is not None else code.power_limit
    params = PackingParams(code.n, args.L, args.N, P, _NOTIONS[args.notion])
    verdict = verify_packing(code, params, args.workers)
    doc = {"ok": verdict.ok, "n": code.n, "M": code.M, "L": args.L, "nN": params.nN, "notion": params.notion,
           "norm_violations": list(verdict.norm_violations)}
    w = verdict.witness
    if w is not None:
        doc.update(witness_indices=list(w.indices), witness_radius_sq=w.radius_sq,
                   witness_radius_sq_per_dim=w.radius_sq / code.n,
                   witness_center=[float(c) for c in w.center])
    _dump(doc)
    return EXIT_OK if verdict.ok else EXIT_FAIL


def cmd_tail(args) -> int:
    nN = args.n * args.N
    if args.exact:
        if args.ensemble != "gaussian":
            raise InputError("--exact is only available for the gaussian ensemble")
        p = gaussian_tail_exact(args.n, args.L, args.P, args.N)
        doc = {"ensemble": "gaussian", "n": args.n, "L": args.L, "nN": nN, "exact": True, "p": p,
               "neg_log_rate": _finite(-math.log(p) / args.n) if p > 0 else None}
    else:
        est = mc_tail(_spec(args), args.L, nN, args.samples, args.seed, args.workers)
        doc = est.as_dict()
        doc.update(exact=False, seed=args.seed)
    _dump(doc)
    return EXIT_OK


def cmd_identity(args) -> int:
    if args.code:
        code = read_code(args.code)
    elif args.alpha is not None:
        code = sample_cap(args.n, args.P, args.alpha, args.M, args.seed)
    else:
        code = sample(EnsembleSpec("sphere", args.n, args.P, args.seed), args.M)
    lhs, rhs = cap_code_identity(code, args.L, args.P if args.code is None else None)
    ok = abs(lhs - rhs) <= 1e-9 * (1 + abs(rhs))
    doc = {"n": code.n, "M": code.M, "L": args.L, "lhs": lhs, "rhs": rhs, "abs_diff": abs(lhs - rhs),
           "identity_holds": ok}
    if args.alpha is not None:
        m, bound, pk = plotkin_cap_check(code, args.L, args.alpha, args.P if args.code is None else None,
                                         args.workers)
        doc.update(alpha=args.alpha, min_avg_sq_radius=m, plotkin_bound=bound, plotkin_holds=pk)
        ok = ok and pk
    _dump(doc)
    return EXIT_OK if ok else EXIT_FAIL


# --------------------------------------------------------------------------
# Parser


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="multipack", description="Multiple packings: construct, verify, analyze.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, *, n=True, code_params=True):
        if n:
            sp.add_argument("--n", type=_positive_int, required=True, help="dimension")
        sp.add_argument("--L", type=int, required=True, help="list size plus one")
        if code_params:
            sp.add_argument("--N", type=float, required=True, help="noise power per dimension")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--workers", type=_positive_int, default=1)

    def ensemble(sp):
        sp.add_argument("--ensemble", choices=sorted(_ENSEMBLES), default="gaussian")
        sp.add_argument("--P", type=float, default=1.0, help="power per dimension")
        sp.add_argument("--delta", type=float, default=None, help="shell width of trunc-gaussian")
        sp.add_argument("--eps", default="0", help="gaussian variance is P/(1+eps); 'auto' in construct")

    b = sub.add_parser("bounds", help="emit bound curves as CSV")
    b.add_argument("--L", type=int, required=True)
    b.add_argument("--family", choices=("bounded", "unbounded"), default="bounded")
    b.add_argument("--grid", required=True, help="lo:hi:step over N/P (bounded) or N (unbounded)")
    b.add_argument("--units", choices=("nats", "bits"), default="nats")
    b.add_argument("--out")
    b.add_argument("--seed", type=int, default=0, help="accepted for uniformity; unused")
    b.set_defaults(func=cmd_bounds)

    c = sub.add_parser("construct", help="random code with expurgation")
    common(c)
    ensemble(c)
    c.add_argument("--rate", required=True, help="nats, or <factor>*<bound name>")
    c.add_argument("--notion", choices=sorted(_NOTIONS), default="cheb")
    c.add_argument("--M-cap", dest="M_cap", type=_positive_int, default=DEFAULT_M_CAP)
    c.add_argument("--units", choices=("nats", "bits"), default="nats")
    c.add_argument("--out")
    c.set_defaults(func=cmd_construct)

    v = sub.add_parser("verify", help="check a code file is a multiple packing")
    v.add_argument("code")
    common(v, n=False)
    v.add_argument("--P", type=float, default=None)
    v.add_argument("--notion", choices=sorted(_NOTIONS), default="cheb")
    v.set_defaults(func=cmd_verify)

    t = sub.add_parser("tail", help="bad-list probability")
    common(t)
    ensemble(t)
    t.add_argument("--samples", type=_positive_int, default=10**5)
    t.add_argument("--exact", action="store_true", help="chi-square formula (gaussian only)")
    t.set_defaults(func=cmd_tail)

    i = sub.add_parser("identity", help="double-counting identity and cap Plotkin check")
    i.add_argument("code", nargs="?")
    common(i, n=False, code_params=False)
    i.add_argument("--n", type=_positive_int, default=8)
    i.add_argument("--M", type=_positive_int, default=32)
    i.add_argument("--P", type=float, default=1.0)
    i.add_argument("--alpha", type=float, default=None, help="sample on (and check) a cap of this angle")
    i.set_defaults(func=cmd_identity)
    return p


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_INPUT if e.code else EXIT_OK
    try:
        return args.func(args)
    except (InputError, CodeFileError, GeometryError, DomainError, OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
