"""Command-line interface.

Single records are printed as JSON, sweeps as CSV with a header row. Exit
status is 0 on success, 1 on a usage or I/O error and 2 when a checked
bound is violated.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

from . import analysis, mixsim, spectra
from .chain import ShuffleParams, build_matrix
from .gamma import gamma_min

EXIT_OK, EXIT_USAGE, EXIT_FAIL = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _params(n: int, k: int) -> ShuffleParams:
    try:
        return ShuffleParams(n, k)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _num(x):
    if x is None:
        return ""
    return x


def _write_csv(args, header, rows, comments=()):
    buf = io.StringIO()
    for line in comments:
        buf.write(f"# {line}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_num(v) for v in row])
    _emit(args, buf.getvalue())


def _emit(args, text: str):
    out = getattr(args, "out", None)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _eig_json(e: spectra.PolarEigen) -> dict:
    return {"re": e.lam.real, "im": e.lam.imag, "modulus": e.modulus, "eps": e.eps,
            "a": e.a, "b": e.b, "residual": e.residual, "seed_family": e.seed_family}


def run_gap(args) -> int:
    params = _params(args.n, args.k)
    if args.method == "oracle" and params.n > spectra.ORACLE_MAX_N:
        raise UsageError(f"--method oracle needs n <= {spectra.ORACLE_MAX_N}")
    gm = gamma_min(params)
    rec = {"n": params.n, "k": params.k, "gamma": gm.value, "m_star": gm.m_star,
           "residue": gm.r, "numerator": gm.numerator, "search_bound": gm.search_bound}
    ref = None
    if args.method in ("newton", "all"):
        res = spectra.spectral_gap(params, use_oracle_fallback=False)
        rec["newton"] = {"gap": res.gap, "eps": res.eps, "complete": res.complete,
                         "witness": _eig_json(res.witness),
                         "failed_seeds": len(res.failures)}
        ref = res.gap
    if args.method in ("oracle", "all") and params.n <= spectra.ORACLE_MAX_N:
        res = spectra.gap_from_spectrum(spectra.full_spectrum_oracle(params).eigs, "oracle")
        rec["oracle"] = {"gap": res.gap, "eps": res.eps, "witness": _eig_json(res.witness)}
        if ref is None:
            ref = res.gap
    if ref is not None:
        rec["ratio"] = ref / gm.value
    _emit(args, json.dumps(rec, indent=2) + "\n")
    return EXIT_OK


def run_scan(args) -> int:
    if args.n < 2:
        raise UsageError("--n must be >= 2")
    if args.stride < 1:
        raise UsageError("--stride must be >= 1")
    recs = analysis.scan_k(args.n, with_numeric=args.numeric, sample_stride=args.stride)
    _write_csv(args, ["n", "k", "m_star", "gamma", "relaxation", "gap_numeric", "ratio"],
               [(r.n, r.k, r.m_star, r.gamma, r.relaxation, r.gap_numeric, r.ratio) for r in recs])
    return EXIT_OK


def run_eigs(args) -> int:
    params = _params(args.n, args.k)
    if args.matrix:
        P = build_matrix(params)
        _write_csv(args, [f"p{j}" for j in range(1, params.n + 1)], P.tolist())
        return EXIT_OK
    method = args.method or ("oracle" if params.n <= spectra.ORACLE_MAX_N else "newton")
    if method == "oracle":
        if params.n > spectra.ORACLE_MAX_N:
            raise UsageError(f"--method oracle needs n <= {spectra.ORACLE_MAX_N}")
        eigs = spectra.full_spectrum_oracle(params).eigs
    else:
        spec = spectra.newton_spectrum(params, circle_cut=False)
        eigs = spec.eigs
        if len(eigs) != params.n:
            print(f"warning: newton found {len(eigs)} of {params.n} eigenvalues", file=sys.stderr)
    _write_csv(args, ["re", "im", "modulus", "eps", "a", "b", "residual", "seed_family"],
               [(e.lam.real, e.lam.imag, e.modulus, e.eps, e.a, e.b, e.residual, e.seed_family)
                for e in eigs])
    return EXIT_OK


def run_bells(args) -> int:
    try:
        point = analysis.RationalPoint(args.p, args.q)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.n < 2 or args.halfwidth < 0:
        raise UsageError("need --n >= 2 and --halfwidth >= 0")
    rows = analysis.bell_rows(args.n, point, args.halfwidth)
    _write_csv(args, ["k", "gamma", "prediction", "ratio"],
               [(r.k, r.gamma, r.prediction, r.ratio) for r in rows])
    return EXIT_OK


def run_envelope(args) -> int:
    if args.n < 2:
        raise UsageError("--n must be >= 2")
    rep = analysis.envelope_report(args.n)
    _write_csv(args, ["k", "relaxation", "envelope"],
               zip(rep.ks.tolist(), rep.relaxation.tolist(), rep.envelope.tolist()))
    print(f"max_k gamma*n^2/sqrt(k) = {rep.max_scaled!r} at k = {rep.argmax_k}; "
          f"2*pi^2/sqrt(3) = {rep.constant!r} (report only)", file=sys.stderr)
    return EXIT_OK


def run_thm2(args) -> int:
    if args.n < 11:
        raise UsageError("--n must be >= 11")
    rep = analysis.check_thm2_bounds(args.n, tuple(args.delta))
    out = {
        "n": rep.n,
        "upper_violations": rep.upper_violations,
        "lower_violations": rep.lower_violations,
        "lower_attained": rep.lower_attained,
        "delta_counts": [{"delta": d, "count": c, "bound": b} for d, (c, b) in rep.delta_counts.items()],
        "ok": rep.ok,
    }
    _emit(args, json.dumps(out, indent=2) + "\n")
    return EXIT_OK if rep.ok else EXIT_FAIL


def run_thm5(args) -> int:
    if not 0 < args.alpha < 1:
        raise UsageError("--alpha must lie in (0, 1)")
    qs = args.q if args.q else analysis.fibonacci(13)
    rows = analysis.thm5_sequence(args.alpha, qs)
    _write_csv(args, ["q", "n", "k", "m_star", "gamma", "product", "bound", "ok"],
               [(r.q, r.n, r.k, r.m_star, r.gamma, r.product, r.bound, int(r.ok)) for r in rows])
    return EXIT_OK if all(r.ok for r in rows) else EXIT_FAIL


def run_simulate(args) -> int:
    params = _params(args.n, args.k)
    try:
        cfg = mixsim.SimConfig(params, args.start, args.trials, args.steps, args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.every < 1:
        raise UsageError("--every must be >= 1")
    cps = list(range(0, args.steps + 1, args.every))
    if cps[-1] != args.steps:
        cps.append(args.steps)
    comments = [f"mode={args.mode}", f"n={params.n}", f"k={params.k}", f"start={args.start}",
                f"trials={args.trials}", f"rng={mixsim.RNG_NAME}", f"rng_seed={args.seed}"]
    if args.mode == "exact":
        tv = mixsim.tv_exact(params, args.start, args.steps)
        _write_csv(args, ["t", "tv"], [(t, float(tv[t])) for t in cps],
                   comments[:4] + [f"rng_seed={args.seed}"])
    elif args.mode == "card":
        counts = mixsim.simulate_card(cfg, cps)
        exact = mixsim.exact_distributions(params, args.start, cps)
        rows = []
        for t in cps:
            emp = counts[t] / cfg.trials
            rows.append((t, float(mixsim.tv_to_uniform(emp)), float(mixsim.tv_to_uniform(exact[t])),
                         cfg.trials, cfg.rng_seed))
        _write_csv(args, ["t", "tv_empirical", "tv_exact", "trials", "rng_seed"], rows, comments)
    else:
        if params.n > 16 and args.trials * args.steps * params.n > 5e9:
            raise UsageError("deck simulation too large; reduce --trials or --steps")
        res = mixsim.simulate_deck(cfg, cps)
        rows = []
        for t in cps:
            tv = res.tv_exact[t] if res.tv_exact is not None else None
            rows.append((t, res.mean_fixed_points[t], tv, cfg.trials, cfg.rng_seed))
        if res.tv_exact is None:
            comments.append("whole-deck TV not computed for n > 8; fixed points only")
        if params.s == 1 or params.n % 2 == params.s % 2:
            comments.append("moves do not generate an aperiodic walk on all orderings; TV does not tend to 0")
        _write_csv(args, ["t", "mean_fixed_points", "tv_exact", "trials", "rng_seed"], rows, comments)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ocshuffle",
                     description="Spectral gap of a single card under the overlapping-cycles shuffle.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def nk(p):
        p.add_argument("--n", type=int, required=True, help="deck size")
        p.add_argument("--k", type=int, required=True, help="shift, 1 <= k < n")

    def out(p):
        p.add_argument("--out", help="write output here instead of stdout")

    p = sub.add_parser("gap", help="gamma(n,k) and numeric gap as JSON")
    nk(p)
    p.add_argument("--method", choices=["analytic", "newton", "oracle", "all"], default="all")
    out(p)
    p.set_defaults(func=run_gap)

    p = sub.add_parser("scan", help="gamma and relaxation time for every k")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--numeric", action="store_true", help="also compute numeric gaps")
    p.add_argument("--stride", type=int, default=1, help="numeric gap every STRIDE values of k")
    out(p)
    p.set_defaults(func=run_scan)

    p = sub.add_parser("eigs", help="all eigenvalues in polar form")
    nk(p)
    p.add_argument("--method", choices=["oracle", "newton"])
    p.add_argument("--matrix", action="store_true", help="dump the transition matrix instead")
    out(p)
    p.set_defaults(func=run_eigs)

    p = sub.add_parser("bells", help="gamma vs the bell prediction near k = n p/q")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--halfwidth", type=int, default=40)
    out(p)
    p.set_defaults(func=run_bells)

    p = sub.add_parser("envelope", help="relaxation time against the conjectured envelope")
    p.add_argument("--n", type=int, required=True)
    out(p)
    p.set_defaults(func=run_envelope)

    p = sub.add_parser("thm2", help="check the extremal and typical bounds for every k")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--delta", type=float, nargs="+", default=[0.01])
    out(p)
    p.set_defaults(func=run_thm2)

    p = sub.add_parser("thm5", help="gamma(n,k) n^(3/2) along a Diophantine sequence")
    p.add_argument("--alpha", type=float, default=(math.sqrt(5) - 1) / 2)
    p.add_argument("--q", type=int, nargs="+", help="candidate q (default: Fibonacci numbers)")
    out(p)
    p.set_defaults(func=run_thm5)

    p = sub.add_parser("simulate", help="total-variation decay, exact or Monte Carlo")
    nk(p)
    p.add_argument("--mode", choices=["exact", "card", "deck"], default="exact")
    p.add_argument("--start", type=int, default=1)
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--steps", type=int, default=1000)
    p.add_argument("--every", type=int, default=1, help="checkpoint interval")
    p.add_argument("--seed", type=int, default=0)
    out(p)
    p.set_defaults(func=run_simulate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"ocshuffle {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"ocshuffle: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
