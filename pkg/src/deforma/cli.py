"""The ``deforma`` command line.

Exit codes: 0 when every requested check passes, 1 when a check fails or the
operation raises (the error is recorded in the report), 2 for bad flags.
"""
from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .acceptance import CRITERIA, payload, run_all
from .finite import builtin, load_model
from .finite.verify import verify_model
from .growth import (
    EnumerationCapError,
    Polynomial,
    ball_sizes,
    exp_rate_profile,
    growth_summability_verdict,
    l2_tail_sum,
    parse_deformation,
    parse_family,
    poly_order_fit,
    summation_by_parts_check,
)
from .lie import parse_lie_group
from .measures import (
    QuadratureParams,
    dual_summability_verdict,
    is_valid_deformation,
    l2_limit_estimate,
    l2_partial_sums,
    poly_coefficients,
    subordination_check,
)
from .parallel import thread_count
from .report import Check, Report, validate_report, write_report
from .summability import dyadic_schedule
from .vn import pinch

__all__ = ["build_parser", "run", "main"]


class UsageError(ValueError):
    """Flag values that fail validation; mapped to exit code 2."""


# ---------------------------------------------------------------- flag types


def _number(kind, cond, what):
    def parse(text):
        try:
            x = kind(text)
        except (TypeError, ValueError):
            raise argparse.ArgumentTypeError(f"expected {what}, got {text!r}") from None
        if isinstance(x, float) and not math.isfinite(x) or not cond(x):
            raise argparse.ArgumentTypeError(f"expected {what}, got {text!r}")
        return x

    parse.__name__ = what
    return parse


positive_float = _number(float, lambda x: x > 0, "a positive real")
positive_int = _number(int, lambda x: x > 0, "a positive integer")
nonneg_int = _number(int, lambda x: x >= 0, "a nonnegative integer")
any_int = _number(int, lambda x: True, "an integer")


def _deformation(text):
    try:
        return parse_deformation(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _criteria(text):
    try:
        ids = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated criterion ids, got {text!r}") from None
    if not ids or any(i not in CRITERIA for i in ids):
        raise argparse.ArgumentTypeError(f"criterion ids must be in 1..{len(CRITERIA)}")
    return ids


# ---------------------------------------------------------------- parser


def _common(p: argparse.ArgumentParser, seed: int | None = None, tol: float | None = None):
    p.add_argument("--out", help="write the JSON report here (default: print it)")
    if seed is not None:
        p.add_argument("--seed", type=any_int, default=seed, help=f"random seed (default {seed})")
    if tol is not None:
        p.add_argument("--tol", type=positive_float, default=tol, help=f"check tolerance (default {tol:g})")


def build_parser() -> tuple[argparse.ArgumentParser, dict[str, argparse.ArgumentParser]]:
    parser = argparse.ArgumentParser(prog="deforma", description="Deformed group algebras: sums, norms and checks.")
    parser.add_argument("--version", action="version", version=f"deforma {__version__}")
    parser.add_argument("--config", help="INI file whose [deforma] and [<command>] sections supply flag defaults")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    subs: dict[str, argparse.ArgumentParser] = {}

    p = sub.add_parser("dual-sum", help="summability verdict for sum d^2 (1+|pi|_1)^(-2 alpha)")
    p.add_argument("--group", help="su2, so3, su3, torus:N or a product such as su2*torus:1")
    p.add_argument("--alpha", type=positive_float)
    p.add_argument("--max-cutoff", type=_number(int, lambda x: x >= 16, "an integer >= 16"), default=16384)
    p.add_argument("--csv", help="write (cutoff, partial_sum) rows here")
    _common(p)
    subs["dual-sum"] = p

    p = sub.add_parser("nu-alpha", help="polynomial deformation measure: coefficients, subordination, L2 sums")
    p.add_argument("--group")
    p.add_argument("--alpha", type=positive_float)
    p.add_argument("--cutoff", type=positive_int, default=1000)
    p.add_argument("--samples", type=positive_int, default=100, help="subordination checks at sampled Casimir values")
    p.add_argument("--csv", help="write the dual with coefficients here")
    _common(p, seed=0, tol=1e-8)
    subs["nu-alpha"] = p

    p = sub.add_parser("finite", help="finite-group model checks")
    fsub = p.add_subparsers(dest="action", metavar="ACTION")
    p = fsub.add_parser("verify", help="verify Fourier, deformation and gamma_2 identities")
    p.add_argument("--group", help="z:N, dN, s3, s4, q8")
    p.add_argument("--table", help="multiplication-table file (with --irreps)")
    p.add_argument("--irreps", help="irreps file (with --table)")
    p.add_argument("--trials", type=positive_int, default=50)
    p.add_argument("--sdp-trials", type=nonneg_int, default=None, help="gamma_2 trials (default: --trials)")
    p.add_argument("--probes", type=positive_int, default=40)
    p.add_argument("--gamma-tol", type=positive_float, default=1e-7)
    _common(p, seed=0, tol=1e-10)
    subs["finite"] = p

    p = sub.add_parser("growth", help="ball growth and radial deformation sums")
    p.add_argument("--family", help="free:K, abelian:N, cyclic:N, dihedral:M|inf, racg:FILE")
    p.add_argument("--graph", help="adjacency-list file for --family racg")
    p.add_argument("--depth", type=nonneg_int, default=20)
    p.add_argument("--deform", type=_deformation, help="exp:T or poly:ALPHA")
    p.add_argument("--method", choices=("auto", "closed", "automaton", "enumerate"), default="auto")
    p.add_argument("--bfs-cap", type=positive_int, default=300_000, help="element cap for the BFS cross-check")
    p.add_argument("--csv", help="write (n, c_n, b_n, partial_sum) rows here")
    _common(p, tol=1e-9)
    subs["growth"] = p

    p = sub.add_parser("fourier", help="Fourier-side (group von Neumann algebra) bounds")
    fsub = p.add_subparsers(dest="action", metavar="ACTION")
    p = fsub.add_parser("pinch", help="two-sided estimate of ||w||_2 on a finite group")
    p.add_argument("--group", default="z:16")
    p.add_argument("--deform", type=_deformation, default=Polynomial(1.0))
    p.add_argument("--budget", type=nonneg_int, default=2000)
    _common(p, seed=0, tol=1e-7)
    subs["fourier"] = p

    p = sub.add_parser("all-acceptance", help="run the acceptance suite")
    p.add_argument("--only", type=_criteria, help="comma-separated criterion ids")
    p.add_argument("--out")
    p.add_argument("--seed", type=any_int, default=7)
    p.add_argument("--tol", type=positive_float, default=None, help="override every criterion tolerance")
    subs["all-acceptance"] = p
    return parser, subs


def _apply_config(path: str, subs: dict[str, argparse.ArgumentParser]) -> None:
    cfg = configparser.ConfigParser()
    try:
        with open(path) as fh:
            cfg.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    for name, p in subs.items():
        values = {}
        for section in ("deforma", name):
            if cfg.has_section(section):
                values.update({k.replace("-", "_"): v for k, v in cfg.items(section)})
        known = {a.dest for a in p._actions}
        # string defaults go through each flag's type converter at parse time
        p.set_defaults(**{k: v for k, v in values.items() if k in known})


def _require(args, parser, *names):
    for n in names:
        if getattr(args, n.replace("-", "_"), None) is None:
            parser.error(f"--{n} is required")


# ---------------------------------------------------------------- commands


def _csv(path, header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    Path(path).write_text(buf.getvalue())


def _lie_group(args, parser):
    _require(args, parser, "group")
    try:
        return parse_lie_group(args.group)
    except ValueError as exc:
        parser.error(str(exc))


def cmd_dual_sum(args, parser, rep: Report):
    _require(args, parser, "alpha")
    group = _lie_group(args, parser)
    rep.inputs.update(group=args.group, alpha=args.alpha, max_cutoff=args.max_cutoff)
    v = dual_summability_verdict(group, args.alpha, args.max_cutoff)
    sums = [s for _, s in v.partial_sums]
    rep.outputs.update(
        group=group.name,
        alpha=args.alpha,
        threshold=v.threshold,
        cutoffs=[c for c, _ in v.partial_sums],
        partial_sums=sums,
        verdict=v.verdict.value,
        increment_ratios=v.increment_ratios,
        slope=v.slope,
        limit_estimate=v.limit_estimate,
    )
    drop = max([0.0] + [a - b for a, b in zip(sums, sums[1:])])
    rep.checks.append(Check.residual("partial_sums_monotone", drop, 0.0))
    if args.csv:
        _csv(args.csv, ["cutoff", "partial_sum"], [(c, repr(s)) for c, s in v.partial_sums])


def cmd_nu_alpha(args, parser, rep: Report):
    _require(args, parser, "alpha")
    group = _lie_group(args, parser)
    rep.inputs.update(group=args.group, alpha=args.alpha, cutoff=args.cutoff, samples=args.samples, seed=args.seed)
    m = poly_coefficients(group, args.alpha, args.cutoff)
    kappas = sorted({float(i.casimir) for i in m.irreps})
    rng = np.random.default_rng(args.seed)
    picked = sorted(rng.choice(kappas, size=min(args.samples, len(kappas)), replace=False).tolist())
    q = QuadratureParams()
    resid = max(subordination_check(args.alpha, k, q) for k in picked)
    sched = [c for c in dyadic_schedule(args.cutoff, start=1, min_levels=1) if c <= args.cutoff]
    sums = l2_partial_sums(m, sched)
    raw, extrap = l2_limit_estimate(m) if args.cutoff >= 4 else (sums[-1][1], sums[-1][1])
    rep.outputs.update(
        group=group.name,
        alpha=args.alpha,
        irreps=len(m.irreps),
        kappas_checked=picked,
        subordination_max_residual=resid,
        cutoffs=[c for c, _ in sums],
        l2_partial_sums=[s for _, s in sums],
        l2_raw=raw,
        l2_extrapolated=extrap,
        l2_converges_expected=args.alpha > group.real_dimension / 2,
        threshold=group.real_dimension / 2,
    )
    rep.checks.append(Check.residual("subordination", resid, args.tol))
    rep.checks.append(Check("valid_deformation", is_valid_deformation(m)))
    if args.csv:
        rows = [(str(i.label), i.one_norm, i.dim, str(i.casimir), repr(m.coefficients[i.label].real))
                for i in m.irreps]
        _csv(args.csv, ["label", "norm1", "dimension", "casimir", "coefficient"], rows)


def cmd_finite(args, parser, rep: Report):
    if args.action != "verify":
        parser.error("expected: finite verify")
    if args.table or args.irreps:
        if not (args.table and args.irreps) or args.group:
            parser.error("give either --group, or both --table and --irreps")
        G = load_model(args.table, args.irreps)
        rep.inputs.update(table=args.table, irreps=args.irreps)
    else:
        _require(args, parser, "group")
        try:
            G = builtin(args.group)
        except ValueError as exc:
            parser.error(str(exc))
        rep.inputs.update(group=args.group)
    rep.inputs.update(trials=args.trials, seed=args.seed, tol=args.tol, gamma_tol=args.gamma_tol, probes=args.probes)
    checks, outputs = verify_model(G, args.trials, args.seed, args.tol, args.gamma_tol, args.probes, args.sdp_trials)
    rep.checks.extend(checks)
    rep.outputs.update(outputs)


def cmd_growth(args, parser, rep: Report):
    _require(args, parser, "family")
    try:
        group = parse_family(args.family, args.graph)
    except (ValueError, OSError) as exc:
        parser.error(str(exc))
    N = args.depth
    rep.inputs.update(family=args.family, graph=args.graph, depth=N, method=args.method,
                      deform=repr(args.deform) if args.deform else None)
    table = ball_sizes(group, N, method=args.method)
    kind, rate = group.growth_kind()
    out = {"family": group.name, "spheres": table.spheres, "balls": table.balls,
           "growth_kind": kind, "growth_parameter": rate}
    if N >= 7:
        out["poly_order_fit"] = poly_order_fit(table)
        prof = exp_rate_profile(table)
        out["exp_rate"] = prof.rate
        out["exp_terminal_root"] = prof.terminal_root
    # explicit BFS over normal forms, as deep as the cap allows
    depth = N
    while depth > 0 and table.balls[depth] > args.bfs_cap:
        depth -= 1
    try:
        bfs = ball_sizes(group, depth, method="enumerate", cap=args.bfs_cap).spheres
        mism = sum(a != b for a, b in zip(bfs, table.spheres))
    except EnumerationCapError:
        bfs, mism = [], math.inf
    out["bfs_depth"] = depth
    rep.checks.append(Check.residual("bfs_cross_check", mism, 0.0, f"explicit BFS to depth {depth}"))
    sums = None
    if args.deform is not None:
        sums = [s for _, s in l2_tail_sum(group, args.deform, N, table)]
        out["l2_partial_sums"] = sums
        if N >= 16:
            v = growth_summability_verdict(group, args.deform, N)
            out.update(verdict=v.verdict.value, threshold=v.threshold, verdict_cutoffs=[c for c, _ in v.partial_sums],
                       increment_ratios=v.increment_ratios, slope=v.slope, limit_estimate=v.limit_estimate)
        if isinstance(args.deform, Polynomial) and args.deform.M == 1.0:
            rep.checks.append(Check.residual("summation_by_parts",
                                             summation_by_parts_check(table, args.deform.alpha, N), args.tol))
    rep.outputs.update(out)
    if args.csv:
        rows = [(n, table.spheres[n], table.balls[n], repr(sums[n]) if sums else "") for n in range(N + 1)]
        _csv(args.csv, ["n", "c_n", "b_n", "partial_sum"], rows)


def cmd_fourier(args, parser, rep: Report):
    if args.action != "pinch":
        parser.error("expected: fourier pinch")
    try:
        G = builtin(args.group)
    except ValueError as exc:
        parser.error(str(exc))
    rep.inputs.update(group=args.group, deform=repr(args.deform), seed=args.seed, budget=args.budget)
    p = pinch(G, args.deform, seed=args.seed, budget=args.budget)
    rep.outputs.update(p)
    tol = args.tol
    rep.checks.append(Check.residual("lower_attains_w_l2_over_K", max(p["w_l2"] / p["K_emp"] - p["lower"], 0.0), tol))
    if p["exact"] is not None:
        rep.checks.append(Check.residual("lower_le_exact", max(p["lower"] - p["exact"], 0.0), tol))
        rep.checks.append(Check.residual("exact_le_upper", max(p["exact"] - p["upper"], 0.0), tol))
    else:
        rep.checks.append(Check.residual("lower_le_upper", max(p["lower"] - p["upper"], 0.0), tol))


def cmd_all_acceptance(args, parser, rep: Report):
    rep.inputs.update(seed=args.seed, tol=args.tol, only=args.only)
    results = run_all(args.seed, args.tol, args.only)
    for r in results:
        rep.checks.append(Check(f"C{r.id}: {r.name}", r.passed, r.max_residual, r.tolerance,
                                r.error or ("" if r.checks_passed == r.passed else "over runtime budget")))
        status = "PASS" if r.passed else "FAIL"
        print(f"[{status}] C{r.id} {r.name}: residual={r.max_residual} tol={r.tolerance} "
              f"time={r.runtime_s:.2f}s budget={r.budget_s:.0f}s", file=sys.stderr)
    rep.outputs["criteria"] = payload(results)
    rep.outputs["timing"] = {f"C{r.id}": r.timing for r in results}
    rep.wall_time_ms = {f"C{r.id}": r.runtime_s * 1000.0 for r in results}


COMMANDS = {
    "dual-sum": cmd_dual_sum,
    "nu-alpha": cmd_nu_alpha,
    "finite": cmd_finite,
    "growth": cmd_growth,
    "fourier": cmd_fourier,
    "all-acceptance": cmd_all_acceptance,
}


# ---------------------------------------------------------------- entry points


def run(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, subs = build_parser()
    try:
        pre, _ = parser.parse_known_args(argv)
        if pre.config:
            _apply_config(pre.config, subs)
        thread_count()
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    except (UsageError, ValueError) as exc:
        print(f"deforma: error: {exc}", file=sys.stderr)
        return 2
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 2
    sub = subs[args.command]
    rep = Report(command=["deforma", *argv])
    t0 = time.perf_counter()
    try:
        COMMANDS[args.command](args, sub, rep)
    except SystemExit as exc:  # parser.error during validation
        return int(exc.code or 0)
    except Exception as exc:  # recorded, exit 1
        rep.error = f"{type(exc).__name__}: {exc}"
    if not isinstance(rep.wall_time_ms, dict):
        rep.wall_time_ms = (time.perf_counter() - t0) * 1000.0
    else:
        rep.wall_time_ms["total"] = (time.perf_counter() - t0) * 1000.0
    out = getattr(args, "out", None)
    if out:
        try:
            write_report(rep, out)
        except OSError as exc:
            print(f"deforma: error: cannot write {out}: {exc}", file=sys.stderr)
            return 1
        for c in rep.checks:
            print(f"{'PASS' if c.passed else 'FAIL'} {c.name} residual={c.max_residual} tol={c.tolerance}")
    else:
        print(json.dumps(validate_report(rep), indent=2, sort_keys=True, allow_nan=False))
    if rep.error:
        print(f"deforma: error: {rep.error}", file=sys.stderr)
        return 1
    return 0 if rep.passed else 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
