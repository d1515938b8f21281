"""Command-line entry point: ``kresultant {run,sharpness,nu,delta,scan}``."""

from __future__ import annotations

import argparse
import sys

from .. import __version__
from ..errors import ConfigInvalid, HypothesisFail, KResultantError
from ..field import make_field
from ..lattice import Space, build_set
from ..magnitude import delta_report, nu_profile
from ..restriction import extension_constant, holder_chain, l2_sphere_energy, restriction_ratio
from .checks import sharpness
from .config import ExperimentConfig, preset
from .report import ReportRow, to_csv, to_json
from .runner import run


def _shared(sp: argparse.ArgumentParser, need_set: bool = True) -> None:
    sp.add_argument("--p", type=int, required=True, help="odd prime")
    sp.add_argument("--n", type=int, default=1, help="extension degree")
    sp.add_argument("--d", type=int, required=True, help="dimension")
    sp.add_argument("--k", type=int, default=3)
    if need_set:
        sp.add_argument("--set", dest="set_spec", default="full()",
                        help="generator, e.g. 'random_density(0.2, seed={seed})'")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--tolerance", type=float, default=1e-8)
    sp.add_argument("--out", default=None, help="write output here instead of stdout")
    sp.add_argument("--format", choices=("csv", "json"), default="csv")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="kresultant", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run a configured grid of checks")
    src = r.add_mutually_exclusive_group(required=True)
    src.add_argument("--config", help="YAML experiment config")
    src.add_argument("--preset", help="built-in config, e.g. 'acceptance'")
    r.add_argument("--out", help="report base path; writes <out>.csv and <out>.json")
    r.add_argument("--seed", type=int, action="append", help="override seeds (repeatable)")
    r.add_argument("--tolerance", type=float)
    r.add_argument("--workers", type=int)
    r.add_argument("--timings", action="store_true", help="fill the seconds column")
    r.add_argument("--format", choices=("csv", "json"), help="also print this report to stdout")
    r.add_argument("--dump-config", action="store_true", help="print the resolved config and exit")

    s = sub.add_parser("sharpness", help="subfield example in F_{p^2}^d")
    _shared(s, need_set=False)

    nu = sub.add_parser("nu", help="nu_k profile of one set")
    _shared(nu)
    nu.add_argument("--method", choices=("direct", "spectral", "both"), default="both")

    de = sub.add_parser("delta", help="Delta_k(E) and its lower bounds")
    _shared(de)

    sc = sub.add_parser("scan", help="one constant-tracking report")
    _shared(sc)
    sc.add_argument("--check", choices=("L3.2", "L3.3", "realaim", "holder", "extension"),
                    required=True)
    sc.add_argument("--t", type=int, default=1, help="sphere radius")
    sc.add_argument("--trials", type=int, default=50)
    return ap


def _space_and_set(args):
    space = Space(make_field(args.p, args.n), args.d)
    spec = args.set_spec.format(p=args.p, n=args.n, q=space.q, d=args.d, N=space.size,
                                seed=args.seed)
    return space, build_set(space, spec)


def _emit(rows: list[ReportRow], args, provenance: dict) -> None:
    provenance = {"library": "kresultant", "version": __version__, "seed": args.seed,
                  "tolerance": args.tolerance, "set": getattr(args, "set_spec", None),
                  **provenance}
    text = to_json(rows, provenance) if args.format == "json" else to_csv(rows)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _row(args, label, check, status, **kw) -> ReportRow:
    return ReportRow(p=args.p, n=args.n, d=args.d, set_label=label, check=check, status=status,
                     **kw)


def _cmd_run(args) -> int:
    cfg = ExperimentConfig.load(args.config) if args.config else preset(args.preset)
    if args.seed:
        cfg.seeds = args.seed
    if args.tolerance is not None:
        cfg.tolerance = args.tolerance
    if args.workers is not None:
        cfg.workers = args.workers
    if args.out:
        cfg.csv_path, cfg.json_path = f"{args.out}.csv", f"{args.out}.json"
    cfg.validate()
    if args.dump_config:
        sys.stdout.write(cfg.dumps())
        return 0
    result = run(cfg, timings=args.timings)
    if args.format == "csv":
        sys.stdout.write(result.csv)
    elif args.format == "json":
        sys.stdout.write(result.json)
    failed = result.failures
    print(f"{len(result.rows)} rows, {len(failed)} failed -> {cfg.csv_path}, {cfg.json_path}",
          file=sys.stderr)
    for r in failed[:20]:
        print(f"  FAIL p={r.p} n={r.n} d={r.d} k={r.k} {r.set_label} {r.check} {r.note}",
              file=sys.stderr)
    return result.exit_code


def _cmd_sharpness(args) -> int:
    row = sharpness(args.p, args.d, args.k)
    _emit([row], args, {"command": "sharpness"})
    return 0 if row.status == "pass" else 1


def _cmd_nu(args) -> int:
    space, E = _space_and_set(args)
    prof = nu_profile(space, E, args.k, args.method)
    rows = [_row(args, E.label, f"nu[t={t}]", "tracked", k=args.k, lhs=c, rhs=E.size**args.k)
            for t, c in enumerate(prof.counts)]
    _emit(rows, args, {"command": "nu", "method": args.method, "residual": prof.residual})
    return 0


def _cmd_delta(args) -> int:
    space, E = _space_and_set(args)
    rep = delta_report(space, E, args.k)
    rows = [
        _row(args, E.label, "delta_size", "tracked", k=args.k, lhs=rep.cardinality, rhs=space.q,
             ratio=rep.cardinality / space.q),
        _row(args, E.label, "R4.1", "pass" if rep.r41_holds else "fail", k=args.k,
             lhs=rep.lower_bound_r41, rhs=rep.cardinality),
        _row(args, E.label, "L4.1", "tracked", k=args.k, hypothesis_met=rep.lemma41_hypothesis,
             lhs=rep.cardinality, rhs=rep.lemma41_bound, ratio=rep.ratio_actual_over_bound),
    ]
    _emit(rows, args, {"command": "delta", "members": list(rep.delta_members), "nu0": rep.nu0})
    return 0 if rep.r41_holds else 1


def _cmd_scan(args) -> int:
    space, E = _space_and_set(args)
    try:
        if args.check in ("L3.2", "L3.3"):
            rep = restriction_ratio(space, E, args.k, args.check)
        elif args.check == "realaim":
            rep = l2_sphere_energy(space, E, args.t, tol=args.tolerance)
        elif args.check == "holder":
            rep = holder_chain(space, E, args.t, tol=args.tolerance)
        else:
            rep = extension_constant(space, args.t, args.trials, args.seed)
    except HypothesisFail as exc:
        _emit([_row(args, E.label, args.check, "n/a", k=args.k, hypothesis_met=False,
                    note=str(exc))], args, {"command": "scan"})
        return 0
    status = "tracked" if rep.passed is None else ("pass" if rep.passed else "fail")
    row = _row(args, E.label, args.check, status, k=args.k, hypothesis_met=rep.hypothesis_met,
               lhs=rep.measured_lhs, rhs=rep.bound_rhs, ratio=rep.implied_constant,
               exact={"log_slack": rep.log_slack, **rep.exponents})
    _emit([row], args, {"command": "scan"})
    return 1 if status == "fail" else 0


COMMANDS = {"run": _cmd_run, "sharpness": _cmd_sharpness, "nu": _cmd_nu, "delta": _cmd_delta,
            "scan": _cmd_scan}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ConfigInvalid as exc:
        print("config error:", file=sys.stderr)
        for problem in exc.problems:
            print(f"  {problem}", file=sys.stderr)
        return 2
    except KResultantError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
