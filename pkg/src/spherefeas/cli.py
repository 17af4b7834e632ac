"""Command line: ``gen``, ``solve``, ``bench`` and ``fit``.

Exit codes: 0 feasible / success, 1 error, 2 usage, 3 infeasible, 4 budget exhausted.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import bench as bench_mod
from .baseline import simplex_feasibility
from .problems import FAMILIES, DimensionTooSmall, ParseError, VersionMismatch, format_instance, generate, read_instance, write_instance
from .solver import ConfigError, NumericalBreakdown, Rule, SolveConfig, Variant, solve_euclidean
from .solver import total_iterations, total_rescalings
from .solver.transforms import estimate_size_L
from .sphere import ZeroConstraintError, homogenize
from .tables import TABLE1, table1_points

EXIT_OK, EXIT_ERROR, EXIT_USAGE, EXIT_INFEASIBLE, EXIT_BUDGET = 0, 1, 2, 3, 4


class UsageError(Exception):
    pass


def _int_list(text):
    try:
        vals = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated integers, got {text!r}")
    return vals


def _str_list(text):
    return [v.strip() for v in text.split(",") if v.strip()]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="spherefeas", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a random instance")
    g.add_argument("--family", choices=FAMILIES, required=True)
    g.add_argument("--dim", type=int, required=True)
    g.add_argument("--num", type=int, required=True, help="number of constraints")
    g.add_argument("--seed", type=int, default=1)
    g.add_argument("-o", "--output", help="instance file (default: stdout)")

    s = sub.add_parser("solve", help="solve an instance file")
    s.add_argument("instance")
    s.add_argument("--alg", choices=[v.value for v in Variant] + ["simplex"], default="combinatorial")
    s.add_argument("--rule", choices=[r.value for r in Rule])
    s.add_argument("--feas-tol", type=float, default=1e-9)
    s.add_argument("--max-iters", type=int)
    s.add_argument("--poly-L", type=int, dest="poly_L")
    s.add_argument("--rescale-trigger", type=float)
    s.add_argument("--trace", help="write the iteration trace as CSV")

    b = sub.add_parser("bench", help="run a benchmark matrix")
    b.add_argument("--families", type=_str_list, default=list(FAMILIES))
    b.add_argument("--dims", type=_int_list, required=True)
    grp = b.add_mutually_exclusive_group()
    grp.add_argument("--factor", type=int, default=8, help="n = factor * d")
    grp.add_argument("--nums", type=_int_list, help="fixed list of n values")
    b.add_argument("--seeds", type=int, default=5, help="instances per cell")
    b.add_argument("--algs", type=_str_list, default=list(bench_mod.ALGORITHMS))
    b.add_argument("--threads", type=int, help="worker threads (default: FEAS_THREADS or cpu count)")
    b.add_argument("-o", "--output", help="CSV file (default: stdout)")
    b.add_argument("--table", action="store_true", help="also print mean steps to stderr")

    f = sub.add_parser("fit", help="fit alpha*d^beta to mean step counts")
    src = f.add_mutually_exclusive_group(required=True)
    src.add_argument("csv", nargs="?", help="bench CSV with mean rows")
    src.add_argument("--published", action="store_true", help="use the published reference means")
    return p


def cmd_gen(args) -> int:
    inst = generate(args.family, args.dim, args.num, args.seed)
    if args.output:
        write_instance(inst, args.output)
    else:
        sys.stdout.write(format_instance(inst))
    t = inst.translation
    print(f"# {inst.family} d={inst.d} n={inst.n} seed={inst.seed} |t|={np.linalg.norm(t):.4g}",
          file=sys.stderr)
    return EXIT_OK


def _label(i, n):
    return "pole" if i == n else str(i)


def cmd_solve(args) -> int:
    inst = read_instance(args.instance)
    if args.alg == "simplex":
        res = simplex_feasibility(inst)
        print(f"status: {res.status}")
        print(f"pivots: {res.pivots} (+{res.init_pivots} initial)")
        if res.point is not None:
            print("point: " + " ".join(repr(float(v)) for v in res.point))
        return EXIT_OK if res.feasible else EXIT_INFEASIBLE

    sph = homogenize(inst)
    poly_L = args.poly_L
    if args.alg == Variant.POLYNOMIAL.value and poly_L is None:
        L, capped = estimate_size_L(sph.normals)
        if capped:
            raise UsageError("instance size L is not derivable from the data; pass --poly-L")
        poly_L = L
    try:
        cfg = SolveConfig(
            args.alg, feas_tol=args.feas_tol, max_iters=args.max_iters,
            constraint_rule=args.rule, poly_L=poly_L, rescale_trigger=args.rescale_trigger,
        )
    except ConfigError as exc:
        raise UsageError(str(exc))
    out = solve_euclidean(inst, cfg)
    status = out.resolved_status
    iters = total_iterations(out)
    print(f"status: {status}")
    print(f"iterations: {iters}")
    print(f"rescalings: {total_rescalings(out)}")
    print(f"time: {out.trace.wall_time:.4f} s")
    if out.equality_indices:
        print("implied equalities: " + " ".join(_label(i, inst.n) for i in out.equality_indices))
    if out.euclidean_point is not None:
        print("point: " + " ".join(repr(float(v)) for v in out.euclidean_point))
    cert = out.certificate
    if cert is not None:
        ok = cert.verify(sph.working_normals())
        print(f"certificate ({'verified' if ok else 'NOT verified'}, "
              f"residual {cert.residual(sph.working_normals()):.2e}):")
        for i, mu in zip(cert.indices, cert.coefficients):
            print(f"  {_label(i, inst.n)} {float(mu)!r}")
    if out.message:
        print(f"note: {out.message}")
    if args.trace:
        out.trace.write_csv(args.trace)
    if status == "feasible":
        return EXIT_OK
    if status == "infeasible":
        return EXIT_INFEASIBLE
    return EXIT_BUDGET


def cmd_bench(args) -> int:
    if not args.dims:
        raise UsageError("--dims must list at least one dimension")
    n_rule = ("fixed", args.nums) if args.nums else ("factor", args.factor)
    try:
        spec = bench_mod.BenchSpec(
            tuple(args.families), tuple(args.dims), n_rule, args.seeds, tuple(args.algs),
        )
    except bench_mod.BenchSpecError as exc:
        raise UsageError(str(exc))
    rows = bench_mod.run_bench(spec, threads=args.threads)
    if args.output:
        with open(args.output, "w", newline="") as fh:
            bench_mod.write_csv(rows, fh)
    else:
        bench_mod.write_csv(rows, sys.stdout)
    if args.table:
        print(bench_mod.format_table(rows), file=sys.stderr)
    return EXIT_OK


def _published_fits():
    out = {}
    for fam in TABLE1:
        out[(fam, "simplex_init")] = bench_mod.fit_power_law(table1_points(fam, "simplex", True))
        for col in ("simplex", "combinatorial", "rescaled"):
            out[(fam, col)] = bench_mod.fit_power_law(table1_points(fam, col))
    return out


def cmd_fit(args) -> int:
    if args.published:
        fits = _published_fits()
    else:
        with open(args.csv, newline="") as fh:
            fits = bench_mod.fits_from_rows(bench_mod.read_csv(fh))
    print("family\talg\talpha\tbeta\tresidual")
    for (fam, alg), r in fits.items():
        print(f"{fam}\t{alg}\t{r.alpha:.4f}\t{r.beta:.4f}\t{r.residual:.4f}")
    return EXIT_OK


COMMANDS = {"gen": cmd_gen, "solve": cmd_solve, "bench": cmd_bench, "fit": cmd_fit}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, ParseError, VersionMismatch, DimensionTooSmall, ZeroConstraintError,
            NumericalBreakdown, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
