"""fptc command line: solve, oracle, coreset, gen, verify, bench.

Exit codes: 0 ok, 1 malformed input, 2 budget exceeded, 3 too large for an
exhaustive check, 4 a verified claim failed.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from pathlib import Path

from . import baseline, gadgets, solver
from .coreset import CoresetParams, build_coreset
from .errors import BudgetExceeded, InstanceError, TooLargeError
from .metric import instance_from_dict, instance_to_dict, random_instance
from .submodular import ExplicitMatroid, PartitionMatroid, UniformMatroid

EXIT_OK, EXIT_INPUT, EXIT_BUDGET, EXIT_TOO_LARGE, EXIT_CLAIM = 0, 1, 2, 3, 4


def _round(obj):
    """Floats to 12 significant digits, recursively."""
    if isinstance(obj, float):
        return obj if not math.isfinite(obj) else float(f"{obj:.12g}")
    if isinstance(obj, dict):
        return {k: _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v) for v in obj]
    return obj


def dumps(obj) -> str:
    return json.dumps(_round(obj), sort_keys=False) + "\n"


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _read_json(path):
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise InstanceError(f"malformed JSON: {exc}") from exc
    except OSError as exc:
        raise InstanceError(str(exc)) from exc


def matroid_from_dict(data: dict, n: int):
    kind = data.get("kind")
    if kind == "partition":
        return PartitionMatroid(tuple(data["part_of"]), tuple(data["capacity"]))
    if kind == "uniform":
        return UniformMatroid(n, int(data["rank"]))
    if kind == "explicit":
        return ExplicitMatroid(n, data["bases"], check=n <= 12)
    raise InstanceError(f"unknown matroid kind {kind!r}")


def _load(args):
    data = _read_json(args.instance)
    inst = instance_from_dict(data)
    changes = {}
    if getattr(args, "k", None):
        changes["k"] = args.k
    if getattr(args, "objective", None):
        changes["objective"] = args.objective
    return (inst.replace(**changes) if changes else inst), data


def _variant(args, inst):
    return args.variant or inst.objective


def _extras(args, inst, data, variant):
    kw = {}
    if variant == "matroid":
        if "matroid" not in data:
            raise InstanceError("matroid variant needs a 'matroid' entry in the instance")
        try:
            kw["matroid"] = matroid_from_dict(data["matroid"], len(inst.facilities))
        except (KeyError, TypeError, ValueError) as exc:
            raise InstanceError(f"malformed matroid: {exc}") from exc
    if variant == "facility-location":
        oc = args.opening_cost if args.opening_cost is not None else data.get("opening_cost")
        if oc is None:
            raise InstanceError("facility location needs an opening cost")
        kw["opening_cost"] = float(oc)
    return kw


ORACLE_BUDGET = 10**7


def run_solver(inst, variant, args, extra):
    budget = solver.DEFAULT_BUDGET if args.budget is None else args.budget
    common = dict(budget=budget, threads=args.threads)
    if variant in ("median", "means"):
        inst = inst.replace(objective=variant)
        if getattr(args, "coreset", False):
            inst = build_coreset(inst, CoresetParams(min(args.epsilon, 0.5), seed=args.seed)).apply(inst)
        return solver.find_centers(inst, args.epsilon, args.maximizer, args.seed, tau=args.tau, **common)
    if variant == "matroid":
        inner = "exact" if args.maximizer == "exact" else "local-search"
        return solver.solve_matroid_median(inst, extra["matroid"], args.epsilon, args.seed, inner=inner, **common)
    fl = solver.FLInstance(inst.replace(objective="median"), extra["opening_cost"], args.k_max)
    maximizer = "greedy" if args.maximizer == "greedy" else ("exact" if args.maximizer == "exact" else "cg")
    return solver.solve_facility_location(fl, args.epsilon, args.seed, gamma_max=args.gamma_max,
                                          maximizer=maximizer, tau=args.tau, **common)


def cmd_solve(args) -> int:
    inst, data = _load(args)
    variant = _variant(args, inst)
    sol = run_solver(inst, variant, args, _extras(args, inst, data, variant))
    _emit(dumps(sol.to_dict()), args.out)
    print(f"cost={sol.cost:.12g} guesses={sol.guesses_evaluated}", file=sys.stderr)
    return EXIT_OK


def cmd_oracle(args) -> int:
    inst, data = _load(args)
    variant = _variant(args, inst)
    budget = ORACLE_BUDGET if args.budget is None else args.budget
    sol = baseline.brute_force_opt(inst, variant, budget=budget, **_extras(args, inst, data, variant))
    _emit(dumps(sol.to_dict()), args.out)
    return EXIT_OK


def cmd_coreset(args) -> int:
    inst, _ = _load(args)
    try:
        params = CoresetParams(args.epsilon, args.delta, args.seed, c=args.c)
    except ValueError as exc:
        raise InstanceError(str(exc)) from exc
    _emit(dumps(build_coreset(inst, params).to_json()), args.out)
    return EXIT_OK


def _formula(args):
    if getattr(args, "formula", None):
        return gadgets.ThreeSatFormula.from_dict(_read_json(args.formula)), None
    return gadgets.random_3sat(args.vars, args.clauses, args.seed)


def _game(args):
    phi, _ = _formula(args)
    L = gadgets.clause_variable_game(phi)
    if args.merge:
        L = gadgets.merge_supervertices(L, args.merge)
    if args.repeat > 1:
        L = gadgets.parallel_repetition(L, args.repeat)
    return L


def cmd_gen(args) -> int:
    if args.kind == "sat3":
        phi, _ = _formula(args)
        out = phi.to_dict()
    elif args.kind == "labelcover":
        out = _game(args).to_dict()
    elif args.kind == "hypergrid":
        out = gadgets.hypergrid_coverage(_game(args), args.a).materialize().to_dict()
    else:
        system = gadgets.hypergrid_coverage(_game(args), args.a).materialize()
        out = instance_to_dict(gadgets.coverage_to_kmedian(system))
    _emit(dumps(out), args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    inst, _ = _load(args)
    try:
        results = solver.verify_claims(inst, args.epsilon, args.seed, oracle_budget=args.oracle_budget)
    except (TooLargeError, BudgetExceeded) as exc:
        print(f"too large for exhaustive checks: {exc}", file=sys.stderr)
        return EXIT_TOO_LARGE
    lines = [f"{r.name}: {'PASS' if r.ok else 'FAIL'} {r.detail}".rstrip() for r in results]
    _emit("\n".join(lines) + "\n", args.out)
    failed = [r.name for r in results if not r.ok]
    if failed:
        print("failed: " + ", ".join(failed), file=sys.stderr)
        return EXIT_CLAIM
    return EXIT_OK


BENCH_COLUMNS = ["instance_id", "n", "k", "epsilon", "variant", "maximizer", "cost", "opt", "ratio",
                 "guesses", "wall_ms"]


def cmd_bench(args) -> int:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(BENCH_COLUMNS)
    variant = args.variant or args.objective or "median"
    for i in range(args.count):
        seed = args.seed * 100_003 + i
        k = args.k or 1 + i % 3
        inst = random_instance(seed, n_clients=args.clients, n_facilities=args.facilities, k=k,
                               objective="means" if variant == "means" else "median")
        extra = {}
        if variant == "facility-location":
            extra["opening_cost"] = args.opening_cost if args.opening_cost is not None else 0.5
        elif variant == "matroid":
            extra["matroid"] = ExplicitMatroid.random_linear(len(inst.facilities), k, seed)
        start = time.perf_counter()
        sol = run_solver(inst, variant, args, extra)
        wall = (time.perf_counter() - start) * 1000
        opt = baseline.brute_force_opt(inst, variant, **extra)
        ratio = baseline.approximation_ratio(sol, opt)
        writer.writerow([i, inst.n, k, f"{args.epsilon:.12g}", variant, args.maximizer, f"{sol.cost:.12g}",
                         f"{opt.cost:.12g}", f"{ratio:.12g}", sol.guesses_evaluated,
                         "" if args.no_timing else f"{wall:.3f}"])
    _emit(buf.getvalue(), args.out)
    return EXIT_OK


def _env(name, default, cast=str):
    raw = os.environ.get("FPTC_" + name.upper().replace("-", "_"))
    return default if raw is None else cast(raw)


def _epsilon(text):
    value = float(text)
    if not 0 < value < 1:
        raise argparse.ArgumentTypeError("epsilon must lie in (0, 1)")
    return value


def _positive_int(text):
    value = int(float(text))
    if value < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--epsilon", type=_epsilon, default=_env("epsilon", 0.1, float))
    common.add_argument("--seed", type=int, default=_env("seed", 0, int))
    common.add_argument("--budget", type=_positive_int, default=_env("budget", None, int),
                        help="enumeration budget (guesses for solvers, subsets for the oracle)")
    common.add_argument("--threads", type=_positive_int, default=_env("threads", 1, int))
    common.add_argument("--out", default=_env("out", None))

    solving = argparse.ArgumentParser(add_help=False)
    solving.add_argument("--k", type=_positive_int, default=_env("k", None, int))
    solving.add_argument("--objective", choices=["median", "means"], default=_env("objective", None))
    solving.add_argument("--variant", choices=list(baseline.VARIANTS), default=_env("variant", None))
    solving.add_argument("--maximizer", choices=list(solver.MAXIMIZERS), default=_env("maximizer", "cg"))
    solving.add_argument("--gamma-max", type=float, default=_env("gamma_max", None, float))
    solving.add_argument("--opening-cost", type=float, default=_env("opening_cost", None, float))
    solving.add_argument("--k-max", type=_positive_int, default=_env("k_max", 3, int))
    solving.add_argument("--tau", type=_positive_int, default=_env("tau", 10, int))

    p = argparse.ArgumentParser(prog="fptc", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", parents=[common, solving], help="run an approximation algorithm")
    s.add_argument("instance")
    s.add_argument("--coreset", action="store_true", help="shrink the clients to a coreset first")
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("oracle", parents=[common, solving], help="exact optimum by enumeration")
    s.add_argument("instance")
    s.set_defaults(func=cmd_oracle)

    s = sub.add_parser("coreset", parents=[common], help="weighted client coreset")
    s.add_argument("instance")
    s.add_argument("--delta", type=float, default=_env("delta", 0.1, float))
    s.add_argument("--c", type=float, default=_env("c", 20.0, float))
    s.set_defaults(func=cmd_coreset)

    s = sub.add_parser("gen", parents=[common], help="gadget instance generators")
    s.add_argument("kind", choices=["sat3", "labelcover", "hypergrid", "kmedian-gadget"])
    s.add_argument("--formula", help="3-SAT JSON to start from instead of a planted random one")
    s.add_argument("--clauses", type=_positive_int, default=2)
    s.add_argument("--vars", type=int, default=3)
    s.add_argument("--merge", type=int, default=0, help="merge the left side into this many super-vertices")
    s.add_argument("--repeat", type=_positive_int, default=1)
    s.add_argument("--a", type=_positive_int, default=2)
    s.set_defaults(func=cmd_gen)

    s = sub.add_parser("verify", parents=[common], help="check extension properties on an instance")
    s.add_argument("instance")
    s.add_argument("--oracle-budget", type=float, default=1e6)
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("bench", parents=[common, solving], help="solver vs oracle on random instances")
    s.add_argument("--count", type=_positive_int, default=5)
    s.add_argument("--clients", type=_positive_int, default=8)
    s.add_argument("--facilities", type=_positive_int, default=8)
    s.add_argument("--no-timing", action="store_true", help="leave wall_ms empty for reproducible output")
    s.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        # argparse signals usage errors with 2, which is reserved for budget overruns
        return EXIT_INPUT if exc.code == 2 else (exc.code or EXIT_OK)
    try:
        return args.func(args)
    except BudgetExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except TooLargeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_TOO_LARGE
    except InstanceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
