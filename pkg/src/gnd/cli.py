"""``gnd`` command line: run solvers, drive the tree adversary, sweep seeds.

Exit codes: 0 success, 1 bad input, 2 certification failure (or a stuck
adversary / violated lower bound).
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path
from typing import List, Optional

from gnd.adversary import TreeAdversary, random_instance
from gnd.bounds import dos_bound, fractional_bound, integral_bound, tree_ratio_floor
from gnd.costs import PowerCost
from gnd.errors import AdversaryStuck, BudgetExceeded, GNDError, InstanceError
from gnd.fractional import DEFAULT_EPSILON, FractionalSolver
from gnd.instance import load_instance, save_instance
from gnd.online import APPROX, EXACT, OnlineSolver, SolverConfig, power_model, write_trace_jsonl
from gnd.oracles import make_oracle
from gnd.verifier import brute_force_opt, certify_fractional, certify_run, power_opt

SOLVERS = ("integral-exact", "integral-approx", "fractional")
ORACLE_CHOICES = ("auto", "exhaustive", "shortest-path", "steiner", "enumeration")
FAMILIES = ("explicit", "routing", "steiner")
COST_KINDS = ("power", "dos", "rep")

EXIT_OK, EXIT_INPUT, EXIT_CERT = 0, 1, 2


class UsageError(Exception):
    pass


def _parse_size(text: str) -> dict:
    """``M,N,K`` -> generator size parameters."""
    try:
        parts = [int(v) for v in text.split(",")]
    except ValueError:
        raise UsageError(f"--size expects integers M,N,K, got {text!r}") from None
    if not 1 <= len(parts) <= 3 or any(v < 1 for v in parts):
        raise UsageError(f"--size expects one to three positive integers, got {text!r}")
    return dict(zip(("m", "n", "k"), parts))


def _load(args) -> "object":
    if args.instance and args.generate:
        raise UsageError("give either --instance or --generate, not both")
    if args.instance:
        return load_instance(args.instance)
    if args.generate:
        size = _parse_size(args.size) if args.size else {}
        return random_instance(args.seed, args.generate, kind=args.cost_kind, **size)
    raise UsageError("one of --instance or --generate is required")


def _all_power(instance) -> bool:
    return all(isinstance(r.cost, PowerCost) for r in instance.resources)


def theoretical_bound(instance, solver: str, tau: float, epsilon: float) -> float:
    model = power_model(instance.resources)
    a = model.alpha_max
    if solver == "fractional":
        return fractional_bound(a, epsilon)
    t = tau if solver == "integral-approx" else 1.0
    if _all_power(instance):
        return integral_bound(a, t)
    return dos_bound(model.q, a, t)


def _oracle(args, instance):
    try:
        return make_oracle(args.oracle, instance)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _tau(args, oracle) -> float:
    tau = args.tau if args.tau is not None else oracle.tau
    if tau < oracle.tau:
        raise UsageError(f"--tau {tau} is below the oracle's guarantee {oracle.tau}")
    return tau


def _integral(instance, oracle, solver: str, tau: float):
    mode = EXACT if solver == "integral-exact" else APPROX
    cfg = SolverConfig.create(power_model(instance.resources).alpha_max, tau, mode)
    return OnlineSolver(instance, oracle, cfg).run(instance.requests)


def _write_summary(path: Path, row: dict) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(row))
        w.writeheader()
        w.writerow(row)


def cmd_run(args) -> int:
    instance = _load(args)
    oracle = _oracle(args, instance)
    tau = _tau(args, oracle)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    summary = {"instance": instance.name, "solver": args.solver, "oracle": args.oracle or "auto",
               "tau": tau, "requests": len(instance.requests)}
    if args.solver == "fractional":
        eps = args.epsilon if args.epsilon is not None else DEFAULT_EPSILON
        report = FractionalSolver(instance, oracle, eps).run(instance.requests)
        with open(out / "trace.json", "w") as fh:
            json.dump(report.to_dict(), fh, indent=1, default=str)
            fh.write("\n")
        summary.update(epsilon=eps, cost=report.primal, total_queries=report.total_queries)
        cert_fn = lambda: certify_fractional(report, instance, oracle=oracle)  # noqa: E731
    else:
        if args.epsilon is not None:
            raise UsageError("--epsilon applies to the fractional solver only")
        trace = _integral(instance, oracle, args.solver, tau)
        write_trace_jsonl(trace, out / "trace.jsonl")
        s = trace.summary()
        summary.update(cost=s["cost"], power_cost=s["power_cost"], L=s["L"], H=s["H"], rho=s["rho"])
        cert_fn = lambda: certify_run(trace, instance, oracle=oracle)  # noqa: E731
    summary["bound"] = theoretical_bound(instance, args.solver, tau, summary.get("epsilon", 0.0))
    status = EXIT_OK
    if args.certify:
        cert = cert_fn()
        cert.write(out / "certificate.json")
        summary.update(certified=cert.passed, opt=cert.opt, dual=cert.dual)
        if not cert.passed:
            failed = [c.name for c in cert.checks if not c.passed]
            if not cert.feasibility.passed:
                failed.insert(0, "dual_feasibility")
            print(f"certification failed: {', '.join(failed)}", file=sys.stderr)
            status = EXIT_CERT
    _write_summary(out / "summary.csv", summary)
    if args.save_instance:
        save_instance(instance, out / "instance.json")
    print(json.dumps(summary, sort_keys=True))
    return status


def cmd_adversary(args) -> int:
    if args.q < 1:
        raise UsageError("--q must be a positive integer")
    if args.solver == "fractional":
        raise UsageError("the tree adversary needs an integral solver")
    adv = TreeAdversary(args.q, args.alpha)
    oracle = make_oracle("shortest-path", adv.instance)
    mode = EXACT if args.solver == "integral-exact" else APPROX
    solver = OnlineSolver(adv.instance, oracle, mode=mode)
    try:
        sinks = adv.drive(solver)
    except AdversaryStuck as exc:
        print(f"adversary stuck: {exc}", file=sys.stderr)
        return EXIT_CERT
    online = solver.trace.cost
    offline = adv.offline_cost()
    used = sum(1 for e in adv.source_edges if solver.loads[e] >= 1)
    ratio = online / offline
    report = {
        "q": args.q, "alpha": args.alpha, "sigma": adv.sigma, "solver": args.solver,
        "sinks": sinks, "online_cost": online, "offline_cost": offline, "ratio": ratio,
        "source_edges_used": used, "ratio_floor": tree_ratio_floor(args.q),
    }
    ok = used >= args.q and online >= args.q * adv.sigma and offline <= 2 * adv.sigma
    ok = ok and ratio >= tree_ratio_floor(args.q)
    report["passed"] = ok
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "adversary.json", "w") as fh:
            json.dump(report, fh, indent=1)
            fh.write("\n")
        write_trace_jsonl(solver.trace, out / "trace.jsonl")
    print(json.dumps(report, sort_keys=True))
    if not ok:
        print("lower-bound check failed", file=sys.stderr)
        return EXIT_CERT
    return EXIT_OK


SWEEP_FIELDS = ["instance", "family", "cost_kind", "seed", "solver", "epsilon", "tau", "cost",
                "opt", "ratio", "bound", "queries", "flagged", "error"]


def sweep_row(seed: int, family: str, kind: str, size: dict, solver: str, tau: Optional[float],
              epsilon: Optional[float], oracle_name: Optional[str] = None) -> dict:
    row = dict.fromkeys(SWEEP_FIELDS, "")
    row.update(family=family, cost_kind=kind, seed=seed, solver=solver, flagged=False)
    try:
        instance = random_instance(seed, family, kind=kind, **size)
        row["instance"] = instance.name
        oracle = make_oracle(oracle_name, instance)
        t = tau if tau is not None else oracle.tau
        row["tau"] = t
        if solver == "fractional":
            eps = epsilon if epsilon is not None else DEFAULT_EPSILON
            row["epsilon"] = eps
            report = FractionalSolver(instance, oracle, eps).run(instance.requests)
            cost, opt = report.primal, power_opt(instance)
            row["queries"] = report.total_queries
        else:
            trace = _integral(instance, oracle, solver, t)
            cost = trace.cost
            opt = brute_force_opt(instance)[1]
        bound = theoretical_bound(instance, solver, t, row["epsilon"] or 0.0)
        ratio = 1.0 if opt == 0 and cost == 0 else (math.inf if opt == 0 else cost / opt)
        row.update(cost=cost, opt=opt, ratio=ratio, bound=bound, flagged=ratio > bound)
    except (GNDError, ValueError, TypeError) as exc:
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


def cmd_sweep(args) -> int:
    solvers = args.solver or ["integral-approx"]
    epsilons: List[Optional[float]] = args.epsilon or [None]
    seeds = range(args.seed, args.seed + args.count)
    size = _parse_size(args.size) if args.size else {}
    flagged = 0
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=SWEEP_FIELDS)
        w.writeheader()
        for solver in solvers:
            for eps in epsilons if solver == "fractional" else [None]:
                for seed in seeds:
                    row = sweep_row(seed, args.family, args.cost_kind, size, solver, args.tau, eps,
                                    args.oracle)
                    if row["error"]:
                        print(f"seed {seed}: {row['error']}", file=sys.stderr)
                    flagged += bool(row["flagged"])
                    w.writerow(row)
                    fh.flush()
    print(json.dumps({"rows_flagged": flagged, "out": str(out)}))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gnd", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def source(sp):
        sp.add_argument("--instance", help="instance JSON file")
        sp.add_argument("--generate", choices=FAMILIES, help="random instance family")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--size", help="generator sizes M,N,K (resources or nodes, requests, replies or edges)")
        sp.add_argument("--cost-kind", choices=COST_KINDS, default="power")

    run = sub.add_parser("run", help="run one solver on one instance")
    source(run)
    run.add_argument("--solver", choices=SOLVERS, default="integral-approx")
    run.add_argument("--oracle", choices=ORACLE_CHOICES, default=None)
    run.add_argument("--epsilon", type=float)
    run.add_argument("--tau", type=float)
    run.add_argument("--certify", action="store_true")
    run.add_argument("--save-instance", action="store_true", help="also write the instance used")
    run.add_argument("--out", default="gnd-out")
    run.set_defaults(func=cmd_run)

    adv = sub.add_parser("adversary", help="adaptive binary-tree lower bound")
    adv.add_argument("--q", type=int, required=True)
    adv.add_argument("--alpha", type=float, default=1.0)
    adv.add_argument("--solver", choices=SOLVERS, default="integral-approx")
    adv.add_argument("--out")
    adv.set_defaults(func=cmd_adversary)

    sw = sub.add_parser("sweep", help="seeded batch of runs to CSV")
    sw.add_argument("--family", choices=FAMILIES, default="explicit")
    sw.add_argument("--cost-kind", choices=COST_KINDS, default="power")
    sw.add_argument("--seed", type=int, default=0, help="first seed")
    sw.add_argument("--count", type=int, default=10, help="number of seeds (0 for an empty grid)")
    sw.add_argument("--size")
    sw.add_argument("--solver", choices=SOLVERS, action="append")
    sw.add_argument("--epsilon", type=float, action="append")
    sw.add_argument("--tau", type=float)
    sw.add_argument("--oracle", choices=ORACLE_CHOICES, default=None)
    sw.add_argument("--out", default="sweep.csv")
    sw.set_defaults(func=cmd_sweep)
    return p


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, InstanceError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except BudgetExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except GNDError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
