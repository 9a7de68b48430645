"""Command-line front end.

Subcommands::

    ponsleep gen N M --seed S [--feasible] [--out FILE]
    ponsleep solve INSTANCE [--oracle] [--budget B]
    ponsleep oracle INSTANCE [--budget B] [--no-prune]
    ponsleep simulate SCENARIO [--scheduler ...] [--predictor ...] [--seed S] [--out FILE]
    ponsleep sweep SCENARIO [--workers K] [--out FILE] [--summary FILE]

Exit codes: 0 success, 2 usage, 3 parse error, 4 validation error,
5 infeasible instance, 6 budget exhausted.
"""

from __future__ import annotations

import argparse
import csv
import io as _io
import itertools
import json
import statistics
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields
from typing import Optional

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import io as inst_io
from .fdos import approximation_ratio, fdos
from .model import f, f1, f2, jain_index
from .oracle import DEFAULT_BUDGET, BudgetExceeded, InfeasibleError, exact_solve
from .sim import ConfigError, Predictor, RuntimeCapExceeded, Scheduler, SimConfig, run

EXIT_OK, EXIT_USAGE, EXIT_PARSE, EXIT_VALIDATION, EXIT_INFEASIBLE, EXIT_BUDGET = 0, 2, 3, 4, 5, 6

# frozen order; extra columns only ever go after these
CSV_COLUMNS = ("scheduler", "load", "N", "T_rtt_ns", "B_th_bits", "energy_J", "energy_efficiency",
               "avg_delay_ns", "drops", "dereg_events", "mean_jain", "mean_cycle_ns")
EXTRA_COLUMNS = ("replication", "seed", "status")
METRICS = CSV_COLUMNS[5:]
POINT_KEYS = CSV_COLUMNS[:5]


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


# -- scenario files -----------------------------------------------------------

_SIM_KEYS = {f_.name for f_ in fields(SimConfig)} - {"profile"}
_SWEEP_KEYS = {"load", "n_onus", "rtt", "b_th_bits"}
_TOP_KEYS = {"sim", "sweep", "replications", "schedulers", "wall_cap_s"}


@dataclass(frozen=True)
class Scenario:
    base: SimConfig
    loads: tuple
    n_onus: tuple
    rtts: tuple
    b_th: tuple
    replications: int = 1
    schedulers: tuple = (Scheduler.OSMP, Scheduler.FDOS)
    wall_cap_s: Optional[float] = None

    def points(self):
        """(replication, config) pairs in deterministic sweep order."""
        for rep, n, rtt, bth, sch, load in itertools.product(
                range(self.replications), self.n_onus, self.rtts, self.b_th, self.schedulers, self.loads):
            yield rep, self.base.with_(n_onus=n, rtt=rtt, b_th_bits=bth, scheduler=sch, load=load,
                                       seed=self.base.seed + rep)


def _check_keys(table, allowed, where):
    if not isinstance(table, dict):
        raise CliError(EXIT_VALIDATION, f"{where}: expected a table")
    unknown = sorted(set(table) - allowed)
    if unknown:
        raise CliError(EXIT_VALIDATION, f"{where}: unknown keys {unknown}")


def _axis(sweep, key, default):
    if key not in sweep:
        return (default,)
    vals = sweep[key]
    if not isinstance(vals, list) or not vals:
        raise CliError(EXIT_VALIDATION, f"sweep.{key}: expected a non-empty list")
    return tuple(vals)


def parse_scenario(text: str) -> Scenario:
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise CliError(EXIT_PARSE, f"scenario: {exc}") from None
    _check_keys(doc, _TOP_KEYS, "scenario")
    sim = doc.get("sim", {})
    _check_keys(sim, _SIM_KEYS, "sim")
    sweep = doc.get("sweep", {})
    _check_keys(sweep, _SWEEP_KEYS, "sweep")
    try:
        base = SimConfig(**sim)
    except (ConfigError, TypeError, ValueError) as exc:
        raise CliError(EXIT_VALIDATION, f"sim: {exc}") from None
    reps = doc.get("replications", 1)
    if isinstance(reps, bool) or not isinstance(reps, int) or reps < 1:
        raise CliError(EXIT_VALIDATION, "replications: expected a positive integer")
    try:
        schedulers = tuple(Scheduler(s) for s in doc.get("schedulers", ["osmp", "fdos"]))
    except (ValueError, TypeError):
        raise CliError(EXIT_VALIDATION, "schedulers: expected a list drawn from 'osmp', 'fdos'") from None
    if not schedulers:
        raise CliError(EXIT_VALIDATION, "schedulers: expected a non-empty list")
    cap = doc.get("wall_cap_s")
    if cap is not None and (not isinstance(cap, (int, float)) or cap <= 0):
        raise CliError(EXIT_VALIDATION, "wall_cap_s: expected a positive number")
    sc = Scenario(base, _axis(sweep, "load", base.load), _axis(sweep, "n_onus", base.n_onus),
                  _axis(sweep, "rtt", base.rtt), _axis(sweep, "b_th_bits", base.b_th_bits),
                  reps, schedulers, cap)
    # validate every point up front so a bad axis value fails before any run
    for _, cfg in _validated_points(sc):
        pass
    return sc


def _validated_points(sc: Scenario):
    try:
        return list(sc.points())
    except (ConfigError, TypeError, ValueError) as exc:
        raise CliError(EXIT_VALIDATION, f"sweep: {exc}") from None


def load_scenario(path: str) -> Scenario:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise CliError(EXIT_PARSE, f"{path}: {exc.strerror}") from None
    return parse_scenario(text)


# -- simulation rows ----------------------------------------------------------

def _run_point(job):
    rep, cfg, cap = job
    row = {"replication": rep, "seed": cfg.seed}
    try:
        rep_ = run(cfg, wall_cap_s=cap).row()
        row.update({k: rep_[k] for k in CSV_COLUMNS}, status="ok")
    except RuntimeCapExceeded:
        row.update(scheduler=cfg.scheduler.value, load=cfg.load, N=cfg.n_onus, T_rtt_ns=cfg.rtts()[0],
                   B_th_bits=cfg.b_th_bits, status="runtime_cap")
        row.update({k: "" for k in METRICS})
    return row


def run_rows(sc: Scenario, workers: int = 1) -> list[dict]:
    jobs = [(rep, cfg, sc.wall_cap_s) for rep, cfg in _validated_points(sc)]
    if workers <= 1:
        return [_run_point(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_point, jobs))  # map keeps submission order


def rows_csv(rows) -> str:
    buf = _io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS + EXTRA_COLUMNS, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()


def summarize(rows) -> list[dict]:
    """Per-point mean and sample standard deviation over replications that finished."""
    groups: dict = {}
    for r in rows:
        groups.setdefault(tuple(r[k] for k in POINT_KEYS), []).append(r)
    out = []
    for key, rs in groups.items():
        ok = [r for r in rs if r["status"] == "ok"]
        rec = dict(zip(POINT_KEYS, key), n=len(ok))
        for m in METRICS:
            vals = [float(r[m]) for r in ok]
            rec[m + "_mean"] = statistics.fmean(vals) if vals else ""
            rec[m + "_std"] = statistics.stdev(vals) if len(vals) > 1 else ""
        out.append(rec)
    return out


def summary_csv(summary) -> str:
    cols = POINT_KEYS + ("n",) + tuple(c for m in METRICS for c in (m + "_mean", m + "_std"))
    buf = _io.StringIO()
    w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
    w.writeheader()
    w.writerows(summary)
    return buf.getvalue()


# -- instance helpers ---------------------------------------------------------

def _load_instance(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise CliError(EXIT_PARSE, f"{path}: {exc.strerror}") from None
    try:
        inst = inst_io.loads(text)
    except inst_io.InstanceError as exc:
        raise CliError(EXIT_PARSE, f"{path}: {exc}") from None
    try:
        return inst.to_problem()
    except inst_io.EmptyWindowError as exc:
        raise CliError(EXIT_INFEASIBLE, f"{path}: {exc}") from None
    except inst_io.InstanceError as exc:
        raise CliError(EXIT_VALIDATION, f"{path}: {exc}") from None


def _slots(p, a) -> list:
    return [a.slot_of[i] for i in p.onus]


def _frac(x) -> str:
    return f"{x.numerator}/{x.denominator}" if x.denominator != 1 else str(x.numerator)


def _oracle_report(p, budget, prune=True) -> dict:
    try:
        res = exact_solve(p, budget=budget, prune=prune)
    except BudgetExceeded as exc:
        raise CliError(EXIT_BUDGET, str(exc)) from None
    except InfeasibleError as exc:
        raise CliError(EXIT_INFEASIBLE, str(exc)) from None
    return {"assignment": _slots(p, res.best_assignment), "f": res.best_f, "f1": res.best_f1,
            "f2": res.best_f2, "explored": res.explored}


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# -- subcommands --------------------------------------------------------------

def cmd_gen(args) -> int:
    try:
        inst = inst_io.generate(args.N, args.M, args.seed, feasible=args.feasible,
                                forced_prob=args.forced_prob, max_tries=args.max_tries)
    except inst_io.RejectionBudgetExhausted as exc:
        raise CliError(EXIT_BUDGET, str(exc)) from None
    except ValueError as exc:
        raise CliError(EXIT_VALIDATION, str(exc)) from None
    _emit(inst_io.dumps(inst), args.out)
    return EXIT_OK


def cmd_solve(args) -> int:
    p = _load_instance(args.instance)
    res = fdos(p)
    a = res.assignment
    report = {"assignment": _slots(p, a), "f": f(a, p), "f1": f1(a), "f2": f2(a, p),
              "jain": _frac(jain_index(a.counts().values())), "recursion_depth": res.recursion_depth,
              "first_level_feasible": res.first_level_feasible}
    if args.oracle:
        opt = _oracle_report(p, args.budget)
        report["oracle"] = opt
        report["rho_f"] = _frac(approximation_ratio(report["f"], opt["f"]))
    _emit(json.dumps(report, indent=1) + "\n", args.out)
    return EXIT_OK


def cmd_oracle(args) -> int:
    p = _load_instance(args.instance)
    _emit(json.dumps(_oracle_report(p, args.budget, not args.no_prune), indent=1) + "\n", args.out)
    return EXIT_OK


def _overrides(sc: Scenario, args) -> Scenario:
    kw = {}
    if args.predictor:
        kw["predictor"] = Predictor(args.predictor)
    if args.seed is not None:
        kw["seed"] = args.seed
    base = sc.base.with_(**kw) if kw else sc.base
    schedulers = (Scheduler(args.scheduler),) if args.scheduler else sc.schedulers
    return Scenario(base, sc.loads, sc.n_onus, sc.rtts, sc.b_th, sc.replications, schedulers, sc.wall_cap_s)


def cmd_simulate(args) -> int:
    sc = load_scenario(args.scenario)
    sc = _overrides(sc, args)
    # a single run: the [sim] table as written, no sweep axes
    one = Scenario(sc.base, (sc.base.load,), (sc.base.n_onus,), (sc.base.rtt,), (sc.base.b_th_bits,),
                   1, (Scheduler(args.scheduler) if args.scheduler else sc.base.scheduler,), sc.wall_cap_s)
    _emit(rows_csv(run_rows(one)), args.out)
    return EXIT_OK


def cmd_sweep(args) -> int:
    sc = _overrides(load_scenario(args.scenario), args)
    rows = run_rows(sc, args.workers)
    _emit(rows_csv(rows), args.out)
    summary = args.summary
    if summary is None and args.out:
        stem = args.out[:-4] if args.out.endswith(".csv") else args.out
        summary = stem + ".summary.csv"
    if summary:
        _emit(summary_csv(summarize(rows)), summary)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ponsleep", description="Fair ONU wake-up scheduling tools.")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="random instance file")
    g.add_argument("N", type=int)
    g.add_argument("M", type=int)
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--feasible", action="store_true",
                   help="resample until the first transport level is feasible")
    g.add_argument("--forced-prob", type=float, default=0.25)
    g.add_argument("--max-tries", type=int, default=10_000)
    g.add_argument("--out")
    g.set_defaults(func=cmd_gen)

    s = sub.add_parser("solve", help="run FDOS on an instance file")
    s.add_argument("instance")
    s.add_argument("--oracle", action="store_true", help="also solve exactly and report rho_f")
    s.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    s.add_argument("--out")
    s.set_defaults(func=cmd_solve)

    o = sub.add_parser("oracle", help="exhaustive optimum of an instance file")
    o.add_argument("instance")
    o.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    o.add_argument("--no-prune", action="store_true")
    o.add_argument("--out")
    o.set_defaults(func=cmd_oracle)

    for name, func in (("simulate", cmd_simulate), ("sweep", cmd_sweep)):
        p = sub.add_parser(name, help="single simulation run" if name == "simulate" else "scenario sweep")
        p.add_argument("scenario")
        p.add_argument("--scheduler", choices=[x.value for x in Scheduler])
        p.add_argument("--predictor", choices=[x.value for x in Predictor])
        p.add_argument("--seed", type=int)
        p.add_argument("--out")
        if name == "sweep":
            p.add_argument("--workers", type=int, default=1)
            p.add_argument("--summary", help="summary CSV path (default: next to --out)")
        p.set_defaults(func=func)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
