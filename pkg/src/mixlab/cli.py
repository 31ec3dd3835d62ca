"""Command-line front end.

Exit codes: 0 success, 1 validation error, 2 infeasible or diagnostic outcome.

CSV column orders
-----------------
mix eta          hypothesis, status, eta, limit, f_star, eta_star
mix weak         kappa, eta0, holds, witness, witness_eps, witness_eta, witness_cgf
mix bernstein    beta, B, binding
moment solve     x, p, value, status
moment certify   c0, c1, c2, min_u, u_at_minus_1
erm simulate     n, mean_excess_risk, q50, q90, q_1_minus_delta, epsilon_good_rate
                 (followed by a one-line JSON rate summary)
erm violations   n, delta, bound, rate, three_sigma, within_contract
bounds *         the command's inputs, value[, branch]
diagnose         eps, size, mixable, eta_star, minimizer_multiplicity, min_excess_risk_on_far_set
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys

from . import bounds as bnd
from .diagnostics import diagnose
from .erm import BOUND_KINDS, TIEBREAKS, SimConfig, bound_violation_rate, simulate
from .errors import ConfigurationError, DiagnosticError
from .mixability import bernstein_constant, check_weak_mixability, eta_star
from .moment import (
    MAX_MGF,
    MIN_H,
    DualCertificate,
    MomentInstance,
    dual_certificate,
    grid_lp_solve,
    verify_certificate,
)
from .problem import load_problem

EXIT_OK, EXIT_INVALID, EXIT_DIAGNOSTIC = 0, 1, 2


class UsageError(ConfigurationError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def _default_seed() -> int:
    raw = os.environ.get("MIXLAB_SEED")
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise ConfigurationError(f"MIXLAB_SEED must be an integer, got {raw!r}") from None


def _num_list(text: str, cast=float):
    try:
        return [cast(t) for t in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of numbers, got {text!r}")


def _jsonable(v):
    if isinstance(v, float) and not math.isfinite(v):
        return str(v)
    return v


class Table:
    def __init__(self, columns, rows, summary=None):
        self.columns = list(columns)
        self.rows = [list(r) for r in rows]
        self.summary = summary

    def csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for r in self.rows:
            w.writerow(["" if v is None else (repr(v) if isinstance(v, float) else v) for v in r])
        return buf.getvalue()

    def json(self) -> str:
        doc = {"rows": [{c: _jsonable(v) for c, v in zip(self.columns, r)} for r in self.rows]}
        if self.summary is not None:
            doc["summary"] = {k: _jsonable(v) for k, v in self.summary.items()}
        return json.dumps(doc, indent=2)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--out", help="write the table to FILE instead of stdout")
    common.add_argument("--format", choices=("csv", "json"), default="csv")

    p = _Parser(prog="mixlab", description="Stochastic mixability toolkit for finite learning problems")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    mix = sub.add_parser("mix", help="mixability constants").add_subparsers(
        dest="action", required=True, parser_class=_Parser)
    m = mix.add_parser("eta", parents=[common], help="per-hypothesis roots and eta*")
    m.add_argument("--problem", required=True)
    m = mix.add_parser("weak", parents=[common], help="(kappa, eta0)-weak mixability check")
    m.add_argument("--problem", required=True)
    m.add_argument("--kappa", type=float, required=True)
    m.add_argument("--eta0", type=float, required=True)
    m = mix.add_parser("bernstein", parents=[common], help="Bernstein constant B for a given beta")
    m.add_argument("--problem", required=True)
    m.add_argument("--beta", type=float, required=True)

    mom = sub.add_parser("moment", help="grid moment problem and dual certificates").add_subparsers(
        dest="action", required=True, parser_class=_Parser)
    m = mom.add_parser("solve", parents=[common], help="solve the grid LP")
    m.add_argument("--eta", type=float, required=True)
    m.add_argument("--mean", type=float, required=True)
    m.add_argument("--support", type=float, default=1.0)
    m.add_argument("--grid", type=int, default=2001)
    m.add_argument("--sense", choices=("max", "min"), default="max")
    m = mom.add_parser("certify", parents=[common], help="build and check the dual certificate")
    m.add_argument("--eta", type=float, required=True)
    m.add_argument("--grid", type=int, default=10_000)
    m.add_argument("--c2", type=float, help="override c2 (c0, c1 follow from the local-minimum constraints)")

    erm = sub.add_parser("erm", help="ERM Monte Carlo").add_subparsers(
        dest="action", required=True, parser_class=_Parser)
    m = erm.add_parser("simulate", parents=[common], help="excess-risk statistics per sample size")
    m.add_argument("--problem", required=True)
    m.add_argument("--n-list", type=lambda s: _num_list(s, int), required=True)
    m.add_argument("--trials", type=int, default=1000)
    m.add_argument("--seed", type=int)
    m.add_argument("--tiebreak", choices=TIEBREAKS, default="first_by_name")
    m.add_argument("--delta", type=float, default=0.05)
    m.add_argument("--epsilon", type=float)
    m.add_argument("--workers", type=int, default=1)
    m = erm.add_parser("violations", parents=[common], help="how often ERM exceeds a bound")
    m.add_argument("--problem", required=True)
    m.add_argument("--bound", choices=BOUND_KINDS, default="finite_thm4")
    m.add_argument("--n", type=int, required=True)
    m.add_argument("--delta", type=float, default=0.05)
    m.add_argument("--trials", type=int, default=1000)
    m.add_argument("--seed", type=int)
    m.add_argument("--tiebreak", choices=TIEBREAKS, default="first_by_name")
    m.add_argument("--kappa", type=float)
    m.add_argument("--eta0", type=float)
    m.add_argument("--workers", type=int, default=1)

    b = sub.add_parser("bounds", help="closed-form bound evaluators").add_subparsers(
        dest="action", required=True, parser_class=_Parser)
    m = b.add_parser("finite", parents=[common])
    for flag, typ in (("--V", float), ("--eta-star", float), ("--N", int), ("--delta", float), ("--n", int)):
        m.add_argument(flag, type=typ, required=True)
    m = b.add_parser("weak", parents=[common])
    for flag, typ in (("--kappa", float), ("--eta0", float), ("--N", int), ("--delta", float), ("--n", int)):
        m.add_argument(flag, type=typ, required=True)
    m.add_argument("--V", type=float, default=1.0)
    m = b.add_parser("vc", parents=[common])
    for flag in ("--V", "--eta-star", "--C", "--K", "--delta"):
        m.add_argument(flag, type=float, required=True)
    m.add_argument("--n", type=int, required=True)
    m = b.add_parser("local", parents=[common])
    for flag in ("--C", "--K", "--delta"):
        m.add_argument(flag, type=float, required=True)
    m.add_argument("--n", type=int, required=True)
    m.add_argument("--V", type=float, default=1.0)
    m = b.add_parser("local-analysis", parents=[common])
    for flag in ("--C", "--K", "--y"):
        m.add_argument(flag, type=float, required=True)
    m.add_argument("--n", type=int, required=True)
    m = b.add_parser("esup", parents=[common])
    for flag in ("--C", "--K", "--V"):
        m.add_argument(flag, type=float, required=True)
    m.add_argument("--n", type=int, required=True)

    m = sub.add_parser("diagnose", parents=[common], help="non-unique minimizer diagnostic over G_eps")
    m.add_argument("--problem", required=True)
    m.add_argument("--eps-list", type=_num_list, required=True)
    return p


# -- command handlers: each returns (table, exit code) ------------------------

def _mix(args):
    problem = load_problem(args.problem)
    if args.action == "eta":
        prof = eta_star(problem)
        rows = [[name, r.status, r.eta, r.limit, prof.f_star, prof.eta_star]
                for name, r in prof.per_function.items()]
        cols = ["hypothesis", "status", "eta", "limit", "f_star", "eta_star"]
        return Table(cols, rows, {"eta_star": prof.eta_star, "f_star": prof.f_star,
                                  "binding": prof.binding}), EXIT_OK
    if args.action == "weak":
        res = check_weak_mixability(problem, args.kappa, args.eta0)
        w = res.witness or (None, None, None, None)
        cols = ["kappa", "eta0", "holds", "witness", "witness_eps", "witness_eta", "witness_cgf"]
        return Table(cols, [[args.kappa, args.eta0, res.holds, *w]]), (EXIT_OK if res.holds else EXIT_DIAGNOSTIC)
    fit = bernstein_constant(problem, args.beta)
    return Table(["beta", "B", "binding"], [[fit.beta, fit.B, fit.binding]]), EXIT_OK


def _moment(args):
    if args.action == "solve":
        inst = MomentInstance(args.eta, args.mean, args.support)
        sol = grid_lp_solve(inst, args.grid, MAX_MGF if args.sense == "max" else MIN_H)
        rows = [[x, p, sol.value, sol.status] for x, p in sol.support]
        if not sol.feasible:
            rows = [[None, None, None, sol.status]]
        return Table(["x", "p", "value", "status"], rows), (EXIT_OK if sol.feasible else EXIT_DIAGNOSTIC)
    cert = dual_certificate(args.eta)
    if args.c2 is not None:
        cert = DualCertificate(1 - args.c2, 0.5 - args.c2, args.c2, args.eta)
    chk = verify_certificate(cert, args.eta, args.grid)
    table = Table(["c0", "c1", "c2", "min_u", "u_at_minus_1"],
                  [[cert.c0, cert.c1, cert.c2, chk.min_value, chk.u_at_minus_1]],
                  {"valid": chk.valid, "argmin": chk.argmin})
    return table, (EXIT_OK if chk.valid else EXIT_DIAGNOSTIC)


def _erm(args):
    problem = load_problem(args.problem)
    seed = _default_seed() if args.seed is None else args.seed
    if args.action == "simulate":
        cfg = SimConfig(tuple(args.n_list), args.trials, seed, args.tiebreak, args.delta,
                        args.epsilon, args.workers)
        rep = simulate(problem, cfg)
        rows = [[r.n, r.mean_excess_risk, r.q50, r.q90, r.q_1_minus_delta, r.epsilon_good_rate]
                for r in rep.per_n]
        fit = rep.rate_fit
        summary = {"slope": fit.slope, "intercept": fit.intercept, "r2": fit.r2, "status": fit.status}
        cols = ["n", "mean_excess_risk", "q50", "q90", "q_1_minus_delta", "epsilon_good_rate"]
        return Table(cols, rows, summary), EXIT_OK
    rep = bound_violation_rate(problem, args.n, args.delta, args.trials, args.bound, seed=seed,
                               tiebreak=args.tiebreak, kappa=args.kappa, eta0=args.eta0,
                               workers=args.workers)
    cols = ["n", "delta", "bound", "rate", "three_sigma", "within_contract"]
    row = [args.n, rep.delta, rep.bound, rep.rate, rep.three_sigma, rep.within_contract]
    return Table(cols, [row]), (EXIT_OK if rep.within_contract else EXIT_DIAGNOSTIC)


def _bounds(args):
    a = args.action
    if a == "finite":
        v = bnd.finite_class_bound(args.V, args.eta_star, args.N, args.delta, args.n)
        return Table(["V", "eta_star", "N", "delta", "n", "value"],
                     [[args.V, args.eta_star, args.N, args.delta, args.n, v]]), EXIT_OK
    if a == "weak":
        v = bnd.weak_mix_bound(args.kappa, args.eta0, args.N, args.delta, args.n, V=args.V)
        return Table(["kappa", "eta0", "N", "delta", "n", "V", "value"],
                     [[args.kappa, args.eta0, args.N, args.delta, args.n, args.V, v]]), EXIT_OK
    if a == "vc":
        r = bnd.vc_type_bound(args.V, args.eta_star, args.C, args.K, args.delta, args.n)
        return Table(["V", "eta_star", "C", "K", "delta", "n", "value", "branch"],
                     [[args.V, args.eta_star, args.C, args.K, args.delta, args.n, r.value, r.branch]]), EXIT_OK
    if a == "local":
        v = bnd.localization_bound(args.C, args.K, args.delta, args.n, args.V)
        return Table(["C", "K", "delta", "n", "V", "value"],
                     [[args.C, args.K, args.delta, args.n, args.V, v]]), EXIT_OK
    if a == "local-analysis":
        v = bnd.local_analysis_bound(args.C, args.K, args.y, args.n)
        return Table(["C", "K", "y", "n", "value"], [[args.C, args.K, args.y, args.n, v]]), EXIT_OK
    v = bnd.esup_bound(args.C, args.K, args.V, args.n)
    return Table(["C", "K", "V", "n", "value"], [[args.C, args.K, args.V, args.n, v]]), EXIT_OK


def _diagnose(args):
    rep = diagnose(load_problem(args.problem), args.eps_list)
    cols = ["eps", "size", "mixable", "eta_star", "minimizer_multiplicity", "min_excess_risk_on_far_set"]
    rows = [[r.eps, r.size, r.mixable, r.eta_star, r.minimizer_multiplicity, r.min_excess_risk_on_far_set]
            for r in rep.rows]
    table = Table(cols, rows, {"f_star": rep.f_star, "verdict": rep.verdict})
    return table, (EXIT_OK if rep.all_mixable else EXIT_DIAGNOSTIC)


HANDLERS = {"mix": _mix, "moment": _moment, "erm": _erm, "bounds": _bounds, "diagnose": _diagnose}


def _emit(table: Table, args, stdout):
    if args.format == "json":
        text = table.json() + "\n"
        trailer = ""
    else:
        text = table.csv()
        trailer = json.dumps({k: _jsonable(v) for k, v in table.summary.items()}) + "\n" \
            if table.summary is not None and args.command == "erm" else ""
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
        stdout.write(trailer)
    else:
        stdout.write(text + trailer)


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    try:
        args = build_parser().parse_args(argv)
        table, code = HANDLERS[args.command](args)
    except UsageError as exc:
        stderr.write(f"{exc}\n")
        return EXIT_INVALID
    except ConfigurationError as exc:
        stderr.write(f"mixlab: error: {exc}\n")
        return EXIT_INVALID
    except DiagnosticError as exc:
        stderr.write(f"mixlab: diagnostic: {exc}\n")
        return EXIT_DIAGNOSTIC
    _emit(table, args, stdout)
    return code


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
