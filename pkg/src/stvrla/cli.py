"""Command-line front end.

Exit codes: 0 success, 2 a valid run whose answer is "no audit possible",
1 bad input or usage.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from datetime import datetime, timezone
from fractions import Fraction

from . import __version__
from .ballots import BallotParseError, load_election
from .batch import plan_batch_check
from .frw import FirstRoundWinnerCriterion, frw_criterion, plan_frw
from .general import plan_general
from .plan import INFEASIBLE
from .report import plan_files, sim_files, tabulation_files, write_json
from .risk import AuditParams
from .serialize import (
    assertion_to_dict, batch_to_dict, dec, frw_plan_to_dict, general_report_to_dict,
    load_plan_assertions, sim_to_dict, trace_to_dict,
)
from .sim import simulate_audit
from .tabulate import TieError, tabulate

EXIT_OK, EXIT_ERROR, EXIT_INFEASIBLE = 0, 1, 2

ENV = {
    "risk_limit": ("STVRLA_RISK_LIMIT", float, 0.10),
    "error_rate": ("STVRLA_ERROR_RATE", float, 0.002),
    "alpha_d": ("STVRLA_ALPHA_D", float, 100.0),
    "mode": ("STVRLA_MODE", str, "comparison"),
    "delta": ("STVRLA_DELTA", str, "1/20"),
    "trials": ("STVRLA_TRIALS", int, 500),
    "seed": ("STVRLA_SEED", int, 42),
}


class UsageError(Exception):
    pass


class Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _default(key):
    var, conv, fallback = ENV[key]
    raw = os.environ.get(var)
    if raw is None:
        return fallback
    try:
        return conv(raw)
    except ValueError:
        raise UsageError(f"bad value for {var}: {raw!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = Parser(prog="stvrla", description="Tabulate and plan risk-limiting audits of 2-seat STV contests.")
    p.add_argument("--version", action="version", version=f"stvrla {__version__}")
    sub = p.add_subparsers(dest="command", metavar="COMMAND", parser_class=Parser)

    def common(sp, audit=True):
        sp.add_argument("election", help="ballot file (canonical JSON or BLT)")
        sp.add_argument("--format", choices=["json", "blt"], help="ballot format (guessed if omitted)")
        sp.add_argument("--json", metavar="PATH", help="write the JSON report here ('-' for stdout)")
        sp.add_argument("--report-dir", metavar="DIR", help="write JSON, CSV tables and PNG figures here")
        sp.add_argument("--batch-first", action="store_true", help="batch-eliminate hopeless candidates first")
        if audit:
            sp.add_argument("--risk-limit", type=float, default=_default("risk_limit"))
            sp.add_argument("--error-rate", type=float, default=_default("error_rate"),
                            help="expected one-vote overstatements per ballot")
            sp.add_argument("--alpha-d", type=float, default=_default("alpha_d"),
                            help="ALPHA shrinkage weight d")
            sp.add_argument("--mode", choices=["comparison", "polling"], default=_default("mode"))

    sp = sub.add_parser("tabulate", help="count the election and print the rounds")
    common(sp, audit=False)
    sp.add_argument("--strict", action="store_true", help="fail instead of breaking ties")

    sp = sub.add_parser("batch-check", help="assertions certifying the batch elimination")
    common(sp)

    sp = sub.add_parser("plan-frw", help="plan an audit when someone has a quota on first preferences")
    common(sp)
    sp.add_argument("--delta", default=_default("delta"), help="bound step, e.g. 0.05 or 1/20")

    sp = sub.add_parser("plan-general", help="five-stage full or partial audit plan")
    common(sp)

    sp = sub.add_parser("export-assertions", help="emit the planned assertions as a JSON array")
    common(sp)
    sp.add_argument("--planner", choices=["auto", "frw", "general"], default="auto")
    sp.add_argument("--delta", default=_default("delta"))

    sp = sub.add_parser("simulate", help="Monte Carlo audits of a saved plan")
    common(sp)
    sp.add_argument("plan", help="plan JSON written by plan-frw, plan-general or export-assertions")
    sp.add_argument("--trials", type=int, default=_default("trials"))
    sp.add_argument("--seed", type=int, default=_default("seed"))
    sp.add_argument("--reported", metavar="CVRS", help="reported CVRs if they differ from the ballots")
    return p


def _params(args) -> AuditParams:
    return AuditParams(
        risk_limit=args.risk_limit, error_rate=args.error_rate,
        shrink_d=args.alpha_d, mode=args.mode,
    )


def _delta(text) -> Fraction:
    try:
        return Fraction(str(text))
    except ValueError:
        raise UsageError(f"bad --delta {text!r}") from None


def _manifest(args, path: str) -> dict:
    with open(path, "rb") as fh:
        digest = hashlib.sha256(fh.read()).hexdigest()
    params = {k: v for k, v in vars(args).items() if k not in ("command", "json", "report_dir")}
    return {
        "tool": "stvrla",
        "version": __version__,
        "command": args.command,
        "input_sha256": digest,
        "parameters": params,
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }


def _emit(args, payload: dict, out):
    payload = {"manifest": _manifest(args, args.election), **payload}
    text = json.dumps(payload, indent=2)
    if args.json == "-":
        print(text, file=out)
    elif args.json:
        with open(args.json, "w") as fh:
            fh.write(text + "\n")
    if args.report_dir:
        write_json(args.report_dir, payload)


def _asn(x) -> str:
    return "infeasible" if x is None else str(x)


def _print_assertions(items, names, out):
    width = max([len(it.assertion.describe(names)) for it in items] + [10])
    print(f"  {'assertion':<{width}}  {'margin':>9}  {'ASN':>10}", file=out)
    for it in items:
        print(f"  {it.assertion.describe(names):<{width}}  {float(it.margin):>9.4f}  {_asn(it.asn):>10}",
              file=out)


def cmd_tabulate(args, election, out) -> int:
    trace = tabulate(election, batch_first=args.batch_first, strict=args.strict)
    names = election.candidates
    _emit(args, {"trace": trace_to_dict(trace, election)}, out)
    if args.report_dir:
        tabulation_files(args.report_dir, trace, election)
    if args.json != "-":
        print(f"{election.name or 'election'}: {election.total_valid} ballots, "
              f"{election.seats} seats, quota {election.quota}", file=out)
        for r in trace.rounds:
            what = f"{r.action.kind.value} {', '.join(names[c] for c in r.action.subject)}"
            if r.action.transfer_value is not None:
                what += f" (transfer value {dec(r.action.transfer_value, 4)})"
            if r.action.tie:
                what += " [tie]"
            tallies = "  ".join(f"{names[c]}={dec(t, 3)}" for c, t in r.tallies.items())
            print(f"round {r.index}: {tallies}", file=out)
            print(f"  -> {what}", file=out)
        print(f"winners: {', '.join(names[c] for c in trace.winners)}", file=out)
    return EXIT_OK


def cmd_batch_check(args, election, out) -> int:
    plan = plan_batch_check(election, _params(args))
    names = election.candidates
    _emit(args, {"batch_check": batch_to_dict(plan, election)}, out)
    if args.report_dir:
        plan_files(args.report_dir, plan.assertions, names, plan.overall_asn)
    if args.json != "-":
        print(f"top: {', '.join(names[c] for c in plan.top)}", file=out)
        print(f"batch: {', '.join(names[c] for c in plan.batch) or '(none)'}", file=out)
        if plan.assertions:
            _print_assertions(plan.assertions, names, out)
        print(f"total cost: {_asn(plan.overall_asn) if plan.feasible else 'infeasible'}", file=out)
    return EXIT_OK if plan.feasible else EXIT_INFEASIBLE


def _frw(args, election):
    trace = tabulate(election, batch_first=args.batch_first)
    return plan_frw(election, trace, _delta(args.delta), _params(args))


def _general(args, election):
    trace = tabulate(election, batch_first=args.batch_first)
    return plan_general(election, trace, _params(args))


def cmd_plan_frw(args, election, out) -> int:
    plan = _frw(args, election)
    names = election.candidates
    _emit(args, {"plan": frw_plan_to_dict(plan, election)}, out)
    if args.report_dir:
        plan_files(args.report_dir, plan.all_assertions, names, plan.overall_asn, plan.trials)
    if args.json != "-":
        print(f"winners: {', '.join(names[c] for c in plan.winners)}", file=out)
        if plan.kind == INFEASIBLE:
            print("no audit found: some required assertion does not hold", file=out)
        else:
            print(f"transfer value bounds: {dec(plan.tau_lower, 4)} < "
                  f"{dec(plan.reported_tau, 4)} < {dec(plan.tau_upper, 4)}", file=out)
            _print_assertions(plan.all_assertions, names, out)
        print(f"total cost: {_asn(plan.overall_asn)}", file=out)
    return EXIT_INFEASIBLE if plan.kind == INFEASIBLE else EXIT_OK


def cmd_plan_general(args, election, out) -> int:
    report = _general(args, election)
    names = election.candidates
    _emit(args, {"plan": general_report_to_dict(report, election)}, out)
    if args.report_dir:
        plan_files(args.report_dir, report.all_assertions, names, report.overall_asn)
    if args.json != "-":
        def ns(s):
            return ", ".join(names[c] for c in sorted(s)) or "(none)"
        print(f"kind: {report.kind}", file=out)
        print(f"reported winners: {ns(report.winners)}", file=out)
        print(f"definite winners: {ns(report.definite_winners)}", file=out)
        print(f"potential winners: {ns(report.potential_winners)}", file=out)
        print(f"definite losers: {ns(report.definite_losers)}", file=out)
        if report.remaining_pairs:
            pairs = "; ".join(f"{names[a]} & {names[b]}" for a, b in report.remaining_pairs)
            print(f"pairs not ruled out: {pairs}", file=out)
        print(f"AG assertions formed: {report.stage1_count}", file=out)
        print(f"stage 2 cost: {_asn(report.stage2_asn)}  stage 3 cost: {_asn(report.stage3_asn)}", file=out)
        _print_assertions(report.all_assertions, names, out)
        print(f"total cost: {_asn(report.overall_asn)}", file=out)
    return EXIT_INFEASIBLE if report.kind == INFEASIBLE else EXIT_OK


def cmd_export(args, election, out) -> int:
    use_frw = args.planner == "frw" or (
        args.planner == "auto"
        and election.seats == 2
        and frw_criterion(tabulate(election, batch_first=args.batch_first))
    )
    plan = _frw(args, election) if use_frw else _general(args, election)
    items = [assertion_to_dict(it, election.candidates) for it in plan.all_assertions]
    text = json.dumps(items, indent=2)
    if args.json and args.json != "-":
        with open(args.json, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text, file=out)
    if args.report_dir:
        write_json(args.report_dir, {"manifest": _manifest(args, args.election), "assertions": items})
        plan_files(args.report_dir, plan.all_assertions, election.candidates, plan.overall_asn)
    return EXIT_INFEASIBLE if plan.kind == INFEASIBLE else EXIT_OK


def cmd_simulate(args, election, out) -> int:
    with open(args.plan) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as e:
            raise BallotParseError(f"plan file is not JSON: {e}") from None
    if isinstance(doc, dict) and "plan" in doc:
        doc = doc["plan"]
    assertions = load_plan_assertions(doc, election)
    reported = load_election(args.reported, args.format) if args.reported else None
    params = _params(args)
    sim = simulate_audit(election, assertions, params, trials=args.trials, seed=args.seed,
                         reported=reported)
    estimate = doc.get("overall_asn") if isinstance(doc, dict) else None
    payload = sim_to_dict(sim, election)
    payload["estimated_asn"] = estimate
    _emit(args, {"simulation": payload}, out)
    if args.report_dir:
        sim_files(args.report_dir, sim, estimate)
    if args.json != "-":
        print(f"trials: {sim.trials} (seed {sim.seed}, error rate {sim.error_rate})", file=out)
        print(f"completion rate: {sim.completion_rate:.3f}", file=out)
        print(f"mean sample: {sim.mean_sample:.1f}  90th percentile: {sim.p90_sample:.0f}"
              + (f"  estimate: {estimate}" if estimate is not None else ""), file=out)
    return EXIT_OK


COMMANDS = {
    "tabulate": cmd_tabulate,
    "batch-check": cmd_batch_check,
    "plan-frw": cmd_plan_frw,
    "plan-general": cmd_plan_general,
    "export-assertions": cmd_export,
    "simulate": cmd_simulate,
}


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    try:
        parser = build_parser()
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_help(sys.stderr)
            return EXIT_ERROR
        if getattr(args, "trials", 1) < 1:
            raise UsageError("--trials must be positive")
        election = load_election(args.election, args.format)
        return COMMANDS[args.command](args, election, out)
    except UsageError as e:
        print(f"stvrla: error: {e}", file=sys.stderr)
        return EXIT_ERROR
    except FirstRoundWinnerCriterion as e:
        print(f"stvrla: first-round-winner criterion not met: {e}", file=sys.stderr)
        return EXIT_ERROR
    except (BallotParseError, TieError, OSError, KeyError, ValueError) as e:
        print(f"stvrla: error: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
