"""JSON-ready dictionaries for traces, plans, assertions and simulation reports.

Rationals are written twice: a rounded decimal string and an exact "p/q"
string under the same key with an ``_exact`` suffix.
"""

from __future__ import annotations

from decimal import Decimal, localcontext
from fractions import Fraction
from typing import Sequence

from .assertions import KINDS, Assertion
from .ballots import Election
from .batch import BatchCheckPlan
from .frw import AuditPlan
from .general import PartialAuditReport
from .plan import PlannedAssertion
from .sim import SimReport
from .tabulate import TabulationTrace

PLACES = 6


def dec(x, places: int = PLACES) -> str:
    x = Fraction(x)
    with localcontext() as ctx:
        ctx.prec = 60
        q = Decimal(x.numerator) / Decimal(x.denominator)
        return str(q.quantize(Decimal(1).scaleb(-places)))


def exact(x) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def rational_fields(key: str, x) -> dict:
    if x is None:
        return {key: None, f"{key}_exact": None}
    return {key: dec(x), f"{key}_exact": exact(x)}


def trace_to_dict(trace: TabulationTrace, election: Election) -> dict:
    names = election.candidates
    rounds = []
    for r in trace.rounds:
        entry = {
            "round": r.index,
            "action": r.action.kind.value,
            "subject": [names[c] for c in r.action.subject],
            "tie": r.action.tie,
            "tallies": {names[c]: dec(t) for c, t in r.tallies.items()},
            "tallies_exact": {names[c]: exact(t) for c, t in r.tallies.items()},
            **rational_fields("exhausted", r.exhausted),
        }
        if r.action.transfer_value is not None:
            entry.update(rational_fields("transfer_value", r.action.transfer_value))
        rounds.append(entry)
    return {
        "quota": trace.quota,
        "total_valid": trace.total_valid,
        "batch_first": trace.batch_first,
        "winners": [names[c] for c in trace.winners],
        "first_pref_tallies": {names[c]: t for c, t in trace.first_pref_tallies.items()},
        "transfer_values": {names[c]: dec(t) for c, t in trace.transfer_values.items()},
        "transfer_values_exact": {names[c]: exact(t) for c, t in trace.transfer_values.items()},
        "ties": trace.ties,
        "rounds": rounds,
    }


def assertion_to_dict(item: PlannedAssertion | Assertion, names: Sequence[str]) -> dict:
    a = item.assertion if isinstance(item, PlannedAssertion) else item
    out = {
        "type": a.kind,
        "label": a.label,
        "winner": names[a.winner],
        "loser": names[a.loser] if a.loser is not None else None,
        "already_elected": [names[c] for c in a.already_elected],
        "tau_lower": [dec(t) for t in a.tau_lower],
        "tau_upper": [dec(t) for t in a.tau_upper],
        "tau_lower_exact": [exact(t) for t in a.tau_lower],
        "tau_upper_exact": [exact(t) for t in a.tau_upper],
        "g_star": sorted(names[c] for c in a.g_star),
        "o_star": sorted(names[c] for c in a.o_star),
        "compat": a.compat,
        "excluded": sorted(names[c] for c in a.excluded),
        "description": a.describe(names),
    }
    if isinstance(item, PlannedAssertion):
        out.update(rational_fields("margin", item.margin))
        out["winner_tally"] = dec(item.check.lhs)
        out["loser_tally"] = dec(item.check.rhs)
        out["asn"] = item.asn
    return out


def assertion_from_dict(d: dict, election: Election) -> Assertion:
    """Inverse of assertion_to_dict (prices and tallies are ignored)."""
    kind = d.get("type")
    if kind not in KINDS:
        raise ValueError(f"unknown assertion type {kind!r}")
    cid = election.cid

    def bounds(key):
        exact_key = f"{key}_exact"
        return tuple(Fraction(t) for t in d.get(exact_key, d.get(key, [])))

    return Assertion(
        kind,
        cid(d["winner"]),
        cid(d["loser"]) if d.get("loser") is not None else None,
        tuple(cid(c) for c in d.get("already_elected", [])),
        bounds("tau_lower"),
        bounds("tau_upper"),
        frozenset(cid(c) for c in d.get("g_star", [])),
        frozenset(cid(c) for c in d.get("o_star", [])),
        bool(d.get("compat", False)),
        frozenset(cid(c) for c in d.get("excluded", [])),
    )


def load_plan_assertions(data, election: Election) -> list[Assertion]:
    """Assertions from any plan document written by this package, or a bare list."""
    if isinstance(data, list):
        return [assertion_from_dict(d, election) for d in data]
    out = []
    batch = data.get("batch") or {}
    for d in batch.get("assertions", []) + data.get("assertions", []):
        out.append(assertion_from_dict(d, election))
    if not out and data.get("kind") != "infeasible":
        raise ValueError("plan document holds no assertions")
    return out


def batch_to_dict(plan: BatchCheckPlan, election: Election) -> dict:
    names = election.candidates
    return {
        "top": [names[c] for c in plan.top],
        "batch": [names[c] for c in plan.batch],
        "feasible": plan.feasible,
        "overall_asn": plan.overall_asn,
        "assertions": [assertion_to_dict(it, names) for it in plan.assertions],
    }


def frw_plan_to_dict(plan: AuditPlan, election: Election) -> dict:
    names = election.candidates
    return {
        "planner": "first-round-winner",
        "kind": plan.kind,
        "winners": [names[c] for c in plan.winners],
        "overall_asn": plan.overall_asn,
        **rational_fields("reported_tau", plan.reported_tau),
        **rational_fields("tau_lower", plan.tau_lower),
        **rational_fields("tau_upper", plan.tau_upper),
        "accepted_asns": plan.accepted_asns,
        "trials": [
            {"tau_lower": dec(t.tau_lower), "tau_upper": dec(t.tau_upper),
             "asn": t.asn, "accepted": t.accepted}
            for t in plan.trials
        ],
        "assertions": [assertion_to_dict(it, names) for it in plan.assertions],
        "batch": batch_to_dict(plan.batch, election) if plan.batch else None,
    }


def general_report_to_dict(report: PartialAuditReport, election: Election) -> dict:
    names = election.candidates

    def nameset(s):
        return [names[c] for c in sorted(s)]

    return {
        "planner": "general",
        "kind": report.kind,
        "winners": [names[c] for c in report.winners],
        "definite_winners": nameset(report.definite_winners),
        "definite_losers": nameset(report.definite_losers),
        "potential_winners": nameset(report.potential_winners),
        "remaining_pairs": [[names[a], names[b]] for a, b in report.remaining_pairs],
        "stage1_count": report.stage1_count,
        "stage2_asn": report.stage2_asn,
        "stage3_asn": report.stage3_asn,
        "overall_asn": report.overall_asn,
        "reduced": [names[c] for c in report.reduced],
        "assertions": [assertion_to_dict(it, names) for it in report.assertions],
        "batch": batch_to_dict(report.batch, election) if report.batch else None,
    }


def sim_to_dict(report: SimReport, election: Election) -> dict:
    names = election.candidates
    return {
        "trials": report.trials,
        "seed": report.seed,
        "error_rate": report.error_rate,
        "mode": report.mode,
        "population": report.population,
        "completion_rate": report.completion_rate,
        "mean_sample": report.mean_sample,
        "p90_sample": report.p90_sample,
        "per_assertion": [
            {
                "description": s.assertion.describe(names),
                "certified_rate": s.certified_rate,
                "mean_sample": s.mean_sample,
            }
            for s in report.per_assertion
        ],
    }

