"""Pieces shared by the planners: costed assertions and helper selection."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Mapping

from .assertions import Assertion, AssertionCheck, evaluate, to_assorter
from .ballots import Election
from .risk import AuditParams, estimate_asn

FULL_RLA, PARTIAL_RLA, INFEASIBLE = "full-rla", "partial-rla", "infeasible"


@dataclass(frozen=True)
class PlannedAssertion:
    assertion: Assertion
    check: AssertionCheck
    margin: Fraction
    asn: int | None  # None when the assertion is false on the reported ballots

    @property
    def holds(self) -> bool:
        return self.check.holds

    @property
    def cost(self) -> float:
        return math.inf if self.asn is None else self.asn


def overall_asn(items: Iterable[PlannedAssertion]) -> int | None:
    """Max of member ASNs; 0 for an empty set, None if any member is infeasible."""
    worst = 0
    for it in items:
        if it.asn is None:
            return None
        worst = max(worst, it.asn)
    return worst


def as_cost(asn: int | None) -> float:
    return math.inf if asn is None else asn


def as_asn(cost: float) -> int | None:
    return None if math.isinf(cost) else int(cost)


class Costing:
    """Evaluates and prices assertions against one reported election, with memoisation.

    A true assertion whose test does not stop before the whole population
    is drawn is priced at the population size (a full hand count).
    """

    def __init__(self, election: Election, params: AuditParams | None = None):
        self.election = election
        self.params = params or AuditParams()
        self._memo: dict[Assertion, PlannedAssertion] = {}

    def __call__(self, a: Assertion) -> PlannedAssertion:
        hit = self._memo.get(a)
        if hit is not None:
            return hit
        check = evaluate(a, self.election)
        sorter = to_assorter(a, self.election)
        asn = None
        if check.holds:
            asn = estimate_asn(sorter, params=self.params, election=self.election)
            if asn is None:
                asn = self.election.total_valid
        item = PlannedAssertion(a, check, sorter.margin, asn)
        self._memo[a] = item
        return item


def reduce_with_helpers(
    make_nl: Callable[[frozenset, frozenset], Assertion],
    g_helpers: Mapping[int, PlannedAssertion],
    o_helpers: Mapping[int, PlannedAssertion],
    cost: Costing,
) -> tuple[PlannedAssertion | None, list[PlannedAssertion]]:
    """Form a never-loses assertion, adding AG helpers only where they pay off.

    Helpers are tried cheapest first. One is kept when it lowers the NL's
    ASN and the NL without it costs more than the helper itself. If no
    subset works, the full G/O sets are used with every helper. Returns
    (None, []) when even the full sets do not make the NL hold.
    """
    full = cost(make_nl(frozenset(g_helpers), frozenset(o_helpers)))
    if not full.holds:
        return None, []
    G: set[int] = set()
    O: set[int] = set()
    used: list[PlannedAssertion] = []
    cur = cost(make_nl(frozenset(), frozenset()))
    options = sorted(
        [(it.cost, 0, c, it) for c, it in g_helpers.items()]
        + [(it.cost, 1, c, it) for c, it in o_helpers.items()],
        key=lambda t: t[:3],
    )
    for helper_cost, side, c, it in options:
        if not cur.cost > helper_cost:
            break
        G2, O2 = (G | {c}, O) if side == 0 else (G, O | {c})
        trial = cost(make_nl(frozenset(G2), frozenset(O2)))
        if trial.cost < cur.cost:
            G, O, cur = G2, O2, trial
            used.append(it)
    if not cur.holds:
        return full, list(g_helpers.values()) + list(o_helpers.values())
    return cur, used


def dedupe(items: Iterable[PlannedAssertion]) -> list[PlannedAssertion]:
    seen: dict[Assertion, PlannedAssertion] = {}
    for it in items:
        seen.setdefault(it.assertion, it)
    return list(seen.values())
