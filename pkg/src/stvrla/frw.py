"""Planner for 2-seat contests where someone reaches quota on first preferences.

The first winner w1 is confirmed by IQ(w1). The rest of the audit shows
that the second winner w2 never loses to any other candidate once w1 is
seated, with w1's transfer value pinned between a lower bound (LT*) and an
upper bound (UT). The search walks the lower bound up from 0 and, for
each, the upper bound up from the reported value plus delta, keeping a
configuration only while the audit gets strictly cheaper.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .assertions import AG, MAX_TV_2SEAT, NL, agstar, iq, lt, nlstar, ut
from .ballots import Election
from .batch import BatchCheckPlan, plan_batch_check
from .plan import (
    FULL_RLA, INFEASIBLE, Costing, PlannedAssertion, as_asn, dedupe, overall_asn,
    reduce_with_helpers,
)
from .risk import AuditParams
from .tabulate import ActionKind, TabulationTrace, tabulate

DEFAULT_DELTA = Fraction(1, 20)


class FirstRoundWinnerCriterion(ValueError):
    """The contest has no candidate elected in the first round."""


@dataclass
class BoundTrial:
    tau_lower: Fraction
    tau_upper: Fraction
    asn: int | None
    accepted: bool


@dataclass
class AuditPlan:
    winners: tuple[int, ...]
    assertions: list[PlannedAssertion]
    kind: str
    tau_lower: Fraction | None = None
    tau_upper: Fraction | None = None
    reported_tau: Fraction | None = None
    accepted_asns: list[int] = field(default_factory=list)
    trials: list[BoundTrial] = field(default_factory=list)
    batch: BatchCheckPlan | None = None

    @property
    def all_assertions(self) -> list[PlannedAssertion]:
        extra = self.batch.assertions if self.batch else []
        return list(extra) + list(self.assertions)

    @property
    def overall_asn(self) -> int | None:
        if self.kind == INFEASIBLE:
            return None
        return overall_asn(self.all_assertions)


def frw_criterion(trace: TabulationTrace) -> bool:
    return trace.first_winner() is not None


def reduced_election(election: Election, trace: TabulationTrace) -> Election:
    """The election the audit reasons about: batch-eliminated candidates projected away."""
    if trace.rounds and trace.rounds[0].action.kind is ActionKind.BATCH_ELIMINATE:
        return election.without(trace.rounds[0].action.subject)
    return election


def _clamped_upper(tau: Fraction) -> Fraction:
    return MAX_TV_2SEAT - min(Fraction(1, 1000), (MAX_TV_2SEAT - tau) / 2)


def plan_frw(election: Election, trace: TabulationTrace | None = None,
             delta: Fraction = DEFAULT_DELTA, params: AuditParams | None = None) -> AuditPlan:
    if election.seats != 2:
        raise ValueError("the first-round-winner planner handles 2-seat contests only")
    delta = Fraction(delta)
    if not 0 < delta < MAX_TV_2SEAT:
        raise ValueError(f"delta must lie in (0, 2/3), got {delta}")
    params = params or AuditParams()
    trace = trace or tabulate(election)
    if not frw_criterion(trace):
        raise FirstRoundWinnerCriterion("no candidate is elected in the first round")

    batch = None
    if trace.batch_first:
        batch = plan_batch_check(election, params)
    election = reduced_election(election, trace)
    ex = election.excluded
    cost = Costing(election, params)

    w1 = trace.first_winner()
    w2 = next(c for c in trace.winners if c != w1)
    tau = trace.transfer_values[w1]
    losers = [c for c in election.active if c not in (w1, w2)]
    iq_item = cost(iq(w1, ex))

    def configuration(lower: Fraction, upper: Fraction) -> tuple[float, list[PlannedAssertion]]:
        items = [iq_item, cost(ut(w1, upper, ex))]
        if lower > 0:
            items.append(cost(lt(w1, lower, ex)))
        ags = {}
        for c in losers + [w2]:
            for l in losers:
                if c != l:
                    it = cost(agstar(c, l, [w1], [lower], [upper], ex))
                    if it.holds:
                        ags[c, l] = it
        o_helpers = {o: it for (c, o), it in ags.items() if c == w2}
        for l in losers:
            g_helpers = {g: it for (g, x), it in ags.items() if x == l}
            make = lambda G, O, l=l: nlstar(w2, l, [w1], [lower], [upper], G, O, ex)
            nl_item, helpers = reduce_with_helpers(make, g_helpers, o_helpers, cost)
            if nl_item is None:
                return math.inf, items  # w2 cannot be shown to beat l here
            items += [nl_item] + helpers
        items = dedupe(items)
        return max(it.cost for it in items), items

    best, plan_items, chosen = math.inf, [], (None, None)
    trials: list[BoundTrial] = []
    accepted: list[int] = []
    lower = Fraction(0)
    first_outer = True
    # the first pass always runs: a zero lower bound needs no LT* even when tau is 0
    while first_outer or lower < tau:
        first_outer = False
        inner_best, inner_items, inner_upper = best, [], None
        upper = tau + delta
        single = upper >= MAX_TV_2SEAT
        if single:
            upper = _clamped_upper(tau)
        while upper < MAX_TV_2SEAT:
            asn, items = configuration(lower, upper)
            improved = asn < inner_best
            trials.append(BoundTrial(lower, upper, as_asn(asn), improved))
            if improved:
                inner_best, inner_items, inner_upper = asn, items, upper
            elif not math.isinf(inner_best):
                break
            # nothing feasible yet: keep widening the upper bound
            if single:
                break
            upper += delta
        if inner_best < best:
            best, plan_items, chosen = inner_best, inner_items, (lower, inner_upper)
            accepted.append(int(best))
        elif not math.isinf(best):
            break
        lower = lower + delta if lower > 0 else tau / 2
        if tau == 0:
            break

    if math.isinf(best):
        return AuditPlan((w1, w2), [], INFEASIBLE, reported_tau=tau, trials=trials, batch=batch)

    # an NL* is redundant next to an AG* on the same pair
    ag_pairs = {it.assertion.pair for it in plan_items if it.assertion.kind == AG}
    plan_items = [
        it for it in plan_items
        if not (it.assertion.kind == NL and it.assertion.pair in ag_pairs)
    ]
    kind = FULL_RLA if batch is None or batch.feasible else INFEASIBLE
    return AuditPlan(
        (w1, w2), plan_items, kind, chosen[0], chosen[1], tau, accepted, trials, batch,
    )
