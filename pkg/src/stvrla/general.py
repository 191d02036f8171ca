"""Five-stage planner for 2-seat contests without a first-round winner.

1. Price every AG(c, c') that holds.
2. A candidate beaten by two others is a definite loser (DL); keep the
   two cheapest AGs for each.
3. Every other pair of candidates that could be the winning pair, besides
   the reported one, is ruled out with an NL if possible; the rest are Rem.
4. While definite losers cost more than stage 3, try ruling out the
   dearest one through pairs instead.
5. Summarise: definite winners, definite losers and potential winners.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

from .assertions import ag, nl
from .ballots import Election
from .batch import BatchCheckPlan, plan_batch_check
from .frw import reduced_election
from .plan import (
    FULL_RLA, INFEASIBLE, PARTIAL_RLA, Costing, PlannedAssertion, as_asn, dedupe,
    reduce_with_helpers,
)
from .risk import AuditParams
from .tabulate import TabulationTrace, tabulate

Pair = frozenset  # unordered pair of candidate ids


@dataclass
class PairRuling:
    pair: Pair
    nl: PlannedAssertion
    helpers: list[PlannedAssertion]

    @property
    def cost(self) -> float:
        return max([self.nl.cost] + [h.cost for h in self.helpers])

    @property
    def assertions(self) -> list[PlannedAssertion]:
        return [self.nl] + self.helpers


@dataclass
class PlannerState:
    election: Election
    winners: tuple[int, ...]
    ag_map: dict[tuple[int, int], PlannedAssertion]
    definite_losers: dict[int, list[PlannedAssertion]]  # loser -> its two AGs
    rulings: dict[Pair, PairRuling]
    remaining: set[Pair]
    reductions: list[int] = field(default_factory=list)  # candidates moved out of DL by stage 4

    @property
    def stage2_cost(self) -> float:
        return max((_dl_cost(v) for v in self.definite_losers.values()), default=0)

    @property
    def stage3_cost(self) -> float:
        return max((r.cost for r in self.rulings.values()), default=0)


def _dl_cost(items: list[PlannedAssertion]) -> float:
    return max(it.cost for it in items)


@dataclass
class PartialAuditReport:
    winners: tuple[int, ...]
    definite_losers: set[int]
    definite_winners: set[int]
    potential_winners: set[int]
    remaining_pairs: list[tuple[int, int]]
    assertions: list[PlannedAssertion]
    stage1_count: int
    stage2_asn: int | None
    stage3_asn: int | None
    kind: str
    reduced: list[int] = field(default_factory=list)
    batch: BatchCheckPlan | None = None

    @property
    def all_assertions(self) -> list[PlannedAssertion]:
        extra = self.batch.assertions if self.batch else []
        return list(extra) + list(self.assertions)

    @property
    def overall_asn(self) -> int | None:
        if self.kind == INFEASIBLE:
            return None
        costs = [it.cost for it in self.all_assertions]
        return as_asn(max(costs, default=0))


def stage1_all_ags(election: Election, params: AuditParams | None = None,
                   cost: Costing | None = None) -> dict[tuple[int, int], PlannedAssertion]:
    cost = cost or Costing(election, params)
    out = {}
    for w in election.active:
        for l in election.active:
            if w != l:
                it = cost(ag(w, l, election.excluded))
                if it.holds:
                    out[w, l] = it
    return out


def stage2_definite_losers(ag_map, election: Election):
    """(DL with each loser's two cheapest dominating AGs, stage-2 ASN)."""
    dl = {}
    for c in election.active:
        beaters = sorted(
            (it for (w, l), it in ag_map.items() if l == c),
            key=lambda it: (it.cost, it.assertion.winner),
        )
        if len(beaters) >= 2:
            dl[c] = beaters[:2]
    return dl, as_asn(max((_dl_cost(v) for v in dl.values()), default=0))


def rule_out_pair(election: Election, pair: Pair, ag_map, cost: Costing) -> PairRuling | None:
    """Cheapest NL showing that `pair` cannot be the winning pair.

    With a seated, the other member b is shown to lose to some c' that is
    neither a nor b. Helpers: G holds candidates that always beat b (other
    than a, which is seated and no longer standing), O the candidates
    that c' always beats.
    """
    ex = election.excluded
    best: PairRuling | None = None
    for seated, loser in sorted([tuple(sorted(pair)), tuple(sorted(pair, reverse=True))]):
        g_helpers = {
            g: it for (g, l), it in ag_map.items() if l == loser and g != seated
        }
        for other in election.active:
            if other in pair:
                continue
            o_helpers = {o: it for (w, o), it in ag_map.items() if w == other}
            make = lambda G, O, other=other: nl(other, loser, [seated], G, O, ex)
            item, helpers = reduce_with_helpers(make, g_helpers, o_helpers, cost)
            if item is None:
                continue
            ruling = PairRuling(pair, item, helpers)
            if best is None or ruling.cost < best.cost:
                best = ruling
    return best


def stage3_rule_out_pairs(election: Election, definite_losers, ag_map, winners,
                          params: AuditParams | None = None, cost: Costing | None = None):
    """(rulings by pair, remaining pairs, stage-3 ASN)."""
    cost = cost or Costing(election, params)
    pool = [c for c in election.active if c not in definite_losers]
    reported = Pair(winners)
    rulings, remaining = {}, set()
    for a, b in combinations(pool, 2):
        pair = Pair((a, b))
        if pair == reported:
            continue
        r = rule_out_pair(election, pair, ag_map, cost)
        if r is None:
            remaining.add(pair)
        else:
            rulings[pair] = r
    return rulings, remaining, as_asn(max((r.cost for r in rulings.values()), default=0))


def stage4_reduce(state: PlannerState, cost: Costing) -> PlannerState:
    while state.definite_losers and state.stage2_cost > state.stage3_cost:
        d = max(sorted(state.definite_losers), key=lambda c: _dl_cost(state.definite_losers[c]))
        d_cost = _dl_cost(state.definite_losers[d])
        pool = [c for c in state.election.active if c not in state.definite_losers]
        found = {}
        for c in pool:
            r = rule_out_pair(state.election, Pair((d, c)), state.ag_map, cost)
            if r is None:
                break
            found[r.pair] = r
        else:
            if max((r.cost for r in found.values()), default=0) < d_cost:
                del state.definite_losers[d]
                state.rulings.update(found)
                state.reductions.append(d)
                continue
        break
    return state


def stage5_summarize(state: PlannerState) -> PartialAuditReport:
    active = set(state.election.active)
    dl = set(state.definite_losers)
    winners = set(state.winners)
    rem = state.remaining
    if rem:
        # the true pair is the reported one or one left in Rem
        dw = set.intersection(winners, *map(set, rem))
        in_rem = set().union(*rem)
        dl |= active - winners - in_rem
        kind = PARTIAL_RLA
    else:
        dw = set(winners)
        dl |= active - winners
        kind = FULL_RLA
    items = [it for v in state.definite_losers.values() for it in v]
    for r in state.rulings.values():
        items += r.assertions
    return PartialAuditReport(
        winners=state.winners,
        definite_losers=dl,
        definite_winners=dw,
        potential_winners=active - dl,
        remaining_pairs=sorted(tuple(sorted(p)) for p in rem),
        assertions=dedupe(items),
        stage1_count=len(state.ag_map),
        stage2_asn=as_asn(state.stage2_cost),
        stage3_asn=as_asn(state.stage3_cost),
        kind=kind,
        reduced=list(state.reductions),
    )


def plan_general(election: Election, trace: TabulationTrace | None = None,
                 params: AuditParams | None = None) -> PartialAuditReport:
    if election.seats != 2:
        raise ValueError("the general planner handles 2-seat contests only")
    params = params or AuditParams()
    trace = trace or tabulate(election)
    batch = plan_batch_check(election, params) if trace.batch_first else None
    reduced = reduced_election(election, trace)
    cost = Costing(reduced, params)
    ag_map = stage1_all_ags(reduced, cost=cost)
    dl, _ = stage2_definite_losers(ag_map, reduced)
    rulings, remaining, _ = stage3_rule_out_pairs(reduced, dl, ag_map, trace.winners, cost=cost)
    state = PlannerState(reduced, tuple(trace.winners), ag_map, dl, rulings, remaining)
    report = stage5_summarize(stage4_reduce(state, cost))
    if batch is not None:
        gone = set(election.active) - set(reduced.active)
        report.definite_losers |= gone
        report.batch = batch
        if not batch.feasible:
            report.kind = INFEASIBLE
    return report
