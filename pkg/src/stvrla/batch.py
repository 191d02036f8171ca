"""Certify a batch elimination: every top candidate always beats every batch member."""

from __future__ import annotations

from dataclasses import dataclass, field

from .assertions import ag
from .ballots import Election
from .plan import Costing, PlannedAssertion, overall_asn
from .risk import AuditParams
from .tabulate import batch_eliminate, top_candidates


@dataclass
class BatchCheckPlan:
    top: list[int]
    batch: list[int]
    assertions: list[PlannedAssertion] = field(default_factory=list)
    feasible: bool = True

    @property
    def overall_asn(self) -> int | None:
        return overall_asn(self.assertions)


def plan_batch_check(election: Election, params: AuditParams | None = None,
                     cost: Costing | None = None) -> BatchCheckPlan:
    cost = cost or Costing(election, params)
    top = top_candidates(election)
    batch = sorted(batch_eliminate(election))
    items = [cost(ag(t, c, election.excluded)) for t in top for c in batch]
    return BatchCheckPlan(top, batch, items, all(it.holds for it in items))
