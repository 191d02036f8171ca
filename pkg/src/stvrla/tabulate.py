"""US-style STV tabulation in exact rational arithmetic.

Every ballot starts at value 1. A candidate whose tally reaches the quota is
seated (largest surplus first) and the ballots in their pile move on at
value * (tally - quota) / tally. Otherwise the lowest candidate is
eliminated and their ballots move on at current value. Ballots only move to
candidates that are still standing and below quota; a ballot with no such
candidate left is exhausted.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction

from .ballots import Election


class TieError(RuntimeError):
    """Raised in strict mode when a tie has to be broken."""


class ActionKind(str, enum.Enum):
    BATCH_ELIMINATE = "batch-eliminate"
    ELIMINATE = "eliminate"
    ELECT = "elect"
    ELECT_REMAINING = "elect-remaining"


@dataclass(frozen=True)
class RoundAction:
    kind: ActionKind
    subject: tuple[int, ...]
    transfer_value: Fraction | None = None
    tie: bool = False


@dataclass(frozen=True)
class Round:
    index: int
    tallies: dict[int, Fraction]  # standing candidates, at the start of the round
    action: RoundAction
    exhausted: Fraction  # cumulative, at the start of the round


@dataclass
class TabulationTrace:
    quota: int
    total_valid: int
    rounds: list[Round] = field(default_factory=list)
    winners: list[int] = field(default_factory=list)
    first_pref_tallies: dict[int, int] = field(default_factory=dict)
    transfer_values: dict[int, Fraction] = field(default_factory=dict)
    batch_first: bool = False
    ties: int = 0

    def first_winner(self) -> int | None:
        for r in self.rounds:
            if r.action.kind is ActionKind.BATCH_ELIMINATE:
                continue
            if r.action.kind is ActionKind.ELECT:
                return r.action.subject[0]
            return None
        return None


def transfer_value(tally: Fraction | int, quota: int) -> Fraction:
    tally = Fraction(tally)
    if quota <= 0 or tally < quota:
        raise ValueError(f"transfer value needs tally >= quota > 0 (tally={tally}, quota={quota})")
    return (tally - quota) / tally


def mention_count(election: Election, c: int) -> int:
    return sum(g.count for g in election.ballots if c in g.ranking)


def top_candidates(election: Election, n: int | None = None) -> list[int]:
    """The n highest first-preference candidates; ties go to the lower id."""
    n = election.seats if n is None else n
    fp = election.first_pref_tallies()
    return sorted(fp, key=lambda c: (-fp[c], c))[:n]


def batch_eliminate(election: Election) -> frozenset[int]:
    """Candidates mentioned on fewer ballots than the N-th highest first-preference tally."""
    top = top_candidates(election)
    if len(top) < election.seats:
        return frozenset()
    fp = election.first_pref_tallies()
    threshold = min(fp[c] for c in top)
    return frozenset(
        c for c in election.active
        if c not in top and mention_count(election, c) < threshold
    )


class _Parcel:
    __slots__ = ("ranking", "pos", "count", "value")

    def __init__(self, ranking, pos, count, value):
        self.ranking = ranking
        self.pos = pos
        self.count = count
        self.value = value


def tabulate(election: Election, batch_first: bool = False, strict: bool = False) -> TabulationTrace:
    active = election.active
    if len(active) < election.seats:
        raise ValueError(f"{len(active)} candidates for {election.seats} seats")
    quota = election.quota
    trace = TabulationTrace(
        quota=quota,
        total_valid=election.total_valid,
        first_pref_tallies=election.first_pref_tallies(),
        batch_first=batch_first,
    )
    piles: dict[int, list[_Parcel]] = {c: [] for c in active}
    tallies: dict[int, Fraction] = {c: Fraction(0) for c in active}
    exhausted = Fraction(0)
    for g in election.ballots:
        if g.ranking:
            piles[g.ranking[0]].append(_Parcel(g.ranking, 0, g.count, Fraction(1)))
            tallies[g.ranking[0]] += g.count
        else:
            exhausted += g.count
    standing = set(active)
    elected: list[int] = []

    def distribute(parcels, eligible, factor):
        nonlocal exhausted
        for p in parcels:
            value = p.value * factor
            for pos in range(p.pos + 1, len(p.ranking)):
                c = p.ranking[pos]
                if c in eligible:
                    p.pos, p.value = pos, value
                    piles[c].append(p)
                    tallies[c] += value * p.count
                    break
            else:
                exhausted += value * p.count

    def snapshot():
        return {c: tallies[c] for c in sorted(standing)}, exhausted

    def pick(cands, key):
        best = max(key(c) for c in cands)
        tied = sorted(c for c in cands if key(c) == best)
        if len(tied) > 1:
            if strict:
                raise TieError(f"tie between candidates {tied}")
            trace.ties += 1
        return tied[0], len(tied) > 1

    if batch_first:
        batch = batch_eliminate(election)
        if batch:
            assert not batch & set(top_candidates(election))
            tallies_now, ex_now = snapshot()
            standing -= batch
            # batch members cannot receive, so one pass in any order is exact.
            # No quota test here: nobody is seated before the batch is cleared.
            eligible = set(standing)
            for c in sorted(batch):
                distribute(piles.pop(c), eligible, Fraction(1))
                del tallies[c]
            trace.rounds.append(Round(
                0, tallies_now, RoundAction(ActionKind.BATCH_ELIMINATE, tuple(sorted(batch))), ex_now,
            ))

    index = 1
    while len(elected) < election.seats:
        tallies_now, ex_now = snapshot()
        remaining = election.seats - len(elected)
        if len(standing) <= remaining:
            subject = tuple(sorted(standing, key=lambda c: (-tallies[c], c)))
            elected.extend(subject)
            standing.clear()
            trace.rounds.append(Round(
                index, tallies_now, RoundAction(ActionKind.ELECT_REMAINING, subject), ex_now,
            ))
            break
        over = [c for c in standing if tallies[c] >= quota]
        if over:
            c, tie = pick(over, lambda x: tallies[x])
            tv = transfer_value(tallies[c], quota)
            trace.transfer_values[c] = tv
            standing.discard(c)
            elected.append(c)
            trace.rounds.append(Round(
                index, tallies_now, RoundAction(ActionKind.ELECT, (c,), tv, tie), ex_now,
            ))
            # eligibility is fixed at the start of a distribution; a receiver
            # crossing quota part-way still takes the rest of this pile
            if len(elected) < election.seats:
                eligible = {x for x in standing if tallies[x] < quota}
                distribute(piles.pop(c), eligible, tv)
            del tallies[c]
        else:
            c, tie = pick(standing, lambda x: -tallies[x])
            standing.discard(c)
            trace.rounds.append(Round(
                index, tallies_now, RoundAction(ActionKind.ELIMINATE, (c,), None, tie), ex_now,
            ))
            eligible = {x for x in standing if tallies[x] < quota}
            distribute(piles.pop(c), eligible, Fraction(1))
            del tallies[c]
        index += 1

    trace.winners = elected
    return trace


def winners(election: Election, batch_first: bool = False) -> list[int]:
    return tabulate(election, batch_first=batch_first).winners
