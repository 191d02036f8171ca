"""Assertion types, their tallies, and conversion to assorters.

Assertion kinds:

    IQ(c)            c has at least a quota on first preferences
    UT(c, hi)        c's transfer value is below hi
    LT*(c, lo)       c's transfer value is above lo
    AG*(w, l, W, lo, hi)
                     w's minimum tally beats l's maximum tally, given the
                     candidates W were seated first with transfer values
                     inside (lo, hi). AG(w, l) is AG* with W empty.
    NL*(w, l, W, lo, hi, G, O)
                     w never loses to l in the same context, where every
                     g in G always beats l and w always beats every o in O.

The comparison is always strict: equality means the assertion fails.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Sequence

from .ballots import Election, project

IQ, UT, LT, AG, NL = "IQ", "UT", "LT*", "AG*", "NL*"
KINDS = (IQ, UT, LT, AG, NL)

# largest possible transfer value in a 2-seat contest
MAX_TV_2SEAT = Fraction(2, 3)


@dataclass(frozen=True)
class Assertion:
    kind: str
    winner: int
    loser: int | None = None
    already_elected: tuple[int, ...] = ()
    tau_lower: tuple[Fraction, ...] = ()
    tau_upper: tuple[Fraction, ...] = ()
    g_star: frozenset[int] = frozenset()
    o_star: frozenset[int] = frozenset()
    compat: bool = False
    excluded: frozenset[int] = field(default=frozenset())

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown assertion kind {self.kind!r}")
        if self.kind in (AG, NL):
            w, l, W = self.winner, self.loser, self.already_elected
            if l is None or w == l:
                raise ValueError(f"{self.kind} needs distinct winner and loser")
            if w in W or l in W:
                raise ValueError(f"{self.kind}: winner/loser cannot be already elected")
            if len(self.tau_lower) != len(W) or len(self.tau_upper) != len(W):
                raise ValueError(f"{self.kind}: bound vectors must match already_elected")
            for lo, hi in zip(self.tau_lower, self.tau_upper):
                if not 0 <= lo < hi <= 1:
                    raise ValueError(f"{self.kind}: need 0 <= lower < upper <= 1, got {lo}, {hi}")
        if self.kind == UT and not 0 < self.tau_upper[0] < 1:
            raise ValueError("UT bound must lie in (0, 1)")
        if self.kind == LT and not 0 <= self.tau_lower[0] < 1:
            raise ValueError("LT* bound must lie in [0, 1)")

    @property
    def label(self) -> str:
        if self.kind == AG and not self.already_elected:
            return "AG"
        if self.kind == NL and self.compat:
            return "NL"
        return self.kind

    @property
    def pair(self) -> tuple[int, int | None]:
        return self.winner, self.loser

    def describe(self, names: Sequence[str]) -> str:
        w = names[self.winner]
        if self.kind == IQ:
            return f"IQ({w})"
        if self.kind == UT:
            return f"UT({w}, {float(self.tau_upper[0]):.4f})"
        if self.kind == LT:
            return f"LT*({w}, {float(self.tau_lower[0]):.4f})"
        args = [w, names[self.loser]]
        if self.already_elected:
            args.append("[" + ", ".join(names[c] for c in self.already_elected) + "]")
        return f"{self.label}({', '.join(args)})"


def iq(c: int, excluded=frozenset()) -> Assertion:
    return Assertion(IQ, c, excluded=frozenset(excluded))


def ut(c: int, tau_upper, excluded=frozenset()) -> Assertion:
    return Assertion(UT, c, tau_upper=(Fraction(tau_upper),), excluded=frozenset(excluded))


def lt(c: int, tau_lower, excluded=frozenset()) -> Assertion:
    return Assertion(LT, c, tau_lower=(Fraction(tau_lower),), excluded=frozenset(excluded))


def ag(w: int, l: int, excluded=frozenset()) -> Assertion:
    return Assertion(AG, w, l, excluded=frozenset(excluded))


def agstar(w, l, W=(), lower=(), upper=(), excluded=frozenset()) -> Assertion:
    return Assertion(
        AG, w, l, tuple(W), tuple(map(Fraction, lower)), tuple(map(Fraction, upper)),
        excluded=frozenset(excluded),
    )


def nlstar(w, l, W=(), lower=(), upper=(), G=(), O=(), excluded=frozenset()) -> Assertion:
    return Assertion(
        NL, w, l, tuple(W), tuple(map(Fraction, lower)), tuple(map(Fraction, upper)),
        frozenset(G), frozenset(O), excluded=frozenset(excluded),
    )


def nl(w, l, W=(), G=(), O=(), excluded=frozenset()) -> Assertion:
    """Bound-free never-loses: lower bounds 0, upper bounds 2/3."""
    W = tuple(W)
    a = nlstar(w, l, W, [0] * len(W), [MAX_TV_2SEAT] * len(W), G, O, excluded)
    return replace(a, compat=True)


@dataclass(frozen=True)
class AssertionCheck:
    holds: bool
    lhs: Fraction
    rhs: Fraction


def _check(lhs, rhs) -> AssertionCheck:
    lhs, rhs = Fraction(lhs), Fraction(rhs)
    return AssertionCheck(lhs > rhs, lhs, rhs)


# -- per-ballot contributions ------------------------------------------------

def _reduced_min(ranking, w, W, lower):
    """Product of lower bounds over W-members ahead of w, if w heads the ranking once W is skipped."""
    prod = 1
    for c in ranking:
        if c == w:
            return prod
        try:
            prod *= lower[W.index(c)]
        except ValueError:
            return 0
    return 0


def _maxt(ranking, l, W, upper):
    best = 0
    for c in ranking:
        if c == l:
            return best
        if c in W:
            best = max(best, upper[W.index(c)])
    return best


def agstar_contrib_min(ranking, w, W=(), lower=()):
    if not ranking:
        return 0
    if ranking[0] == w:
        return 1
    return _reduced_min(ranking, w, tuple(W), tuple(lower))


def agstar_contrib_max(ranking, l, w, W=(), upper=()):
    if l not in ranking:
        return 0
    if w in ranking and ranking.index(w) < ranking.index(l):
        return 0
    if ranking[0] in W:
        return _maxt(ranking, l, tuple(W), tuple(upper))
    return 1


def nlstar_contrib_min(ranking, w, W=(), lower=(), O=frozenset()):
    for c in ranking:
        if c not in O:
            if c == w:
                return 1
            break
    return _reduced_min(ranking, w, tuple(W), tuple(lower))


def nlstar_contrib_max(ranking, l, w, W=(), upper=(), G=frozenset()):
    if l not in ranking:
        return 0
    for c in ranking:
        if c == l:
            break
        if c == w or c in G:
            return 0
    if ranking[0] in W:
        return _maxt(ranking, l, tuple(W), tuple(upper))
    return 1


def _weighted_sum(election: Election, fn: Callable, excluded=frozenset()) -> Fraction:
    # contributions take few distinct values; sum counts per value, multiply once
    by_value: dict = {}
    keep = None
    if excluded - election.excluded:
        keep = set(range(len(election.candidates))) - excluded
    for g in election.ballots:
        r = g.ranking if keep is None else project(g.ranking, keep)
        v = fn(r)
        if v:
            by_value[v] = by_value.get(v, 0) + g.count
    return sum((Fraction(v) * k for v, k in by_value.items()), Fraction(0))


# -- evaluation ----------------------------------------------------------------

def first_pref_tally(election: Election, c: int, excluded=frozenset()) -> int:
    return int(_weighted_sum(election, lambda r: 1 if r and r[0] == c else 0, excluded))


def eval_iq(election: Election, c: int, excluded=frozenset()) -> AssertionCheck:
    return _check(first_pref_tally(election, c, excluded), election.quota - 1)


def eval_ut(election: Election, c: int, tau_upper, excluded=frozenset()) -> AssertionCheck:
    # t < Q/(1 - hi), written as Q/(1 - hi) > t
    bound = Fraction(election.quota) / (1 - Fraction(tau_upper))
    return _check(bound, first_pref_tally(election, c, excluded))


def eval_lt(election: Election, c: int, tau_lower, excluded=frozenset()) -> AssertionCheck:
    bound = Fraction(election.quota) / (1 - Fraction(tau_lower))
    return _check(first_pref_tally(election, c, excluded), bound)


def eval_agstar(election, w, l, W=(), lower=(), upper=(), excluded=frozenset()) -> AssertionCheck:
    W, lower, upper = tuple(W), tuple(map(Fraction, lower)), tuple(map(Fraction, upper))
    lhs = _weighted_sum(election, lambda r: agstar_contrib_min(r, w, W, lower), excluded)
    rhs = _weighted_sum(election, lambda r: agstar_contrib_max(r, l, w, W, upper), excluded)
    return _check(lhs, rhs)


def eval_nlstar(election, w, l, W=(), lower=(), upper=(), G=(), O=(), excluded=frozenset()) -> AssertionCheck:
    W, lower, upper = tuple(W), tuple(map(Fraction, lower)), tuple(map(Fraction, upper))
    G, O = frozenset(G), frozenset(O)
    lhs = _weighted_sum(election, lambda r: nlstar_contrib_min(r, w, W, lower, O), excluded)
    rhs = _weighted_sum(election, lambda r: nlstar_contrib_max(r, l, w, W, upper, G), excluded)
    return _check(lhs, rhs)


def evaluate(a: Assertion, election: Election) -> AssertionCheck:
    if a.kind == IQ:
        return eval_iq(election, a.winner, a.excluded)
    if a.kind == UT:
        return eval_ut(election, a.winner, a.tau_upper[0], a.excluded)
    if a.kind == LT:
        return eval_lt(election, a.winner, a.tau_lower[0], a.excluded)
    if a.kind == AG:
        return eval_agstar(
            election, a.winner, a.loser, a.already_elected, a.tau_lower, a.tau_upper, a.excluded,
        )
    return eval_nlstar(
        election, a.winner, a.loser, a.already_elected, a.tau_lower, a.tau_upper,
        a.g_star, a.o_star, a.excluded,
    )


def holds(a: Assertion, election: Election) -> bool:
    return evaluate(a, election).holds


# -- assorters -------------------------------------------------------------------

ALWAYS_TRUE, ALWAYS_FALSE = "always-true", "always-false"


@dataclass(frozen=True)
class Assorter:
    """Per-ballot score in [0, upper] whose mean exceeds 1/2 iff the assertion holds.

    Built from a per-ballot difference d(b) (winner-side minus loser-side
    contribution, or indicator minus a per-ballot threshold) with a priori
    range [low, high], low < 0: score = (d - low) / (-2 low).
    """

    assertion: Assertion
    upper: Fraction
    mean: Fraction
    population: int
    low: Fraction
    diff: Callable = field(repr=False, compare=False)
    degenerate: str | None = None

    @property
    def margin(self) -> Fraction:
        return 2 * self.mean - 1

    def score(self, ranking: Sequence[int]) -> Fraction:
        if self.degenerate == ALWAYS_TRUE:
            return Fraction(1)
        if self.degenerate == ALWAYS_FALSE:
            return Fraction(0)
        if self.assertion.excluded:
            ranking = tuple(c for c in ranking if c not in self.assertion.excluded)
        return (Fraction(self.diff(ranking)) - self.low) / (-2 * self.low)

    def mean_over(self, election: Election) -> Fraction:
        total = sum((self.score(g.ranking) * g.count for g in election.ballots), Fraction(0))
        return total / election.total_valid if election.total_valid else Fraction(0)


def _diff_and_range(a: Assertion, election: Election):
    n = election.total_valid
    q = election.quota
    c = a.winner

    def first_is(r):
        return 1 if r and r[0] == c else 0

    if a.kind in (IQ, LT):
        k = Fraction(q - 1) if a.kind == IQ else Fraction(q) / (1 - a.tau_lower[0])
        thr = k / n
        return (lambda r: first_is(r) - thr), -thr, 1 - thr
    if a.kind == UT:
        thr = Fraction(q) / (1 - a.tau_upper[0]) / n
        return (lambda r: thr - first_is(r)), thr - 1, thr
    w, l, W = a.winner, a.loser, a.already_elected
    lo, hi = a.tau_lower, a.tau_upper
    if a.kind == AG:
        fn = lambda r: agstar_contrib_min(r, w, W, lo) - agstar_contrib_max(r, l, w, W, hi)
    else:
        G, O = a.g_star, a.o_star
        fn = lambda r: nlstar_contrib_min(r, w, W, lo, O) - nlstar_contrib_max(r, l, w, W, hi, G)
    return fn, Fraction(-1), Fraction(1)


def to_assorter(a: Assertion, election: Election) -> Assorter:
    n = election.total_valid
    if n == 0:
        raise ValueError("cannot build an assorter over an empty ballot set")
    diff, low, high = _diff_and_range(a, election)
    if low > 0:
        return Assorter(a, Fraction(1), Fraction(1), n, Fraction(-1), diff, ALWAYS_TRUE)
    if high <= 0:
        return Assorter(a, Fraction(1), Fraction(0), n, Fraction(-1), diff, ALWAYS_FALSE)
    if low == 0:
        low = -high
    upper = (high - low) / (-2 * low)
    sorter = Assorter(a, upper, Fraction(0), n, low, diff)
    return Assorter(a, upper, sorter.mean_over(election), n, low, diff)
