"""Election and ballot types, projection, quota, and ballot-file ingestion.

Candidates are referred to by dense integer ids (their index in the
election's name table). A ranking is a tuple of ids, most preferred first.
"""

from __future__ import annotations

import json
import re
import shlex
from collections import Counter
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence


class BallotParseError(ValueError):
    pass


def droop_quota(total_valid: int, seats: int) -> int:
    if seats < 1:
        raise ValueError(f"seats must be positive, got {seats}")
    if total_valid < 0:
        raise ValueError(f"total_valid must be non-negative, got {total_valid}")
    return total_valid // (seats + 1) + 1


def project(ranking: Sequence[int], keep: Iterable[int]) -> tuple[int, ...]:
    """Largest subsequence of `ranking` made of members of `keep`, order preserved."""
    keep = keep if isinstance(keep, (set, frozenset)) else set(keep)
    return tuple(c for c in ranking if c in keep)


def first_preference(ranking: Sequence[int]) -> int | None:
    return ranking[0] if ranking else None


@dataclass(frozen=True)
class BallotGroup:
    ranking: tuple[int, ...]
    count: int


@dataclass(frozen=True)
class Election:
    """An STV contest: name table, grouped ballots, seats and quota.

    `excluded` holds candidates removed from every ranking (e.g. after a
    batch elimination); they stay in the name table so ids remain stable.
    `quota_explicit` records whether the quota came from the input rather
    than from the Droop formula.
    """

    name: str
    candidates: tuple[str, ...]
    ballots: tuple[BallotGroup, ...]
    seats: int
    quota: int
    quota_explicit: bool = False
    excluded: frozenset[int] = field(default_factory=frozenset)

    @classmethod
    def build(
        cls,
        candidates: Sequence[str],
        ballots: Iterable[tuple[Sequence[int], int]],
        seats: int,
        quota: int | None = None,
        name: str = "",
        excluded: Iterable[int] = (),
    ) -> "Election":
        """Merge identical rankings and compute the quota unless given."""
        if seats is None or seats < 1:
            raise ValueError(f"seats must be a positive integer, got {seats!r}")
        n = len(candidates)
        if len(set(candidates)) != n:
            raise ValueError("duplicate candidate names")
        excluded = frozenset(excluded)
        merged: Counter = Counter()
        for ranking, count in ballots:
            ranking = tuple(ranking)
            if count <= 0:
                raise ValueError(f"ballot count must be positive: {ranking} x {count}")
            if len(set(ranking)) != len(ranking):
                raise ValueError(f"duplicate candidate in ranking {ranking}")
            for c in ranking:
                if not 0 <= c < n:
                    raise ValueError(f"unknown candidate id {c}")
            if excluded:
                ranking = project(ranking, set(range(n)) - excluded)
            merged[ranking] += count
        groups = tuple(BallotGroup(r, k) for r, k in sorted(merged.items()))
        total = sum(g.count for g in groups)
        explicit = quota is not None
        if quota is None:
            quota = droop_quota(total, seats)
        if quota <= 0:
            raise ValueError(f"quota must be positive, got {quota}")
        return cls(
            name=name,
            candidates=tuple(candidates),
            ballots=groups,
            seats=seats,
            quota=quota,
            quota_explicit=explicit,
            excluded=excluded,
        )

    @property
    def total_valid(self) -> int:
        return sum(g.count for g in self.ballots)

    @property
    def active(self) -> tuple[int, ...]:
        """Candidate ids still in contention, in id order."""
        return tuple(c for c in range(len(self.candidates)) if c not in self.excluded)

    def cid(self, name: str) -> int:
        try:
            return self.candidates.index(name)
        except ValueError:
            raise KeyError(f"unknown candidate {name!r}") from None

    def names(self, ids: Iterable[int]) -> list[str]:
        return [self.candidates[c] for c in ids]

    def first_pref_tallies(self) -> dict[int, int]:
        tallies = {c: 0 for c in self.active}
        for g in self.ballots:
            if g.ranking:
                tallies[g.ranking[0]] += g.count
        return tallies

    def without(self, removed: Iterable[int]) -> "Election":
        """Project every ranking off `removed`; the quota is kept as is."""
        removed = frozenset(removed) | self.excluded
        keep = set(range(len(self.candidates))) - removed
        reduced = Election.build(
            self.candidates,
            ((project(g.ranking, keep), g.count) for g in self.ballots),
            seats=self.seats,
            quota=self.quota,
            name=self.name,
            excluded=removed,
        )
        return replace(reduced, quota_explicit=self.quota_explicit)

    def to_dict(self) -> dict:
        out = {
            "name": self.name,
            "seats": self.seats,
            "candidates": list(self.candidates),
            "ballots": [
                {"ranking": self.names(g.ranking), "count": g.count} for g in self.ballots
            ],
        }
        if self.quota_explicit:
            out["quota"] = self.quota
        if self.excluded:
            out["excluded"] = self.names(sorted(self.excluded))
        return out


def election_from_dict(data: dict) -> Election:
    if not isinstance(data, dict):
        raise BallotParseError("election JSON must be an object")
    if "seats" not in data:
        raise BallotParseError("missing 'seats'")
    seats = data["seats"]
    if not isinstance(seats, int) or seats < 1:
        raise BallotParseError(f"'seats' must be a positive integer, got {seats!r}")
    candidates = data.get("candidates")
    if not isinstance(candidates, list) or not all(isinstance(c, str) for c in candidates):
        raise BallotParseError("'candidates' must be a list of names")
    if len(set(candidates)) != len(candidates):
        raise BallotParseError("duplicate names in 'candidates'")
    index = {name: i for i, name in enumerate(candidates)}
    groups = []
    for k, entry in enumerate(data.get("ballots", [])):
        ranking = entry.get("ranking", [])
        count = entry.get("count", 1)
        label = f"ballot #{k} {ranking!r}"
        if not isinstance(count, int) or count <= 0:
            raise BallotParseError(f"{label}: count must be a positive integer, got {count!r}")
        if len(set(ranking)) != len(ranking):
            raise BallotParseError(f"{label}: duplicate candidate in ranking")
        try:
            ids = tuple(index[name] for name in ranking)
        except KeyError as e:
            raise BallotParseError(f"{label}: unknown candidate {e.args[0]!r}") from None
        groups.append((ids, count))
    quota = data.get("quota")
    if quota is not None and (not isinstance(quota, int) or quota <= 0):
        raise BallotParseError(f"'quota' must be a positive integer, got {quota!r}")
    excluded = data.get("excluded", [])
    try:
        excluded_ids = [index[name] for name in excluded]
    except KeyError as e:
        raise BallotParseError(f"unknown excluded candidate {e.args[0]!r}") from None
    return Election.build(
        candidates, groups, seats=seats, quota=quota,
        name=data.get("name", ""), excluded=excluded_ids,
    )


def parse_json(text: str | bytes) -> Election:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise BallotParseError(f"invalid JSON: {e}") from None
    return election_from_dict(data)


def dumps_json(election: Election) -> str:
    return json.dumps(election.to_dict(), indent=2)


_BALLOT_ID = re.compile(r"^\(.*?\)\s*")


def parse_blt(text: str | bytes) -> Election:
    """Parse the integer-coded BLT format.

    Layout: ``ncand nseats``, an optional line of negative withdrawn ids,
    ballot lines ``weight p1 p2 ... 0``, a lone ``0``, then one quoted name
    per candidate and a quoted title. Withdrawn candidates are projected
    out of every ranking.
    """
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines:
        raise BallotParseError("empty BLT input")
    header = lines[0].split()
    if len(header) < 2:
        raise BallotParseError("BLT header must be 'ncandidates nseats'")
    try:
        ncand, seats = int(header[0]), int(header[1])
    except ValueError:
        raise BallotParseError(f"bad BLT header {lines[0]!r}") from None
    pos = 1
    withdrawn: set[int] = set()
    if pos < len(lines) and lines[pos].startswith("-"):
        withdrawn = {-int(tok) - 1 for tok in lines[pos].split()}
        pos += 1
    raw: list[tuple[tuple[int, ...], int]] = []
    while True:
        if pos >= len(lines):
            raise BallotParseError("BLT ballot section not terminated by 0")
        line = _BALLOT_ID.sub("", lines[pos])
        pos += 1
        if line == "0":
            break
        toks = line.split()
        if toks[-1] != "0":
            raise BallotParseError(f"BLT ballot line not terminated by 0: {line!r}")
        if any("=" in t for t in toks):
            raise BallotParseError(f"equal rankings are not supported: {line!r}")
        try:
            weight = int(toks[0])
            prefs = tuple(int(t) - 1 for t in toks[1:-1] if t != "-")
        except ValueError:
            raise BallotParseError(f"bad BLT ballot line {line!r}") from None
        if weight <= 0:
            raise BallotParseError(f"non-positive ballot weight in {line!r}")
        for p in prefs:
            if not 0 <= p < ncand:
                raise BallotParseError(f"candidate number out of range in {line!r}")
        if len(set(prefs)) != len(prefs):
            raise BallotParseError(f"duplicate candidate in ballot {line!r}")
        raw.append((prefs, weight))
    names: list[str] = []
    for _ in range(ncand):
        if pos >= len(lines):
            raise BallotParseError("BLT file ends before all candidate names")
        names.append(_unquote(lines[pos]))
        pos += 1
    title = _unquote(lines[pos]) if pos < len(lines) else ""
    keep = set(range(ncand)) - withdrawn
    return Election.build(
        names, ((project(r, keep), w) for r, w in raw), seats=seats, name=title,
        excluded=withdrawn,
    )


def _unquote(s: str) -> str:
    parts = shlex.split(s)
    return parts[0] if parts else ""


def parse_election(data: str | bytes, fmt: str | None = None) -> Election:
    """Parse canonical JSON or BLT; `fmt` is guessed from the content if None."""
    if fmt is None:
        head = data.lstrip()[:1]
        fmt = "json" if head in ("{", b"{") else "blt"
    if fmt in ("json", "canonical-json"):
        return parse_json(data)
    if fmt == "blt":
        return parse_blt(data)
    raise ValueError(f"unknown ballot format {fmt!r}")


def load_election(path: str, fmt: str | None = None) -> Election:
    with open(path, "rb") as fh:
        data = fh.read()
    if fmt is None and str(path).lower().endswith(".blt"):
        fmt = "blt"
    return parse_election(data, fmt)
