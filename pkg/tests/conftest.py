import json
import random
from collections import Counter
from importlib import resources
from pathlib import Path

import pytest
from jsonschema import Draft202012Validator
from referencing import Registry, Resource

from stvrla.ballots import Election, load_election

FIXTURES = Path(__file__).parent / "fixtures"


def fixture_path(name):
    return FIXTURES / name


def load(name):
    return load_election(str(FIXTURES / name))


@pytest.fixture
def five():
    return load("five.json")


@pytest.fixture
def divergent():
    return load("divergent.json")


# -- random small elections ------------------------------------------------------

def random_ranking(rng, n):
    return tuple(rng.sample(range(n), rng.randint(1, n)))


def random_election(rng, max_cands=5, max_types=8, max_count=50, leader=False, seats=2):
    """At most max_types ballot types over 3..max_cands candidates.

    With leader=True one ranking gets a heavy extra weight, so most draws
    have someone elected on first preferences.
    """
    n = rng.randint(3, max_cands)
    types = Counter()
    k = rng.randint(2, max_types - 1 if leader else max_types)
    for _ in range(k):
        types[random_ranking(rng, n)] += rng.randint(1, max_count)
    if leader:
        lead = rng.randrange(n)
        rest = [c for c in range(n) if c != lead]
        r = (lead,) + tuple(rng.sample(rest, rng.randint(0, n - 1)))
        types[r] += rng.randint(max_count, 3 * max_count)
    return Election.build([f"c{i}" for i in range(n)], types.items(), seats=seats)


def perturb(rng, election, fraction=0.05):
    """Rewrite up to `fraction` of the ballots; the total (and so the quota) is unchanged."""
    papers = [g.ranking for g in election.ballots for _ in range(g.count)]
    total = len(papers)
    n = len(election.candidates)
    for i in rng.sample(range(total), rng.randint(1, max(1, int(total * fraction)))):
        papers[i] = random_ranking(rng, n) if rng.random() < 0.7 else papers[rng.randrange(total)]
    return Election.build(election.candidates, Counter(papers).items(),
                          seats=election.seats, quota=election.quota)


def as_oracle(election):
    return (
        len(election.candidates),
        [(g.ranking, g.count) for g in election.ballots],
        election.seats,
        election.quota,
    )


@pytest.fixture
def rng():
    return random.Random(20240611)


# -- schemas ---------------------------------------------------------------------

def _registry():
    reg = Registry()
    for entry in resources.files("stvrla").joinpath("schemas").iterdir():
        if entry.name.endswith(".json"):
            doc = json.loads(entry.read_text())
            reg = reg.with_resource(doc["$id"], Resource.from_contents(doc))
    return reg


def schema_validator(name):
    reg = _registry()
    schema = reg.contents(f"https://stvrla.invalid/schemas/{name}.schema.json")
    return Draft202012Validator(schema, registry=reg)


# -- acceptance summary ----------------------------------------------------------

def pytest_terminal_summary(terminalreporter):
    lines = []
    for outcome in ("passed", "failed", "skipped"):
        for rep in terminalreporter.stats.get(outcome, []):
            props = dict(getattr(rep, "user_properties", ()))
            if "criterion" not in props or rep.when not in ("call", "setup"):
                continue
            detail = props.get("detail", "")
            if outcome == "skipped":
                detail = str(rep.longrepr[-1]) if isinstance(rep.longrepr, tuple) else ""
            lines.append((props["criterion"], outcome, detail))
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    word = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}
    for title, outcome, detail in sorted(lines, key=lambda x: int(x[0].split(".")[0])):
        terminalreporter.write_line(f"{word[outcome]}  {title}  ({detail})")
