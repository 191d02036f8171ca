"""Monte Carlo audits of a plan against a "true" ballot set."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .assertions import ALWAYS_FALSE, ALWAYS_TRUE, Assertion, to_assorter
from .ballots import Election
from .plan import PlannedAssertion
from .risk import COMPARISON, AuditParams, comparison_upper, first_decision, overstatement_value


@dataclass
class AssertionSimStats:
    assertion: Assertion
    certified_rate: float
    mean_sample: float


@dataclass
class SimReport:
    trials: int
    seed: int
    error_rate: float
    mode: str
    population: int
    completion_rate: float
    mean_sample: float
    p90_sample: float
    samples: list[int] = field(repr=False, default_factory=list)
    per_assertion: list[AssertionSimStats] = field(default_factory=list)


def plan_assertions(plan) -> list[Assertion]:
    items = getattr(plan, "all_assertions", plan)
    return [it.assertion if isinstance(it, PlannedAssertion) else it for it in items]


def pair_ballots(reported: Election, truth: Election) -> list[tuple[tuple, tuple, int]]:
    """Match each paper ballot with a CVR: identical rankings first, the rest in sorted order."""
    if reported.total_valid != truth.total_valid:
        raise ValueError("reported and true ballot sets differ in size")
    rep = Counter({g.ranking: g.count for g in reported.ballots})
    tru = Counter({g.ranking: g.count for g in truth.ballots})
    same = rep & tru
    out = [(r, r, k) for r, k in sorted(same.items())]
    left_rep = sorted((rep - same).items())
    left_tru = sorted((tru - same).items())
    i = j = 0
    while i < len(left_rep) and j < len(left_tru):
        (rr, kr), (rt, kt) = left_rep[i], left_tru[j]
        k = min(kr, kt)
        out.append((rr, rt, k))
        left_rep[i] = (rr, kr - k)
        left_tru[j] = (rt, kt - k)
        if kr == k:
            i += 1
        if kt == k:
            j += 1
    return out


def simulate_audit(truth: Election, plan, params: AuditParams | None = None, trials: int = 100,
                   seed: int = 0, error_rate: float | None = None,
                   reported: Election | None = None) -> SimReport:
    """Run `trials` audits drawing ballots without replacement from `truth`.

    Assorters and margins come from `reported` (the CVRs; defaults to the
    truth). On top of any reported/true mismatch each draw carries a
    one-vote overstatement with probability `error_rate` (comparison mode).
    A trial that does not confirm every assertion escalates to a full count.
    """
    if trials < 1:
        raise ValueError("trials must be positive")
    params = params or AuditParams()
    rate = params.error_rate if error_rate is None else error_rate
    if not 0 <= rate < 1:
        raise ValueError(f"error rate must be in [0, 1), got {rate}")
    reported = reported or truth
    assertions = plan_assertions(plan)
    pairs = pair_ballots(reported, truth)
    types = np.repeat(np.arange(len(pairs)), [k for _, _, k in pairs])
    n = len(types)

    tests = []  # (clean values per pair type, erroneous values or None, u, eta0, degenerate)
    for a in assertions:
        s = to_assorter(a, reported)
        if s.degenerate:
            tests.append((None, None, 0.0, 0.0, s.degenerate))
            continue
        u = float(s.upper)
        cvr = np.array([float(s.score(r)) for r, _, _ in pairs])
        true = np.array([float(s.score(t)) for _, t, _ in pairs])
        if params.mode == COMPARISON:
            m = float(s.margin)
            ub = comparison_upper(m, u)
            omega = cvr - true
            clean = overstatement_value(omega, m, u)
            dirty = overstatement_value(np.minimum(omega + u / 2, u), m, u)
            eta0 = params.eta0 if params.eta0 is not None else 0.5 + (ub - 0.5) / 2
            tests.append((clean, dirty, ub, eta0, None))
        else:
            eta0 = params.eta0 if params.eta0 is not None else float(s.mean)
            tests.append((true, None, u, eta0, None))

    stops = np.zeros((trials, len(tests)))
    for t in range(trials):
        rng = np.random.default_rng([seed, t])
        order = types[rng.permutation(n)]
        errs = rng.random(n) < rate if rate > 0 else None
        for k, (clean, dirty, u, eta0, degenerate) in enumerate(tests):
            if degenerate == ALWAYS_TRUE:
                stops[t, k] = 0
                continue
            if degenerate == ALWAYS_FALSE:
                stops[t, k] = np.inf
                continue
            x = clean[order]
            if dirty is not None and errs is not None:
                x = np.where(errs, dirty[order], x)
            d = first_decision(x, u, n, params, eta0)
            stops[t, k] = np.inf if d is None else d

    done = np.all(np.isfinite(stops), axis=1)
    per_trial = np.where(done, stops.max(axis=1, initial=0), n)
    per_trial = np.minimum(per_trial, n).astype(int)
    per_assertion = [
        AssertionSimStats(
            a,
            float(np.isfinite(stops[:, k]).mean()),
            float(np.where(np.isfinite(stops[:, k]), stops[:, k], n).mean()),
        )
        for k, a in enumerate(assertions)
    ]
    return SimReport(
        trials=trials,
        seed=seed,
        error_rate=rate,
        mode=params.mode,
        population=n,
        completion_rate=float(done.mean()),
        mean_sample=float(per_trial.mean()),
        p90_sample=float(np.percentile(per_trial, 90)),
        samples=per_trial.tolist(),
        per_assertion=per_assertion,
    )
