"""ALPHA sequential test and expected sample sizes for assorters.

The test is the ALPHA supermartingale for H0: population mean <= 1/2 over
values in [0, u], sampled without replacement, with the truncated-shrinkage
estimator for the alternative mean.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from .assertions import ALWAYS_FALSE, ALWAYS_TRUE, Assorter

COMPARISON, POLLING = "comparison", "polling"


@dataclass(frozen=True)
class AuditParams:
    """Audit settings.

    eta0 is the initial alternative mean. When None it defaults to the
    reported assorter mean in polling mode and to the midpoint between the
    null mean and the upper bound of the overstatement assorter in
    comparison mode. eps_floor defaults to u/1000.
    """

    risk_limit: float = 0.10
    error_rate: float = 0.002
    shrink_d: float = 100
    eps_floor: float | None = None
    eta0: float | None = None
    mode: str = COMPARISON

    def __post_init__(self):
        if not 0 < self.risk_limit < 1:
            raise ValueError(f"risk limit must be in (0, 1), got {self.risk_limit}")
        if not 0 <= self.error_rate < 1:
            raise ValueError(f"error rate must be in [0, 1), got {self.error_rate}")
        if self.shrink_d <= 0:
            raise ValueError("shrink_d must be positive")
        if self.mode not in (COMPARISON, POLLING):
            raise ValueError(f"unknown audit mode {self.mode!r}")

    def with_(self, **kw) -> "AuditParams":
        return replace(self, **kw)


@dataclass(frozen=True)
class RiskTrajectory:
    p_values: np.ndarray
    decision_index: int | None  # number of draws at which p first fell to the risk limit

    @property
    def p_min(self) -> float:
        return float(self.p_values.min()) if len(self.p_values) else 1.0


def alpha_mart(
    x,
    u: float,
    population: float = math.inf,
    eta0: float | None = None,
    shrink_d: float = 100,
    eps_floor: float | None = None,
    null_mean: float = 0.5,
) -> np.ndarray:
    """Running test statistic T_j for the draws x (T_0 = 1 is not included)."""
    x = np.asarray(x, dtype=float)
    if x.size == 0:
        return np.ones(0)
    if np.any(x < 0) or np.any(x > u * (1 + 1e-12)):
        raise ValueError(f"data out of range [0, {u}]")
    if x.size > population:
        raise ValueError("sample is larger than the population")
    if eta0 is None:
        eta0 = null_mean + (u - null_mean) / 2
    if eps_floor is None:
        eps_floor = u / 1000
    n = x.size
    j = np.arange(1, n + 1, dtype=float)
    s = np.concatenate(([0.0], np.cumsum(x)[:-1]))
    if math.isfinite(population):
        mu = (population * null_mean - s) / (population - j + 1)
    else:
        mu = np.full(n, null_mean)
    with np.errstate(divide="ignore", invalid="ignore"):
        if math.isfinite(shrink_d):
            eta = (shrink_d * eta0 + s) / (shrink_d + j - 1)
            floor = mu + eps_floor / np.sqrt(shrink_d + j - 1)
        else:
            eta = np.full(n, float(eta0))
            floor = mu
        cap = u * (1 - np.finfo(float).eps)
        eta = np.minimum(cap, np.maximum(eta, floor))
        terms = (x * eta / mu + (u - x) * (u - eta) / (u - mu)) / u
    terms = np.where(mu > u, 0.0, terms)
    terms = np.where(np.isclose(mu, 0.0, atol=1e-15) | np.isclose(mu, u, atol=1e-15), 1.0, terms)
    terms = np.where(mu < 0, np.inf, terms)
    with np.errstate(over="ignore", invalid="ignore"):
        t = np.cumprod(terms)
    # once the null is impossible the statistic stays infinite; once dead it stays 0
    t = np.where(np.maximum.accumulate(mu < 0), np.inf, t)
    return np.nan_to_num(t, nan=0.0, posinf=np.inf)


def alpha_test(x, u: float, population: float, params: AuditParams | None = None, **kw) -> RiskTrajectory:
    params = params or AuditParams()
    t = alpha_mart(
        x, u, population,
        eta0=kw.get("eta0", params.eta0),
        shrink_d=kw.get("shrink_d", params.shrink_d),
        eps_floor=kw.get("eps_floor", params.eps_floor),
    )
    with np.errstate(divide="ignore"):
        p = np.minimum(1.0, 1.0 / t)
    hit = np.nonzero(p <= params.risk_limit)[0]
    return RiskTrajectory(p, int(hit[0]) + 1 if hit.size else None)


# -- comparison (overstatement) assorter ---------------------------------------

def overstatement_value(omega: float, margin: float, u: float) -> float:
    """B = (1 - omega/u) / (2 - v/u) for overstatement omega and reported margin v."""
    return (1 - omega / u) / (2 - margin / u)


def comparison_upper(margin: float, u: float) -> float:
    return 2 / (2 - margin / u)


def _comparison_eta0(params: AuditParams, u_b: float) -> float:
    return params.eta0 if params.eta0 is not None else 0.5 + (u_b - 0.5) / 2


def _spaced_errors(n: int, rate: float) -> np.ndarray:
    mask = np.zeros(n, dtype=bool)
    if rate > 0:
        step = math.ceil(1 / rate)
        mask[step - 1::step] = True
    return mask


def first_decision(x: np.ndarray, u: float, population: float, params: AuditParams, eta0: float) -> int | None:
    """decision_index of alpha_test(x, ...), computed on growing prefixes."""
    k = 1024
    while True:
        traj = alpha_test(x[:k], u, population, params, eta0=eta0)
        if traj.decision_index is not None or k >= len(x):
            return traj.decision_index
        k *= 4


@lru_cache(maxsize=65536)
def _comparison_asn(margin: float, u: float, population: int, params: AuditParams) -> int | None:
    big = overstatement_value(0.0, margin, u)
    u_b = comparison_upper(margin, u)
    x = np.full(population, big)
    x[_spaced_errors(population, params.error_rate)] = big / 2  # one-vote overstatement, omega = u/2
    return first_decision(x, u_b, population, params, _comparison_eta0(params, u_b))


_GOLDEN = (math.sqrt(5) - 1) / 2


def interleave(values, counts, n: int) -> np.ndarray:
    """Deterministic length-n sequence taking each value in its reported proportion.

    Draw j takes the value at quantile frac(j * golden ratio), a
    low-discrepancy walk, so every prefix is close to the reported mix.
    """
    order = np.argsort(values)
    values = np.asarray(values, dtype=float)[order]
    cum = np.cumsum(np.asarray(counts, dtype=float)[order])
    cum /= cum[-1]
    q = (np.arange(1, n + 1) * _GOLDEN) % 1.0
    idx = np.minimum(np.searchsorted(cum, q, side="right"), len(values) - 1)
    return values[idx]


def estimate_asn(assorter: Assorter, population: int | None = None,
                 params: AuditParams | None = None, election=None) -> int | None:
    """Expected number of draws to confirm the assertion, or None if infeasible.

    Comparison mode feeds the overstatement assorter a sequence with no
    errors except a one-vote overstatement at every ceil(1/r)-th draw.
    Polling mode feeds the assorter's own scores, interleaved in their
    reported proportions (pass the reported `election`).
    """
    params = params or AuditParams()
    population = population or assorter.population
    if assorter.degenerate == ALWAYS_TRUE:
        return 0
    if assorter.degenerate == ALWAYS_FALSE or assorter.margin <= 0:
        return None
    if params.mode == COMPARISON:
        return _comparison_asn(float(assorter.margin), float(assorter.upper), population, params)
    if election is None:
        raise ValueError("polling-mode ASN needs the reported election")
    scores = [float(assorter.score(g.ranking)) for g in election.ballots]
    x = interleave(scores, [g.count for g in election.ballots], population)
    eta0 = params.eta0 if params.eta0 is not None else float(assorter.mean)
    return first_decision(x, float(assorter.upper), population, params, eta0)


def measure_risk(sample, assorter: Assorter, params: AuditParams | None = None,
                 population: int | None = None) -> float:
    """Smallest p-value reached by a comparison audit of (reported, audited) score pairs."""
    params = params or AuditParams()
    population = population or assorter.population
    sample = list(sample)
    if not sample:
        return 1.0
    reported, audited = zip(*sample)
    if len(reported) != len(audited):
        raise ValueError("mismatched sample lengths")
    u = float(assorter.upper)
    r = np.asarray(reported, dtype=float)
    a = np.asarray(audited, dtype=float)
    if np.any((r < 0) | (r > u)) or np.any((a < 0) | (a > u)):
        raise ValueError(f"scores must lie in [0, {u}]")
    margin = float(assorter.margin)
    x = overstatement_value(r - a, margin, u)
    u_b = comparison_upper(margin, u)
    traj = alpha_test(x, u_b, population, params, eta0=_comparison_eta0(params, u_b))
    return traj.p_min
