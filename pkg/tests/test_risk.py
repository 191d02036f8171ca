import math
from fractions import Fraction

import numpy as np
import pytest

from stvrla.assertions import agstar, iq, to_assorter
from stvrla.ballots import Election
from stvrla.risk import (
    POLLING, AuditParams, alpha_mart, alpha_test, comparison_upper, estimate_asn, interleave,
    measure_risk, overstatement_value,
)


def test_hand_product():
    t = alpha_mart([1] * 5, 1, math.inf, eta0=0.75, shrink_d=math.inf)
    assert t[-1] == pytest.approx(7.59375)
    traj = alpha_test([1] * 5, 1, math.inf, eta0=0.75, shrink_d=math.inf)
    assert traj.p_values[-1] == pytest.approx(0.1317, abs=1e-4)
    assert traj.decision_index is None


def test_all_maximal_values_decide():
    t = alpha_mart(np.ones(200), 1, 10000, eta0=0.9)
    assert np.all(np.diff(t) > 0)
    assert alpha_test(np.ones(200), 1, 10000, eta0=0.9).decision_index is not None


def test_null_consistent_data_never_decides():
    t = alpha_mart(np.full(500, 0.5), 1, 10000)
    assert np.all(t <= 1 + 1e-12)
    assert alpha_test(np.full(500, 0.5), 1, 10000).decision_index is None


def test_out_of_range_data():
    with pytest.raises(ValueError):
        alpha_mart([1.5], 1)
    with pytest.raises(ValueError):
        alpha_mart([-0.1], 1)
    with pytest.raises(ValueError):
        alpha_mart([1, 1, 1], 1, population=2)


def test_without_replacement_certainty():
    # once more than half the population total is seen the null is impossible
    t = alpha_mart(np.ones(7), 1, 10)
    assert np.isinf(t[-1])


def test_overstatement_value():
    assert overstatement_value(0, 0.5, 1) == pytest.approx(1 / 1.5)
    assert overstatement_value(1, 0.5, 1) == 0
    assert comparison_upper(0.5, 1) == pytest.approx(2 / 1.5)


def _asn(margin, params=None, n=100000):
    # a population whose AG assorter has exactly the requested margin
    win = round(n * (1 + margin) / 2)
    groups = [((0,), win), ((1,), n - win)]
    e = Election.build(["w", "l"], [g for g in groups if g[1]], seats=1, quota=n)
    s = to_assorter(agstar(0, 1), e)
    return estimate_asn(s, params=params)


def test_margin_one_is_cheap():
    assert _asn(1.0, AuditParams(error_rate=0)) < 25


def test_no_margin_is_infeasible():
    assert _asn(0.0) is None
    assert _asn(-0.1) is None


def test_asn_monotone_in_margin():
    asns = [_asn(m) for m in (0.02, 0.05, 0.1, 0.2, 0.4)]
    assert all(a is not None for a in asns)
    assert asns == sorted(asns, reverse=True)
    assert asns[0] > asns[-1]


def test_asn_monotone_in_error_rate_and_risk_limit():
    by_rate = [_asn(0.05, AuditParams(error_rate=r)) for r in (0, 0.002, 0.01)]
    assert by_rate == sorted(by_rate)
    by_alpha = [_asn(0.05, AuditParams(risk_limit=a)) for a in (0.01, 0.05, 0.1, 0.2)]
    assert by_alpha == sorted(by_alpha, reverse=True)


def test_tiny_margin_can_exceed_population():
    assert _asn(0.0002, n=5000) is None


def test_polling_mode(five):
    s = to_assorter(agstar(0, 4), five)
    params = AuditParams(mode=POLLING)
    asn = estimate_asn(s, params=params, election=five)
    assert asn is not None and asn < estimate_asn(to_assorter(agstar(2, 4), five), params=params,
                                                   election=five)
    with pytest.raises(ValueError):
        estimate_asn(s, params=params)


def test_interleave_keeps_proportions():
    x = interleave([0, 1], [3, 1], 4000)
    assert x.mean() == pytest.approx(0.25, abs=0.002)
    assert x[:100].mean() == pytest.approx(0.25, abs=0.03)


def test_params_validation():
    for bad in (dict(risk_limit=0), dict(risk_limit=1), dict(error_rate=-0.1), dict(shrink_d=0),
                dict(mode="ballot-level")):
        with pytest.raises(ValueError):
            AuditParams(**bad)


def test_measure_risk(five):
    s = to_assorter(iq(0), five)
    assert measure_risk([], s) == 1.0
    asn = estimate_asn(s, params=AuditParams(error_rate=0))
    u = float(s.upper)
    clean = [(u, u)] * asn
    assert measure_risk(clean, s) <= 0.10
    worst = [(u, 0.0)] * 50
    assert measure_risk(worst, s) == 1.0
    with pytest.raises(ValueError):
        measure_risk([(u + 1, 0.0)], s)


def test_risk_is_valid_when_the_assertion_is_false():
    """Simulated comparison audits of a false assertion stop at most alpha of the time."""
    n = 2000
    true_win = 980
    truth = np.array([1.0] * true_win + [0.0] * (n - true_win))
    reported_margin = 0.1
    # reported scores claim a 55% winner; the truth is 49%
    reported = np.array([1.0] * 1100 + [0.0] * (n - 1100))
    rng = np.random.default_rng(4)
    e = Election.build(["w", "l"], [((0,), 1100), ((1,), 900)], seats=1, quota=n)
    s = to_assorter(agstar(0, 1), e)
    assert float(s.margin) == pytest.approx(reported_margin)
    stops = 0
    trials = 400
    for _ in range(trials):
        order = rng.permutation(n)[:600]
        if measure_risk(zip(reported[order], truth[order]), s) <= 0.10:
            stops += 1
    assert stops / trials <= 0.10 + 2 * math.sqrt(0.09 / trials)


def test_fraction_inputs_are_accepted():
    assert overstatement_value(Fraction(0), Fraction(1, 2), Fraction(1)) == Fraction(2, 3)
