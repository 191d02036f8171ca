import pytest

from conftest import perturb
from stvrla.assertions import agstar
from stvrla.ballots import Election
from stvrla.frw import plan_frw
from stvrla.risk import POLLING, AuditParams
from stvrla.sim import pair_ballots, simulate_audit


@pytest.fixture
def plan(five):
    return plan_frw(five)


def test_five_completes(plan, five):
    sim = simulate_audit(five, plan, trials=200, seed=1)
    assert sim.completion_rate == 1.0
    assert 0.5 * plan.overall_asn <= sim.mean_sample <= 1.5 * plan.overall_asn
    assert sim.population == 21001
    assert len(sim.samples) == 200
    assert sim.p90_sample >= sim.mean_sample * 0.5


def test_error_free_matches_the_estimate(five):
    plan = plan_frw(five, params=AuditParams(error_rate=0))
    sim = simulate_audit(five, plan, trials=10, seed=5, error_rate=0)
    # every draw has the same overstatement value, so the order does not matter
    assert set(sim.samples) == {plan.overall_asn}


def test_seeded(plan, five):
    a = simulate_audit(five, plan, trials=30, seed=5, error_rate=0.01)
    b = simulate_audit(five, plan, trials=30, seed=5, error_rate=0.01)
    assert a.samples == b.samples
    c = simulate_audit(five, plan, trials=30, seed=6, error_rate=0.01)
    assert c.samples != a.samples


def test_bad_arguments(plan, five):
    with pytest.raises(ValueError):
        simulate_audit(five, plan, trials=0)
    with pytest.raises(ValueError):
        simulate_audit(five, plan, error_rate=1.0)


def test_pair_ballots(five, rng):
    truth = perturb(rng, five, 0.01)
    pairs = pair_ballots(five, truth)
    assert sum(k for _, _, k in pairs) == five.total_valid
    rep, tru = {}, {}
    for r, t, k in pairs:
        rep[r] = rep.get(r, 0) + k
        tru[t] = tru.get(t, 0) + k
    assert rep == {g.ranking: g.count for g in five.ballots}
    assert tru == {g.ranking: g.count for g in truth.ballots}
    small = Election.build(five.candidates, [((0,), 1)], seats=2)
    with pytest.raises(ValueError):
        pair_ballots(five, small)


def test_false_assertion_rarely_certifies():
    e = Election.build(["w", "l"], [((0,), 1100), ((1,), 900)], seats=1, quota=2000)
    truth = Election.build(["w", "l"], [((0,), 980), ((1,), 1020)], seats=1, quota=2000)
    sim = simulate_audit(truth, [agstar(0, 1)], trials=300, seed=2, error_rate=0, reported=e)
    assert sim.per_assertion[0].certified_rate <= 0.10 + 2 * (0.09 / 300) ** 0.5


def test_polling_mode(plan, five):
    sim = simulate_audit(five, plan, params=AuditParams(mode=POLLING), trials=20, seed=3)
    assert sim.mode == POLLING
    assert 0 < sim.completion_rate <= 1
