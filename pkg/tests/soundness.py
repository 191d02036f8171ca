"""Perturbation fuzz: if every planned assertion holds on a perturbed ballot set,
the perturbed count must agree with what the plan certifies."""

from dataclasses import dataclass, field

from conftest import perturb, random_election
from stvrla.assertions import holds
from stvrla.frw import frw_criterion, plan_frw
from stvrla.general import plan_general
from stvrla.plan import FULL_RLA, INFEASIBLE
from stvrla.tabulate import tabulate


@dataclass
class FuzzStats:
    plans: int = 0
    checks: int = 0
    caught: int = 0  # perturbations that changed the outcome and broke an assertion
    failures: list = field(default_factory=list)


def certified(plan, winners):
    """Does `winners` (the true count) agree with what the plan claims?"""
    winners = set(winners)
    if plan.kind == FULL_RLA:
        return winners == set(plan.winners)
    return winners <= plan.potential_winners and plan.definite_winners <= winners


def fuzz(rng, planner, plans, perturbations=20, fraction=0.05, batch_first=False):
    stats = FuzzStats()
    tries = 0
    while stats.plans < plans:
        tries += 1
        if tries > plans * 200:
            raise RuntimeError("could not draw enough plannable elections")
        e = random_election(rng, leader=planner == "frw" or rng.random() < 0.3)
        trace = tabulate(e, batch_first=batch_first)
        if trace.ties:
            continue
        if planner == "frw":
            if not frw_criterion(trace):
                continue
            plan = plan_frw(e, trace)
        else:
            plan = plan_general(e, trace)
        if plan.kind == INFEASIBLE:
            continue
        stats.plans += 1
        rules = [it.assertion for it in plan.all_assertions]
        for _ in range(perturbations):
            truth = perturb(rng, e, fraction)
            true_trace = tabulate(truth, batch_first=batch_first)
            if true_trace.ties:
                continue
            ok = certified(plan, true_trace.winners)
            if all(holds(a, truth) for a in rules):
                stats.checks += 1
                if not ok:
                    stats.failures.append((e.to_dict(), truth.to_dict()))
            elif not ok:
                stats.caught += 1
    return stats
