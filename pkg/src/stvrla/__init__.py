"""Risk-limiting audits for 2-seat STV elections."""

from .assertions import Assertion, AssertionCheck, evaluate, holds, to_assorter
from .ballots import BallotParseError, Election, droop_quota, load_election, parse_election, project
from .batch import BatchCheckPlan, plan_batch_check
from .frw import AuditPlan, FirstRoundWinnerCriterion, frw_criterion, plan_frw
from .general import PartialAuditReport, plan_general
from .risk import AuditParams, alpha_test, estimate_asn, measure_risk
from .sim import SimReport, simulate_audit
from .tabulate import TabulationTrace, TieError, tabulate

__version__ = "0.1.0"

__all__ = [
    "Assertion", "AssertionCheck", "AuditParams", "AuditPlan", "BallotParseError",
    "BatchCheckPlan", "Election", "FirstRoundWinnerCriterion", "PartialAuditReport",
    "SimReport", "TabulationTrace", "TieError", "alpha_test", "droop_quota", "estimate_asn",
    "evaluate", "frw_criterion", "holds", "load_election", "measure_risk", "parse_election",
    "plan_batch_check", "plan_frw", "plan_general", "project", "simulate_audit", "tabulate",
    "to_assorter",
]
