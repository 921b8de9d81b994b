"""Confidence-gated majority voting.

Agents calibrate a Beta belief about their own reliability, publish a vote only
when confident enough, and the package bounds (analytically) and estimates
(by simulation) the probability that the gated majority is correct.
"""

from ._backend import BACKEND
from .analytics import (
    AgentContribution,
    BoundReport,
    GroundTruth,
    bound_report,
    convergence_bound,
    min_publish_over_competent,
    publish_probability,
)
from .belief import BetaBelief, GateParams, confidence, gate, update
from .errors import AssumptionViolation, ConfigError, ConvergenceError, DomainError
from .montecarlo import SimConfig, SimResult, hallucination_rate, simulate, trace_confidence
from .population import AgentSpec, Population, ScenarioKind, build_scenario, contrary_prior
from .specialfn import SpecialFnConfig, log_beta, log_binomial, log_gamma, reg_inc_beta

__all__ = [
    "BACKEND",
    "AgentContribution", "BoundReport", "GroundTruth", "bound_report", "convergence_bound",
    "min_publish_over_competent", "publish_probability",
    "BetaBelief", "GateParams", "confidence", "gate", "update",
    "AssumptionViolation", "ConfigError", "ConvergenceError", "DomainError",
    "SimConfig", "SimResult", "hallucination_rate", "simulate", "trace_confidence",
    "AgentSpec", "Population", "ScenarioKind", "build_scenario", "contrary_prior",
    "SpecialFnConfig", "log_beta", "log_binomial", "log_gamma", "reg_inc_beta",
]
