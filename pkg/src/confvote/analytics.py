"""Closed-form publish probabilities and Azuma-Hoeffding guarantees.

Every quantity here is a deterministic function of a :class:`Population`; no
sampling is involved. The Monte Carlo side lives in :mod:`confvote.montecarlo`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .belief import BetaBelief, gate
from .errors import AssumptionViolation, DomainError
from .population import AgentSpec, Population
from .specialfn import log_binomial

# slack when checking the average-competence premise against float sums
_PREMISE_TOL = 1e-12


class GroundTruth(str, enum.Enum):
    """Which alternative is correct on the final task."""

    OMEGA_STAR = "omega_star"
    OMEGA_DAGGER = "omega_dagger"


@dataclass(frozen=True)
class AgentContribution:
    """Publish probability ``q``, expected margin ``c = (2p - 1) q`` and threshold ``k_star``.

    ``k_star`` is the smallest learning-success count that opens the gate, or
    ``None`` when no count does.
    """

    q: float
    c: float
    k_star: int | None


@dataclass(frozen=True)
class BoundReport:
    """Analytic guarantees for one population.

    Attributes
    ----------
    expected_margin : float
        Expected net vote for the correct alternative, ``sum_i (2 p_i - 1) q_i``.
    variance_budget : float
        Sum of squared martingale-difference bounds, ``sum_i ((T-1)(2 p_i - 1)^2 + 4)``.
    success_lower_bound : float
        Lower bound on P(correct alternative wins); 0 when the margin is not positive.
    hallucination_upper_bound : float
        Upper bound on P(invalid alternative wins); 1 when the margin is not positive.
    convergence_lower_bound : float or None
        Large-N bound evaluated at the population's own ``delta_p`` and ``q_min``,
        ``None`` unless both are positive.
    delta_p : float
        ``mean_p - 0.5``.
    q_min : float or None
        Smallest publish probability among agents with ``p >= 0.5``.
    delta_p_positive, q_min_positive : bool
        Whether each premise of the convergence bound holds.
    contributions : tuple of AgentContribution
        Per-agent terms, in population order.
    """

    condition: GroundTruth
    expected_margin: float
    variance_budget: float
    success_lower_bound: float
    hallucination_upper_bound: float
    convergence_lower_bound: float | None
    delta_p: float
    q_min: float | None
    delta_p_positive: bool
    q_min_positive: bool
    contributions: tuple[AgentContribution, ...]

    @property
    def q_mean(self) -> float:
        return math.fsum(c.q for c in self.contributions) / len(self.contributions)


def _log_binomial_weight(n: int, k: int, p: float) -> float:
    # ln[C(n,k) p^k (1-p)^(n-k)], with 0 * ln 0 = 0
    if p == 0.0:
        return 0.0 if k == 0 else -math.inf
    if p == 1.0:
        return 0.0 if k == n else -math.inf
    return log_binomial(n, k) + k * math.log(p) + (n - k) * math.log1p(-p)


def _gate_open(agent: AgentSpec, n: int, k: int) -> bool:
    posterior = BetaBelief(agent.prior.alpha + k, agent.prior.beta + (n - k))
    return gate(posterior, agent.gate)


def _threshold(agent: AgentSpec, n: int) -> int | None:
    # binary search; the gate is monotone non-decreasing in k
    if not _gate_open(agent, n, n):
        return None
    lo, hi = 0, n
    while lo < hi:
        mid = (lo + hi) // 2
        if _gate_open(agent, n, mid):
            hi = mid
        else:
            lo = mid + 1
    return lo


def publish_probability(agent: AgentSpec, horizon_T: int) -> AgentContribution:
    """Probability that ``agent`` publishes on the final round.

    Enumerates every learning-success count ``k`` in ``0..T-1``, evaluates the
    gate on the posterior ``Beta(alpha0 + k, beta0 + T - 1 - k)`` and adds the
    Binomial(T - 1, p) weight of each opening count, accumulated in log space.
    """
    if int(horizon_T) != horizon_T or horizon_T < 2:
        raise DomainError(f"horizon_T must be an integer >= 2, got {horizon_T!r}")
    n = int(horizon_T) - 1
    p = agent.p
    if agent.gate.force_publish:
        return AgentContribution(1.0, 2.0 * p - 1.0, 0)

    logs = [_log_binomial_weight(n, k, p) for k in range(n + 1) if _gate_open(agent, n, k)]
    logs = [w for w in logs if w > -math.inf]
    if logs:
        top = max(logs)
        q = math.exp(top + math.log(math.fsum(math.exp(w - top) for w in logs)))
        q = min(q, 1.0)
    else:
        q = 0.0
    return AgentContribution(q, (2.0 * p - 1.0) * q, _threshold(agent, n))


def variance_budget(pop: Population) -> float:
    t1 = pop.horizon_T - 1
    return math.fsum(t1 * (2.0 * a.p - 1.0) ** 2 + 4.0 for a in pop.agents)


def _contributions(pop: Population) -> tuple[AgentContribution, ...]:
    cache: dict[AgentSpec, AgentContribution] = {}
    out = []
    for agent in pop.agents:
        if agent not in cache:
            cache[agent] = publish_probability(agent, pop.horizon_T)
        out.append(cache[agent])
    return tuple(out)


def _min_competent_q(pop: Population, contribs) -> float | None:
    qs = [c.q for a, c in zip(pop.agents, contribs) if a.p >= 0.5]
    return min(qs) if qs else None


def min_publish_over_competent(pop: Population) -> float:
    """Smallest publish probability among agents with ``p >= 0.5``."""
    q_min = _min_competent_q(pop, _contributions(pop))
    if q_min is None:
        raise DomainError("population has no competent agent (p >= 0.5)")
    return q_min


def _convergence_value(n_agents: int, horizon_T: int, q_min: float, delta_p: float) -> float:
    return -math.expm1(-2.0 * delta_p ** 2 * q_min ** 2 * n_agents / (horizon_T + 3))


def bound_report(pop: Population,
                 condition: GroundTruth | str = GroundTruth.OMEGA_STAR) -> BoundReport:
    """Success lower bound and hallucination upper bound for ``pop``.

    Publish probabilities depend only on each agent's feedback history, whose
    law is Binomial(T - 1, p_i) under either ground truth, so one enumeration
    serves both bounds; ``condition`` is recorded on the report.
    """
    condition = GroundTruth(condition)
    contribs = _contributions(pop)
    margin = math.fsum(c.c for c in contribs)
    budget = variance_budget(pop)
    if margin > 0.0:
        exponent = margin * margin / (2.0 * budget)
        success = -math.expm1(-exponent)
        hallucination = math.exp(-exponent)
    else:
        success, hallucination = 0.0, 1.0

    delta_p = pop.mean_p - 0.5
    q_min = _min_competent_q(pop, contribs)
    dp_ok = delta_p > 0.0
    q_ok = q_min is not None and q_min > 0.0
    conv = None
    if dp_ok and q_ok:
        conv = _convergence_value(pop.n_agents, pop.horizon_T, q_min, delta_p)
    return BoundReport(
        condition=condition,
        expected_margin=margin,
        variance_budget=budget,
        success_lower_bound=success,
        hallucination_upper_bound=hallucination,
        convergence_lower_bound=conv,
        delta_p=delta_p,
        q_min=q_min,
        delta_p_positive=dp_ok,
        q_min_positive=q_ok,
        contributions=contribs,
    )


def convergence_bound(pop: Population, q_min: float, delta_p: float) -> float:
    """``1 - exp(-2 delta_p^2 q_min^2 N / (T + 3))`` after certifying both premises.

    Raises
    ------
    AssumptionViolation
        If ``mean_p < 0.5 + delta_p`` (premise ``"delta_p"``) or some competent
        agent publishes with probability below ``q_min`` (premise ``"q_min"``).
    """
    if not (0.0 < q_min <= 1.0):
        raise DomainError(f"q_min must lie in (0, 1], got {q_min!r}")
    if not (delta_p > 0.0 and math.isfinite(delta_p)):
        raise DomainError(f"delta_p must be finite and > 0, got {delta_p!r}")
    if pop.mean_p < 0.5 + delta_p - _PREMISE_TOL:
        raise AssumptionViolation(
            "delta_p", f"mean competence {pop.mean_p!r} is below 0.5 + delta_p = {0.5 + delta_p!r}")
    actual = _min_competent_q(pop, _contributions(pop))
    if actual is None or actual < q_min:
        raise AssumptionViolation(
            "q_min", f"smallest competent publish probability {actual!r} is below q_min = {q_min!r}")
    return _convergence_value(pop.n_agents, pop.horizon_T, q_min, delta_p)
