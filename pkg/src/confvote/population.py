"""Agents, populations and the four experimental scenario pools."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .belief import BetaBelief, GateParams
from .errors import DomainError

P_HOMOGENEOUS = 0.55
P_LOW = 0.35
P_HIGH = 0.75
UNIFORM_PRIOR = BetaBelief(1.0, 1.0)
DEFAULT_KAPPA = 8.0
DEFAULT_EPSILON = 1e-6


class ScenarioKind(str, enum.Enum):
    HOMOGENEOUS = "homogeneous"
    HETEROGENEOUS = "heterogeneous"
    NEVER_ABSTAIN = "never_abstain"
    CONTRARY = "contrary"

    @property
    def is_heterogeneous(self) -> bool:
        return self is not ScenarioKind.HOMOGENEOUS


@dataclass(frozen=True)
class AgentSpec:
    """True reliability ``p``, initial belief and gate of one agent."""

    p: float
    prior: BetaBelief
    gate: GateParams

    def __post_init__(self) -> None:
        if not (0.0 <= self.p <= 1.0):
            raise DomainError(f"p must lie in [0, 1], got {self.p!r}")


@dataclass(frozen=True)
class Population:
    """Ordered agents sharing a horizon of ``horizon_T - 1`` learning rounds plus one vote."""

    agents: tuple[AgentSpec, ...]
    horizon_T: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "agents", tuple(self.agents))
        if not self.agents:
            raise DomainError("a population needs at least one agent")
        if int(self.horizon_T) != self.horizon_T or self.horizon_T < 2:
            raise DomainError(f"horizon_T must be an integer >= 2, got {self.horizon_T!r}")

    @property
    def n_agents(self) -> int:
        return len(self.agents)

    @property
    def mean_p(self) -> float:
        return math.fsum(a.p for a in self.agents) / len(self.agents)


def contrary_prior(p: float, kappa: float = DEFAULT_KAPPA,
                   epsilon: float = DEFAULT_EPSILON) -> BetaBelief:
    """Prior with mean ``1 - p`` and strength ``kappa``, clipped below at ``epsilon``.

    Competent agents start pessimistic about themselves, weak agents optimistic.

    >>> contrary_prior(0.75)
    BetaBelief(alpha=2.0, beta=6.0)
    """
    if not (kappa > 0.0 and math.isfinite(kappa)):
        raise DomainError(f"kappa must be finite and > 0, got {kappa!r}")
    if not (epsilon > 0.0 and math.isfinite(epsilon)):
        raise DomainError(f"epsilon must be finite and > 0, got {epsilon!r}")
    if not (0.0 <= p <= 1.0):
        raise DomainError(f"p must lie in [0, 1], got {p!r}")
    return BetaBelief(max(kappa * (1.0 - p), epsilon), max(kappa * p, epsilon))


def build_scenario(kind: ScenarioKind | str, n_agents: int, horizon_T: int, tau: float,
                   p_critical: float, kappa: float = DEFAULT_KAPPA,
                   epsilon: float = DEFAULT_EPSILON) -> Population:
    """Build one of the four experimental pools.

    ``homogeneous`` puts every agent at p = 0.55 with a uniform prior. The three
    heterogeneous kinds split the agents into a p = 0.35 half followed by a
    p = 0.75 half: ``heterogeneous`` uses uniform priors and the gate,
    ``never_abstain`` forces every agent to publish, and ``contrary`` keeps the
    gate but draws priors from :func:`contrary_prior`.
    """
    try:
        kind = ScenarioKind(kind)
    except ValueError:
        raise DomainError(f"unknown scenario kind {kind!r}") from None
    if int(n_agents) != n_agents or n_agents < 1:
        raise DomainError(f"n_agents must be a positive integer, got {n_agents!r}")
    n_agents = int(n_agents)
    if kind.is_heterogeneous and n_agents % 2:
        raise DomainError(f"{kind.value} pools split agents into equal halves; n_agents={n_agents} is odd")

    gated = GateParams(p_critical, tau)
    if kind is ScenarioKind.HOMOGENEOUS:
        agents = [AgentSpec(P_HOMOGENEOUS, UNIFORM_PRIOR, gated)] * n_agents
        return Population(tuple(agents), horizon_T)

    half = n_agents // 2
    ps = [P_LOW] * half + [P_HIGH] * half
    if kind is ScenarioKind.HETEROGENEOUS:
        agents = [AgentSpec(p, UNIFORM_PRIOR, gated) for p in ps]
    elif kind is ScenarioKind.NEVER_ABSTAIN:
        forced = GateParams(p_critical, tau, force_publish=True)
        agents = [AgentSpec(p, UNIFORM_PRIOR, forced) for p in ps]
    else:
        agents = [AgentSpec(p, contrary_prior(p, kappa, epsilon), gated) for p in ps]
    return Population(tuple(agents), horizon_T)
