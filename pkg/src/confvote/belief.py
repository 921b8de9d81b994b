"""Agent belief state: Beta pseudo-counts, feedback updates and the vote gate."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError
from .specialfn import DEFAULT_CONFIG, SpecialFnConfig, reg_inc_beta


@dataclass(frozen=True)
class BetaBelief:
    """Beta(alpha, beta) posterior over an agent's own reliability.

    ``alpha`` counts correct outcomes (plus prior mass), ``beta`` incorrect ones.
    Instances are immutable; :func:`update` returns a new belief.
    """

    alpha: float
    beta: float

    def __post_init__(self) -> None:
        for name in ("alpha", "beta"):
            value = getattr(self, name)
            if not math.isfinite(value) or value <= 0.0:
                raise DomainError(f"{name} must be finite and > 0, got {value!r}")

    @property
    def mean(self) -> float:
        return self.alpha / (self.alpha + self.beta)


@dataclass(frozen=True)
class GateParams:
    """Publish-or-abstain rule of a single agent.

    Attributes
    ----------
    p_critical : float
        Reliability level the agent wants to exceed, in (0, 1).
    tau_abstain : float
        Minimum confidence needed to publish, in [0, 1). Equality abstains.
    force_publish : bool
        Publish unconditionally (the never-abstain baseline).
    """

    p_critical: float
    tau_abstain: float
    force_publish: bool = False

    def __post_init__(self) -> None:
        if not (0.0 < self.p_critical < 1.0):
            raise DomainError(f"p_critical must lie in (0, 1), got {self.p_critical!r}")
        if not (0.0 <= self.tau_abstain < 1.0):
            raise DomainError(f"tau_abstain must lie in [0, 1), got {self.tau_abstain!r}")


def update(belief: BetaBelief, correct: bool) -> BetaBelief:
    if correct:
        return BetaBelief(belief.alpha + 1.0, belief.beta)
    return BetaBelief(belief.alpha, belief.beta + 1.0)


def confidence(belief: BetaBelief, p_critical: float,
               config: SpecialFnConfig = DEFAULT_CONFIG) -> float:
    """Posterior probability that the agent's reliability exceeds ``p_critical``.

    Equal to ``1 - I_{p_critical}(alpha, beta)``.
    """
    if not (0.0 < p_critical < 1.0):
        raise DomainError(f"p_critical must lie in (0, 1), got {p_critical!r}")
    return 1.0 - reg_inc_beta(p_critical, belief.alpha, belief.beta, config)


def gate(belief: BetaBelief, params: GateParams,
         config: SpecialFnConfig = DEFAULT_CONFIG) -> bool:
    """True if the agent publishes: forced, or confidence strictly above tau."""
    if params.force_publish:
        return True
    return confidence(belief, params.p_critical, config) > params.tau_abstain
