"""Independent reference computations used only by the tests.

Nothing here calls into confvote's numerics: confidences come from exact
rational binomial sums or scipy, binomial weights from math.comb.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction

from scipy import special, stats


def binomial_sum_cdf(x: Fraction, a: int, b: int) -> Fraction:
    """Exact I_x(a, b) for integer a, b: P(Binomial(a + b - 1, x) >= a)."""
    n = a + b - 1
    return sum(math.comb(n, j) * x**j * (1 - x) ** (n - j) for j in range(a, n + 1))


def _is_int(v: float) -> bool:
    return float(v).is_integer()


def gate_oracle(alpha: float, beta: float, p_crit: float, tau: float, force: bool = False) -> bool:
    """Publish decision, exact for integer counts and scipy-evaluated otherwise."""
    if force:
        return True
    if _is_int(alpha) and _is_int(beta):
        conf = 1 - binomial_sum_cdf(Fraction(p_crit), int(alpha), int(beta))
        return conf > Fraction(tau)
    if p_crit == 0.5 and alpha == beta:
        return 0.5 > tau  # I_{1/2}(a, a) = 1/2 exactly; scipy rounds either way
    return 1.0 - special.betainc(alpha, beta, p_crit) > tau


def agent_tuple(agent):
    return (agent.p, agent.prior.alpha, agent.prior.beta, agent.gate.p_critical,
            agent.gate.tau_abstain, agent.gate.force_publish)


def naive_q(agent, horizon_T: int) -> float:
    """Direct (linear-space) indicator sum over success counts."""
    p, a0, b0, pc, tau, force = agent_tuple(agent)
    n = horizon_T - 1
    return math.fsum(
        math.comb(n, k) * p**k * (1 - p) ** (n - k)
        for k in range(n + 1)
        if gate_oracle(a0 + k, b0 + n - k, pc, tau, force)
    )


def scan_threshold(agent, horizon_T: int) -> int | None:
    p, a0, b0, pc, tau, force = agent_tuple(agent)
    n = horizon_T - 1
    for k in range(n + 1):
        if gate_oracle(a0 + k, b0 + n - k, pc, tau, force):
            return k
    return None


def tail_mass(p: float, n: int, k_star: int) -> float:
    """P(K >= k_star) for K ~ Binomial(n, p)."""
    return float(stats.binom.sf(k_star - 1, n, p))


def variance_budget_oracle(ps, horizon_T: int) -> float:
    total = 0.0
    for p in ps:
        total += (horizon_T - 1) * (2 * p - 1) ** 2 + 4
    return total


def exact_success_enumeration(agents, horizon_T: int, sign: int = 1) -> float:
    """P(net public vote > 0) by enumerating every learning history and final vote.

    ``sign = +1`` means the first alternative is correct, ``-1`` the second.
    Exponential in N * T; meant for N <= 3, T <= 4.
    """
    n = horizon_T - 1
    per_agent = []
    for agent in agents:
        p, a0, b0, pc, tau, force = agent_tuple(agent)
        outcomes = []
        for history in itertools.product((True, False), repeat=n):
            k = sum(history)
            w_hist = p**k * (1 - p) ** (n - k)
            pub = gate_oracle(a0 + k, b0 + n - k, pc, tau, force)
            for correct in (True, False):
                w = w_hist * (p if correct else 1 - p)
                vote = (sign if correct else -sign) if pub else 0
                outcomes.append((w, vote))
        per_agent.append(outcomes)
    total = 0.0
    for combo in itertools.product(*per_agent):
        if sum(v for _, v in combo) > 0:
            total += math.prod(w for w, _ in combo)
    return total


def exact_success_dp(agents, horizon_T: int, sign: int = 1) -> float:
    """Same probability as :func:`exact_success_enumeration` via convolution of vote laws."""
    dist = {0: 1.0}
    for agent in agents:
        p = agent.p
        q = naive_q(agent, horizon_T)
        up = q * (p if sign > 0 else 1 - p)
        down = q * (1 - p if sign > 0 else p)
        step = {1: up, -1: down, 0: 1.0 - q}
        new: dict[int, float] = {}
        for s, w in dist.items():
            for v, pv in step.items():
                if pv:
                    new[s + v] = new.get(s + v, 0.0) + w * pv
        dist = new
    return math.fsum(w for s, w in dist.items() if s > 0)
