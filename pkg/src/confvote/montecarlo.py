"""Seeded Monte Carlo simulation of learning, gating and the final majority vote.

Random numbers come from counter-based Philox4x64-10 streams. Run ``r`` of a
simulation with master seed ``s`` reads its uniforms from the stream that
``numpy.random.Philox(key=s, counter=r << 64)`` would produce, as an ``(N, T)``
array whose first ``T - 1`` columns drive the learning outcomes and whose last
column drives the final private vote. Because each run owns its stream,
results do not depend on how runs are grouped into blocks or spread across
worker threads.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from statistics import NormalDist

import numpy as np

from ._backend import kernels
from .analytics import GroundTruth
from .belief import BetaBelief, confidence, gate, update
from .errors import DomainError
from .population import Population
from .specialfn import DEFAULT_CONFIG, SpecialFnConfig

DEFAULT_RUNS = 2000
BLOCK_RUNS = 256
_Z95 = NormalDist().inv_cdf(0.975)
_SEED_LIMIT = 1 << 64


@dataclass(frozen=True)
class SimConfig:
    runs: int = DEFAULT_RUNS
    seed: int = 0
    ground_truth: GroundTruth = GroundTruth.OMEGA_STAR

    def __post_init__(self) -> None:
        if int(self.runs) != self.runs or self.runs < 1:
            raise DomainError(f"runs must be a positive integer, got {self.runs!r}")
        if int(self.seed) != self.seed or not (0 <= self.seed < _SEED_LIMIT):
            raise DomainError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")
        object.__setattr__(self, "ground_truth", GroundTruth(self.ground_truth))


@dataclass(frozen=True)
class SimResult:
    """Outcome of a simulation.

    ``wins`` counts runs whose net public vote for omega_star was strictly
    positive; under ``omega_dagger`` these are hallucinations.
    """

    runs: int
    wins: int
    empirical_success: float
    publish_rate_per_agent: tuple[float, ...]
    wilson_ci95: tuple[float, float]
    seed: int
    ground_truth: GroundTruth


@dataclass(frozen=True)
class AgentTrace:
    """One agent's path through a single run.

    ``confidence[t-1]`` and ``published[t-1]`` refer to round ``t`` (1-based),
    evaluated on the belief held at the start of that round. ``outcomes`` holds
    the ``T - 1`` learning feedbacks.
    """

    agent_id: int
    p: float
    outcomes: tuple[bool, ...]
    confidence: tuple[float, ...]
    published: tuple[bool, ...]


def wilson_interval(successes: int, trials: int, z: float = _Z95) -> tuple[float, float]:
    phat = successes / trials
    z2 = z * z
    denom = 1.0 + z2 / trials
    centre = (phat + z2 / (2.0 * trials)) / denom
    half = z / denom * math.sqrt(phat * (1.0 - phat) / trials + z2 / (4.0 * trials * trials))
    return max(0.0, min(centre - half, phat)), min(1.0, max(centre + half, phat))


def run_uniforms(seed: int, run_index: int, n_agents: int, horizon_T: int) -> np.ndarray:
    """The ``(n_agents, horizon_T)`` uniforms consumed by run ``run_index``."""
    u = kernels.philox_uniforms(seed, run_index, run_index + 1, n_agents * horizon_T)
    return u.reshape(n_agents, horizon_T)


def _agent_arrays(pop: Population):
    agents = pop.agents
    return (
        np.array([a.p for a in agents], dtype=np.float64),
        np.array([a.prior.alpha for a in agents], dtype=np.float64),
        np.array([a.prior.beta for a in agents], dtype=np.float64),
        np.array([a.gate.p_critical for a in agents], dtype=np.float64),
        np.array([a.gate.tau_abstain for a in agents], dtype=np.float64),
        np.array([a.gate.force_publish for a in agents], dtype=np.uint8),
    )


def simulate(pop: Population, cfg: SimConfig, workers: int = 1,
             config: SpecialFnConfig = DEFAULT_CONFIG) -> SimResult:
    """Run the full sequential process ``cfg.runs`` times.

    Per run, every agent starts from its prior, observes ``T - 1`` Bernoulli(p)
    feedbacks, applies its gate to the resulting posterior and, if it publishes,
    votes for the correct alternative with probability ``p``. A run is a win for
    omega_star when the net public vote is strictly positive; ties are not wins.

    ``workers`` only changes wall-clock time; the result is identical for any value.
    """
    if workers < 1:
        raise DomainError(f"workers must be >= 1, got {workers!r}")
    n_agents, horizon = pop.n_agents, pop.horizon_T
    arrays = _agent_arrays(pop)
    sign = 1 if cfg.ground_truth is GroundTruth.OMEGA_STAR else -1
    starts = range(0, cfg.runs, BLOCK_RUNS)

    def block(start: int):
        stop = min(start + BLOCK_RUNS, cfg.runs)
        return kernels.simulate_block(cfg.seed, start, stop, *arrays, horizon, sign,
                                      config.rel_tolerance, config.max_iterations)

    if workers == 1:
        parts = [block(s) for s in starts]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(block, starts))

    wins = sum(w for w, _ in parts)
    counts = np.zeros(n_agents, dtype=np.int64)
    for _, c in parts:
        counts += c
    return SimResult(
        runs=cfg.runs,
        wins=wins,
        empirical_success=wins / cfg.runs,
        publish_rate_per_agent=tuple(float(c) / cfg.runs for c in counts),
        wilson_ci95=wilson_interval(wins, cfg.runs),
        seed=cfg.seed,
        ground_truth=cfg.ground_truth,
    )


def hallucination_rate(pop: Population, cfg: SimConfig, workers: int = 1) -> float:
    """Fraction of runs in which the invalid alternative wins when omega_dagger is true."""
    if cfg.ground_truth is not GroundTruth.OMEGA_DAGGER:
        raise DomainError("hallucination_rate needs ground_truth = omega_dagger")
    return simulate(pop, cfg, workers).empirical_success


def trace_confidence(pop: Population, seed: int, horizon_T: int | None = None) -> list[AgentTrace]:
    """Confidence paths of every agent over one run.

    Uses the same random stream as run 0 of :func:`simulate` with the same seed.
    Gate decisions before the final round are reported only; feedback is
    observed whether or not the agent would have published.
    """
    horizon = pop.horizon_T if horizon_T is None else int(horizon_T)
    if horizon < 2:
        raise DomainError(f"horizon_T must be >= 2, got {horizon!r}")
    u = run_uniforms(seed, 0, pop.n_agents, horizon)
    traces = []
    for i, agent in enumerate(pop.agents):
        belief: BetaBelief = agent.prior
        outcomes, confs, pubs = [], [], []
        for t in range(horizon):
            confs.append(confidence(belief, agent.gate.p_critical))
            pubs.append(gate(belief, agent.gate))
            if t < horizon - 1:
                correct = bool(u[i, t] < agent.p)
                outcomes.append(correct)
                belief = update(belief, correct)
        traces.append(AgentTrace(i, agent.p, tuple(outcomes), tuple(confs), tuple(pubs)))
    return traces
