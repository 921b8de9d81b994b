"""Special functions behind the confidence measure.

All routines take plain floats. Domain violations raise
:class:`~confvote.errors.DomainError`; a continued fraction that exhausts its
iteration budget raises :class:`~confvote.errors.ConvergenceError`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from ._backend import kernels
from .errors import DomainError

# log C(n, k) uses exact integers when min(k, n - k) is at most this
EXACT_BINOMIAL_MAX_K = 1000


@dataclass(frozen=True)
class SpecialFnConfig:
    """Convergence controls for the incomplete-beta continued fraction.

    Attributes
    ----------
    rel_tolerance : float
        Stop once a Lentz step changes the fraction by less than this factor.
    max_iterations : int
        Hard cap on continued-fraction steps.
    """

    rel_tolerance: float = 1e-15
    max_iterations: int = 10_000

    def __post_init__(self) -> None:
        if not (0.0 < self.rel_tolerance < 1.0):
            raise DomainError(f"rel_tolerance must lie in (0, 1), got {self.rel_tolerance!r}")
        if int(self.max_iterations) != self.max_iterations or self.max_iterations < 100:
            raise DomainError(f"max_iterations must be an integer >= 100, got {self.max_iterations!r}")


DEFAULT_CONFIG = SpecialFnConfig()


def _positive(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value) or value <= 0.0:
        raise DomainError(f"{name} must be finite and > 0, got {value!r}")
    return value


def log_gamma(x: float) -> float:
    """Natural log of the gamma function for finite ``x > 0``.

    Uses a 13-term Lanczos rational approximation, with the Taylor series of
    ``lgamma(1 + z)`` near the roots at 1 and 2 so the relative error stays
    near machine precision there too.
    """
    return kernels.log_gamma(_positive("x", x))


def log_beta(a: float, b: float) -> float:
    """``ln B(a, b) = ln Gamma(a) + ln Gamma(b) - ln Gamma(a + b)``."""
    return kernels.log_beta(_positive("a", a), _positive("b", b))


def reg_inc_beta(x: float, a: float, b: float, config: SpecialFnConfig = DEFAULT_CONFIG) -> float:
    """Regularized incomplete beta function ``I_x(a, b)``, the Beta(a, b) CDF at ``x``.

    Evaluated by the modified Lentz continued fraction on ``I_x(a, b)`` when
    ``x < (a + 1) / (a + b + 2)`` and on ``1 - I_{1-x}(b, a)`` otherwise. The
    cases ``a == 1`` and ``b == 1`` use their closed forms.

    Parameters
    ----------
    x : float
        Evaluation point in ``[0, 1]``.
    a, b : float
        Positive shape parameters.
    config : SpecialFnConfig, optional
        Tolerance and iteration cap.

    Returns
    -------
    float
        ``I_x(a, b)`` in ``[0, 1]``.
    """
    x = float(x)
    if not (0.0 <= x <= 1.0):
        raise DomainError(f"x must lie in [0, 1], got {x!r}")
    a = _positive("a", a)
    b = _positive("b", b)
    return kernels.reg_inc_beta(x, a, b, config.rel_tolerance, config.max_iterations)


def log_binomial(n: int, k: int) -> float:
    """``ln C(n, k)``.

    Exact integer arithmetic when ``min(k, n - k) <= 1000``; otherwise the
    log-gamma difference, which no longer suffers cancellation at that size.
    """
    if int(n) != n or int(k) != k:
        raise DomainError(f"n and k must be integers, got n={n!r}, k={k!r}")
    n, k = int(n), int(k)
    if n < 0 or not (0 <= k <= n):
        raise DomainError(f"need 0 <= k <= n, got n={n}, k={k}")
    if k == 0 or k == n:
        return 0.0
    if min(k, n - k) <= EXACT_BINOMIAL_MAX_K:
        return math.log(math.comb(n, k))
    return log_gamma(n + 1.0) - log_gamma(k + 1.0) - log_gamma(n - k + 1.0)
