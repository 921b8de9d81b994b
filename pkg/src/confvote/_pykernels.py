"""Pure-Python numerical kernels.

This module is the reference implementation and the fallback used when the
compiled ``_ckernels`` extension is unavailable. ``_ckernels.pyx`` performs the
same floating-point operations in the same order, so both backends return
bitwise-identical results on IEEE-754 hardware.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import ConvergenceError

NAME = "python"

# Lanczos approximation, g = 6.0246800407767296 (rational form, 13 terms).
LANCZOS_G = 6.024680040776729583740234375
LANCZOS_G_MINUS_HALF = 5.524680040776729583740234375
LANCZOS_NUM = (
    23531376880.410759688572007674451636754734846804940,
    42919803642.649098768957899047001988850926355848959,
    35711959237.355668049440185451547166705960488635843,
    17921034426.037209699919755754458931112671403265390,
    6039542586.3520280050642916443072979210699388420708,
    1439720407.3117216736632230727949123939715485786772,
    248874557.86205415651146038641322942321632125127801,
    31426415.585400194380614231628318205362874684987640,
    2876370.6289353724412254090516208496135991145378768,
    186056.26539522349504029498971604569928220784236328,
    8071.6720023658162106380029022722506138218516325024,
    210.82427775157934587250973392071336271166969580291,
    2.5066282746310002701649081771338373386264310793408,
)
LANCZOS_DEN = (
    0.0, 39916800.0, 120543840.0, 150917976.0, 105258076.0, 45995730.0,
    13339535.0, 2637558.0, 357423.0, 32670.0, 1925.0, 66.0, 1.0,
)

EULER_GAMMA = 0.5772156649015329
# zeta(k) for k = 2..40, used by the Taylor series of lgamma(1 + z).
ZETA = (
    1.6449340668482264, 1.2020569031595942, 1.0823232337111381,
    1.03692775514337, 1.0173430619844492, 1.008349277381923,
    1.0040773561979444, 1.0020083928260821, 1.000994575127818,
    1.0004941886041194, 1.000246086553308, 1.0001227133475785,
    1.0000612481350588, 1.000030588236307, 1.0000152822594086,
    1.0000076371976379, 1.000003817293265, 1.0000019082127165,
    1.0000009539620338, 1.0000004769329869, 1.0000002384505027,
    1.000000119219926, 1.000000059608189, 1.0000000298035034,
    1.0000000149015549, 1.0000000074507118, 1.000000003725334,
    1.0000000018626598, 1.0000000009313275, 1.0000000004656628,
    1.000000000232831, 1.0000000001164155, 1.0000000000582077,
    1.0000000000291038, 1.000000000014552, 1.000000000007276,
    1.000000000003638, 1.000000000001819, 1.0000000000009095,
)
SERIES_RADIUS = 0.2
FPMIN = 1e-300
# integer (a, b) with a + b - 1 up to this use the finite binomial sum
BINOMIAL_MAX_N = 40.0


def _lanczos_sum(x: float) -> float:
    num = 0.0
    den = 0.0
    if x < 5.0:
        for i in range(12, -1, -1):
            num = num * x + LANCZOS_NUM[i]
            den = den * x + LANCZOS_DEN[i]
    else:
        for i in range(13):
            num = num / x + LANCZOS_NUM[i]
            den = den / x + LANCZOS_DEN[i]
    return num / den


def _lgamma1p_series(z: float) -> float:
    # lgamma(1 + z) = -gamma*z + sum_{k>=2} (-1)^k zeta(k) z^k / k, |z| <= 0.2
    total = 0.0
    zk = z
    for j in range(39):
        k = j + 2
        zk = zk * z
        term = ZETA[j] * zk / k
        if k % 2 == 0:
            total = total + term
        else:
            total = total - term
    return total - EULER_GAMMA * z


def _lgamma_lanczos(x: float) -> float:
    r = math.log(_lanczos_sum(x)) - LANCZOS_G
    return r + (x - 0.5) * (math.log(x + LANCZOS_G_MINUS_HALF) - 1.0)


def log_gamma(x: float) -> float:
    """ln Gamma(x) for finite x > 0 (no argument checking)."""
    if x < 1.0 - SERIES_RADIUS:
        if x <= SERIES_RADIUS:
            return _lgamma1p_series(x) - math.log(x)
        return _lgamma_lanczos(x + 1.0) - math.log(x)
    if x <= 1.0 + SERIES_RADIUS:
        return _lgamma1p_series(x - 1.0)
    if 2.0 - SERIES_RADIUS <= x <= 2.0 + SERIES_RADIUS:
        z = x - 2.0
        return math.log1p(z) + _lgamma1p_series(z)
    return _lgamma_lanczos(x)


def log_beta(a: float, b: float) -> float:
    return log_gamma(a) + log_gamma(b) - log_gamma(a + b)


def _beta_cf(x: float, a: float, b: float, tol: float, max_iter: int) -> float:
    # modified Lentz evaluation of the incomplete-beta continued fraction
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if math.fabs(d) < FPMIN:
        d = FPMIN
    d = 1.0 / d
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2.0 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if math.fabs(d) < FPMIN:
            d = FPMIN
        c = 1.0 + aa / c
        if math.fabs(c) < FPMIN:
            c = FPMIN
        d = 1.0 / d
        h = h * (d * c)
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if math.fabs(d) < FPMIN:
            d = FPMIN
        c = 1.0 + aa / c
        if math.fabs(c) < FPMIN:
            c = FPMIN
        d = 1.0 / d
        delta = d * c
        h = h * delta
        if math.fabs(delta - 1.0) < tol:
            return h
    raise ConvergenceError(
        f"incomplete beta continued fraction did not converge in {max_iter} "
        f"iterations (x={x!r}, a={a!r}, b={b!r})"
    )


def _binomial_tail(x: float, a: float, b: float) -> float:
    # I_x(a, b) = P(Binomial(a + b - 1, x) >= a); sums whichever tail is smaller.
    # Coefficients stay exact integers for n <= 40, so dyadic x gives exact results.
    n = a + b - 1.0
    y = 1.0 - x
    coef = 1.0
    total = 0.0
    j = 0.0
    upper = a > n * x
    while j <= n:
        if (j >= a) == upper:
            total = total + coef * math.pow(x, j) * math.pow(y, n - j)
        coef = coef * (n - j) / (j + 1.0)
        j = j + 1.0
    if upper:
        return total
    return 1.0 - total


def reg_inc_beta(x: float, a: float, b: float, tol: float, max_iter: int) -> float:
    """I_x(a, b) for validated arguments."""
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    # exact by symmetry; keeps gates at tau = 0.5 off rounding noise
    if x == 0.5 and a == b:
        return 0.5
    if a == math.floor(a) and b == math.floor(b) and a + b - 1.0 <= BINOMIAL_MAX_N:
        value = _binomial_tail(x, a, b)
    elif a == 1.0:
        return -math.expm1(b * math.log1p(-x))
    elif b == 1.0:
        return math.pow(x, a)
    else:
        value = _continued_fraction_value(x, a, b, tol, max_iter)
    if value < 0.0:
        return 0.0
    if value > 1.0:
        return 1.0
    return value


def _continued_fraction_value(x: float, a: float, b: float, tol: float, max_iter: int) -> float:
    front = math.exp(a * math.log(x) + b * math.log1p(-x) - log_beta(a, b))
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_cf(x, a, b, tol, max_iter) / a
    return 1.0 - front * _beta_cf(1.0 - x, b, a, tol, max_iter) / b


# Philox4x64-10 counter-based generator; same stream as numpy.random.Philox.
_M32 = np.uint64(0xFFFFFFFF)
_S32 = np.uint64(32)
PHILOX_M0 = np.uint64(0xD2E7470EE14C6C93)
PHILOX_M1 = np.uint64(0xCA5A826395121157)
PHILOX_W0 = 0x9E3779B97F4A7C15
PHILOX_W1 = 0xBB67AE8584CAA73B
_U64 = (1 << 64) - 1
_DOUBLE_SCALE = 1.0 / 9007199254740992.0


def _mulhilo(a: np.uint64, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    a_lo, a_hi = a & _M32, a >> _S32
    b_lo, b_hi = b & _M32, b >> _S32
    lo_lo = a_lo * b_lo
    hi_lo = a_hi * b_lo
    cross = (lo_lo >> _S32) + (hi_lo & _M32) + a_lo * b_hi
    hi = a_hi * b_hi + (hi_lo >> _S32) + (cross >> _S32)
    lo = (cross << _S32) | (lo_lo & _M32)
    return hi, lo


def philox_uniforms(seed: int, run_start: int, run_stop: int, n_values: int) -> np.ndarray:
    """Uniform doubles in [0, 1) for runs ``run_start..run_stop-1``, shape (runs, n_values).

    Row ``r`` is the stream of ``Philox(key=seed, counter=r << 64)``: block ``j``
    encrypts the counter ``(j + 1, r, 0, 0)`` and each 64-bit output ``x``
    becomes ``(x >> 11) * 2**-53``.
    """
    runs = run_stop - run_start
    n_blocks = -(-n_values // 4)
    shape = (runs, n_blocks)
    with np.errstate(over="ignore"):
        c0 = np.broadcast_to(np.arange(1, n_blocks + 1, dtype=np.uint64)[None, :], shape).copy()
        c1 = np.broadcast_to(np.arange(run_start, run_stop, dtype=np.uint64)[:, None], shape).copy()
        c2 = np.zeros(shape, dtype=np.uint64)
        c3 = np.zeros(shape, dtype=np.uint64)
        k0, k1 = seed & _U64, 0
        for rnd in range(10):
            if rnd:
                k0 = (k0 + PHILOX_W0) & _U64
                k1 = (k1 + PHILOX_W1) & _U64
            hi0, lo0 = _mulhilo(PHILOX_M0, c0)
            hi1, lo1 = _mulhilo(PHILOX_M1, c2)
            c0, c1, c2, c3 = hi1 ^ c1 ^ np.uint64(k0), lo1, hi0 ^ c3 ^ np.uint64(k1), lo0
        words = np.stack([c0, c1, c2, c3], axis=2).reshape(runs, 4 * n_blocks)[:, :n_values]
    return (words >> np.uint64(11)).astype(np.float64) * _DOUBLE_SCALE


def simulate_block(seed, run_start, run_stop, p, alpha0, beta0, p_crit, tau, force,
                   horizon, sign, tol, max_iter):
    """Simulate runs ``run_start..run_stop-1`` and tally them.

    Run ``r`` reads ``N * T`` uniforms from its Philox stream, agent-major:
    slots ``0..T-2`` of an agent drive its learning outcomes, slot ``T-1`` its
    final private vote. Returns ``(wins, counts)`` where ``counts[i]`` is the
    number of runs in which agent ``i`` published.
    """
    n_agents = len(p)
    runs = run_stop - run_start
    n = horizon - 1
    u = philox_uniforms(seed, run_start, run_stop, n_agents * horizon).reshape(runs, n_agents, horizon)
    successes = (u[:, :, :n] < p[None, :, None]).sum(axis=2)
    publish = np.empty((runs, n_agents), dtype=bool)
    # the gate is a function of (prior, success count); tabulate it per agent
    tables: dict[tuple[float, float, float, float], np.ndarray] = {}
    for i in range(n_agents):
        if force[i]:
            publish[:, i] = True
            continue
        key = (float(alpha0[i]), float(beta0[i]), float(p_crit[i]), float(tau[i]))
        table = tables.get(key)
        if table is None:
            a0, b0, pc, t = key
            table = np.array(
                [1.0 - reg_inc_beta(pc, a0 + k, b0 + (n - k), tol, max_iter) > t
                 for k in range(n + 1)],
                dtype=bool,
            )
            tables[key] = table
        publish[:, i] = table[successes[:, i]]
    correct = u[:, :, n] < p[None, :]
    votes = np.where(correct, sign, -sign) * publish
    net = votes.sum(axis=1)
    wins = int(np.count_nonzero(net > 0))
    return wins, publish.sum(axis=0).astype(np.int64)
