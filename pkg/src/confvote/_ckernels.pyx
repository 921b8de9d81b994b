# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled numerical kernels.

Operation-for-operation port of ``_pykernels``; keep the two in sync so that
both backends stay bitwise identical.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport log, log1p, exp, expm1, fabs, floor, pow
from libc.stdint cimport uint64_t, int8_t
from libc.stdlib cimport malloc, free

cdef extern from *:
    """
    typedef struct { uint64_t v[4]; } cv_philox_block;

    static inline uint64_t cv_mulhilo(uint64_t a, uint64_t b, uint64_t *hi) {
        __uint128_t prod = (__uint128_t)a * b;
        *hi = (uint64_t)(prod >> 64);
        return (uint64_t)prod;
    }

    /* Philox4x64-10 applied to counter (c0, c1, 0, 0) with key (k0, 0). */
    static inline cv_philox_block cv_philox(uint64_t c0, uint64_t c1, uint64_t k0) {
        uint64_t x0 = c0, x1 = c1, x2 = 0, x3 = 0, k1 = 0, hi0, hi1, lo0, lo1;
        int rnd;
        for (rnd = 0; rnd < 10; rnd++) {
            if (rnd) {
                k0 += 0x9E3779B97F4A7C15ULL;
                k1 += 0xBB67AE8584CAA73BULL;
            }
            lo0 = cv_mulhilo(0xD2E7470EE14C6C93ULL, x0, &hi0);
            lo1 = cv_mulhilo(0xCA5A826395121157ULL, x2, &hi1);
            x0 = hi1 ^ x1 ^ k0;
            x1 = lo1;
            x2 = hi0 ^ x3 ^ k1;
            x3 = lo0;
        }
        cv_philox_block out = {{x0, x1, x2, x3}};
        return out;
    }
    """
    ctypedef struct cv_philox_block:
        uint64_t v[4]
    cv_philox_block cv_philox(uint64_t c0, uint64_t c1, uint64_t k0) nogil


cdef struct Stream:
    uint64_t key
    uint64_t run
    uint64_t block
    int pos
    uint64_t buf[4]


cdef inline void stream_init(Stream* s, uint64_t key, uint64_t run) noexcept nogil:
    s.key = key
    s.run = run
    s.block = 0
    s.pos = 4


cdef inline double stream_next(Stream* s) noexcept nogil:
    cdef cv_philox_block b
    cdef int j
    if s.pos == 4:
        s.block += 1
        b = cv_philox(s.block, s.run, s.key)
        for j in range(4):
            s.buf[j] = b.v[j]
        s.pos = 0
    s.pos += 1
    return <double>(s.buf[s.pos - 1] >> 11) * (1.0 / 9007199254740992.0)

from .errors import ConvergenceError

cnp.import_array()

NAME = "cython"

cdef double LANCZOS_G = 6.024680040776729583740234375
cdef double LANCZOS_G_MINUS_HALF = 5.524680040776729583740234375
cdef double[13] LANCZOS_NUM = [
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
]
cdef double[13] LANCZOS_DEN = [
    0.0, 39916800.0, 120543840.0, 150917976.0, 105258076.0, 45995730.0,
    13339535.0, 2637558.0, 357423.0, 32670.0, 1925.0, 66.0, 1.0,
]
cdef double EULER_GAMMA = 0.5772156649015329
cdef double[39] ZETA = [
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
]
cdef double SERIES_RADIUS = 0.2
cdef double FPMIN = 1e-300
cdef double BINOMIAL_MAX_N = 40.0


cdef inline double _lanczos_sum(double x) noexcept nogil:
    cdef double num = 0.0, den = 0.0
    cdef int i
    if x < 5.0:
        for i in range(12, -1, -1):
            num = num * x + LANCZOS_NUM[i]
            den = den * x + LANCZOS_DEN[i]
    else:
        for i in range(13):
            num = num / x + LANCZOS_NUM[i]
            den = den / x + LANCZOS_DEN[i]
    return num / den


cdef inline double _lgamma1p_series(double z) noexcept nogil:
    cdef double total = 0.0, zk = z, term
    cdef int j, k
    for j in range(39):
        k = j + 2
        zk = zk * z
        term = ZETA[j] * zk / k
        if k % 2 == 0:
            total = total + term
        else:
            total = total - term
    return total - EULER_GAMMA * z


cdef inline double _lgamma_lanczos(double x) noexcept nogil:
    cdef double r = log(_lanczos_sum(x)) - LANCZOS_G
    return r + (x - 0.5) * (log(x + LANCZOS_G_MINUS_HALF) - 1.0)


cdef double c_log_gamma(double x) noexcept nogil:
    cdef double z
    if x < 1.0 - SERIES_RADIUS:
        if x <= SERIES_RADIUS:
            return _lgamma1p_series(x) - log(x)
        return _lgamma_lanczos(x + 1.0) - log(x)
    if x <= 1.0 + SERIES_RADIUS:
        return _lgamma1p_series(x - 1.0)
    if 2.0 - SERIES_RADIUS <= x <= 2.0 + SERIES_RADIUS:
        z = x - 2.0
        return log1p(z) + _lgamma1p_series(z)
    return _lgamma_lanczos(x)


cdef inline double c_log_beta(double a, double b) noexcept nogil:
    return c_log_gamma(a) + c_log_gamma(b) - c_log_gamma(a + b)


cdef double _beta_cf(double x, double a, double b, double tol, long max_iter,
                     int* status) noexcept nogil:
    cdef double qab = a + b, qap = a + 1.0, qam = a - 1.0
    cdef double c = 1.0, d, h, aa, m2, delta
    cdef long m
    d = 1.0 - qab * x / qap
    if fabs(d) < FPMIN:
        d = FPMIN
    d = 1.0 / d
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2.0 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if fabs(d) < FPMIN:
            d = FPMIN
        c = 1.0 + aa / c
        if fabs(c) < FPMIN:
            c = FPMIN
        d = 1.0 / d
        h = h * (d * c)
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if fabs(d) < FPMIN:
            d = FPMIN
        c = 1.0 + aa / c
        if fabs(c) < FPMIN:
            c = FPMIN
        d = 1.0 / d
        delta = d * c
        h = h * delta
        if fabs(delta - 1.0) < tol:
            return h
    status[0] = 1
    return h


cdef double _binomial_tail(double x, double a, double b) noexcept nogil:
    cdef double n = a + b - 1.0
    cdef double y = 1.0 - x
    cdef double coef = 1.0
    cdef double total = 0.0
    cdef double j = 0.0
    cdef bint upper = a > n * x
    while j <= n:
        if (j >= a) == upper:
            total = total + coef * pow(x, j) * pow(y, n - j)
        coef = coef * (n - j) / (j + 1.0)
        j = j + 1.0
    if upper:
        return total
    return 1.0 - total


cdef double c_reg_inc_beta(double x, double a, double b, double tol, long max_iter,
                           int* status) noexcept nogil:
    cdef double front, value
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    if x == 0.5 and a == b:
        return 0.5
    if a == floor(a) and b == floor(b) and a + b - 1.0 <= BINOMIAL_MAX_N:
        value = _binomial_tail(x, a, b)
        if value < 0.0:
            return 0.0
        if value > 1.0:
            return 1.0
        return value
    if a == 1.0:
        return -expm1(b * log1p(-x))
    if b == 1.0:
        return pow(x, a)
    front = exp(a * log(x) + b * log1p(-x) - c_log_beta(a, b))
    if x < (a + 1.0) / (a + b + 2.0):
        value = front * _beta_cf(x, a, b, tol, max_iter, status) / a
    else:
        value = 1.0 - front * _beta_cf(1.0 - x, b, a, tol, max_iter, status) / b
    if value < 0.0:
        return 0.0
    if value > 1.0:
        return 1.0
    return value


def log_gamma(double x):
    """ln Gamma(x) for finite x > 0 (no argument checking)."""
    return c_log_gamma(x)


def log_beta(double a, double b):
    return c_log_beta(a, b)


def reg_inc_beta(double x, double a, double b, double tol, long max_iter):
    """I_x(a, b) for validated arguments."""
    cdef int status = 0
    cdef double value = c_reg_inc_beta(x, a, b, tol, max_iter, &status)
    if status:
        raise ConvergenceError(
            f"incomplete beta continued fraction did not converge in {max_iter} "
            f"iterations (x={x!r}, a={a!r}, b={b!r})"
        )
    return value


def philox_uniforms(uint64_t seed, uint64_t run_start, uint64_t run_stop, Py_ssize_t n_values):
    """Uniform doubles for runs ``run_start..run_stop-1``, shape (runs, n_values)."""
    out = np.empty((run_stop - run_start, n_values), dtype=np.float64)
    cdef double[:, ::1] view = out
    cdef Stream s
    cdef Py_ssize_t r, j
    with nogil:
        for r in range(<Py_ssize_t>(run_stop - run_start)):
            stream_init(&s, seed, run_start + r)
            for j in range(n_values):
                view[r, j] = stream_next(&s)
    return out


def simulate_block(uint64_t seed, uint64_t run_start, uint64_t run_stop,
                   const double[::1] p, const double[::1] alpha0, const double[::1] beta0,
                   const double[::1] p_crit, const double[::1] tau,
                   const unsigned char[::1] force, Py_ssize_t horizon, int sign,
                   double tol, long max_iter):
    """Simulate runs ``run_start..run_stop-1`` and tally them.

    Each run replays every agent's learning phase from its own Philox stream,
    forms the posterior and applies the gate. Gate outcomes are memoized per
    (agent, success count) on first use. Returns ``(wins, counts)``.
    """
    cdef Py_ssize_t n_agents = p.shape[0]
    cdef Py_ssize_t n = horizon - 1
    cdef Py_ssize_t i, t, k
    cdef uint64_t r
    cdef long net, wins = 0
    cdef int status = 0
    cdef double conf, x
    cdef bint published
    cdef Stream s
    # -1 unknown, 0 abstain, 1 publish
    cdef int8_t* memo = <int8_t*> malloc(n_agents * (n + 1) * sizeof(int8_t))
    if memo == NULL:
        raise MemoryError()
    counts_arr = np.zeros(n_agents, dtype=np.int64)
    cdef cnp.int64_t[::1] counts = counts_arr
    try:
        with nogil:
            for i in range(n_agents * (n + 1)):
                memo[i] = -1
            for r in range(run_start, run_stop):
                stream_init(&s, seed, r)
                net = 0
                for i in range(n_agents):
                    k = 0
                    for t in range(n):
                        if stream_next(&s) < p[i]:
                            k += 1
                    x = stream_next(&s)
                    if force[i]:
                        published = True
                    else:
                        if memo[i * (n + 1) + k] < 0:
                            conf = 1.0 - c_reg_inc_beta(p_crit[i], alpha0[i] + k,
                                                        beta0[i] + (n - k), tol, max_iter,
                                                        &status)
                            memo[i * (n + 1) + k] = 1 if conf > tau[i] else 0
                        published = memo[i * (n + 1) + k] == 1
                    if published:
                        counts[i] += 1
                        if x < p[i]:
                            net += sign
                        else:
                            net -= sign
                if net > 0:
                    wins += 1
    finally:
        free(memo)
    if status:
        raise ConvergenceError(
            f"incomplete beta continued fraction did not converge in {max_iter} iterations"
        )
    return int(wins), counts_arr
