"""Statistical kernel: percentile p-values, Cohen's d, Student-t CDFs
(central and noncentral), one-tailed t-test power, and the solver that
turns a required power into a required iteration count.

The t distributions are evaluated from first principles (regularized
incomplete beta via continued fraction; noncentral CDF via the Poisson
mixture series started at its modal term) so that accuracy and failure
modes are explicit rather than inherited.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import (
    EmptyVector,
    InvalidDf,
    InvalidProbability,
    SeriesNonConvergence,
    TooFewSamples,
    ZeroPooledStd,
)

# Solver bracket for the iteration count; above the bracket the demand is
# reported as unattainable rather than extrapolated.
MIN_ITERATIONS = 2.0
MAX_ITERATIONS_BRACKET = 10_000.0
UNATTAINABLE = math.inf

_SERIES_MAX_TERMS = 1_000_000
_SERIES_TOL = 1e-10


@dataclass(frozen=True)
class PowerQuery:
    """Inputs to the required-iterations solver."""

    alpha: float
    target_power: float
    effect_size: float


# ---------------------------------------------------------------------------
# Percentile p-values
# ---------------------------------------------------------------------------

def percentile(s, x: float) -> float:
    """Fraction of entries of ``s`` strictly below ``x`` (ties do not count).

    This is the anticonservative empirical p-value: always a multiple of
    1/len(s), and 0 is attainable.
    """
    arr = np.asarray(s, dtype=np.float64)
    if arr.size == 0:
        raise EmptyVector("percentile of an empty vector")
    return float(np.count_nonzero(x > arr)) / arr.size


def percentile_corrected(s, x: float) -> float:
    """Small-sample corrected percentile: (1 + hits) / (n + 1).

    Never returns 0; dominates :func:`percentile` for every input.
    """
    arr = np.asarray(s, dtype=np.float64)
    if arr.size == 0:
        raise EmptyVector("percentile of an empty vector")
    return (1.0 + float(np.count_nonzero(x > arr))) / (arr.size + 1.0)


# ---------------------------------------------------------------------------
# Effect size
# ---------------------------------------------------------------------------

def pooled_std(s1, s2) -> float:
    """sqrt of the average of the two sample variances (ddof=1)."""
    a = np.asarray(s1, dtype=np.float64)
    b = np.asarray(s2, dtype=np.float64)
    if a.size < 2 or b.size < 2:
        raise TooFewSamples("pooled_std needs at least 2 samples per vector")
    return math.sqrt((a.var(ddof=1) + b.var(ddof=1)) / 2.0)


def effect_size(s1, s2) -> float:
    """Cohen's d: mean difference in pooled-standard-deviation units.

    Positive when s1's mean exceeds s2's. Raises ZeroPooledStd when both
    vectors are constant (a pooled spread that is pure float rounding of
    constant data counts as zero); callers decide whether that means an
    unbounded or an undefined effect.
    """
    sd = pooled_std(s1, s2)
    a = np.asarray(s1, dtype=np.float64)
    b = np.asarray(s2, dtype=np.float64)
    scale = max(float(np.abs(a).max()), float(np.abs(b).max()))
    if sd <= 1e-12 * scale or sd == 0.0:
        raise ZeroPooledStd("both samples are constant")
    return float((a.mean() - b.mean()) / sd)


# ---------------------------------------------------------------------------
# Regularized incomplete beta (continued fraction, Lentz's method)
# ---------------------------------------------------------------------------

def _beta_cont_frac(a: float, b: float, x: float) -> float:
    max_iter = 500
    eps = 1e-16
    fpmin = 1e-300
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < fpmin:
        d = fpmin
    d = 1.0 / d
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < fpmin:
            d = fpmin
        c = 1.0 + aa / c
        if abs(c) < fpmin:
            c = fpmin
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < fpmin:
            d = fpmin
        c = 1.0 + aa / c
        if abs(c) < fpmin:
            c = fpmin
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < eps:
            return h
    raise SeriesNonConvergence(
        f"incomplete beta continued fraction (a={a}, b={b}, x={x})"
    )


def _betainc(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta I_x(a, b)."""
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log1p(-x)
    )
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        if front == 0.0:
            # Leading factor underflowed; the tail is < 1e-290 regardless
            # of the continued fraction's O(1)..O(e^40) value.
            return 0.0
        return front * _beta_cont_frac(a, b, x) / a
    if front == 0.0:
        return 1.0
    return 1.0 - front * _beta_cont_frac(b, a, 1.0 - x) / b


def _norm_cdf(z: float) -> float:
    return 0.5 * math.erfc(-z / math.sqrt(2.0))


# ---------------------------------------------------------------------------
# Central Student t
# ---------------------------------------------------------------------------

def central_t_cdf(x: float, df: float) -> float:
    """CDF of the central Student t distribution."""
    if not df > 0:
        raise InvalidDf(f"df must be > 0, got {df}")
    if math.isnan(x):
        raise InvalidProbability("x is NaN")
    if x == 0.0:
        return 0.5
    if math.isinf(x):
        return 1.0 if x > 0 else 0.0
    z = df / (df + x * x)
    p = 0.5 * _betainc(0.5 * df, 0.5, z)
    return min(max(p if x < 0 else 1.0 - p, 0.0), 1.0)


def _t_pdf(x: float, df: float) -> float:
    return math.exp(
        math.lgamma(0.5 * (df + 1.0))
        - math.lgamma(0.5 * df)
        - 0.5 * math.log(df * math.pi)
        - 0.5 * (df + 1.0) * math.log1p(x * x / df)
    )


@lru_cache(maxsize=16384)
def _t_ppf_cached(p: float, df: float) -> float:
    # Solve cdf(t) = p for p <= 0.5 (t <= 0); symmetry handles the rest.
    if p == 0.5:
        return 0.0
    # Bracket downward, then Newton with bisection safeguards.
    hi = 0.0
    lo = -1.0
    while central_t_cdf(lo, df) > p:
        lo *= 2.0
        if lo < -1e300:
            raise SeriesNonConvergence("t quantile bracket expansion failed")
    t = 0.5 * (lo + hi)
    for _ in range(200):
        f = central_t_cdf(t, df) - p
        if f > 0:
            hi = t
        else:
            lo = t
        dens = _t_pdf(t, df)
        step_ok = False
        if dens > 0.0:
            t_new = t - f / dens
            if lo < t_new < hi:
                step_ok = True
                t_next = t_new
        if not step_ok:
            t_next = 0.5 * (lo + hi)
        if abs(t_next - t) <= 1e-15 * max(1.0, abs(t_next)):
            t = t_next
            break
        t = t_next
    return t


def central_t_ppf(p: float, df: float) -> float:
    """Quantile function of the central Student t distribution."""
    if not df > 0:
        raise InvalidDf(f"df must be > 0, got {df}")
    if not 0.0 < p < 1.0:
        raise InvalidProbability(f"p must be in (0, 1), got {p}")
    if p <= 0.5:
        return _t_ppf_cached(p, df)
    return -_t_ppf_cached(1.0 - p, df)


# ---------------------------------------------------------------------------
# Noncentral Student t
# ---------------------------------------------------------------------------

def _nct_cdf_nonneg(t: float, df: float, delta: float) -> float:
    # P[T <= t] for t >= 0 via the Poisson-mixture series
    #   Phi(-delta) + 0.5 * sum_j [ p_j I_y(j+1/2, df/2) + q_j I_y(j+1, df/2) ]
    # with y = t^2/(t^2+df), p_j Poisson(delta^2/2) mass and
    # q_j = delta e^{-l}(l)^j / (sqrt(2) Gamma(j+3/2)), l = delta^2/2.
    # Summation starts at the Poisson mode so large |delta| cannot underflow
    # the leading term.
    base = _norm_cdf(-delta)
    if t == 0.0:
        return base
    y = t * t / (t * t + df)
    if y >= 1.0:
        # t so large that y rounds to 1; the remaining upper tail is below
        # double precision at any supported tolerance.
        return 1.0
    lam = 0.5 * delta * delta
    b = 0.5 * df
    j0 = int(lam)

    log_lam = math.log(lam)
    log_p0 = -lam + j0 * log_lam - math.lgamma(j0 + 1.0)
    log_q0 = (
        math.log(abs(delta))
        - lam
        + j0 * log_lam
        - 0.5 * math.log(2.0)
        - math.lgamma(j0 + 1.5)
    )
    q_sign = 1.0 if delta > 0 else -1.0

    ln_y = math.log(y)
    ln_1my = math.log1p(-y)

    def beta_term(a: float) -> float:
        # y^a (1-y)^b Gamma(a+b) / (Gamma(a+1) Gamma(b)); the step removed
        # from I_y(a, b) when a increases by one.
        return math.exp(
            a * ln_y + b * ln_1my + math.lgamma(a + b) - math.lgamma(a + 1.0) - math.lgamma(b)
        )

    total = 0.0
    n_terms = 0

    # Upward sweep from the modal term.
    p_j = math.exp(log_p0)
    q_j = q_sign * math.exp(log_q0)
    a_p = j0 + 0.5
    a_q = j0 + 1.0
    i_p = _betainc(a_p, b, y)
    i_q = _betainc(a_q, b, y)
    t_p = beta_term(a_p)
    t_q = beta_term(a_q)
    j = j0
    while True:
        contrib = p_j * i_p + q_j * i_q
        total += contrib
        n_terms += 1
        if n_terms > _SERIES_MAX_TERMS:
            raise SeriesNonConvergence(
                f"noncentral t series exceeded {_SERIES_MAX_TERMS} terms"
            )
        if j > lam and p_j + abs(q_j) < _SERIES_TOL:
            break
        # advance j -> j+1
        ratio = lam / (j + 1.0)
        p_j *= ratio
        q_j *= lam / (j + 1.5)
        i_p -= t_p
        i_q -= t_q
        t_p *= y * (a_p + b) / (a_p + 1.0)
        t_q *= y * (a_q + b) / (a_q + 1.0)
        a_p += 1.0
        a_q += 1.0
        if i_p < 0.0:
            i_p = 0.0
        if i_q < 0.0:
            i_q = 0.0
        j += 1

    # Downward sweep (j0-1 .. 0).
    if j0 > 0:
        p_j = math.exp(log_p0)
        q_j = q_sign * math.exp(log_q0)
        a_p = j0 + 0.5
        a_q = j0 + 1.0
        i_p = _betainc(a_p, b, y)
        i_q = _betainc(a_q, b, y)
        t_p = beta_term(a_p - 1.0)
        t_q = beta_term(a_q - 1.0)
        j = j0
        while j > 0:
            # step j -> j-1
            p_j *= j / lam
            q_j *= (j + 0.5) / lam
            i_p += t_p
            i_q += t_q
            a_p -= 1.0
            a_q -= 1.0
            if a_p > 1.0:
                t_p *= a_p / (y * (a_p + b - 1.0))
            else:
                t_p = beta_term(a_p - 1.0) if a_p - 1.0 > 0 else 0.0
            if a_q > 1.0:
                t_q *= a_q / (y * (a_q + b - 1.0))
            else:
                t_q = beta_term(a_q - 1.0) if a_q - 1.0 > 0 else 0.0
            if i_p > 1.0:
                i_p = 1.0
            if i_q > 1.0:
                i_q = 1.0
            j -= 1
            contrib = p_j * i_p + q_j * i_q
            total += contrib
            n_terms += 1
            if n_terms > _SERIES_MAX_TERMS:
                raise SeriesNonConvergence(
                    f"noncentral t series exceeded {_SERIES_MAX_TERMS} terms"
                )
            if p_j + abs(q_j) < _SERIES_TOL:
                break

    return min(max(base + 0.5 * total, 0.0), 1.0)


def noncentral_t_cdf(x: float, df: float, nc: float) -> float:
    """CDF of the noncentral Student t with noncentrality ``nc``."""
    if not df > 0:
        raise InvalidDf(f"df must be > 0, got {df}")
    if math.isnan(x) or math.isnan(nc):
        raise InvalidProbability("x and nc must not be NaN")
    if math.isinf(x):
        return 1.0 if x > 0 else 0.0
    if nc == 0.0:
        return central_t_cdf(x, df)
    if x >= 0.0:
        return _nct_cdf_nonneg(x, df, nc)
    return min(max(1.0 - _nct_cdf_nonneg(-x, df, -nc), 0.0), 1.0)


# ---------------------------------------------------------------------------
# Power and the required-iterations solver
# ---------------------------------------------------------------------------

def tt_test_power(alpha: float, iterations: float, d: float) -> float:
    """Power of the one-tailed probe-comparison t test at ``iterations``.

    Tail convention: the test rejects when the probe's mean impact falls in
    the lower tail of the feature-impact distribution, so the alternative
    with effect size d > 0 (feature above probe) sits a noncentrality of
    -sqrt(I)*d from the null. Power therefore increases with d and equals
    alpha at d = 0. Degrees of freedom are I-1 in both the central quantile
    and the noncentral CDF.
    """
    if not 0.0 < alpha < 1.0:
        raise InvalidProbability(f"alpha must be in (0, 1), got {alpha}")
    if not iterations >= 2.0:
        raise InvalidDf(f"iterations must be >= 2, got {iterations}")
    df = iterations - 1.0
    crit = central_t_ppf(alpha, df)
    return noncentral_t_cdf(crit, df, -math.sqrt(iterations) * d)


def solve_required_iterations(query: PowerQuery) -> float:
    """Smallest real I in [2, 10000] with power(alpha, I, d) >= target_power.

    Returns 2.0 when the demand is already met at the minimum, and the
    ``UNATTAINABLE`` sentinel (inf) when it cannot be met inside the
    bracket (in particular whenever d <= 0). Bisection runs until the
    bracket is relatively tight *and* free of interior integers, so that
    ceil(result) is the exact minimal whole iteration count.
    """
    if not 0.0 < query.alpha < 1.0:
        raise InvalidProbability(f"alpha must be in (0, 1), got {query.alpha}")
    if not 0.0 < query.target_power < 1.0:
        raise InvalidProbability(
            f"target_power must be in (0, 1), got {query.target_power}"
        )
    if not math.isfinite(query.effect_size):
        raise ValueError("effect_size must be finite")

    # Power is monotone in d and numerically saturated far before |d| = 100
    # for any plausible alpha, so wilder measured effects (near-degenerate
    # impact columns) resolve to the same demand as d = +/-100. The clamp
    # also keeps the noncentrality within the series' convergent range.
    d = min(max(query.effect_size, -100.0), 100.0)

    def gap(iters: float) -> float:
        return tt_test_power(query.alpha, iters, d) - query.target_power

    if gap(MIN_ITERATIONS) >= 0.0:
        return MIN_ITERATIONS
    if gap(MAX_ITERATIONS_BRACKET) < 0.0:
        return UNATTAINABLE

    lo, hi = MIN_ITERATIONS, MAX_ITERATIONS_BRACKET
    for _ in range(200):
        tight = (hi - lo) <= 1e-6 * hi
        if tight and math.ceil(lo) >= hi:
            break
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if gap(mid) >= 0.0:
            hi = mid
        else:
            lo = mid
    return hi
