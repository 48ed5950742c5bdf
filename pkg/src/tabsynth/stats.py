"""Aggregation and significance tests for per-track metric values.

The t machinery is self-contained: two-sided p-values come from the
regularized incomplete beta function evaluated with a Lentz-style continued
fraction, so results can be cross-checked against an external statistics
package without sharing code paths with it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .errors import DegenerateDataError, InsufficientDataError, SampleTooSmallError


@dataclass(frozen=True)
class Aggregate:
    mean: float
    std: float
    n: int


def aggregate(values: Sequence[float]) -> Aggregate:
    """Arithmetic mean and sample standard deviation (n-1 denominator)."""
    values = [float(v) for v in values]
    n = len(values)
    if n < 2:
        raise InsufficientDataError(f"need at least 2 values to aggregate, got {n}")
    mean = math.fsum(values) / n
    var = math.fsum((v - mean) ** 2 for v in values) / (n - 1)
    return Aggregate(mean=mean, std=math.sqrt(var), n=n)


# ---------------------------------------------------------------------------
# Student's t
# ---------------------------------------------------------------------------

_CF_EPS = 3e-16
_CF_TINY = 1e-300
_CF_MAX_ITER = 500


def _beta_continued_fraction(a: float, b: float, x: float) -> float:
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _CF_TINY:
        d = _CF_TINY
    d = 1.0 / d
    h = d
    for m in range(1, _CF_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _CF_TINY:
            d = _CF_TINY
        c = 1.0 + aa / c
        if abs(c) < _CF_TINY:
            c = _CF_TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _CF_TINY:
            d = _CF_TINY
        c = 1.0 + aa / c
        if abs(c) < _CF_TINY:
            c = _CF_TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _CF_EPS:
            break
    return h


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    """I_x(a, b) via the continued fraction, switching tails for stability."""
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_front = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
                + a * math.log(x) + b * math.log1p(-x))
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_continued_fraction(a, b, x) / a
    return 1.0 - front * _beta_continued_fraction(b, a, 1.0 - x) / b


def t_two_sided_p(t: float, df: float) -> float:
    """P(|T| >= |t|) for Student's t with df degrees of freedom."""
    if df <= 0:
        raise InsufficientDataError(f"degrees of freedom must be positive, got {df}")
    return regularized_incomplete_beta(df / 2.0, 0.5, df / (df + t * t))


@dataclass(frozen=True)
class TTestResult:
    t: float
    df: float
    p: float


def ttest_two_sample(a: Sequence[float], b: Sequence[float]) -> TTestResult:
    """Pooled-variance (equal-variance) two-sample t-test, two-sided."""
    a = [float(v) for v in a]
    b = [float(v) for v in b]
    na, nb = len(a), len(b)
    if na < 2 or nb < 2:
        raise InsufficientDataError("both samples need at least 2 values")
    mean_a = math.fsum(a) / na
    mean_b = math.fsum(b) / nb
    ss_a = math.fsum((v - mean_a) ** 2 for v in a)
    ss_b = math.fsum((v - mean_b) ** 2 for v in b)
    df = na + nb - 2
    pooled = (ss_a + ss_b) / df
    if pooled <= 0.0:
        raise DegenerateDataError("zero pooled variance; t statistic undefined")
    t = (mean_a - mean_b) / math.sqrt(pooled * (1.0 / na + 1.0 / nb))
    return TTestResult(t=t, df=float(df), p=t_two_sided_p(t, df))


def ttest_paired(a: Sequence[float], b: Sequence[float]) -> TTestResult:
    """Paired t-test on elementwise differences, two-sided."""
    a = [float(v) for v in a]
    b = [float(v) for v in b]
    if len(a) != len(b):
        raise InsufficientDataError(f"paired samples differ in length: {len(a)} vs {len(b)}")
    n = len(a)
    if n < 2:
        raise InsufficientDataError("need at least 2 pairs")
    diffs = [x - y for x, y in zip(a, b)]
    mean = math.fsum(diffs) / n
    var = math.fsum((d - mean) ** 2 for d in diffs) / (n - 1)
    if var <= 0.0:
        raise DegenerateDataError("zero variance of differences; t statistic undefined")
    t = mean / math.sqrt(var / n)
    return TTestResult(t=t, df=float(n - 1), p=t_two_sided_p(t, n - 1))


# ---------------------------------------------------------------------------
# D'Agostino & Pearson omnibus normality test
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NormalityResult:
    k2: float
    p: float


def dagostino_pearson(a: Sequence[float]) -> NormalityResult:
    """K-squared omnibus statistic from the skewness and kurtosis Z-transforms."""
    a = [float(v) for v in a]
    n = len(a)
    if n < 8:
        raise SampleTooSmallError(f"normality test needs n >= 8, got {n}")
    mean = math.fsum(a) / n
    m2 = math.fsum((v - mean) ** 2 for v in a) / n
    if m2 <= 0.0:
        raise DegenerateDataError("zero variance; normality test undefined")
    m3 = math.fsum((v - mean) ** 3 for v in a) / n
    m4 = math.fsum((v - mean) ** 4 for v in a) / n

    # skewness transform (D'Agostino 1970)
    g1 = m3 / m2 ** 1.5
    y = g1 * math.sqrt((n + 1.0) * (n + 3.0) / (6.0 * (n - 2.0)))
    beta2 = (3.0 * (n * n + 27.0 * n - 70.0) * (n + 1.0) * (n + 3.0)
             / ((n - 2.0) * (n + 5.0) * (n + 7.0) * (n + 9.0)))
    w2 = -1.0 + math.sqrt(2.0 * (beta2 - 1.0))
    delta = 1.0 / math.sqrt(0.5 * math.log(w2))
    alpha = math.sqrt(2.0 / (w2 - 1.0))
    if y == 0.0:
        y = 1.0
    z1 = delta * math.log(y / alpha + math.sqrt((y / alpha) ** 2 + 1.0))

    # kurtosis transform (Anscombe & Glynn 1983)
    b2 = m4 / (m2 * m2)
    mean_b2 = 3.0 * (n - 1.0) / (n + 1.0)
    var_b2 = (24.0 * n * (n - 2.0) * (n - 3.0)
              / ((n + 1.0) ** 2 * (n + 3.0) * (n + 5.0)))
    x = (b2 - mean_b2) / math.sqrt(var_b2)
    sqrt_beta1 = (6.0 * (n * n - 5.0 * n + 2.0) / ((n + 7.0) * (n + 9.0))
                  * math.sqrt(6.0 * (n + 3.0) * (n + 5.0) / (n * (n - 2.0) * (n - 3.0))))
    big_a = 6.0 + 8.0 / sqrt_beta1 * (2.0 / sqrt_beta1
                                      + math.sqrt(1.0 + 4.0 / sqrt_beta1 ** 2))
    denom = 1.0 + x * math.sqrt(2.0 / (big_a - 4.0))
    root = math.copysign(abs((1.0 - 2.0 / big_a) / denom) ** (1.0 / 3.0), denom)
    z2 = ((1.0 - 2.0 / (9.0 * big_a)) - root) / math.sqrt(2.0 / (9.0 * big_a))

    k2 = z1 * z1 + z2 * z2
    return NormalityResult(k2=k2, p=math.exp(-k2 / 2.0))  # chi-square(2) tail
