"""Goodness-of-fit tests and distribution distances.

The survival functions are implemented here rather than imported so the
module has no dependency beyond numpy.
"""

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import EmptySample, ValidationError, ZeroExpectedCell

_EPS = 1e-15
_MAX_ITER = 10_000


@dataclass(frozen=True)
class TwoSampleResult:
    statistic: float
    p_value: float
    assumption_ok: bool = True
    assumption_note: str = ""


def _gamma_series(a, x):
    # lower regularized P(a, x) by its power series; converges for x < a + 1
    term = 1.0 / a
    total = term
    ap = a
    for _ in range(_MAX_ITER):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _EPS:
            break
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _gamma_cont_frac(a, x):
    # upper regularized Q(a, x) by modified Lentz continued fraction
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_ITER):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    return h * math.exp(-x + a * math.log(x) - math.lgamma(a))


def gammaincc(a, x):
    """Regularized upper incomplete gamma function Q(a, x)."""
    if a <= 0:
        raise ValueError("a must be positive")
    if x <= 0:
        return 1.0
    if x < a + 1.0:
        return min(1.0, max(0.0, 1.0 - _gamma_series(a, x)))
    return min(1.0, max(0.0, _gamma_cont_frac(a, x)))


def chi2_sf(statistic, df):
    """Survival function of the chi-square distribution."""
    if df < 1:
        raise ValueError("df must be >= 1")
    return gammaincc(df / 2.0, statistic / 2.0)


def kolmogorov_sf(lam):
    """P(K > lam) for the limiting Kolmogorov distribution."""
    if lam <= 0:
        return 1.0
    if lam < 1.18:
        # Jacobi-theta form converges fast for small arguments
        y = math.exp(-(math.pi ** 2) / (8.0 * lam * lam))
        total = 0.0
        for k in range(1, 200, 2):
            term = y ** (k * k)
            total += term
            if term < _EPS * total:
                break
        return min(1.0, max(0.0, 1.0 - math.sqrt(2.0 * math.pi) / lam * total))
    total = 0.0
    for k in range(1, 200):
        term = math.exp(-2.0 * k * k * lam * lam)
        total += term if k % 2 else -term
        if term < _EPS:
            break
    return min(1.0, max(0.0, 2.0 * total))


def chi_square_assumption(expected):
    """Check the usual expected-count rule for a chi-square test.

    At least 80% of cells need an expected count of 5 or more and no cell
    may fall below 1.
    """
    expected = np.asarray(expected, dtype=float)
    share = np.mean(expected >= 5.0)
    low = expected.min()
    ok = bool(share >= 0.8 and low >= 1.0)
    if ok:
        return True, ""
    return False, f"{share:.0%} of cells have expected count >= 5 (need 80%); minimum expected {low:.3g}"


def chi_square_gof(observed, proportions):
    observed = np.asarray(observed, dtype=float)
    proportions = np.asarray(proportions, dtype=float)
    if observed.shape != proportions.shape or observed.ndim != 1:
        raise ValidationError("observed and proportions must be 1-D and aligned")
    if observed.size < 2:
        raise ValidationError("chi-square needs at least 2 categories")
    if (proportions < 0).any() or (observed < 0).any():
        raise ValidationError("counts and proportions must be non-negative")
    total = observed.sum()
    if total < 1:
        raise EmptySample("chi-square needs at least one observation")
    zero = proportions == 0
    if (zero & (observed > 0)).any():
        j = int(np.flatnonzero(zero & (observed > 0))[0])
        raise ZeroExpectedCell(f"cell {j} has expected proportion 0 but {observed[j]:g} observations")
    keep = ~zero
    expected = total * proportions[keep] / proportions.sum()
    stat = float(np.sum((observed[keep] - expected) ** 2 / expected))
    df = int(keep.sum()) - 1
    p = chi2_sf(stat, df) if df >= 1 else 1.0
    ok, note = chi_square_assumption(expected)
    return TwoSampleResult(stat, p, ok, note)


def ks_statistic(sample_a, sample_b):
    a = np.sort(np.asarray(sample_a, dtype=float))
    b = np.sort(np.asarray(sample_b, dtype=float))
    if a.size == 0 or b.size == 0:
        raise EmptySample("both samples must be non-empty")
    grid = np.concatenate([a, b])
    cdf_a = np.searchsorted(a, grid, side="right") / a.size
    cdf_b = np.searchsorted(b, grid, side="right") / b.size
    return float(np.max(np.abs(cdf_a - cdf_b)))


def ks_two_sample(sample_a, sample_b):
    stat = ks_statistic(sample_a, sample_b)
    na, nb = len(sample_a), len(sample_b)
    ne = na * nb / (na + nb)
    return TwoSampleResult(stat, kolmogorov_sf(math.sqrt(ne) * stat))


def hellinger_distance(p, q):
    """Hellinger distance between two discrete distributions on one support."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise ValidationError("p and q must share a support")
    h2 = 0.5 * np.sum((np.sqrt(p) - np.sqrt(q)) ** 2)
    return float(min(1.0, math.sqrt(max(h2, 0.0))))
