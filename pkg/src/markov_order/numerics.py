"""Log-domain helpers and the special functions used by the inference code."""

from __future__ import annotations

import math
from typing import Iterable

NEG_INF = float("-inf")

_EPS = 1e-12
_BASE_ITERATIONS = 500
# Above this many degrees of freedom the chi-square tail uses Wilson-Hilferty.
WILSON_HILFERTY_DF = 1e6


class ConvergenceError(ArithmeticError):
    """Raised when an iterative special-function evaluation fails to converge."""


def log_gamma(x: float) -> float:
    """Natural log of the gamma function for ``x > 0``."""
    if not x > 0:
        raise ValueError(f"log_gamma is defined for x > 0, got {x!r}")
    return math.lgamma(x)


def log_sum_exp(values: Iterable[float]) -> float:
    """Return ``log(sum(exp(v)))`` without under- or overflow.

    The largest term is factored out before exponentiating, so a list of
    very negative log-evidences still produces a finite normalizer.
    An all ``-inf`` input gives exactly ``-inf``.
    """
    vals = [float(v) for v in values]
    if not vals:
        raise ValueError("log_sum_exp of an empty sequence")
    top = max(vals)
    if math.isinf(top):
        return top
    return top + math.log(math.fsum(math.exp(v - top) for v in vals))


def _max_iterations(a: float) -> int:
    # the series and continued fraction need O(sqrt(a)) terms near x ~ a
    return _BASE_ITERATIONS + int(10 * math.sqrt(a))


def _lower_series(a: float, x: float) -> float:
    """Regularized lower incomplete gamma P(a, x) by its power series."""
    term = 1.0 / a
    total = term
    denom = a
    for _ in range(_max_iterations(a)):
        denom += 1.0
        term *= x / denom
        total += term
        if abs(term) < abs(total) * _EPS:
            log_prefix = a * math.log(x) - x - math.lgamma(a)
            return total * math.exp(log_prefix)
    raise ConvergenceError(f"incomplete gamma series did not converge (a={a}, x={x})")


def _upper_continued_fraction(a: float, x: float) -> float:
    """Regularized upper incomplete gamma Q(a, x) by modified Lentz."""
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, _max_iterations(a) + 1):
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
            log_prefix = a * math.log(x) - x - math.lgamma(a)
            return h * math.exp(log_prefix)
    raise ConvergenceError(
        f"incomplete gamma continued fraction did not converge (a={a}, x={x})"
    )


def gamma_q(a: float, x: float) -> float:
    """Regularized upper incomplete gamma function Q(a, x)."""
    if a <= 0 or x < 0:
        raise ValueError(f"gamma_q requires a > 0 and x >= 0, got a={a}, x={x}")
    if x == 0:
        return 1.0
    if x < a + 1.0:
        return min(1.0, max(0.0, 1.0 - _lower_series(a, x)))
    return min(1.0, max(0.0, _upper_continued_fraction(a, x)))


def _wilson_hilferty_sf(x: float, df: float) -> float:
    if math.isinf(df):
        return 1.0
    h = 2.0 / (9.0 * df)
    z = ((x / df) ** (1.0 / 3.0) - (1.0 - h)) / math.sqrt(h)
    return 0.5 * math.erfc(z / math.sqrt(2.0))


def chi2_sf(x: float, df: float) -> float:
    """Upper tail ``P(X >= x)`` of a chi-square variable with ``df`` degrees of freedom.

    ``df`` may be a float (including ``inf``) because the Markov-chain
    degrees of freedom overflow integer ranges for large vocabularies.
    """
    if x < 0 or math.isnan(x):
        raise ValueError(f"chi2_sf requires x >= 0, got {x!r}")
    if not df >= 1:
        raise ValueError(f"chi2_sf requires df >= 1, got {df!r}")
    if x == 0:
        return 1.0
    if math.isinf(x):
        return 0.0
    if df > WILSON_HILFERTY_DF:
        return _wilson_hilferty_sf(x, df)
    return gamma_q(df / 2.0, x / 2.0)


def int_to_float(value: int) -> float:
    """Convert a possibly astronomically large integer, saturating to ``inf``."""
    try:
        return float(value)
    except OverflowError:
        return math.inf if value > 0 else -math.inf
