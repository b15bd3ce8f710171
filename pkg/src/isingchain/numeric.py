"""Overflow-safe scalar helpers used by the solver and the bound evaluators."""

from __future__ import annotations

import math

_LOG2 = math.log(2.0)


def log_cosh(x: float) -> float:
    """log(cosh(x)), safe for |x| far beyond the overflow threshold of cosh."""
    ax = abs(x)
    return ax + math.log1p(math.exp(-2.0 * ax)) - _LOG2


def log_sinh_abs(x: float) -> float:
    """log(|sinh(x)|); -inf at x = 0.

    1 - exp(-2x) goes through expm1 so that tiny x (where exp(-2x) rounds
    to 1.0) still yields the correct value log(2x) - log(2) + O(x).
    """
    ax = abs(x)
    if ax == 0.0:
        return -math.inf
    return ax + math.log(-math.expm1(-2.0 * ax)) - _LOG2


def log_add_exp(a: float, b: float) -> float:
    """log(exp(a) + exp(b)) without overflow; tolerates -inf arguments."""
    if a < b:
        a, b = b, a
    if b == -math.inf:
        return a
    return a + math.log1p(math.exp(b - a))
