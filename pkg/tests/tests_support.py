"""Shared oracle helpers for the test suite."""

import math


def explicit_laguerre(n, alpha, x):
    """Explicit series expansion of the generalized Laguerre polynomial."""
    return sum((-1) ** k * math.comb(n + alpha, n - k) * x ** k
               / math.factorial(k) for k in range(n + 1))
