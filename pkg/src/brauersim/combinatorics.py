"""Exact integer and rational building blocks.

All closed-form constants in this package are evaluated with arbitrary
precision: Python integers for the factorial calculus and
:class:`fractions.Fraction` (aliased ``BigRat``) for rational values.
Nothing in this module ever rounds.
"""

from __future__ import annotations

from fractions import Fraction

# Exact rational type used throughout the package.  Stored in lowest terms
# with a positive denominator, which Fraction guarantees.
BigRat = Fraction


def double_factorial(k: int) -> int:
    """k!! = k(k-2)(k-4)...; empty products give 0!! = (-1)!! = 1.

    The convention (-1)!! = 1 keeps the matching count (2n-1)!! valid at
    n = 0.  (2n-1)!! is the number of perfect matchings on 2n points.
    """
    if k < -1:
        raise ValueError(f"double factorial undefined for {k}")
    result = 1
    while k > 1:
        result *= k
        k -= 2
    return result


def falling_factorial(n: int, k: int) -> int:
    """(n)_k = n(n-1)...(n-k+1), with (n)_0 = 1 and (n)_k = 0 for 0 <= n < k."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    result = 1
    for i in range(k):
        result *= n - i
    return result


def falling_double_factorial(n: int, k: int) -> int:
    """[[n]]_k = n(n-2)...(n-2k+2), with [[n]]_0 = 1."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    result = 1
    for i in range(k):
        result *= n - 2 * i
    return result


def falling_sum(n: int, a: int) -> int:
    """Sum of (k-1)_a for k = 1..n; equals (n)_(a+1) / (a+1)."""
    if n < 0 or a < 0:
        raise ValueError("n and a must be nonnegative")
    return sum(falling_factorial(k - 1, a) for k in range(1, n + 1))
