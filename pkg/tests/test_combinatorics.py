import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from brauersim.combinatorics import (
    double_factorial,
    falling_double_factorial,
    falling_factorial,
    falling_sum,
)


def test_double_factorial_values():
    assert double_factorial(5) == 15
    assert double_factorial(0) == 1
    assert double_factorial(-1) == 1
    assert double_factorial(3) == 3  # matchings on 4 points
    assert double_factorial(6) == 48
    with pytest.raises(ValueError):
        double_factorial(-2)


def test_double_factorial_factorial_identity():
    # (2k-1)!! * (2k)!! == (2k)!
    for k in range(0, 30):
        assert double_factorial(2 * k - 1) * double_factorial(2 * k) == math.factorial(2 * k)


def test_falling_factorial_values():
    assert falling_factorial(5, 2) == 20
    assert falling_factorial(3, 4) == 0
    for n in (-3, 0, 1, 7, 100):
        assert falling_factorial(n, 0) == 1
    assert falling_factorial(4, 4) == math.factorial(4)


@given(st.integers(min_value=0, max_value=60), st.integers(min_value=0, max_value=60))
def test_falling_factorial_binomial(n, k):
    assert falling_factorial(n, k) == math.comb(n, k) * math.factorial(k)


def test_falling_double_factorial_values():
    assert falling_double_factorial(5, 3) == 15
    assert falling_double_factorial(3, 2) == 3
    assert falling_double_factorial(9, 0) == 1


def test_falling_double_factorial_vs_double_factorial():
    # [[2n-1]]_k == (2n-1)!! / (2n-2k-1)!!
    for n in range(1, 15):
        for k in range(0, n):
            assert (
                falling_double_factorial(2 * n - 1, k) * double_factorial(2 * n - 2 * k - 1)
                == double_factorial(2 * n - 1)
            )


def test_falling_sum_examples():
    assert falling_sum(4, 1) == 6
    for n in range(0, 20):
        assert falling_sum(n, 0) == n
    assert falling_sum(6, 2) == 40
    assert Fraction(falling_factorial(6, 3), 3) == 40


def test_falling_sum_identity_exhaustive():
    for n in range(0, 51):
        for a in range(0, 11):
            assert falling_sum(n, a) * (a + 1) == falling_factorial(n, a + 1)


def test_exact_rational_reconstruction():
    x = Fraction(3, 7) + Fraction(5, 21)
    assert (x.numerator, x.denominator) == (2, 3)
