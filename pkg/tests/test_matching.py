import random
from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import chisquare

from brauersim.combinatorics import double_factorial
from brauersim.errors import CapacityError
from brauersim.matching import (
    UNMATCHED,
    PartialMatching,
    PerfectMatching,
    enumerate_all,
    enumerate_initial_partials,
    sample_initial_partial,
    sample_partner_list,
)


def test_unique_matching_n1():
    rng = random.Random(0)
    for _ in range(20):
        assert PerfectMatching.sample(1, rng).partner == (1, 0)


@given(st.integers(min_value=1, max_value=8), st.integers())
@settings(max_examples=200)
def test_sample_is_involution(n, seed):
    pm = PerfectMatching.sample(n, random.Random(seed))
    for i, j in enumerate(pm.partner):
        assert j != i
        assert pm.partner[j] == i


def test_enumerate_counts():
    for n in range(1, 6):
        ms = list(enumerate_all(n))
        assert len(ms) == double_factorial(2 * n - 1)
        assert len({m.partner for m in ms}) == len(ms)


def test_enumerate_capacity_guard():
    with pytest.raises(CapacityError):
        list(enumerate_all(7))


def test_uniformity_chi_square_n2_n3():
    # every matching equally likely: chi-square over 1e5 draws
    rng = random.Random(314)
    for n in (2, 3):
        support = {m.partner for m in enumerate_all(n)}
        draws = Counter(tuple(sample_partner_list(2 * n, rng)) for _ in range(100_000))
        assert set(draws) == support
        stat, p = chisquare(list(draws.values()))
        assert p > 0.001, (n, p)


def test_pairwise_marginal_uniformity():
    # any fixed pair {i, j} appears with probability 1/(2n-1)
    n, draws = 4, 100_000
    rng = random.Random(2718)
    hit = 0
    for _ in range(draws):
        if sample_partner_list(2 * n, rng)[2] == 5:
            hit += 1
    p = 1 / (2 * n - 1)
    se = (p * (1 - p) / draws) ** 0.5
    assert abs(hit / draws - p) <= 3 * se


def test_sample_initial_partial_laws():
    rng = random.Random(5)
    # n=1: single unmatched point
    assert sample_initial_partial(1, rng).partner == (UNMATCHED,)
    # n=2: forced pairing
    assert sample_initial_partial(2, rng).partner == (1, 0)
    # n=3: three equally likely states (hole position decides everything)
    counts = Counter(sample_initial_partial(3, rng).partner for _ in range(30_000))
    assert set(counts) == {m.partner for m in enumerate_initial_partials(3)}
    assert len(counts) == 3
    lo, hi = min(counts.values()), max(counts.values())
    assert hi - lo < 5 * (30_000 / 3) ** 0.5


def test_enumerate_initial_partials_counts():
    assert len(list(enumerate_initial_partials(2))) == 1
    assert len(list(enumerate_initial_partials(3))) == 3
    assert len(list(enumerate_initial_partials(4))) == 3
    assert len(list(enumerate_initial_partials(5))) == 15


def test_partial_matching_validation():
    with pytest.raises(ValueError):
        PartialMatching((1, UNMATCHED, UNMATCHED))  # broken involution
    pm = PartialMatching((1, 0, UNMATCHED))
    assert pm.holes() == [2]


def test_json_pairs_round_trip():
    rng = random.Random(9)
    pm = PerfectMatching.sample(4, rng)
    pairs = pm.to_pairs()
    assert pairs == sorted(pairs)
    assert PerfectMatching.from_pairs(pairs, 4) == pm


def test_determinism_same_seed():
    a = [sample_partner_list(10, random.Random(123)) for _ in range(50)]
    b = [sample_partner_list(10, random.Random(123)) for _ in range(50)]
    assert a == b
