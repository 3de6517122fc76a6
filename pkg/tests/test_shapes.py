import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from brauersim import diagram as dg
from brauersim import shapes
from brauersim.errors import CapacityError
from brauersim.matching import UNMATCHED, PerfectMatching


def ladder(ell):
    return "A" * (ell - 1) + "B" + "A" * (ell - 1) + "B"


def test_acceptance_basics():
    assert shapes.validate_strong("BB", 2)
    assert shapes.validate_strong("ABAB", 2)
    assert not shapes.validate_strong("AB", 2)
    assert not shapes.validate_strong("BA", 9)
    assert not shapes.validate_strong("AABB", 20)
    assert not shapes.validate_strong("", 4)
    # visit cap: a level holds at most n/2 loop-vertex pairs
    assert not shapes.validate_strong("BBBB", 2)
    assert shapes.validate_strong("BBBB", 4)


def test_ladder_words_are_the_n2_shapes():
    for ell in range(1, 8):
        w = ladder(ell)
        assert shapes.validate_strong(w, 2)
        assert shapes.weak_of_strong(w) == (1,) * ell
    assert shapes.enumerate_strong(2, 4) == sorted(ladder(l) for l in (1, 2))
    assert shapes.enumerate_strong(2, 14) == sorted(ladder(l) for l in range(1, 8))


def test_weak_of_strong_examples():
    assert shapes.weak_of_strong("BB") == (1,)
    assert shapes.weak_of_strong("ABAB") == (1, 1)
    with pytest.raises(shapes.ShapeError):
        shapes.weak_of_strong("AABB")
    with pytest.raises(shapes.ShapeError):
        shapes.weak_of_strong("XY")


def test_word_length_is_twice_weak_mass():
    for n in (2, 4, 6):
        for w in shapes.enumerate_strong(n, 12):
            a = shapes.weak_of_strong(w)
            assert len(w) == 2 * sum(a)
            assert all(x >= 1 for x in a)


def test_acceptance_monotone_in_n():
    for w in shapes.enumerate_strong(6, 10):
        assert shapes.validate_strong(w, 8)


def test_gamma_values():
    assert shapes.gamma((1,)) == 1
    assert shapes.gamma((2, 1)) == 2
    assert shapes.gamma((2, 2, 1)) == 6
    with pytest.raises(shapes.ShapeError):
        shapes.gamma(())


def test_gamma_counts_words():
    for n in (2, 4, 6, 8):
        grouped = shapes.words_by_weak_shape(n, 12)
        for a, words in grouped.items():
            assert shapes.gamma(a) == len(words)


def test_enumeration_capacity_guard():
    with pytest.raises(CapacityError):
        shapes.enumerate_strong(4, 18)


def test_enumeration_matches_gamma_totals():
    # strong-shape count == sum of gamma over the weak shapes present
    grouped = shapes.words_by_weak_shape(4, 6)
    count = len(shapes.enumerate_strong(4, 6))
    assert count == sum(shapes.gamma(a) for a in grouped)


def test_make_loop_round_trip():
    for n in (2, 4, 6):
        for w in shapes.enumerate_strong(n, 10):
            c = shapes.make_loop_component(w)
            assert shapes.shape_of_loop(c) == w
            assert shapes.weak_of_loop(c) == shapes.weak_of_strong(w)


def _embed_loop(word):
    """Place the loop realizing `word` into a real diagram at leftmost
    level 1 and return (diagram, expected leftmost level)."""
    c = shapes.make_loop_component(word)
    a = shapes.weak_of_strong(word)
    n = 2 * max(a)
    r = len(a) - 1
    t = r + 2
    # collect loop edges per layer, shifted one level right
    per_layer = {u: [] for u in range(1, t + 1)}
    k = len(c.walk)
    for i, lay in enumerate(c.edge_layers):
        v1 = c.walk[i]
        v2 = c.walk[(i + 1) % k]
        per_layer[lay + 1].append(((v1[0] + 1, v1[1]), (v2[0] + 1, v2[1])))
    layers = []
    for u in range(1, t + 1):
        partner = [UNMATCHED] * (2 * n)
        def idx(v):
            lv, row = v
            return row if lv == u - 1 else n + row
        for v1, v2 in per_layer[u]:
            partner[idx(v1)] = idx(v2)
            partner[idx(v2)] = idx(v1)
        left = [i for i in range(n) if partner[i] == UNMATCHED]
        right = [n + i for i in range(n) if partner[n + i] == UNMATCHED]
        while left and right:
            a_, b_ = left.pop(0), right.pop(0)
            partner[a_], partner[b_] = b_, a_
        for rest in (left, right):
            while rest:
                a_, b_ = rest.pop(0), rest.pop(0)
                partner[a_], partner[b_] = b_, a_
        layers.append(PerfectMatching(tuple(partner)))
    return dg.build(n, layers), 1


def test_constructed_loop_survives_full_pipeline():
    for word in ("BB", "ABAB", "BBBB", "AABAAB", *shapes.enumerate_strong(4, 6)):
        d, s = _embed_loop(word)
        loops = [c for c in dg.components(d) if c.kind == dg.LOOP]
        target = [c for c in loops if c.leftmost_level == s and c.size == len(word)]
        assert target, word
        assert any(shapes.shape_of_loop(c) == word for c in target), word


@given(st.integers(min_value=0, max_value=10**6))
@settings(max_examples=60, deadline=None)
def test_pipeline_round_trip_random_words(seed):
    rng = random.Random(seed)
    n = rng.choice((2, 4, 6))
    words = shapes.enumerate_strong(n, 8)
    word = words[rng.randrange(len(words))]
    d, s = _embed_loop(word)
    loops = [c for c in dg.components(d) if c.kind == dg.LOOP]
    assert any(
        c.leftmost_level == s and shapes.shape_of_loop(c) == word for c in loops
    )


def test_shape_of_loop_rejects_non_loops():
    d = dg.build(2, [])
    comp = dg.components(d)[0]
    with pytest.raises(shapes.ShapeError):
        shapes.shape_of_loop(comp)


def test_parse_weak():
    assert shapes.parse_weak("2,1") == (2, 1)
    assert shapes.parse_weak((1, 1)) == (1, 1)
    with pytest.raises(shapes.ShapeError):
        shapes.parse_weak("0,1")
