import random

import pytest

from brauersim import diagram as dg
from brauersim.errors import CapacityError, MultipleTransverseStringsError
from brauersim.matching import (
    UNMATCHED,
    PartialMatching,
    PerfectMatching,
    enumerate_all,
    sample_initial_partial,
)


def identity_layer(n):
    return PerfectMatching(tuple(list(range(n, 2 * n)) + list(range(n))))


def test_empty_diagram_degenerate_strings():
    d = dg.build(2, [])
    comps = dg.components(d)
    assert len(comps) == 2
    assert all(c.kind == dg.TRANSVERSE and c.size == 1 for c in comps)


def test_modified_t0_n3():
    initial = PartialMatching((1, 0, UNMATCHED))
    d = dg.build(3, [], initial=initial)
    comps = dg.components(d)
    kinds = sorted(c.kind for c in comps)
    assert kinds == [dg.SLING, dg.TRANSVERSE]
    string = dg.transverse_string(d)
    assert string.walk == ((0, 2),)


def test_identity_layers_all_transverse():
    for n in (1, 2, 4):
        for t in (1, 3):
            d = dg.build(n, [identity_layer(n)] * t)
            comps = dg.components(d)
            assert len(comps) == n
            assert all(c.kind == dg.TRANSVERSE for c in comps)
            for c in comps:
                for u in range(1, t + 1):
                    assert dg.edge_profile(c, u) == (1, 0, 0)


def test_two_vertex_loop_geometry():
    # both layers bend on both sides: a 2-vertex loop in the middle level
    bend = PerfectMatching(((1, 0, 3, 2)))
    d = dg.build(2, [bend, bend])
    comps = dg.components(d)
    loops = [c for c in comps if c.kind == dg.LOOP]
    assert len(loops) == 1
    loop = loops[0]
    assert loop.size == 2
    assert loop.walk == ((1, 0), (1, 1))
    # one bend in each adjacent layer; parallel edges distinguished by layer
    assert sorted(loop.edge_layers) == [1, 2]
    assert dg.edge_profile(loop, 1) == (0, 0, 1)
    assert dg.edge_profile(loop, 2) == (0, 1, 0)


def test_vertex_partition_and_parity():
    rng = random.Random(77)
    for _ in range(100):
        n = rng.randrange(1, 6)
        t = rng.randrange(0, 12)
        d = dg.sample_diagram(n, t, rng, modified=rng.random() < 0.5 and n % 2 == 1)
        comps = dg.components(d)
        assert sum(c.size for c in comps) == n * (t + 1)
        transverse = sum(1 for c in comps if c.kind == dg.TRANSVERSE)
        if n % 2 == 1:
            assert transverse >= 1
        else:
            assert transverse % 2 == 0
        for c in comps:
            if c.kind in (dg.LOOP, dg.SLING):
                for lv in {v for v, _ in c.walk}:
                    assert dg.level_counts(c, lv) % 2 == 0


def test_loops_avoid_boundary_levels_unmodified():
    rng = random.Random(123)
    for _ in range(50):
        n, t = 4, 8
        d = dg.sample_diagram(n, t, rng)
        for c in dg.components(d):
            if c.kind == dg.LOOP:
                assert c.leftmost_level >= 1
                assert c.rightmost_level <= t - 1
                assert c.size % 2 == 0


def test_monotonicity_under_extension():
    # transverse counts non-increasing, sling counts non-decreasing in t
    rng = random.Random(42)
    for _ in range(30):
        n = rng.randrange(1, 6)
        layers = [PerfectMatching.sample(n, rng) for _ in range(15)]
        prev_tr, prev_sl = None, None
        for t in range(1, 16):
            comps = dg.components(dg.build(n, layers[:t]))
            tr = sum(1 for c in comps if c.kind == dg.TRANSVERSE)
            sl = sum(1 for c in comps if c.kind == dg.SLING)
            if prev_tr is not None:
                assert tr <= prev_tr
                assert sl >= prev_sl
            prev_tr, prev_sl = tr, sl


def test_canonical_walk_starts():
    rng = random.Random(6)
    for _ in range(60):
        n = rng.randrange(2, 6)
        t = rng.randrange(1, 10)
        d = dg.sample_diagram(n, t, rng)
        for c in dg.components(d):
            if c.kind == dg.LOOP:
                assert c.walk[0] == min(c.walk)  # topmost vertex of leftmost level
                # first step goes right: the first edge lives in layer level+1
                assert c.edge_layers[0] == c.walk[0][0] + 1
            elif c.kind == dg.SLING:
                ends = (c.walk[0], c.walk[-1])
                assert ends[0][0] == ends[1][0]
                assert ends[0][1] < ends[1][1]  # starts at the upper endpoint
            else:
                assert c.walk[0][0] == 0


def test_transverse_string_signals():
    # even n, a reset layer guarantees no transverse string
    bend = PerfectMatching((1, 0, 3, 2))
    d = dg.build(2, [bend])
    assert dg.transverse_string(d) is None
    # identity layers on even n: two strings -> flagged as multiple
    d2 = dg.build(2, [identity_layer(2)])
    with pytest.raises(MultipleTransverseStringsError):
        dg.transverse_string(d2)


def test_level_counts_odd_for_string():
    rng = random.Random(11)
    for _ in range(40):
        n, t = 3, 6
        initial = sample_initial_partial(n, rng)
        d = dg.build(n, [PerfectMatching.sample(n, rng) for _ in range(t)], initial=initial)
        s = dg.transverse_string(d)
        for lv in range(t + 1):
            assert dg.level_counts(s, lv) % 2 == 1
        for u in range(1, t + 1):
            assert dg.edge_profile(s, u)[0] % 2 == 1


def test_build_validation_and_guard():
    with pytest.raises(ValueError):
        dg.build(3, [identity_layer(2)])
    with pytest.raises(CapacityError):
        dg.build(2, [identity_layer(2)] * 1_100_000)
    with pytest.raises(ValueError):
        dg.build(3, [], modified=True)  # rng required


def test_json_round_trip():
    rng = random.Random(3)
    d = dg.sample_diagram(3, 4, rng, modified=True)
    d2 = dg.BrauerDiagram.from_json(d.to_json())
    assert d2 == d


def test_exhaustive_n2_t2_classification():
    # all 9 two-layer diagrams on n=2, checked against hand classification:
    # a loop appears iff both layers bend (both-side bends), and then the
    # diagram has 1 loop + 2 slings; otherwise 2 strings or 2 slings.
    bend = PerfectMatching((1, 0, 3, 2))
    seen_loops = 0
    for m1 in enumerate_all(2):
        for m2 in enumerate_all(2):
            comps = dg.components(dg.build(2, [m1, m2]))
            loops = sum(1 for c in comps if c.kind == dg.LOOP)
            slings = sum(1 for c in comps if c.kind == dg.SLING)
            strings = sum(1 for c in comps if c.kind == dg.TRANSVERSE)
            assert strings + slings == 2  # non-loop components == n
            if loops:
                assert (m1, m2) == (bend, bend)
                assert loops == 1 and slings == 2
                seen_loops += 1
    assert seen_loops == 1
