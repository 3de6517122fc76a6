from fractions import Fraction

import pytest

from brauersim import shapes, theory
from brauersim.theory import Pgf, Pmf


def test_reset_probability_values():
    assert theory.reset_probability(1) == 1
    assert theory.reset_probability(2) == Fraction(1, 3)
    assert theory.reset_probability(3) == Fraction(3, 5)
    assert theory.reset_probability(5) == Fraction(25 * 9, 945)


def test_loop_rate_values():
    assert theory.loop_rate(1) == 0
    assert theory.loop_rate(2) == Fraction(1, 3)
    assert theory.loop_rate(3) == Fraction(1, 5)
    assert theory.loop_rate(4) == Fraction(12, 35)
    assert theory.loop_rate(5) == Fraction(16, 63)
    assert theory.loop_rate_variance(1) == 0
    assert theory.loop_rate_variance(2) == Fraction(2, 9)
    assert theory.loop_rate_variance(3) == Fraction(4, 25)


def test_loop_rate_two_formulations_agree():
    for n in range(1, 25):
        assert theory.loop_rate(n) == theory.loop_rate_case_split(n)
        assert theory.loop_rate_variance(n) == theory.loop_rate_variance_case_split(n)


def test_pgf_values_and_moments():
    assert theory.loop_increment_pgf(2).coeffs == (Fraction(2, 3), Fraction(1, 3))
    assert theory.loop_increment_pgf(3).coeffs == (Fraction(4, 5), Fraction(1, 5))
    assert theory.loop_increment_pgf(4).coeffs == (
        Fraction(24, 35), Fraction(2, 7), Fraction(1, 35),
    )
    for n in range(1, 13):
        g = theory.loop_increment_pgf(n)
        assert sum(g.coeffs) == 1
        assert g.mean() == theory.loop_rate(n)
        assert g.variance() == theory.loop_rate_variance(n)


def test_pgf_convolution():
    g = theory.loop_increment_pgf(2)
    g3 = g.power(3)
    # (x+2)^3 / 27
    assert g3.coeffs == (
        Fraction(8, 27), Fraction(12, 27), Fraction(6, 27), Fraction(1, 27),
    )


def test_transverse_density():
    assert theory.transverse_density(1) == 1
    assert theory.transverse_density(3) == Fraction(7, 9)
    assert theory.transverse_per_level_mean(3) == Fraction(7, 3)
    assert theory.transverse_per_level_mean(5) == Fraction(11, 3)
    with pytest.raises(ValueError):
        theory.transverse_density(4)


def test_transverse_clt_variance():
    assert theory.transverse_clt_variance(3) == Fraction(56, 27)
    with pytest.raises(ValueError):
        theory.transverse_clt_variance(2)
    with pytest.raises(ValueError):
        theory.transverse_clt_variance(1)


def test_level_occupancy_dist():
    assert theory.level_occupancy_dist(3).as_dict() == {
        1: Fraction(1, 3), 3: Fraction(2, 3),
    }
    assert theory.level_occupancy_dist(1).as_dict() == {1: Fraction(1)}
    d5 = theory.level_occupancy_dist(5)
    assert d5.prob(1) == Fraction(1, 5)
    assert d5.prob(5) == Fraction(8, 15)  # matches the two-sling limit 8/15
    with pytest.raises(ValueError):
        theory.level_occupancy_dist(2)
    for n in (1, 3, 5, 7, 9, 11):
        law = theory.level_occupancy_dist(n)
        assert sum(p for _, p in law.probs) == 1
        assert law.mean() == Fraction(2 * n + 1, 3)


def test_layer_crossing_dist():
    assert theory.layer_crossing_dist(3).as_dict() == {
        1: Fraction(11, 15), 3: Fraction(4, 15),
    }
    assert theory.layer_crossing_dist(1).as_dict() == {1: Fraction(1)}
    for n in (1, 3, 5, 7, 9, 11):
        law = theory.layer_crossing_dist(n)
        assert sum(p for _, p in law.probs) == 1
        assert law.mean() == theory.across_bend_rates(n)[0]


def test_across_bend_rates():
    assert theory.across_bend_rates(3) == (Fraction(23, 15), Fraction(4, 5))
    assert theory.across_bend_rates(1) == (Fraction(1), Fraction(0))
    # across + bends == per-level vertex rate (edges = vertices - 1, per layer)
    for n in (1, 3, 5, 9):
        a, b = theory.across_bend_rates(n)
        assert a + b == theory.transverse_per_level_mean(n)


def test_sling_fates():
    f = theory.sling_fate_probs(3)
    assert f.to_string == Fraction(2, 5)
    assert f.to_loop == Fraction(1, 5)
    assert f.survive == Fraction(2, 5)
    assert f.geo_param == Fraction(3, 5)
    assert f.eventual_string == Fraction(2, 3)
    assert f.pair_eventual_string == Fraction(8, 15)
    # eventual absorption equals to_string / (to_string + to_loop)
    for n in (3, 5, 7, 9):
        g = theory.sling_fate_probs(n)
        assert g.to_string + g.to_loop + g.survive == 1
        assert g.to_string / (g.to_string + g.to_loop) == Fraction(2, 3)
    with pytest.raises(ValueError):
        theory.sling_fate_probs(4)


def test_two_sling_table():
    table = theory.two_sling_table(5)
    assert table["i"] == Fraction(8, 63)
    assert table["vii"] == Fraction(8, 63)
    for n in (5, 7, 9, 11):
        t = theory.two_sling_table(n)
        total = sum(t[k] * m for k, m in theory.TWO_SLING_MULTIPLICITY.items())
        assert total == 1
    with pytest.raises(ValueError):
        theory.two_sling_table(3)
    with pytest.raises(ValueError):
        theory.two_sling_table(6)


def test_string_absorption_dist():
    assert theory.string_absorption_dist(3).as_dict() == {
        0: Fraction(3, 5), 1: Fraction(2, 5),
    }
    assert theory.string_absorption_dist(1).as_dict() == {0: Fraction(1)}
    for n in (1, 3, 5, 7, 9, 11):
        law = theory.string_absorption_dist(n)
        assert sum(p for _, p in law.probs) == 1


def test_shape_rate_bb():
    r = theory.shape_rate(2, "BB")
    assert r.mu == Fraction(1, 9)
    assert r.autocov == (Fraction(8, 81), Fraction(2, 81))
    assert r.sigma2 == Fraction(4, 27)


def test_shape_rate_ladders():
    for ell in range(1, 12):
        w = "A" * (ell - 1) + "B" + "A" * (ell - 1) + "B"
        assert theory.shape_rate(2, w).mu == Fraction(2 ** (ell - 1), 3 ** (ell + 1))
        assert theory.shape_rate(3, w).mu == Fraction(3, 25) * Fraction(2, 5) ** (ell - 1)
    # weak-shape rate for all-ones shapes collapses to the strong rate
    assert theory.weak_shape_rate(3, (1, 1)).mu == theory.shape_rate(3, "ABAB").mu


def test_shape_rate_rejects_invalid():
    with pytest.raises(shapes.ShapeError):
        theory.shape_rate(2, "BBBB")  # needs n >= 4
    with pytest.raises(shapes.ShapeError):
        theory.shape_rate(2, "AB")


def test_shape_sigma2_positive():
    for n in range(2, 9):
        for w in shapes.enumerate_strong(n, 8):
            assert theory.shape_rate(n, w).sigma2 > 0, (n, w)


def test_weak_shape_rate():
    r = theory.weak_shape_rate(4, (2, 1))
    strong = theory.shape_rate(4, (2, 1))
    g = shapes.gamma((2, 1))
    assert g == 2
    assert r.mu == g * strong.mu
    assert r.sigma2 == g * g * strong.sigma2 - g * (g - 1) * strong.mu
    # gamma == 1 shapes keep the strong variance
    r1 = theory.weak_shape_rate(2, (1, 1, 1))
    assert r1.sigma2 == theory.shape_rate(2, (1, 1, 1)).sigma2


def test_pairwise_moments_sum_to_mu():
    # summing the start indicator over rows recovers the per-level rate
    for n in (2, 3, 4, 6):
        for w in shapes.enumerate_strong(n, 6):
            total = sum(theory.shape_indicator_mean(n, w, k) for k in range(1, n + 1))
            assert total == theory.shape_rate(n, w).mu, (n, w)


def test_pairwise_moments_factorize_beyond_stretch():
    # beyond lag r+1 the two indicators are independent
    for n, w in ((2, "BB"), (3, "ABAB"), (4, "BBBB")):
        a = shapes.weak_of_strong(w)
        r = len(a) - 1
        mu = theory.shape_rate(n, w).mu
        for h in (r + 2, r + 3):
            total = sum(
                theory.pairwise_shape_moments(n, w, w, k, k2, h)
                for k in range(1, n + 1)
                for k2 in range(1, n + 1)
            )
            assert total == mu * mu, (n, w, h)


def test_pairwise_moments_vanish_when_overfull():
    # configurations needing more than n vertices in one column vanish
    assert theory.shape_pair_same_level(2, "BB", "BB", 2, 1) == 0
    assert theory.shape_pair_lagged(2, "ABAB", "ABAB", 2, 2, 1) == 0
    # k = 1 leaves no room below the start row, so the indicator vanishes
    assert theory.shape_indicator_mean(2, "BB", 1) == 0
    # but adjacent BB loops at k = 2 have positive probability, matching the
    # lag-1 product E[Y(s)Y(s+1)] = K(1) + mu^2
    r = theory.shape_rate(2, "BB")
    assert theory.shape_pair_lagged(2, "BB", "BB", 2, 2, 1) == r.autocov[1] + r.mu**2


def test_pmf_pgf_validation():
    with pytest.raises(ValueError):
        Pgf((Fraction(1, 2), Fraction(1, 3)))
    with pytest.raises(ValueError):
        Pmf(((0, Fraction(1, 2)), (0, Fraction(1, 2))))
    law = Pmf.from_mapping({0: Fraction(1, 4), 2: Fraction(3, 4)})
    assert law.mean() == Fraction(3, 2)
    assert law.tv_distance({0: 1, 2: 3}) == 0
    assert law.tv_distance({1: 1}) == 1
