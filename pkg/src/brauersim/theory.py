"""Exact rational evaluation of the limit constants and distributions.

Everything here returns Fractions (or structures of Fractions); floats
appear only at presentation boundaries.  Throughout, m = floor(n/2), and
"odd n" operations reject even n instead of guessing.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Mapping, Sequence

from .combinatorics import (
    double_factorial,
    falling_double_factorial,
    falling_factorial,
)
from .shapes import ShapeError, gamma, is_valid_weak, weak_of_strong


@dataclass(frozen=True)
class Pgf:
    """Probability generating function of a nonnegative integer variable,
    stored as exact coefficients (index = value)."""

    coeffs: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        if any(c < 0 for c in self.coeffs) or sum(self.coeffs) != 1:
            raise ValueError("pgf coefficients must be nonnegative and sum to 1")

    def mean(self) -> Fraction:
        return sum((Fraction(k) * c for k, c in enumerate(self.coeffs)), Fraction(0))

    def variance(self) -> Fraction:
        mu = self.mean()
        second = sum(
            (Fraction(k * k) * c for k, c in enumerate(self.coeffs)), Fraction(0)
        )
        return second - mu * mu

    def convolve(self, other: "Pgf") -> "Pgf":
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    out[i + j] += a * b
        return Pgf(tuple(out))

    def power(self, t: int) -> "Pgf":
        """t-fold convolution (distribution of a sum of t i.i.d. copies)."""
        result = Pgf((Fraction(1),))
        for _ in range(t):
            result = result.convolve(self)
        return result

    def pmf(self) -> "Pmf":
        return Pmf.from_mapping(
            {k: c for k, c in enumerate(self.coeffs) if c}
        )


@dataclass(frozen=True)
class Pmf:
    """Finite distribution on integers with exact probabilities."""

    probs: tuple[tuple[int, Fraction], ...]

    def __post_init__(self) -> None:
        values = [v for v, _ in self.probs]
        if len(set(values)) != len(values):
            raise ValueError("support values must be distinct")
        if any(p < 0 for _, p in self.probs) or sum(p for _, p in self.probs) != 1:
            raise ValueError("probabilities must be nonnegative and sum to 1")

    @classmethod
    def from_mapping(cls, mapping: Mapping[int, Fraction]) -> "Pmf":
        return cls(tuple(sorted((int(v), Fraction(p)) for v, p in mapping.items())))

    def as_dict(self) -> dict[int, Fraction]:
        return dict(self.probs)

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(v for v, _ in self.probs)

    def prob(self, value: int) -> Fraction:
        return dict(self.probs).get(value, Fraction(0))

    def mean(self) -> Fraction:
        return sum((Fraction(v) * p for v, p in self.probs), Fraction(0))

    def variance(self) -> Fraction:
        mu = self.mean()
        second = sum((Fraction(v * v) * p for v, p in self.probs), Fraction(0))
        return second - mu * mu

    def tv_distance(self, counts: Mapping[int, int]) -> Fraction:
        """Total-variation distance to an empirical histogram."""
        total = sum(counts.values())
        if total <= 0:
            raise ValueError("empty histogram")
        values = set(self.support) | set(counts)
        acc = Fraction(0)
        for v in values:
            acc += abs(self.prob(v) - Fraction(counts.get(v, 0), total))
        return acc / 2


@dataclass(frozen=True)
class ShapeRate:
    """Per-layer rate, auto-covariances K(0..r+1), and CLT variance of the
    count of loops with one strong shape."""

    mu: Fraction
    autocov: tuple[Fraction, ...]
    sigma2: Fraction


@dataclass(frozen=True)
class WeakShapeRate:
    mu: Fraction
    sigma2: Fraction


@dataclass(frozen=True)
class SlingFates:
    """One-step and eventual fate probabilities of a distinguished sling."""

    to_string: Fraction
    to_loop: Fraction
    survive: Fraction
    geo_param: Fraction
    eventual_string: Fraction
    pair_eventual_string: Fraction


def _require_odd(n: int, what: str) -> int:
    if n < 1:
        raise ValueError("n must be positive")
    if n % 2 == 0:
        raise ValueError(f"{what} is only defined for odd n, got {n}")
    return n // 2


def reset_probability(n: int) -> Fraction:
    """Per-layer probability that the layer restarts the sling process
    (no across edge for even n, exactly one for odd n)."""
    if n < 1:
        raise ValueError("n must be positive")
    m = n // 2
    matchings = double_factorial(2 * n - 1)
    if n % 2 == 0:
        return Fraction(double_factorial(2 * m - 1) ** 2, matchings)
    return Fraction(n * n * double_factorial(2 * m - 1) ** 2, matchings)


def loop_rate(n: int) -> Fraction:
    """mu_n: per-layer rate of closed loops."""
    if n < 1:
        raise ValueError("n must be positive")
    return sum(
        (Fraction(1, 2 * n - 2 * j - 1) for j in range(n // 2)), Fraction(0)
    )


def loop_rate_variance(n: int) -> Fraction:
    """sigma_n^2: variance constant of the loop-count CLT."""
    if n < 1:
        raise ValueError("n must be positive")
    return sum(
        (
            Fraction(2 * n - 2 * j - 2, (2 * n - 2 * j - 1) ** 2)
            for j in range(n // 2)
        ),
        Fraction(0),
    )


def loop_rate_case_split(n: int) -> Fraction:
    """mu_n in the parity-split form; must agree with loop_rate."""
    m = n // 2
    if n % 2 == 0:
        return sum((Fraction(1, n + 2 * k - 1) for k in range(1, m + 1)), Fraction(0))
    return sum((Fraction(1, n + 2 * k) for k in range(1, m + 1)), Fraction(0))


def loop_rate_variance_case_split(n: int) -> Fraction:
    m = n // 2
    if n % 2 == 0:
        return sum(
            (Fraction(n + 2 * (k - 1), (n + 2 * k - 1) ** 2) for k in range(1, m + 1)),
            Fraction(0),
        )
    return sum(
        (Fraction(n + 2 * k - 1, (n + 2 * k) ** 2) for k in range(1, m + 1)),
        Fraction(0),
    )


def loop_increment_pgf(n: int) -> Pgf:
    """Distribution of loops closed by one layer (from any frontier state),
    as the product of independent Bernoulli factors."""
    if n < 1:
        raise ValueError("n must be positive")
    m = n // 2
    coeffs = [Fraction(1)]
    for k in range(1, m + 1):
        c = n + 2 * (k - 1) if n % 2 == 0 else n + 2 * k - 1
        # multiply by (x + c) / (c + 1)
        nxt = [Fraction(0)] * (len(coeffs) + 1)
        for i, a in enumerate(coeffs):
            nxt[i] += a * Fraction(c, c + 1)
            nxt[i + 1] += a * Fraction(1, c + 1)
        coeffs = nxt
    return Pgf(tuple(coeffs))


def transverse_density(n: int) -> Fraction:
    """Limit fraction of all vertices lying on the transverse string."""
    _require_odd(n, "transverse density")
    return Fraction(2 * n + 1, 3 * n)


def transverse_per_level_mean(n: int) -> Fraction:
    """Limit of string vertices per level, (2n+1)/3."""
    _require_odd(n, "transverse per-level mean")
    return Fraction(2 * n + 1, 3)


def transverse_clt_variance(n: int) -> Fraction:
    """Variance constant of the string-length CLT; positive for odd n >= 3."""
    m = _require_odd(n, "transverse CLT variance")
    if m < 1:
        raise ValueError("the CLT variance requires n >= 3")
    return Fraction(4 * (n - 1) * (n + 2) * (2 * n + 1), 135)


def level_occupancy_dist(n: int) -> Pmf:
    """Law of V, the string's vertex count on one level (odd values)."""
    m = _require_odd(n, "level occupancy")
    probs = {
        2 * j + 1: Fraction(
            falling_double_factorial(2 * m, j),
            falling_double_factorial(2 * m + 1, j + 1),
        )
        for j in range(m + 1)
    }
    return Pmf.from_mapping(probs)


def layer_crossing_dist(n: int) -> Pmf:
    """Law of E, the string's across-edge count in one layer (odd values)."""
    m = _require_odd(n, "layer crossing law")
    probs: dict[int, Fraction] = {}
    for ell in range(m + 1):
        acc = Fraction(0)
        for j in range(ell, m + 1):
            for k in range(ell, m + 1):
                num = (
                    comb(j, ell)
                    * comb(k, ell)
                    * falling_double_factorial(2 * m, j)
                    * falling_double_factorial(2 * m, k)
                )
                acc += Fraction(num, falling_double_factorial(4 * m + 1, j + k + 1))
        probs[2 * ell + 1] = acc
    return Pmf.from_mapping(probs)


def across_bend_rates(n: int) -> tuple[Fraction, Fraction]:
    """Per-layer limit rates of the string's across and bend edge counts."""
    m = _require_odd(n, "across/bend rates")
    a = 1 + Fraction(8 * m * m, 12 * m + 3)
    b = Fraction(8 * m * m + 4 * m, 12 * m + 3)
    return a, b


def sling_fate_probs(n: int) -> SlingFates:
    """One-step fate of a distinguished sling and its eventual absorption."""
    m = _require_odd(n, "sling fates")
    if m < 1:
        raise ValueError("sling fates require n >= 3 (there are no slings at n = 1)")
    return SlingFates(
        to_string=Fraction(2, n + 2),
        to_loop=Fraction(1, n + 2),
        survive=Fraction(n - 1, n + 2),
        geo_param=Fraction(3, n + 2),
        eventual_string=Fraction(2, 3),
        pair_eventual_string=Fraction(8, 15),
    )


TWO_SLING_EVENTS = (
    ("i", "both join the transverse string"),
    ("ii", "first joins the string, second closes into a loop"),
    ("iii", "first joins the string, second stays a sling"),
    ("iv", "first closes into a loop, second stays a sling"),
    ("v", "both close into separate loops"),
    ("vi", "both close into one joint loop"),
    ("vii", "both stay slings, separately"),
    ("viii", "both merge into one joint sling"),
)

# Row multiplicities in the total-probability check: rows ii-iv also occur
# with the two slings swapped.
TWO_SLING_MULTIPLICITY = {"i": 1, "ii": 2, "iii": 2, "iv": 2,
                          "v": 1, "vi": 1, "vii": 1, "viii": 1}


def two_sling_table(n: int) -> dict[str, Fraction]:
    """Joint one-step fates of two distinguished slings (odd n >= 5)."""
    m = _require_odd(n, "the two-sling table")
    if m < 2:
        raise ValueError("the two-sling table requires n >= 5 (two distinct slings)")
    d = (n + 4) * (n + 2)
    return {
        "i": Fraction(8, d),
        "ii": Fraction(2, d),
        "iii": Fraction(2 * (n - 1), d),
        "iv": Fraction(n - 1, d),
        "v": Fraction(1, d),
        "vi": Fraction(2, d),
        "vii": Fraction((n - 1) * (n - 3), d),
        "viii": Fraction(4 * (n - 1), d),
    }


def string_absorption_dist(n: int) -> Pmf:
    """Law of the number of slings absorbed by the string in one layer."""
    m = _require_odd(n, "string absorption law")
    probs = {
        s: Fraction(
            (2**s) * (2 * m + 1) * falling_factorial(m, s),
            falling_double_factorial(4 * m + 1, s + 1),
        )
        for s in range(m + 1)
    }
    return Pmf.from_mapping(probs)


def _weak_of(shape: str | Sequence[int], n: int) -> tuple[int, ...]:
    if isinstance(shape, str):
        a = weak_of_strong(shape)
    else:
        a = tuple(int(x) for x in shape)
    if not is_valid_weak(a, n):
        raise ShapeError(f"weak shape {a} is not realizable with n = {n}")
    return a


def _a_at(a: Sequence[int], i: int) -> int:
    return a[i] if 0 <= i < len(a) else 0


def _b_at(a: Sequence[int], i: int) -> int:
    if i < 0:
        return 0
    if i == 0:
        return a[0]
    return _a_at(a, i) + _a_at(a, i - 1)


def _mu_from_weak(n: int, a: Sequence[int]) -> Fraction:
    out = Fraction(1, 2 * a[0])
    for i in range(len(a) + 1):  # factors beyond stretch+1 are all 1
        out *= Fraction(
            falling_factorial(n, 2 * _a_at(a, i)),
            falling_double_factorial(2 * n - 1, _b_at(a, i)),
        )
    return out


def _autocov_from_weak(n: int, a: Sequence[int], h: int, mu: Fraction) -> Fraction:
    r = len(a) - 1
    if h > r + 1:
        return Fraction(0)
    if h == 0:
        prod = Fraction(1, 4 * a[0] * a[0])
        for i in range(r + 2):
            prod *= Fraction(
                falling_factorial(n, 4 * _a_at(a, i)),
                falling_double_factorial(2 * n - 1, 2 * _b_at(a, i)),
            )
        return prod + mu - mu * mu
    prod = Fraction(1, 4 * a[0] * a[0])
    for i in range(r + 2 + h):
        prod *= Fraction(
            falling_factorial(n, 2 * _a_at(a, i) + 2 * _a_at(a, i - h)),
            falling_double_factorial(2 * n - 1, _b_at(a, i) + _b_at(a, i - h)),
        )
    return prod - mu * mu


def shape_rate(n: int, shape: str | Sequence[int]) -> ShapeRate:
    """Rate, auto-covariances and CLT variance for one strong shape.

    The rate and covariances depend on the shape only through its weak
    shape, so either a word or a weak shape may be passed.
    """
    a = _weak_of(shape, n)
    mu = _mu_from_weak(n, a)
    autocov = tuple(_autocov_from_weak(n, a, h, mu) for h in range(len(a) + 1))
    sigma2 = autocov[0] + 2 * sum(autocov[1:], Fraction(0))
    return ShapeRate(mu=mu, autocov=autocov, sigma2=sigma2)


def weak_shape_rate(n: int, a: Sequence[int]) -> WeakShapeRate:
    """Rate and CLT variance for the count of loops with one weak shape."""
    aa = _weak_of(a, n)
    g = gamma(aa)
    strong = shape_rate(n, aa)
    sigma2 = g * g * strong.sigma2 - g * (g - 1) * strong.mu
    return WeakShapeRate(mu=g * strong.mu, sigma2=sigma2)


def shape_indicator_mean(n: int, shape: str | Sequence[int], k: int) -> Fraction:
    """Expected indicator that a loop of the given shape starts at the
    (n-k)-th row of a fixed level."""
    a = _weak_of(shape, n)
    if not 1 <= k <= n:
        raise ValueError("k must lie in 1..n")
    num = falling_factorial(k - 1, 2 * a[0] - 1)
    for i in range(1, len(a)):
        num *= falling_factorial(n, 2 * a[i])
    den = 1
    for j in range(len(a) + 1):
        den *= falling_double_factorial(2 * n - 1, _b_at(a, j))
    return Fraction(num, den)


def shape_pair_same_level(
    n: int,
    shape: str | Sequence[int],
    shape2: str | Sequence[int],
    k: int,
    k2: int,
) -> Fraction:
    """Expected product of two start indicators on the same level, k2 < k."""
    a = _weak_of(shape, n)
    a2 = _weak_of(shape2, n)
    if not (1 <= k2 < k <= n):
        raise ValueError("need 1 <= k2 < k <= n")
    num = falling_factorial(k - 2 * a2[0] - 1, 2 * a[0] - 1) * falling_factorial(
        k2 - 1, 2 * a2[0] - 1
    )
    top = max(len(a), len(a2))
    for i in range(1, top):
        num *= falling_factorial(n, 2 * _a_at(a, i) + 2 * _a_at(a2, i))
    den = 1
    for j in range(top + 1):
        den *= falling_double_factorial(2 * n - 1, _b_at(a, j) + _b_at(a2, j))
    return Fraction(num, den)


def shape_pair_lagged(
    n: int,
    shape: str | Sequence[int],
    shape2: str | Sequence[int],
    k: int,
    k2: int,
    h: int,
) -> Fraction:
    """Expected product of start indicators h levels apart (h > 0); the
    second shape starts h levels to the right."""
    a = _weak_of(shape, n)
    a2 = _weak_of(shape2, n)
    if h <= 0:
        raise ValueError("h must be positive")
    if not (1 <= k <= n and 1 <= k2 <= n):
        raise ValueError("k and k2 must lie in 1..n")
    num = falling_factorial(k - 1, 2 * a[0] - 1) * falling_factorial(
        k2 - 1, 2 * a2[0] - 1
    )
    num *= falling_factorial(n - 2 * a2[0], 2 * _a_at(a, h))
    top = len(a) + h + len(a2)
    for i in range(1, top):
        if i == h:
            continue
        num *= falling_factorial(n, 2 * _a_at(a, i) + 2 * _a_at(a2, i - h))
    den = 1
    for j in range(top + 1):
        den *= falling_double_factorial(2 * n - 1, _b_at(a, j) + _b_at(a2, j - h))
    return Fraction(num, den)


def pairwise_shape_moments(
    n: int,
    shape: str | Sequence[int],
    shape2: str | Sequence[int],
    k: int,
    k2: int,
    h: int,
) -> Fraction:
    """Dispatch to the same-level (h = 0, k2 < k) or lagged (h > 0) moment."""
    if h == 0:
        return shape_pair_same_level(n, shape, shape2, k, k2)
    return shape_pair_lagged(n, shape, shape2, k, k2, h)
