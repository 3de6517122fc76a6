"""Perfect matchings on 2n labeled points: sampling, enumeration, serialization.

Points 0..n-1 are the left level's rows (top to bottom) and points n..2n-1
the right level's rows.  A matching is stored as a partner array, i.e. a
fixed-point-free involution on 0..2n-1.  Row indices are 0-based; the
1-based top-to-bottom labels appear only in presentation layers.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Iterator, Sequence

from .combinatorics import double_factorial
from .errors import CapacityError

# enumerate_all() is guarded at n <= 6 ((2*6-1)!! = 10395 matchings).
ENUMERATION_LIMIT = 6

UNMATCHED = -1


# Cached decoding tables: n_points -> (matching count, bit width, radices).
_DECODE: dict[int, tuple[int, int, tuple[int, ...]]] = {}
# Full matching tables for small point counts (table lookup is the hot path
# of the simulator; 11!! = 10395 entries at most).
_TABLE: dict[int, list[tuple[int, ...]]] = {}
_TABLE_LIMIT_POINTS = 12


def _decode_params(n_points: int) -> tuple[int, int, tuple[int, ...]]:
    params = _DECODE.get(n_points)
    if params is None:
        radices = tuple(range(n_points - 1, 0, -2))
        count = 1
        for r in radices:
            count *= r
        params = (count, count.bit_length(), radices)
        _DECODE[n_points] = params
    return params


def _decode_matching(code: int, n_points: int) -> tuple[int, ...]:
    """Bijection from [0, (n_points-1)!!) onto matchings: repeatedly match
    the lowest unmatched point to the code-selected other unmatched point."""
    _, _, radices = _decode_params(n_points)
    partner = [UNMATCHED] * n_points
    pool = list(range(n_points))
    for radix in radices:
        if radix > 1:
            code, j = divmod(code, radix)
        else:
            j = 0
        a = pool[0]
        b = pool.pop(1 + j)
        pool.pop(0)
        partner[a] = b
        partner[b] = a
    return tuple(partner)


def sample_partner_list(n_points: int, rng: random.Random) -> tuple[int, ...]:
    """Uniform perfect matching on n_points points as a raw partner tuple.

    Exact: a single rejection-sampled uniform index in [0, (n_points-1)!!)
    is decoded by matching the lowest unmatched point to a uniformly chosen
    other unmatched point, so every matching has equal probability.
    """
    if n_points % 2:
        raise ValueError("cannot perfectly match an odd number of points")
    if n_points == 0:
        return ()
    count, bits, _ = _decode_params(n_points)
    r = rng.getrandbits(bits)
    while r >= count:
        r = rng.getrandbits(bits)
    if n_points <= _TABLE_LIMIT_POINTS:
        table = _TABLE.get(n_points)
        if table is None:
            table = [_decode_matching(c, n_points) for c in range(count)]
            _TABLE[n_points] = table
        return table[r]
    return _decode_matching(r, n_points)


@dataclass(frozen=True)
class PerfectMatching:
    """A perfect matching on 2n points, one layer of a Brauer diagram."""

    partner: tuple[int, ...]

    def __post_init__(self) -> None:
        p = self.partner
        if len(p) % 2:
            raise ValueError("partner array must have even length")
        for i, j in enumerate(p):
            if j == i or not 0 <= j < len(p) or p[j] != i:
                raise ValueError("partner array is not a fixed-point-free involution")

    @property
    def size(self) -> int:
        return len(self.partner) // 2

    @classmethod
    def sample(cls, n: int, rng: random.Random) -> "PerfectMatching":
        """Uniform matching on 2n points (n >= 1)."""
        if n < 1:
            raise ValueError("n must be positive")
        return cls(tuple(sample_partner_list(2 * n, rng)))

    @classmethod
    def from_pairs(cls, pairs: Sequence[Sequence[int]], n: int) -> "PerfectMatching":
        partner = [UNMATCHED] * (2 * n)
        for a, b in pairs:
            partner[a] = b
            partner[b] = a
        if UNMATCHED in partner:
            raise ValueError("pairs do not cover all 2n points")
        return cls(tuple(partner))

    def to_pairs(self) -> list[list[int]]:
        """Canonical JSON form: sorted list of sorted index pairs."""
        return [[i, j] for i, j in enumerate(self.partner) if i < j]

    def across_count(self) -> int:
        """Number of edges with one endpoint on each side."""
        n = self.size
        return sum(1 for i in range(n) if self.partner[i] >= n)


def enumerate_all(n: int) -> Iterator[PerfectMatching]:
    """Yield every matching on 2n points exactly once ((2n-1)!! in total)."""
    if n < 1:
        raise ValueError("n must be positive")
    if n > ENUMERATION_LIMIT:
        raise CapacityError(
            f"enumerate_all(n={n}) would produce {double_factorial(2 * n - 1)} matchings; "
            f"the guard is n <= {ENUMERATION_LIMIT}"
        )

    def rec(points: list[int], acc: list[int]) -> Iterator[PerfectMatching]:
        if not points:
            yield PerfectMatching(tuple(acc))
            return
        a = points[0]
        for i in range(1, len(points)):
            b = points[i]
            acc[a], acc[b] = b, a
            yield from rec(points[1:i] + points[i + 1 :], acc)

    yield from rec(list(range(2 * n)), [UNMATCHED] * (2 * n))


@dataclass(frozen=True)
class PartialMatching:
    """Matching on a subset of one level's n rows; UNMATCHED marks holes.

    Used for the modified diagram's initial matching (one hole when n is
    odd, none when n is even) and for frontier pairings.
    """

    partner: tuple[int, ...]

    def __post_init__(self) -> None:
        p = self.partner
        support = [i for i, j in enumerate(p) if j != UNMATCHED]
        if len(support) % 2:
            raise ValueError("support size must be even")
        for i in support:
            j = p[i]
            if j == i or not 0 <= j < len(p) or p[j] != i:
                raise ValueError("partner array is not an involution on its support")

    @property
    def size(self) -> int:
        return len(self.partner)

    def holes(self) -> list[int]:
        return [i for i, j in enumerate(self.partner) if j == UNMATCHED]

    def to_pairs(self) -> list[list[int]]:
        return [[i, j] for i, j in enumerate(self.partner) if UNMATCHED != j > i]


def sample_initial_partial(n: int, rng: random.Random) -> PartialMatching:
    """Initial matching of the modified diagram: a maximum matching on level 0.

    For even n this is a uniform perfect matching on all n rows; for odd n
    a uniformly chosen row is left unmatched and the remaining n-1 rows get
    a uniform matching.
    """
    if n < 1:
        raise ValueError("n must be positive")
    if n % 2 == 0:
        return PartialMatching(tuple(sample_partner_list(n, rng)))
    hole = rng.randrange(n)
    rows = [r for r in range(n) if r != hole]
    sub = sample_partner_list(n - 1, rng)
    partner = [UNMATCHED] * n
    for i, j in enumerate(sub):
        partner[rows[i]] = rows[j]
    return PartialMatching(tuple(partner))


def enumerate_initial_partials(n: int) -> Iterator[PartialMatching]:
    """All equally likely initial matchings of the modified diagram."""
    if n % 2 == 0:
        for pm in enumerate_all(n // 2):
            yield PartialMatching(pm.partner)
        return
    for hole in range(n):
        rows = [r for r in range(n) if r != hole]
        for pm in enumerate_all((n - 1) // 2):
            partner = [UNMATCHED] * n
            for i, j in enumerate(pm.partner):
                partner[rows[i]] = rows[j]
            yield PartialMatching(tuple(partner))
