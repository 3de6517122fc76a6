"""Ground-truth engines at desk scale.

Two independent routes to exact answers:

* exact_by_enumeration iterates every diagram (all initial matchings of
  the modified construction times all layer tuples), classifies it through
  the stored-diagram component extractor, and tallies the statistic with
  exact rational weights.

* exact_by_markov never touches stored diagrams: it builds the one-layer
  transition kernel of the frontier (via the pure path resolver) with
  exact rational entries and powers it, or solves absorption equations
  for fate-dependent laws.

The two must agree exactly wherever both apply; the test suite checks
that, and checks both against the closed-form module.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Optional, Sequence

from . import diagram as dg
from .combinatorics import double_factorial
from .errors import CapacityError
from .matching import (
    UNMATCHED,
    PartialMatching,
    PerfectMatching,
    enumerate_all,
    enumerate_initial_partials,
)
from .shapes import shape_of_loop
from .simulate import resolve_layer
from .theory import Pmf

MAX_ENUMERATION_DIAGRAMS = 10**7

STATISTICS = ("loops", "shape_loops", "transverse_len", "V", "E", "resets")


def _initial_states(n: int, modified: bool) -> list[Optional[PartialMatching]]:
    if not modified:
        return [None]
    return list(enumerate_initial_partials(n))


def exact_by_enumeration(
    n: int,
    t: int,
    stat: str,
    *,
    modified: bool = True,
    word: Optional[str] = None,
    level: Optional[int | tuple[int, ...]] = None,
    layer: Optional[int] = None,
    max_work: int = MAX_ENUMERATION_DIAGRAMS,
) -> Pmf:
    """Exact law of a diagram statistic by brute-force enumeration.

    stat is one of:
      loops          -- number of closed loops
      shape_loops    -- number of loops with strong shape `word` (optionally
                        restricted to leftmost level(s) `level`)
      transverse_len -- vertex count of the unique transverse string
                        (modified diagrams with odd n)
      V              -- string vertices on level `level`
      E              -- string across-edges in layer `layer`
      resets         -- number of reset layers
    """
    if stat not in STATISTICS:
        raise ValueError(f"unknown statistic {stat!r}")
    if stat == "shape_loops" and word is None:
        raise ValueError("shape_loops needs a word")
    if stat == "V" and level is None:
        raise ValueError("V needs a level")
    if stat == "E" and layer is None:
        raise ValueError("E needs a layer")
    if stat in ("transverse_len", "V", "E") and not (modified and n % 2):
        raise ValueError(f"{stat} requires the modified construction and odd n")

    initials = _initial_states(n, modified)
    n_layers = double_factorial(2 * n - 1)
    total = len(initials) * n_layers**t
    if total > max_work:
        raise CapacityError(
            f"enumeration over {total} diagrams exceeds the {max_work} guard"
        )
    layer_pool = list(enumerate_all(n))
    weight = Fraction(1, total)
    dist: dict[int, Fraction] = {}

    for initial in initials:
        for layers in itertools.product(layer_pool, repeat=t):
            d = dg.BrauerDiagram(n=n, layers=layers, initial=initial)
            value = _statistic(d, stat, word=word, level=level, layer=layer)
            dist[value] = dist.get(value, Fraction(0)) + weight
    return Pmf.from_mapping(dist)


def _statistic(
    d: dg.BrauerDiagram,
    stat: str,
    word: Optional[str],
    level: Optional[int],
    layer: Optional[int],
) -> int:
    if stat == "resets":
        want = 1 if d.n % 2 else 0
        return sum(1 for m in d.layers if m.across_count() == want)
    comps = dg.components(d)
    if stat == "loops":
        return sum(1 for c in comps if c.kind == dg.LOOP)
    if stat == "shape_loops":
        levels = (level,) if isinstance(level, int) else level
        count = 0
        for c in comps:
            if c.kind != dg.LOOP:
                continue
            if levels is not None and c.leftmost_level not in levels:
                continue
            if shape_of_loop(c) == word:
                count += 1
        return count
    string = dg.transverse_string(d, comps)
    if string is None:
        raise RuntimeError("expected a transverse string")
    if stat == "transverse_len":
        return string.size
    if stat == "V":
        return dg.level_counts(string, level)
    if stat == "E":
        return dg.edge_profile(string, layer)[0]
    raise AssertionError(stat)


# -- exact Markov kernel over frontier states -------------------------------

MAX_KERNEL_N = 5


def _canonical_initial_pairing(n: int) -> tuple[tuple[int, ...], int]:
    """Frontier with slings on rows (0,1), (2,3), ...; string row last (odd n)."""
    pairing = [UNMATCHED] * n
    m = n // 2
    for i in range(m):
        pairing[2 * i] = 2 * i + 1
        pairing[2 * i + 1] = 2 * i
    string_row = n - 1 if n % 2 else UNMATCHED
    return tuple(pairing), string_row


class FrontierKernel:
    """One-layer transition kernel of the sling process, exact rationals.

    States are (string_row, pairing) in canonical tuple form; transition
    records carry the loop count, absorbed-sling count and reset flag of
    the step so statistics can ride along the powering.
    """

    def __init__(self, n: int):
        if n > MAX_KERNEL_N:
            raise CapacityError(f"kernel guard: n <= {MAX_KERNEL_N}")
        self.n = n
        self.layer_pool = [m.partner for m in enumerate_all(n)]
        self.nlayers = len(self.layer_pool)
        self.states: list[tuple[int, tuple[int, ...]]] = []
        self.index: dict[tuple[int, tuple[int, ...]], int] = {}
        # transitions[i] = {(j, loops, absorbed, reset): Fraction}
        self.transitions: list[dict[tuple[int, int, int, bool], Fraction]] = []
        start_pairing, start_row = _canonical_initial_pairing(n)
        self._add_state((start_row, start_pairing))
        i = 0
        while i < len(self.states):
            self._expand(i)
            i += 1

    @property
    def start_state(self) -> int:
        return 0

    def _add_state(self, state: tuple[int, tuple[int, ...]]) -> int:
        if state not in self.index:
            self.index[state] = len(self.states)
            self.states.append(state)
            self.transitions.append({})
        return self.index[state]

    def _expand(self, i: int) -> None:
        string_row, pairing = self.states[i]
        out = self.transitions[i]
        p = Fraction(1, self.nlayers)
        for layer in self.layer_pool:
            res = resolve_layer(pairing, string_row, layer)
            j = self._add_state((res.new_string_row, res.new_pairing))
            key = (j, len(res.loops), len(res.absorbed), res.is_reset(self.n))
            out[key] = out.get(key, Fraction(0)) + p

    def row_sum(self, i: int) -> Fraction:
        return sum(self.transitions[i].values(), Fraction(0))

    def reset_probability_from(self, i: int) -> Fraction:
        return sum(
            (p for (_, _, _, reset), p in self.transitions[i].items() if reset),
            Fraction(0),
        )

    def loop_increment_pmf(self, i: int = 0) -> Pmf:
        dist: dict[int, Fraction] = {}
        for (_, loops, _, _), p in self.transitions[i].items():
            dist[loops] = dist.get(loops, Fraction(0)) + p
        return Pmf.from_mapping(dist)

    def absorbed_pmf(self, i: int = 0) -> Pmf:
        dist: dict[int, Fraction] = {}
        for (_, _, absorbed, _), p in self.transitions[i].items():
            dist[absorbed] = dist.get(absorbed, Fraction(0)) + p
        return Pmf.from_mapping(dist)


def markov_loop_count_dist(n: int, t: int, kernel: Optional[FrontierKernel] = None) -> Pmf:
    """Exact law of the modified diagram's loop count after t layers."""
    if t > 1000:
        raise CapacityError("kernel powering guard: t <= 1000")
    k = kernel or FrontierKernel(n)
    # distribution over (state, running count)
    cur: dict[tuple[int, int], Fraction] = {(k.start_state, 0): Fraction(1)}
    for _ in range(t):
        nxt: dict[tuple[int, int], Fraction] = {}
        for (i, c), p in cur.items():
            for (j, loops, _, _), q in k.transitions[i].items():
                key = (j, c + loops)
                nxt[key] = nxt.get(key, Fraction(0)) + p * q
        cur = nxt
    dist: dict[int, Fraction] = {}
    for (_, c), p in cur.items():
        dist[c] = dist.get(c, Fraction(0)) + p
    return Pmf.from_mapping(dist)


# -- tagged fate chains ------------------------------------------------------
#
# For laws that depend on where slings eventually end up (the string's
# local occupancy V and crossing count E), tag slings with weights and
# follow the weights through merges until each resolves to the string or
# a loop.  By row exchangeability the law of the next tagged configuration
# depends only on the multiset of live weights, so the chain runs on
# weight multisets.


def _tagged_transitions(
    n: int, weights: tuple[int, ...]
) -> dict[tuple[tuple[int, ...], int], Fraction]:
    """One-step law of (next live weight multiset, weight absorbed now).

    Built by exhausting layers from a canonical arrangement carrying the
    given weights on its first len(weights) slings.
    """
    pairing, string_row = _canonical_initial_pairing(n)
    m = n // 2
    w_of_key = {2 * i: (weights[i] if i < len(weights) else 0) for i in range(m)}
    out: dict[tuple[tuple[int, ...], int], Fraction] = {}
    p = Fraction(1, double_factorial(2 * n - 1))
    for pm in enumerate_all(n):
        res = resolve_layer(pairing, string_row, pm.partner)
        absorbed = sum(w_of_key[key] for key in res.absorbed)
        live = tuple(
            sorted(
                w
                for _, old_keys in res.survivors
                if (w := sum(w_of_key[key] for key in old_keys)) > 0
            )
        )
        key = (live, absorbed)
        out[key] = out.get(key, Fraction(0)) + p
    return out


def _absorption_dist(n: int, start: tuple[int, ...]) -> dict[int, Fraction]:
    """Exact law of the total weight eventually absorbed into the string."""
    # enumerate reachable weight multisets
    reachable: set[tuple[int, ...]] = set()
    frontier = [tuple(sorted(start))]
    trans: dict[tuple[int, ...], dict[tuple[tuple[int, ...], int], Fraction]] = {}
    while frontier:
        s = frontier.pop()
        if s in reachable or not s:
            continue
        reachable.add(s)
        trans[s] = _tagged_transitions(n, s)
        for (nxt, _), _p in trans[s].items():
            if nxt and nxt not in reachable:
                frontier.append(nxt)
    # solve in increasing (total weight, count) order; a state's only
    # same-index successor is itself (pure survival), so one division
    # suffices
    result: dict[tuple[int, ...], dict[int, Fraction]] = {(): {0: Fraction(1)}}
    for s in sorted(reachable, key=lambda s: (sum(s), len(s))):
        self_p = Fraction(0)
        acc: dict[int, Fraction] = {}
        for (nxt, absorbed), p in trans[s].items():
            if nxt == s and absorbed == 0:
                self_p += p
                continue
            sub = result[nxt]
            for val, q in sub.items():
                key = val + absorbed
                acc[key] = acc.get(key, Fraction(0)) + p * q
        scale = 1 / (1 - self_p)
        result[s] = {v: q * scale for v, q in acc.items()}
    return result[tuple(sorted(start))]


def markov_V_dist(n: int) -> Pmf:
    """Exact law of the string's vertex count at a level, via sling fates."""
    if n % 2 == 0:
        raise ValueError("V requires odd n")
    m = n // 2
    absorbed = _absorption_dist(n, (2,) * m) if m else {0: Fraction(1)}
    return Pmf.from_mapping({1 + w: p for w, p in absorbed.items()})


def markov_E_dist(n: int) -> Pmf:
    """Exact law of the string's across count in a layer, via sling fates."""
    if n % 2 == 0:
        raise ValueError("E requires odd n")
    m = n // 2
    pairing, string_row = _canonical_initial_pairing(n)
    # one preparatory step: each surviving sling that extends old material
    # crosses the layer twice, so it is tagged with weight 2
    start_dist: dict[tuple[int, ...], Fraction] = {}
    p = Fraction(1, double_factorial(2 * n - 1))
    for pm in enumerate_all(n):
        res = resolve_layer(pairing, string_row, pm.partner)
        live = tuple(sorted(2 for _, old in res.survivors if old))
        start_dist[live] = start_dist.get(live, Fraction(0)) + p
    dist: dict[int, Fraction] = {}
    for live, q in start_dist.items():
        absorbed = _absorption_dist(n, live) if live else {0: Fraction(1)}
        for w, r in absorbed.items():
            dist[1 + w] = dist.get(1 + w, Fraction(0)) + q * r
    return Pmf.from_mapping(dist)


def markov_string_level_occupancy(n: int, wait: int) -> Pmf:
    """Exact law of |string(level+wait) ∩ X_level|: the finite-time version
    of V, used to cross-check the enumeration oracle."""
    if n % 2 == 0:
        raise ValueError("V requires odd n")
    m = n // 2
    cur: dict[tuple[tuple[int, ...], int], Fraction] = {((2,) * m, 0): Fraction(1)}
    cache: dict[tuple[int, ...], dict] = {}
    for _ in range(wait):
        nxt: dict[tuple[tuple[int, ...], int], Fraction] = {}
        for (live, acc), p in cur.items():
            if not live:
                key = (live, acc)
                nxt[key] = nxt.get(key, Fraction(0)) + p
                continue
            if live not in cache:
                cache[live] = _tagged_transitions(n, live)
            for (live2, absorbed), q in cache[live].items():
                key = (live2, acc + absorbed)
                nxt[key] = nxt.get(key, Fraction(0)) + p * q
        cur = nxt
    dist: dict[int, Fraction] = {}
    for (_, acc), p in cur.items():
        dist[1 + acc] = dist.get(1 + acc, Fraction(0)) + p
    return Pmf.from_mapping(dist)


def two_sling_fate_table(n: int) -> dict[str, Fraction]:
    """One-layer joint fates of two distinguished slings by enumeration,
    in the same row layout as theory.two_sling_table."""
    if n % 2 == 0 or n < 5:
        raise ValueError("the two-sling experiment needs odd n >= 5")
    pairing, string_row = _canonical_initial_pairing(n)
    k1, k2 = 0, 2  # sling keys: rows (0,1) and (2,3)
    counts = {key: 0 for key in
              ("i", "ii", "iii", "iv", "v", "vi", "vii", "viii",
               "ii_swapped", "iii_swapped", "iv_swapped")}
    total = 0
    for pm in enumerate_all(n):
        total += 1
        res = resolve_layer(pairing, string_row, pm.partner)
        fate = {}
        for key in (k1, k2):
            if key in res.absorbed:
                fate[key] = ("string", None)
        for idx, loop in enumerate(res.loops):
            for key in (k1, k2):
                if key in loop:
                    fate[key] = ("loop", idx)
        for new_key, old in res.survivors:
            for key in (k1, k2):
                if key in old:
                    fate[key] = ("sling", new_key)
        f1, f2 = fate[k1], fate[k2]
        kinds = (f1[0], f2[0])
        if kinds == ("string", "string"):
            counts["i"] += 1
        elif kinds == ("string", "loop"):
            counts["ii"] += 1
        elif kinds == ("loop", "string"):
            counts["ii_swapped"] += 1
        elif kinds == ("string", "sling"):
            counts["iii"] += 1
        elif kinds == ("sling", "string"):
            counts["iii_swapped"] += 1
        elif kinds == ("loop", "sling"):
            counts["iv"] += 1
        elif kinds == ("sling", "loop"):
            counts["iv_swapped"] += 1
        elif kinds == ("loop", "loop"):
            counts["vi" if f1[1] == f2[1] else "v"] += 1
        elif kinds == ("sling", "sling"):
            counts["viii" if f1[1] == f2[1] else "vii"] += 1
        else:
            raise AssertionError(kinds)
    return {key: Fraction(c, total) for key, c in counts.items()}
