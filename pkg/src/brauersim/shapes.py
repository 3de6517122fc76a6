"""Strong and weak shapes of closed loops.

A loop's canonical exploration (topmost vertex of its leftmost level,
first step to the right) emits one letter per edge: A when the edge goes
across two levels, B when it bends within a level.  Which words can occur
is decided by an infinite two-row automaton whose states are (column k,
row): the run is in column k exactly when the exploration sits at level
offset k, and in the top row exactly when the current vertex was entered
from its left side.  Reading A moves one column right from the top row and
one column left from the bottom row; reading B flips the row.  A word is a
strong shape for a given n iff the run starts and ends at the top state of
column 0, never exits column 0 to the left, and visits no state more than
floor(n/2) times.

The weak shape (a_k) lists the top-state visit counts per column; a loop
of that shape has 2*a_k vertices at level offset k.
"""

from __future__ import annotations

from math import comb
from typing import Iterable, Sequence

from .diagram import LOOP, Component
from .errors import CapacityError

TOP = 0
BOTTOM = 1

MAX_ENUMERATION_WORD_LENGTH = 16


class ShapeError(ValueError):
    """Word or weak shape outside the valid domain."""


def _run_automaton(word: str) -> tuple[bool, dict[tuple[int, int], int]]:
    """Run the word from the start state.

    Returns (structurally accepted, visit counts).  Visits count the state
    held before each letter is read, so they total len(word); the final
    return to the start state is not itself a visit.
    """
    col, row = 0, TOP
    visits: dict[tuple[int, int], int] = {}
    for ch in word:
        key = (col, row)
        visits[key] = visits.get(key, 0) + 1
        if ch == "A":
            if row == TOP:
                col += 1
            elif col == 0:
                return False, visits  # would leave the state space
            else:
                col -= 1
        elif ch == "B":
            row = BOTTOM if row == TOP else TOP
        else:
            raise ShapeError(f"invalid letter {ch!r}; words use the alphabet {{A, B}}")
    return bool(word) and col == 0 and row == TOP, visits


def validate_strong(word: str, n: int) -> bool:
    """Whether the word is a strong shape realizable with n rows per level."""
    ok, visits = _run_automaton(word)
    if not ok:
        return False
    m = n // 2
    return all(v <= m for v in visits.values())


def weak_of_strong(word: str) -> tuple[int, ...]:
    """Weak shape of an accepted word: per-column top-row visit counts."""
    ok, visits = _run_automaton(word)
    if not ok:
        raise ShapeError(f"{word!r} is not accepted by the shape automaton")
    r = max(col for col, _ in visits)
    a = tuple(visits.get((k, TOP), 0) for k in range(r + 1))
    # Top and bottom rows of every column are visited equally often.
    assert all(visits.get((k, BOTTOM), 0) == a[k] for k in range(r + 1))
    return a


def stretch(a: Sequence[int]) -> int:
    """Largest offset with a_k > 0 (weak shapes store no trailing zeros)."""
    return len(a) - 1


def is_valid_weak(a: Sequence[int], n: int) -> bool:
    """A nonzero finite sequence is a weak shape for n iff all a_k <= n/2,
    it has no internal zeros, and it is nonempty."""
    return bool(a) and all(0 < ak <= n // 2 for ak in a)


def gamma(a: Sequence[int]) -> int:
    """Number of strong shapes sharing the weak shape a."""
    if not a or any(ak <= 0 for ak in a):
        raise ShapeError("weak shapes are nonempty sequences of positive integers")
    result = 1
    for i in range(1, len(a)):
        result *= comb(a[i - 1] + a[i] - 1, a[i])
    return result


def shape_of_loop(c: Component) -> str:
    """Strong-shape word read off a closed loop's canonical walk."""
    if c.kind != LOOP:
        raise ShapeError(f"shape is only defined for loops, got {c.kind!r}")
    levels = [lv for lv, _ in c.walk]
    k = len(levels)
    return "".join(
        "A" if levels[i] != levels[(i + 1) % k] else "B" for i in range(k)
    )


def weak_of_loop(c: Component) -> tuple[int, ...]:
    """Weak shape from per-level vertex counts (each level holds 2*a_k)."""
    if c.kind != LOOP:
        raise ShapeError(f"weak shape is only defined for loops, got {c.kind!r}")
    counts: dict[int, int] = {}
    for lv, _ in c.walk:
        counts[lv] = counts.get(lv, 0) + 1
    s = min(counts)
    a = tuple(counts.get(s + k, 0) for k in range(max(counts) - s + 1))
    if any(x == 0 or x % 2 for x in a):
        raise ShapeError("loop occupancy must be even and contiguous")
    return tuple(x // 2 for x in a)


def enumerate_strong(n: int, max_len: int) -> list[str]:
    """All strong shapes for n of length <= max_len, lexicographically."""
    if max_len > MAX_ENUMERATION_WORD_LENGTH:
        raise CapacityError(
            f"shape enumeration is guarded at word length {MAX_ENUMERATION_WORD_LENGTH}"
        )
    m = n // 2
    out: list[str] = []

    def rec(col: int, row: int, visits: dict, word: list[str]) -> None:
        if word and col == 0 and row == TOP:
            out.append("".join(word))
        if len(word) == max_len:
            return
        key = (col, row)
        if visits.get(key, 0) + 1 > m:
            return  # reading any further letter would overvisit this state
        visits[key] = visits.get(key, 0) + 1
        for ch in ("A", "B"):
            if ch == "A":
                if row == TOP:
                    rec(col + 1, TOP, visits, word + ["A"])
                elif col > 0:
                    rec(col - 1, BOTTOM, visits, word + ["A"])
            else:
                rec(col, TOP if row == BOTTOM else BOTTOM, visits, word + ["B"])
        visits[key] -= 1

    rec(0, TOP, {}, [])
    return sorted(out)


def make_loop_component(word: str) -> Component:
    """Synthetic closed loop realizing an accepted word.

    Vertices are placed greedily on the topmost free row of each level (the
    constructive direction of the automaton argument), with the leftmost
    level at 0.  The result round-trips through shape_of_loop.
    """
    ok, _ = _run_automaton(word)
    if not ok:
        raise ShapeError(f"{word!r} is not accepted by the shape automaton")
    col, row = 0, TOP
    next_row: dict[int, int] = {}
    walk: list[tuple[int, int]] = []
    layers: list[int] = []
    for ch in word:
        r = next_row.get(col, 0)
        next_row[col] = r + 1
        walk.append((col, r))
        layers.append(col + 1 if row == TOP else col)
        if ch == "A":
            col += 1 if row == TOP else -1
        else:
            row = TOP if row == BOTTOM else BOTTOM
    return Component(LOOP, tuple(walk), tuple(layers))


def words_by_weak_shape(n: int, max_len: int) -> dict[tuple[int, ...], list[str]]:
    """Group all strong shapes for n up to max_len by their weak shape."""
    grouped: dict[tuple[int, ...], list[str]] = {}
    for word in enumerate_strong(n, max_len):
        grouped.setdefault(weak_of_strong(word), []).append(word)
    return grouped


def parse_weak(text: str | Iterable[int]) -> tuple[int, ...]:
    """Parse a weak shape from "2,1" style text or any int sequence."""
    if isinstance(text, str):
        parts = [p for p in text.replace(" ", "").split(",") if p]
        a = tuple(int(p) for p in parts)
    else:
        a = tuple(int(x) for x in text)
    if not a or any(x <= 0 for x in a):
        raise ShapeError("weak shapes are nonempty sequences of positive integers")
    return a
