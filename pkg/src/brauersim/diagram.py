"""Stored Brauer diagrams: construction, components, classification.

A diagram of length t has t+1 levels of n vertices; layer u (1-based) is a
matching on levels u-1 and u.  A modified diagram carries an extra partial
matching drawn to the left of level 0, treated here as "layer 0".  Each
vertex (level, row) therefore has at most one edge in layer `level` (its
left side) and at most one in layer `level + 1` (its right side).

Components are multigraph-aware: the minimal closed loop is two parallel
edges between the same pair of same-level vertices, one bend in each of
the two adjacent layers.  Edges are identified by (layer, endpoint pair).

Stored diagrams are meant for moderate t; a soft memory guard rejects
anything above ~10^4 layers unless explicitly overridden (use the
streaming simulator instead).
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from typing import Optional, Sequence

from .errors import CapacityError, MultipleTransverseStringsError
from .matching import (
    UNMATCHED,
    PartialMatching,
    PerfectMatching,
    sample_initial_partial,
)

LOOP = "loop"
SLING = "sling"
TRANSVERSE = "transverse"

# Soft guard for stored diagrams: n*(t+1) vertices.
MAX_STORED_VERTICES = 2_000_000


@dataclass(frozen=True)
class Component:
    """A classified connected component with its canonical exploration walk.

    walk[i] is a (level, row) pair; edge i joins walk[i] to walk[i+1]
    (wrapping around for loops) and lives in layer edge_layers[i].  Loop
    walks start at the topmost vertex of the leftmost level and head right;
    sling walks start at the upper endpoint; transverse walks start at the
    level-0 endpoint.
    """

    kind: str
    walk: tuple[tuple[int, int], ...]
    edge_layers: tuple[int, ...]

    @property
    def size(self) -> int:
        return len(self.walk)

    @property
    def leftmost_level(self) -> int:
        return min(level for level, _ in self.walk)

    @property
    def rightmost_level(self) -> int:
        return max(level for level, _ in self.walk)

    def edges(self):
        """Yield (vertex_a, vertex_b, layer) for every edge of the component."""
        k = len(self.walk)
        for i, layer in enumerate(self.edge_layers):
            yield self.walk[i], self.walk[(i + 1) % k], layer


@dataclass(frozen=True)
class BrauerDiagram:
    n: int
    layers: tuple[PerfectMatching, ...]
    initial: Optional[PartialMatching] = None

    @property
    def t(self) -> int:
        return len(self.layers)

    @property
    def modified(self) -> bool:
        return self.initial is not None

    def vertex_count(self) -> int:
        return self.n * (self.t + 1)

    def to_json(self) -> str:
        doc = {
            "n": self.n,
            "t": self.t,
            "layers": [m.to_pairs() for m in self.layers],
            "initial": self.initial.to_pairs() if self.initial else None,
        }
        return json.dumps(doc, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "BrauerDiagram":
        doc = json.loads(text)
        n = doc["n"]
        layers = tuple(PerfectMatching.from_pairs(p, n) for p in doc["layers"])
        initial = None
        if doc.get("initial") is not None:
            partner = [UNMATCHED] * n
            for a, b in doc["initial"]:
                partner[a] = b
                partner[b] = a
            initial = PartialMatching(tuple(partner))
        return cls(n=n, layers=layers, initial=initial)


def build(
    n: int,
    layers: Sequence[PerfectMatching],
    modified: bool = False,
    rng: Optional[random.Random] = None,
    initial: Optional[PartialMatching] = None,
    allow_large: bool = False,
) -> BrauerDiagram:
    """Assemble a diagram from layers; sample an initial matching if modified."""
    if n < 1:
        raise ValueError("n must be positive")
    for m in layers:
        if m.size != n:
            raise ValueError(f"layer has size {m.size}, expected {n}")
    if not allow_large and n * (len(layers) + 1) > MAX_STORED_VERTICES:
        raise CapacityError(
            f"stored diagram with {n * (len(layers) + 1)} vertices exceeds the guard; "
            "pass allow_large=True or use the streaming simulator"
        )
    if modified and initial is None:
        if rng is None:
            raise ValueError("modified diagrams need an rng to sample the initial matching")
        initial = sample_initial_partial(n, rng)
    if initial is not None and initial.size != n:
        raise ValueError("initial matching has wrong size")
    return BrauerDiagram(n=n, layers=tuple(layers), initial=initial)


def sample_diagram(
    n: int, t: int, rng: random.Random, modified: bool = False
) -> BrauerDiagram:
    """Uniform random diagram of length t (i.i.d. uniform layers)."""
    layers = [PerfectMatching.sample(n, rng) for _ in range(t)]
    return build(n, layers, modified=modified, rng=rng)


def _adjacency(d: BrauerDiagram) -> list[list[tuple[int, int]]]:
    """Per-vertex edge list [(neighbor vid, layer)], vid = level*n + row."""
    n, t = d.n, d.t
    adj: list[list[tuple[int, int]]] = [[] for _ in range(n * (t + 1))]
    if d.initial is not None:
        for r, p in enumerate(d.initial.partner):
            if p != UNMATCHED and r < p:
                adj[r].append((p, 0))
                adj[p].append((r, 0))
    for u, layer in enumerate(d.layers, start=1):
        base = (u - 1) * n
        for i, j in enumerate(layer.partner):
            if i >= j:
                continue
            # matching indices 0..n-1 live on level u-1, n..2n-1 on level u
            a = base + i if i < n else base + n + (i - n)
            b = base + j if j < n else base + n + (j - n)
            adj[a].append((b, u))
            adj[b].append((a, u))
    return adj


def _walk(
    adj: list[list[tuple[int, int]]],
    start: int,
    first_neighbor: int,
    first_layer: int,
    closed: bool,
) -> tuple[list[int], list[int]]:
    """Follow edges from start, entering each vertex on one edge and leaving
    on the other.  Returns (vertex ids, edge layers); edge i joins walk[i]
    to walk[i+1] (wrapping for closed walks)."""
    walk = [start]
    edge_layers = [first_layer]
    prev, prev_layer = start, first_layer
    cur = first_neighbor
    while True:
        if closed and cur == start:
            return walk, edge_layers
        walk.append(cur)
        options = adj[cur]
        if len(options) == 1:
            return walk, edge_layers  # path endpoint reached
        (v1, l1), (v2, l2) = options
        # leave via the edge we did not arrive on; parallel edges are told
        # apart by their layer
        if v1 == prev and l1 == prev_layer:
            nxt, nlayer = v2, l2
        else:
            nxt, nlayer = v1, l1
        edge_layers.append(nlayer)
        prev, prev_layer = cur, nlayer
        cur = nxt


def components(d: BrauerDiagram) -> list[Component]:
    """All connected components with canonical walks, in scan order of their
    topmost-leftmost vertex.  Every vertex belongs to exactly one component."""
    n, t = d.n, d.t
    adj = _adjacency(d)
    nv = n * (t + 1)
    seen = [False] * nv
    groups: list[list[int]] = []
    for v0 in range(nv):
        if seen[v0]:
            continue
        seen[v0] = True
        members = [v0]
        stack = [v0]
        while stack:
            v = stack.pop()
            for w, _ in adj[v]:
                if not seen[w]:
                    seen[w] = True
                    members.append(w)
                    stack.append(w)
        groups.append(members)

    out: list[Component] = []
    for members in groups:
        if len(members) == 1:
            v = members[0]
            # only possible at t = 0, where level 0 doubles as level t
            out.append(Component(TRANSVERSE, ((v // n, v % n),), ()))
            continue
        endpoints = sorted(v for v in members if len(adj[v]) == 1)
        if not endpoints:
            start = min(members)  # vid order = (level, row) order
            level = start // n
            nb, lay = next(e for e in adj[start] if e[1] == level + 1)
            walk, layers = _walk(adj, start, nb, lay, closed=True)
            kind = LOOP
        else:
            e1, e2 = endpoints
            if e1 // n == e2 // n:
                kind = SLING
                start = e1  # upper endpoint
            else:
                kind = TRANSVERSE
                start = e1  # endpoint ordering puts the level-0 one first
            nb, lay = adj[start][0]
            walk, layers = _walk(adj, start, nb, lay, closed=False)
        out.append(
            Component(kind, tuple((v // n, v % n) for v in walk), tuple(layers))
        )
    return out


def transverse_string(
    d: BrauerDiagram, comps: Optional[list[Component]] = None
) -> Optional[Component]:
    """The unique transverse string, None if there is none.

    Raises MultipleTransverseStringsError when several exist (possible in
    unmodified diagrams before the stopping time that makes the string
    unique).
    """
    if comps is None:
        comps = components(d)
    strings = [c for c in comps if c.kind == TRANSVERSE]
    if not strings:
        return None
    if len(strings) > 1:
        raise MultipleTransverseStringsError(
            f"{len(strings)} transverse strings present"
        )
    return strings[0]


def level_counts(c: Component, level: int) -> int:
    """Number of the component's vertices lying on the given level."""
    return sum(1 for lv, _ in c.walk if lv == level)


def edge_profile(c: Component, layer: int) -> tuple[int, int, int]:
    """Edge counts of the component in one layer: (across, bends in the
    layer's left level, bends in its right level)."""
    across = bends_left = bends_right = 0
    for (la, _), (lb, _), lay in c.edges():
        if lay != layer:
            continue
        if la != lb:
            across += 1
        elif la == layer - 1:
            bends_left += 1
        else:
            bends_right += 1
    return across, bends_left, bends_right


def component_summary(d: BrauerDiagram, comps: Optional[list[Component]] = None) -> dict:
    """JSON-ready tally of components by kind, with per-loop geometry."""
    if comps is None:
        comps = components(d)
    loops = [c for c in comps if c.kind == LOOP]
    return {
        "n": d.n,
        "t": d.t,
        "modified": d.modified,
        "counts": {
            "loop": len(loops),
            "sling": sum(1 for c in comps if c.kind == SLING),
            "transverse": sum(1 for c in comps if c.kind == TRANSVERSE),
        },
        "loops": [
            {"size": c.size, "leftmost_level": c.leftmost_level}
            for c in loops
        ],
    }
