"""Constant-memory streaming simulation of the sling process.

The engine keeps only the frontier: the pairing of the current level's
rows into sling endpoints, the transverse endpoint (odd n), and per-sling
tallies.  Consuming one layer follows the paths induced by the layer
matching: slings grow, close into loops, or join the transverse string.
A layer with no across edge (even n) or exactly one (odd n) is a reset;
reset times renew the process, and all rate estimates in the report use
the per-renewal-block variance estimator.

Per-sling tallies (vertices, across/bend edges, leftmost level, probe
tags) are stored in row-indexed arrays, mirrored on a sling's two endpoint
rows.  Shape tracking additionally keeps each sling's edge path so the
canonical word can be reconstructed when a loop closes; slings exceeding
the word/stretch caps close into an overflow bucket so totals still
reconcile with the loop count.

Every run is deterministic given (config, seed): replica i draws from
random.Random(f"{seed}:{i}") (Mersenne Twister), sampling first the
initial matching, then one layer per step.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Optional, Sequence

from .matching import (
    UNMATCHED,
    PartialMatching,
    sample_initial_partial,
    sample_partner_list,
)

DEFAULT_SHAPE_CAP = 64
DEFAULT_STRETCH_CAP = 32

TRACKERS = ("loops", "transverse", "shapes", "resets", "local")

OVERFLOW_KEY = "__overflow__"


@dataclass(frozen=True)
class LoopEvent:
    step: int
    leftmost_level: int
    size: int
    word: Optional[str]
    weak: Optional[tuple[int, ...]]
    overflow: bool


@dataclass(frozen=True)
class StepEvents:
    is_reset: bool
    layer_across: int
    loops_closed: tuple[LoopEvent, ...]
    slings_absorbed_to_string: int
    string_added_vertices: int


@dataclass(frozen=True)
class StepResolution:
    """Fate record of one layer application, for exact-kernel callers.

    Old slings are keyed by their smaller endpoint row, new slings by their
    smaller endpoint row on the new level.
    """

    new_pairing: tuple[int, ...]
    new_string_row: int
    absorbed: tuple[int, ...]
    loops: tuple[tuple[int, ...], ...]
    survivors: tuple[tuple[int, tuple[int, ...]], ...]
    layer_across: int

    def is_reset(self, n: int) -> bool:
        return self.layer_across == (n % 2)


def resolve_layer(
    pairing: Sequence[int], string_row: int, layer: Sequence[int]
) -> StepResolution:
    """Pure path-following of one layer over a frontier pairing.

    pairing[r] is the partner row of sling endpoint r (UNMATCHED marks the
    transverse endpoint); layer is a partner list on 2n points with the old
    level first.
    """
    n = len(pairing)
    new_pairing = [UNMATCHED] * n
    assigned = [False] * n
    visited = [False] * n
    new_string_row = UNMATCHED
    absorbed: list[int] = []
    survivors: list[tuple[int, tuple[int, ...]]] = []
    loops: list[tuple[int, ...]] = []
    across = sum(1 for x in range(n) if layer[x] >= n)

    for y in range(n):
        if assigned[y]:
            continue
        assigned[y] = True
        p = layer[n + y]
        if p >= n:
            y2 = p - n
            assigned[y2] = True
            new_pairing[y] = y2
            new_pairing[y2] = y
            survivors.append((min(y, y2), ()))
            continue
        keys: list[int] = []
        cur = p
        while True:
            visited[cur] = True
            if cur == string_row:
                absorbed.extend(reversed(keys))  # walk ran from y inward
                new_string_row = y
                break
            other = pairing[cur]
            visited[other] = True
            keys.append(min(cur, other))
            nxt = layer[other]
            if nxt >= n:
                y2 = nxt - n
                assigned[y2] = True
                new_pairing[y] = y2
                new_pairing[y2] = y
                survivors.append((min(y, y2), tuple(keys)))
                break
            cur = nxt

    for x in range(n):
        if visited[x] or x == string_row or pairing[x] == UNMATCHED:
            continue
        cycle: list[int] = []
        cur = x
        while not visited[cur]:
            visited[cur] = True
            other = pairing[cur]
            visited[other] = True
            cycle.append(min(cur, other))
            cur = layer[other]
        loops.append(tuple(cycle))

    return StepResolution(
        new_pairing=tuple(new_pairing),
        new_string_row=new_string_row,
        absorbed=tuple(absorbed),
        loops=tuple(loops),
        survivors=tuple(survivors),
        layer_across=across,
    )


def _canonical_loop_word(
    verts: list[tuple[int, int]], layers: list[int]
) -> tuple[str, tuple[int, ...]]:
    """Canonical strong-shape word and weak shape of a closed cycle.

    verts[i] -- edge layers[i] -- verts[i+1 mod V].  The walk starts at the
    topmost vertex of the leftmost level and first takes that vertex's
    right-side edge (the one in layer level+1).
    """
    v = len(verts)
    s = min(lv for lv, _ in verts)
    start = -1
    best_row = None
    for i, (lv, row) in enumerate(verts):
        if lv == s and (best_row is None or row < best_row):
            best_row = row
            start = i
    chars = []
    if layers[start] == s + 1:
        for i in range(v):
            j = (start + i) % v
            chars.append("A" if verts[j][0] != verts[(j + 1) % v][0] else "B")
    else:
        for i in range(v):
            j = (start - 1 - i) % v
            chars.append("A" if verts[j][0] != verts[(j + 1) % v][0] else "B")
    counts: dict[int, int] = {}
    for lv, _ in verts:
        counts[lv] = counts.get(lv, 0) + 1
    weak = tuple(counts[k] // 2 for k in range(s, max(counts) + 1))
    return "".join(chars), weak


class Engine:
    """Streaming frontier with tallies; one instance per replica."""

    def __init__(
        self,
        n: int,
        initial: PartialMatching,
        track_shapes: bool = False,
        shape_cap: int = DEFAULT_SHAPE_CAP,
        stretch_cap: int = DEFAULT_STRETCH_CAP,
        shape_filter: Sequence[str] = (),
        capture_events: bool = False,
    ):
        if initial.size != n:
            raise ValueError("initial matching size mismatch")
        self.n = n
        self.level = 0
        self.track_shapes = track_shapes
        self.shape_cap = shape_cap
        self.stretch_cap = stretch_cap
        self.capture_events = capture_events
        self.loop_events: list[LoopEvent] = []

        self.pairing: list[int] = list(initial.partner)
        self.string_row = UNMATCHED
        self.sv = [0] * n  # sling vertex counts, mirrored on both endpoints
        self.sa = [0] * n  # sling across-edge counts
        self.sb = [0] * n  # sling bend-edge counts
        self.sl = [0] * n  # sling leftmost levels
        self.tags_of: list[Optional[dict[int, int]]] = [None] * n
        self.pverts_of: list = [None] * n  # per-sling (level, row) paths
        self.players_of: list = [None] * n  # per-sling edge layers
        self.over_of = [False] * n
        for r, p in enumerate(initial.partner):
            if p == UNMATCHED:
                self.string_row = r
            elif r < p:
                self.sv[r] = self.sv[p] = 2
                self.sb[r] = self.sb[p] = 1
                if track_shapes:
                    path = [(0, r), (0, p)]
                    self.pverts_of[r] = self.pverts_of[p] = path
                    self.players_of[r] = self.players_of[p] = [0]
        if (self.string_row != UNMATCHED) != (n % 2 == 1):
            raise ValueError("initial matching parity does not match n")

        # running totals
        self.loops = 0
        self.loop_verts = 0
        self.resets = 0
        self.last_reset_level = 0
        self.string_verts = 1 if n % 2 else 0
        self.string_across = 0
        self.string_bends = 0
        self.absorbed_total = 0
        self.steps = 0
        self.last_absorbed = 0
        self.last_string_added = 0
        self.reset_intervals: dict[int, int] = {}
        self.shape_counts: dict[str, int] = {}
        self.weak_counts: dict[tuple[int, ...], int] = {}
        self.loop_size_hist: dict[int, int] = {}

        # renewal-block accumulators
        self.shape_filter = tuple(shape_filter)
        self._block_n = 0
        self._block_sr = 0
        self._block_srr = 0
        nkeys = 4 + len(self.shape_filter)
        self._block_sz = [0] * nkeys
        self._block_szz = [0] * nkeys
        self._block_szr = [0] * nkeys
        self._block_start = [0] * nkeys

        # probes
        self.probing = False
        self.probe_base: dict[int, int] = {}
        self.probe_created: dict[int, int] = {}
        self.probe_kind: dict[int, str] = {}
        self.v_results: dict[int, int] = {}
        self.e_results: dict[int, int] = {}
        self._pending_e_pid: Optional[int] = None

    # -- probes ---------------------------------------------------------

    def request_e_probe(self, pid: int) -> None:
        """Tag the slings extended by the NEXT advance; call before it."""
        self.probing = True
        self.probe_base[pid] = 1
        self.probe_created[pid] = self.level + 1
        self.probe_kind[pid] = "E"
        self._pending_e_pid = pid

    def add_v_probe(self, pid: int) -> None:
        """Probe the current level's string occupancy; call after advance."""
        self.probing = True
        self.probe_base[pid] = 1
        self.probe_created[pid] = self.level
        self.probe_kind[pid] = "V"
        for r, p in enumerate(self.pairing):
            if p > r:
                tg = self.tags_of[r]
                if tg is None:
                    tg = {pid: 2}
                    self.tags_of[r] = tg
                    self.tags_of[p] = tg
                else:
                    tg[pid] = tg.get(pid, 0) + 2

    def pending_probes(self) -> int:
        return len(self.probe_base)

    # -- block bookkeeping ------------------------------------------------

    def _current_block_values(self) -> list[int]:
        vals = [self.loops, self.string_verts, self.string_across, self.string_bends]
        for w in self.shape_filter:
            vals.append(self.shape_counts.get(w, 0))
        return vals

    def _on_reset(self, u: int) -> None:
        r = u - self.last_reset_level
        self.resets += 1
        self.reset_intervals[r] = self.reset_intervals.get(r, 0) + 1
        self.last_reset_level = u
        self._block_n += 1
        self._block_sr += r
        self._block_srr += r * r
        vals = self._current_block_values()
        start = self._block_start
        sz, szz, szr = self._block_sz, self._block_szz, self._block_szr
        for i, v in enumerate(vals):
            z = v - start[i]
            sz[i] += z
            szz[i] += z * z
            szr[i] += z * r
        self._block_start = vals
        # every probe issued before this step is now fully resolved
        if self.probe_base:
            done = [p for p, c in self.probe_created.items() if c < u]
            for pid in done:
                val = self.probe_base.pop(pid)
                kind = self.probe_kind.pop(pid)
                self.probe_created.pop(pid)
                hist = self.v_results if kind == "V" else self.e_results
                hist[val] = hist.get(val, 0) + 1

    # -- stepping ---------------------------------------------------------

    def advance(self, layer: Sequence[int]) -> bool:
        """Consume one layer (partner list on 2n points, old level first).

        Returns the reset flag; detailed per-step events are available via
        capture_events and the running counters.
        """
        if self.track_shapes:
            return self._advance_shapes(layer)
        return self._advance_fast(layer)

    def _advance_fast(self, layer: Sequence[int]) -> bool:
        n = self.n
        pairing = self.pairing
        string_row = self.string_row
        sv, sa, sb, sl = self.sv, self.sa, self.sb, self.sl
        probing = self.probing
        tags_of = self.tags_of
        u = self.level + 1
        epid = self._pending_e_pid
        self._pending_e_pid = None

        across_cnt = 0
        for x in range(n):
            if layer[x] >= n:
                across_cnt += 1

        new_pairing = [UNMATCHED] * n
        nsv = [0] * n
        nsa = [0] * n
        nsb = [0] * n
        nsl = [0] * n
        ntags: list[Optional[dict[int, int]]] = [None] * n if probing else tags_of
        assigned = [False] * n
        visited = [False] * n
        new_string_row = UNMATCHED
        absorbed_count = 0
        string_added = 0

        for y in range(n):
            if assigned[y]:
                continue
            assigned[y] = True
            p = layer[n + y]
            if p >= n:
                y2 = p - n
                assigned[y2] = True
                new_pairing[y] = y2
                new_pairing[y2] = y
                nsv[y] = nsv[y2] = 2
                nsb[y] = nsb[y2] = 1
                nsl[y] = nsl[y2] = u
                continue
            acc_v = acc_a = acc_b = k = 0
            lm = u
            tag_acc: Optional[dict[int, int]] = None
            cur = p
            while True:
                visited[cur] = True
                if cur == string_row:
                    string_added = acc_v + 1
                    self.string_verts += string_added
                    self.string_across += acc_a + 1
                    self.string_bends += acc_b + k
                    absorbed_count = k
                    new_string_row = y
                    if tag_acc:
                        base = self.probe_base
                        for pid, w in tag_acc.items():
                            base[pid] = base.get(pid, 0) + w
                    break
                other = pairing[cur]
                visited[other] = True
                acc_v += sv[cur]
                acc_a += sa[cur]
                acc_b += sb[cur]
                if sl[cur] < lm:
                    lm = sl[cur]
                if probing:
                    tg = tags_of[cur]
                    if tg:
                        if tag_acc is None:
                            tag_acc = dict(tg)
                        else:
                            for pid, w in tg.items():
                                tag_acc[pid] = tag_acc.get(pid, 0) + w
                k += 1
                nxt = layer[other]
                if nxt >= n:
                    y2 = nxt - n
                    assigned[y2] = True
                    new_pairing[y] = y2
                    new_pairing[y2] = y
                    nsv[y] = nsv[y2] = acc_v + 2
                    nsa[y] = nsa[y2] = acc_a + 2
                    nsb[y] = nsb[y2] = acc_b + k - 1
                    nsl[y] = nsl[y2] = lm
                    if probing:
                        if epid is not None:
                            if tag_acc is None:
                                tag_acc = {epid: 2}
                            else:
                                tag_acc[epid] = tag_acc.get(epid, 0) + 2
                        if tag_acc:
                            ntags[y] = ntags[y2] = tag_acc
                    break
                cur = nxt

        last_reset = self.last_reset_level
        for x in range(n):
            if visited[x] or pairing[x] < 0:
                continue
            acc_v = 0
            lm = u
            cur = x
            while not visited[cur]:
                visited[cur] = True
                other = pairing[cur]
                visited[other] = True
                acc_v += sv[cur]
                if sl[cur] < lm:
                    lm = sl[cur]
                cur = layer[other]
            if lm < last_reset:
                raise RuntimeError(
                    f"loop spanning a reset: leftmost level {lm} < "
                    f"last reset {last_reset}"
                )
            self.loops += 1
            self.loop_verts += acc_v
            if self.capture_events:
                self.loop_events.append(
                    LoopEvent(u, lm, acc_v, None, None, False)
                )

        self.pairing = new_pairing
        self.sv, self.sa, self.sb, self.sl = nsv, nsa, nsb, nsl
        if probing:
            self.tags_of = ntags
        self.string_row = new_string_row
        self.level = u
        self.steps += 1
        self.absorbed_total += absorbed_count
        self.last_absorbed = absorbed_count
        self.last_string_added = string_added
        is_reset = across_cnt == (1 if n % 2 else 0)
        if is_reset:
            self._on_reset(u)
        return is_reset

    def _advance_shapes(self, layer: Sequence[int]) -> bool:
        n = self.n
        pairing = self.pairing
        string_row = self.string_row
        sv, sa, sb, sl = self.sv, self.sa, self.sb, self.sl
        pverts_of, players_of, over_of = self.pverts_of, self.players_of, self.over_of
        probing = self.probing
        tags_of = self.tags_of
        u = self.level + 1
        epid = self._pending_e_pid
        self._pending_e_pid = None

        across_cnt = 0
        for x in range(n):
            if layer[x] >= n:
                across_cnt += 1

        new_pairing = [UNMATCHED] * n
        nsv = [0] * n
        nsa = [0] * n
        nsb = [0] * n
        nsl = [0] * n
        npverts: list = [None] * n
        nplayers: list = [None] * n
        nover = [False] * n
        ntags: list[Optional[dict[int, int]]] = [None] * n
        assigned = [False] * n
        visited = [False] * n
        new_string_row = UNMATCHED
        absorbed_count = 0
        string_added = 0

        for y in range(n):
            if assigned[y]:
                continue
            assigned[y] = True
            p = layer[n + y]
            if p >= n:
                y2 = p - n
                assigned[y2] = True
                new_pairing[y] = y2
                new_pairing[y2] = y
                nsv[y] = nsv[y2] = 2
                nsb[y] = nsb[y2] = 1
                nsl[y] = nsl[y2] = u
                path = [(u, y), (u, y2)]
                npverts[y] = npverts[y2] = path
                nplayers[y] = nplayers[y2] = [u]
                continue
            pieces: list[int] = []  # enter rows, walk order
            acc_v = acc_a = acc_b = 0
            lm = u
            over = False
            tag_acc: Optional[dict[int, int]] = None
            cur = p
            while True:
                visited[cur] = True
                if cur == string_row:
                    k = len(pieces)
                    string_added = acc_v + 1
                    self.string_verts += string_added
                    self.string_across += acc_a + 1
                    self.string_bends += acc_b + k
                    absorbed_count = k
                    new_string_row = y
                    if tag_acc:
                        base = self.probe_base
                        for pid, w in tag_acc.items():
                            base[pid] = base.get(pid, 0) + w
                    break
                other = pairing[cur]
                visited[other] = True
                pieces.append(cur)
                acc_v += sv[cur]
                acc_a += sa[cur]
                acc_b += sb[cur]
                if sl[cur] < lm:
                    lm = sl[cur]
                over = over or over_of[cur]
                if probing:
                    tg = tags_of[cur]
                    if tg:
                        if tag_acc is None:
                            tag_acc = dict(tg)
                        else:
                            for pid, w in tg.items():
                                tag_acc[pid] = tag_acc.get(pid, 0) + w
                nxt = layer[other]
                if nxt >= n:
                    y2 = nxt - n
                    assigned[y2] = True
                    new_pairing[y] = y2
                    new_pairing[y2] = y
                    verts = acc_v + 2
                    k = len(pieces)
                    nsv[y] = nsv[y2] = verts
                    nsa[y] = nsa[y2] = acc_a + 2
                    nsb[y] = nsb[y2] = acc_b + k - 1
                    nsl[y] = nsl[y2] = lm
                    if over or verts > self.shape_cap or u - lm > self.stretch_cap:
                        nover[y] = nover[y2] = True
                    else:
                        path = [(u, y)]
                        lay = [u]
                        for er in pieces:
                            seg = pverts_of[er]
                            seg_lay = players_of[er]
                            if seg[0][1] == er:
                                path.extend(seg)
                                lay.extend(seg_lay)
                            else:
                                path.extend(reversed(seg))
                                lay.extend(reversed(seg_lay))
                            lay.append(u)
                        path.append((u, y2))
                        npverts[y] = npverts[y2] = path
                        nplayers[y] = nplayers[y2] = lay
                    if probing:
                        if epid is not None:
                            if tag_acc is None:
                                tag_acc = {epid: 2}
                            else:
                                tag_acc[epid] = tag_acc.get(epid, 0) + 2
                        if tag_acc:
                            ntags[y] = ntags[y2] = tag_acc
                    break
                cur = nxt

        last_reset = self.last_reset_level
        for x in range(n):
            if visited[x] or pairing[x] < 0:
                continue
            pieces = []
            acc_v = 0
            lm = u
            over = False
            cur = x
            while not visited[cur]:
                visited[cur] = True
                other = pairing[cur]
                visited[other] = True
                pieces.append(cur)
                acc_v += sv[cur]
                if sl[cur] < lm:
                    lm = sl[cur]
                over = over or over_of[cur]
                cur = layer[other]
            if lm < last_reset:
                raise RuntimeError(
                    f"loop spanning a reset: leftmost level {lm} < "
                    f"last reset {last_reset}"
                )
            self.loops += 1
            self.loop_verts += acc_v
            self.loop_size_hist[acc_v] = self.loop_size_hist.get(acc_v, 0) + 1
            word = weak = None
            if over:
                self.shape_counts[OVERFLOW_KEY] = (
                    self.shape_counts.get(OVERFLOW_KEY, 0) + 1
                )
            else:
                verts: list[tuple[int, int]] = []
                lay: list[int] = []
                for er in pieces:
                    seg = pverts_of[er]
                    seg_lay = players_of[er]
                    if seg[0][1] == er:
                        verts.extend(seg)
                        lay.extend(seg_lay)
                    else:
                        verts.extend(reversed(seg))
                        lay.extend(reversed(seg_lay))
                    lay.append(u)
                word, weak = _canonical_loop_word(verts, lay)
                self.shape_counts[word] = self.shape_counts.get(word, 0) + 1
                self.weak_counts[weak] = self.weak_counts.get(weak, 0) + 1
            if self.capture_events:
                self.loop_events.append(
                    LoopEvent(u, lm, acc_v, word, weak, over)
                )

        self.pairing = new_pairing
        self.sv, self.sa, self.sb, self.sl = nsv, nsa, nsb, nsl
        self.pverts_of, self.players_of, self.over_of = npverts, nplayers, nover
        self.tags_of = ntags
        self.string_row = new_string_row
        self.level = u
        self.steps += 1
        self.absorbed_total += absorbed_count
        self.last_absorbed = absorbed_count
        self.last_string_added = string_added
        is_reset = across_cnt == (1 if n % 2 else 0)
        if is_reset:
            self._on_reset(u)
        return is_reset

    # -- invariants -------------------------------------------------------

    def check_conservation(self) -> None:
        """Vertex partition: string + live slings + emitted loops cover
        every vertex up to the current level exactly once."""
        sling_verts = sum(
            self.sv[r] for r, p in enumerate(self.pairing) if p > r
        )
        total = self.string_verts + sling_verts + self.loop_verts
        expected = self.n * (self.level + 1)
        if total != expected:
            raise AssertionError(
                f"vertex conservation violated: {total} != {expected}"
            )


# -- configuration, reports, drivers ---------------------------------------


@dataclass(frozen=True)
class SimConfig:
    """One Monte Carlo experiment; fully determines its output with `seed`."""

    n: int
    t: int
    seed: int | str = 0
    replicas: int = 1
    trackers: tuple[str, ...] = ("loops", "resets")
    shape_filter: tuple[str, ...] = ()
    shape_cap: int = DEFAULT_SHAPE_CAP
    stretch_cap: int = DEFAULT_STRETCH_CAP
    probe_count: int = 0
    probe_spacing: int = 0
    burn_in: int = 64
    workers: int = 1

    def validate(self) -> None:
        if self.n < 1:
            raise ValueError("n must be positive")
        if self.t < 1:
            raise ValueError("t must be positive")
        if self.replicas < 1:
            raise ValueError("replicas must be positive")
        unknown = set(self.trackers) - set(TRACKERS)
        if unknown:
            raise ValueError(f"unknown trackers: {sorted(unknown)}")
        if ("transverse" in self.trackers or "local" in self.trackers) and self.n % 2 == 0:
            raise ValueError("transverse/local trackers require odd n")
        from .shapes import validate_strong  # local import to keep module load light

        for w in self.shape_filter:
            if len(w) > self.shape_cap:
                raise ValueError(f"shape filter word {w} longer than shape cap")
            if not validate_strong(w, self.n):
                raise ValueError(f"{w!r} is not a valid strong shape for n={self.n}")

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "t": self.t,
            "seed": self.seed,
            "replicas": self.replicas,
            "trackers": list(self.trackers),
            "shape_filter": list(self.shape_filter),
            "shape_cap": self.shape_cap,
            "stretch_cap": self.stretch_cap,
            "probe_count": self.probe_count,
            "probe_spacing": self.probe_spacing,
            "burn_in": self.burn_in,
            "workers": self.workers,
        }


_BLOCK_KEYS = ("loops", "transverse", "across", "bends")


@dataclass
class StatsReport:
    """Mergeable run summary: all fields are integer tallies or histograms,
    so merging reports of two runs equals the report of their concatenation."""

    config: dict
    replicas: int
    totals: dict[str, int]
    hists: dict[str, dict[int, int]]
    shape_counts: dict[str, int]
    weak_counts: dict[str, int]
    block_r: list[int]              # [blocks, sum r, sum r^2]
    blocks: dict[str, list[int]]    # key -> [sum z, sum z^2, sum z*r]
    finals: dict[str, list[int]]    # key -> [count, s1, s2, s3, s4]

    def merge(self, other: "StatsReport") -> "StatsReport":
        if self.config != other.config:
            raise ValueError("cannot merge reports with different configs")

        def add_hist(a: dict, b: dict) -> dict:
            out = dict(a)
            for k, v in b.items():
                out[k] = out.get(k, 0) + v
            return out

        return StatsReport(
            config=dict(self.config),
            replicas=self.replicas + other.replicas,
            totals=add_hist(self.totals, other.totals),
            hists={
                k: add_hist(self.hists.get(k, {}), other.hists.get(k, {}))
                for k in set(self.hists) | set(other.hists)
            },
            shape_counts=add_hist(self.shape_counts, other.shape_counts),
            weak_counts=add_hist(self.weak_counts, other.weak_counts),
            block_r=[a + b for a, b in zip(self.block_r, other.block_r)],
            blocks={
                k: [
                    a + b
                    for a, b in zip(
                        self.blocks.get(k, [0, 0, 0]), other.blocks.get(k, [0, 0, 0])
                    )
                ]
                for k in set(self.blocks) | set(other.blocks)
            },
            finals={
                k: [
                    a + b
                    for a, b in zip(
                        self.finals.get(k, [0] * 5), other.finals.get(k, [0] * 5)
                    )
                ]
                for k in set(self.finals) | set(other.finals)
            },
        )

    # -- estimators ------------------------------------------------------

    def rate(self, key: str) -> tuple[float, float]:
        """Regenerative estimate of a per-layer rate and its standard error.

        Uses only complete renewal blocks: rate = sum z / sum r, and the
        block residuals z - rate*r estimate the CLT variance per layer.
        """
        nblk, sr, _srr = self.block_r
        if nblk < 2 or sr <= 0:
            raise ValueError(f"not enough renewal blocks to estimate {key!r}")
        sz, szz, szr = self.blocks[key]
        rate = sz / sr
        ssd = szz - 2.0 * rate * szr + rate * rate * self.block_r[2]
        se = (max(ssd, 0.0) ** 0.5) / sr
        return rate, se

    def final_moments(self, key: str) -> dict[str, float]:
        """Across-replica sample moments of a final statistic."""
        cnt, s1, s2, s3, s4 = self.finals[key]
        if cnt < 2:
            raise ValueError("need at least two replicas for moments")
        mean = s1 / cnt
        m2 = s2 / cnt - mean**2
        m3 = s3 / cnt - 3 * mean * (s2 / cnt) + 2 * mean**3
        m4 = (
            s4 / cnt
            - 4 * mean * (s3 / cnt)
            + 6 * mean**2 * (s2 / cnt)
            - 3 * mean**4
        )
        out = {"count": float(cnt), "mean": mean, "variance": m2 * cnt / (cnt - 1)}
        if m2 > 0:
            out["skewness"] = m3 / m2**1.5
            out["excess_kurtosis"] = m4 / (m2 * m2) - 3.0
        return out

    # -- serialization ---------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "replicas": self.replicas,
            "totals": dict(sorted(self.totals.items())),
            "hists": {
                k: {str(i): c for i, c in sorted(v.items())}
                for k, v in sorted(self.hists.items())
            },
            "shape_counts": dict(sorted(self.shape_counts.items())),
            "weak_counts": dict(sorted(self.weak_counts.items())),
            "block_r": list(self.block_r),
            "blocks": {k: list(v) for k, v in sorted(self.blocks.items())},
            "finals": {k: list(v) for k, v in sorted(self.finals.items())},
        }

    def to_csv_rows(self) -> list[list]:
        rows: list[list] = [["section", "key", "subkey", "value"]]
        for k, v in sorted(self.totals.items()):
            rows.append(["totals", k, "", v])
        for k, hist in sorted(self.hists.items()):
            for i, c in sorted(hist.items()):
                rows.append(["hist", k, i, c])
        for k, c in sorted(self.shape_counts.items()):
            rows.append(["shape_counts", k, "", c])
        for k, c in sorted(self.weak_counts.items()):
            rows.append(["weak_counts", k, "", c])
        rows.append(["blocks", "renewals", "count", self.block_r[0]])
        rows.append(["blocks", "renewals", "sum_r", self.block_r[1]])
        rows.append(["blocks", "renewals", "sum_r2", self.block_r[2]])
        for k, (sz, szz, szr) in sorted(self.blocks.items()):
            rows.append(["blocks", k, "sum_z", sz])
            rows.append(["blocks", k, "sum_z2", szz])
            rows.append(["blocks", k, "sum_zr", szr])
        for k, sums in sorted(self.finals.items()):
            for name, val in zip(("count", "s1", "s2", "s3", "s4"), sums):
                rows.append(["finals", k, name, val])
        return rows


def _report_from_engine(engine: Engine, config: SimConfig) -> StatsReport:
    totals = {
        "steps": engine.steps,
        "loops": engine.loops,
        "loop_vertices": engine.loop_verts,
        "resets": engine.resets,
        "string_vertices": engine.string_verts,
        "string_across": engine.string_across,
        "string_bends": engine.string_bends,
        "slings_absorbed": engine.absorbed_total,
    }
    hists: dict[str, dict[int, int]] = {"reset_intervals": dict(engine.reset_intervals)}
    if engine.v_results or engine.e_results:
        hists["V"] = dict(engine.v_results)
        hists["E"] = dict(engine.e_results)
        totals["probes_v"] = sum(engine.v_results.values())
        totals["probes_e"] = sum(engine.e_results.values())
    if engine.track_shapes:
        hists["loop_sizes"] = dict(engine.loop_size_hist)

    blocks: dict[str, list[int]] = {}
    for i, key in enumerate(_BLOCK_KEYS + tuple(f"shape:{w}" for w in engine.shape_filter)):
        blocks[key] = [engine._block_sz[i], engine._block_szz[i], engine._block_szr[i]]

    final_values = {
        "loops": engine.loops,
        "transverse": engine.string_verts,
        "across": engine.string_across,
        "bends": engine.string_bends,
    }
    for w in engine.shape_filter:
        final_values[f"shape:{w}"] = engine.shape_counts.get(w, 0)
    finals = {
        k: [1, v, v**2, v**3, v**4] for k, v in final_values.items()
    }

    return StatsReport(
        config=config.as_dict(),
        replicas=1,
        totals=totals,
        hists=hists,
        shape_counts=dict(engine.shape_counts),
        weak_counts={",".join(map(str, k)): v for k, v in engine.weak_counts.items()},
        block_r=[engine._block_n, engine._block_sr, engine._block_srr],
        blocks=blocks,
        finals=finals,
    )


def replica_rng(seed: int | str, index: int) -> random.Random:
    """Independent, reproducible stream for one replica."""
    return random.Random(f"{seed}:{index}")


def _run_replica(config: SimConfig, index: int) -> StatsReport:
    rng = replica_rng(config.seed, index)
    initial = sample_initial_partial(config.n, rng)
    engine = Engine(
        config.n,
        initial,
        track_shapes="shapes" in config.trackers,
        shape_cap=config.shape_cap,
        stretch_cap=config.stretch_cap,
        shape_filter=config.shape_filter,
    )
    n2 = 2 * config.n
    probing = "local" in config.trackers and config.probe_count > 0
    spacing = max(1, config.probe_spacing)
    next_probe = config.burn_in if probing else -1
    issued = 0
    pid = 0
    step_no = 0
    while step_no < config.t or (probing and engine.pending_probes()):
        step_no += 1
        do_probe = probing and step_no == next_probe and issued < config.probe_count
        if do_probe:
            engine.request_e_probe(pid)
        engine.advance(sample_partner_list(n2, rng))
        if do_probe:
            engine.add_v_probe(pid + 1)
            pid += 2
            issued += 1
            next_probe += spacing
    return _report_from_engine(engine, config)


def run(config: SimConfig) -> StatsReport:
    """Run all replicas and merge their reports (deterministic in config).

    With workers > 1 the replicas run in a process pool; merging happens in
    replica order either way, so the output is identical.
    """
    config.validate()
    if config.workers > 1 and config.replicas > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            reports = list(
                pool.map(_run_replica, [config] * config.replicas, range(config.replicas))
            )
    else:
        reports = [_run_replica(config, i) for i in range(config.replicas)]
    report = reports[0]
    for rep in reports[1:]:
        report = report.merge(rep)
    return report


def sample_local_laws(config: SimConfig) -> StatsReport:
    """Sample the string's per-level vertex counts (V) and per-layer across
    counts (E) with lazily resolved probes.

    A probe's tally is final at the first reset after it; probes are spaced
    at least one expected renewal apart and skip a burn-in prefix.
    """
    if config.n % 2 == 0:
        raise ValueError("local laws require odd n")
    if config.probe_count < 1:
        raise ValueError("probe_count must be positive")
    from .theory import reset_probability

    spacing = config.probe_spacing
    if spacing <= 0:
        p0 = reset_probability(config.n)
        spacing = -(-p0.denominator // p0.numerator)  # ceil(1/p0)
    t = config.burn_in + spacing * (config.probe_count + 1)
    cfg = SimConfig(
        n=config.n,
        t=t,
        seed=config.seed,
        replicas=config.replicas,
        trackers=tuple(sorted(set(config.trackers) | {"local", "transverse", "resets"})),
        shape_filter=config.shape_filter,
        shape_cap=config.shape_cap,
        stretch_cap=config.stretch_cap,
        probe_count=config.probe_count,
        probe_spacing=spacing,
        burn_in=config.burn_in,
        workers=config.workers,
    )
    cfg.validate()
    report: Optional[StatsReport] = None
    for i in range(cfg.replicas):
        rep = _run_replica(cfg, i)
        report = rep if report is None else report.merge(rep)
    assert report is not None
    return report


# -- functional single-step API --------------------------------------------


class Frontier:
    """Snapshot of the sling process at one level.

    Thin wrapper over the engine for step-at-a-time use; the bulk driver
    `run` works on the engine directly.
    """

    def __init__(self, engine: Engine):
        self._engine = engine

    @property
    def n(self) -> int:
        return self._engine.n

    @property
    def level(self) -> int:
        return self._engine.level

    @property
    def pairing(self) -> tuple[int, ...]:
        return tuple(self._engine.pairing)

    @property
    def transverse_endpoint(self) -> Optional[int]:
        r = self._engine.string_row
        return None if r == UNMATCHED else r

    @property
    def sling_count(self) -> int:
        return sum(1 for r, p in enumerate(self._engine.pairing) if p > r)

    def sling_sizes(self) -> list[int]:
        eng = self._engine
        return sorted(eng.sv[r] for r, p in enumerate(eng.pairing) if p > r)

    def copy(self) -> "Frontier":
        eng = self._engine
        new = Engine.__new__(Engine)
        new.__dict__.update(eng.__dict__)
        new.pairing = list(eng.pairing)
        new.sv = list(eng.sv)
        new.sa = list(eng.sa)
        new.sb = list(eng.sb)
        new.sl = list(eng.sl)
        new.over_of = list(eng.over_of)
        # edge paths are never mutated after construction: share them
        new.pverts_of = list(eng.pverts_of)
        new.players_of = list(eng.players_of)
        # tag dicts are mutable and shared between a sling's two rows
        tagmap: dict[int, dict] = {}
        new.tags_of = [
            None if t is None else tagmap.setdefault(id(t), dict(t))
            for t in eng.tags_of
        ]
        new.reset_intervals = dict(eng.reset_intervals)
        new.shape_counts = dict(eng.shape_counts)
        new.weak_counts = dict(eng.weak_counts)
        new.loop_size_hist = dict(eng.loop_size_hist)
        new.loop_events = list(eng.loop_events)
        new._block_sz = list(eng._block_sz)
        new._block_szz = list(eng._block_szz)
        new._block_szr = list(eng._block_szr)
        new._block_start = list(eng._block_start)
        new.probe_base = dict(eng.probe_base)
        new.probe_created = dict(eng.probe_created)
        new.probe_kind = dict(eng.probe_kind)
        new.v_results = dict(eng.v_results)
        new.e_results = dict(eng.e_results)
        return Frontier(new)


def init_frontier(
    n: int,
    rng: Optional[random.Random] = None,
    initial: Optional[PartialMatching] = None,
    track_shapes: bool = True,
    shape_cap: int = DEFAULT_SHAPE_CAP,
    stretch_cap: int = DEFAULT_STRETCH_CAP,
) -> Frontier:
    """Frontier of a fresh modified diagram (equivalently, post-reset state)."""
    if initial is None:
        if rng is None:
            raise ValueError("need an rng or an explicit initial matching")
        initial = sample_initial_partial(n, rng)
    return Frontier(
        Engine(
            n,
            initial,
            track_shapes=track_shapes,
            shape_cap=shape_cap,
            stretch_cap=stretch_cap,
            capture_events=True,
        )
    )


def step(frontier: Frontier, layer) -> tuple[Frontier, StepEvents]:
    """Apply one layer, returning the advanced frontier and its events.

    The input frontier is left untouched.  `layer` is a PerfectMatching or
    a raw partner list on 2n points (old level first).
    """
    partner = layer.partner if hasattr(layer, "partner") else layer
    if len(partner) != 2 * frontier.n:
        raise ValueError("layer size mismatch")
    new = frontier.copy()
    eng = new._engine
    before = len(eng.loop_events)
    across = sum(1 for x in range(eng.n) if partner[x] >= eng.n)
    is_reset = eng.advance(partner)
    events = StepEvents(
        is_reset=is_reset,
        layer_across=across,
        loops_closed=tuple(eng.loop_events[before:]),
        slings_absorbed_to_string=eng.last_absorbed,
        string_added_vertices=eng.last_string_added,
    )
    return new, events
