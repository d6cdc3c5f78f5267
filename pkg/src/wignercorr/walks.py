"""Closed walks over reduced indices.

A trace ``tr A^k`` expands into a sum over index sequences.  Relabelling the
indices by order of first appearance (restricted growth) groups the labelled
sequences into classes; a class with ``V`` distinct labels stands for
``N_V`` labelled sequences.  Products of traces share one label space, so
the second walk may start on any vertex already used or on a fresh one.

The depth-first generator below is the single source of walks for the whole
package.  With ``even_only=True`` it prunes any branch that can no longer
run every edge an even number of times; those branches have zero
expectation for a symmetric entry law.
"""

from __future__ import annotations

import json
import re
from collections import Counter
from dataclasses import dataclass
from functools import cached_property
from typing import Iterator, Sequence

from .errors import DegreeTooLarge

DEFAULT_CAP = 16


def _check_cap(total: int, cap: int | None) -> None:
    cap = DEFAULT_CAP if cap is None else cap
    if total > cap:
        raise DegreeTooLarge(
            f"total degree {total} exceeds enumeration cap {cap}; raise the cap explicitly"
        )


def _edge(a: int, b: int) -> tuple[int, int]:
    return (a, b) if a < b else (b, a)


def _fmt_step(a: int, b: int) -> str:
    return f"e{a}{b}" if a < 10 and b < 10 else f"e{a},{b}"


_STEP = re.compile(r"e(\d+),(\d+)|e(\d)(\d)")


@dataclass(frozen=True)
class Walk:
    """Closed walk given by its steps ``((r, s), ...)`` between reduced indices."""

    steps: tuple[tuple[int, int], ...]

    def __post_init__(self):
        steps = tuple((int(a), int(b)) for a, b in self.steps)
        object.__setattr__(self, "steps", steps)
        for (a, b), (c, _) in zip(steps, steps[1:]):
            if b != c:
                raise ValueError("consecutive steps must share a vertex")
        for a, b in steps:
            if a == b:
                raise ValueError("self-steps are not allowed (zero diagonal)")
        if steps and steps[0][0] != steps[-1][1]:
            raise ValueError("walk is not closed")

    @classmethod
    def from_vertices(cls, verts: Sequence[int]) -> "Walk":
        return cls(tuple(zip(verts[:-1], verts[1:])))

    @classmethod
    def parse(cls, text: str) -> "Walk":
        steps = []
        for tok in text.split():
            m = _STEP.fullmatch(tok)
            if not m:
                raise ValueError(f"bad step {tok!r}")
            a, b = (m.group(1), m.group(2)) if m.group(1) else (m.group(3), m.group(4))
            steps.append((int(a), int(b)))
        return cls(tuple(steps))

    @property
    def vertices(self) -> tuple[int, ...]:
        if not self.steps:
            return ()
        return (self.steps[0][0],) + tuple(b for _, b in self.steps)

    @property
    def start(self) -> int:
        return self.steps[0][0]

    def __len__(self) -> int:
        return len(self.steps)

    def edges(self) -> Counter:
        return Counter(_edge(a, b) for a, b in self.steps)

    def __str__(self) -> str:
        return " ".join(_fmt_step(a, b) for a, b in self.steps)


@dataclass(frozen=True)
class PathProfile:
    """Bookkeeping for a path: vertices, edges, loops and run counts.

    ``L`` sums ``E_c - V_c + 1`` over connected components of the walk
    graph, so ``V = E - L + components``; a single trace is always connected.
    """

    V: int
    E: int
    L: int
    components: int
    edge_multiplicities: dict[tuple[int, int], int]
    n_h: dict[int, int]

    @property
    def is_tree(self) -> bool:
        return self.L == 0

    def to_json(self) -> dict:
        return {
            "V": self.V,
            "E": self.E,
            "L": self.L,
            "components": self.components,
            "edge_multiplicities": [
                {"edge": list(e), "count": c} for e, c in sorted(self.edge_multiplicities.items())
            ],
            "n_h": {str(h): c for h, c in sorted(self.n_h.items())},
        }


@dataclass(frozen=True)
class Path:
    """One walk per trace, sharing a single restricted-growth label space."""

    walks: tuple[Walk, ...]

    def __post_init__(self):
        object.__setattr__(self, "walks", tuple(self.walks))
        seen = -1
        for w in self.walks:
            for v in w.vertices:
                if v > seen + 1:
                    raise ValueError("labels do not follow restricted growth")
                seen = max(seen, v)
        if self.walks and self.walks[0].vertices and self.walks[0].start != 0:
            raise ValueError("the first walk must start at label 0")

    @classmethod
    def parse(cls, text: str) -> "Path":
        return cls(tuple(Walk.parse(part) for part in text.split(";")))

    @property
    def lengths(self) -> tuple[int, ...]:
        return tuple(len(w) for w in self.walks)

    def __str__(self) -> str:
        return "; ".join(str(w) for w in self.walks)

    @cached_property
    def profile(self) -> PathProfile:
        return profile(self)


def canonicalize(sequences: Sequence[Sequence[int]]) -> tuple[tuple[int, ...], ...]:
    """Relabel vertex sequences by first appearance across all sequences."""
    relabel: dict[int, int] = {}
    out = []
    for seq in sequences:
        row = []
        for v in seq:
            if v not in relabel:
                relabel[v] = len(relabel)
            row.append(relabel[v])
        out.append(tuple(row))
    return tuple(out)


class _State:
    """Mutable DFS state shared with consumers at each completed path."""

    __slots__ = ("seqs", "total", "per_walk", "nv", "odd")

    def __init__(self, r: int):
        self.seqs: list[list[int]] = [[] for _ in range(r)]
        self.total: dict[tuple[int, int], int] = {}
        self.per_walk: list[dict[tuple[int, int], int]] = [{} for _ in range(r)]
        self.nv = 0
        self.odd = 0


def _dfs(lengths: Sequence[int], even_only: bool, first_walk: Sequence[int] | None = None) -> Iterator[_State]:
    """Yield the shared state once for every complete path.

    ``first_walk`` pins the vertex sequence of trace 0, which is how the
    enumeration is split among workers.
    """
    r = len(lengths)
    total_steps = sum(lengths)
    st = _State(r)
    if r == 0 or any(k < 1 for k in lengths):
        return
    if even_only and total_steps % 2:
        return

    def add(t: int, a: int, b: int) -> None:
        e = _edge(a, b)
        c = st.total.get(e, 0) + 1
        st.total[e] = c
        st.odd += 1 if c % 2 else -1
        pw = st.per_walk[t]
        pw[e] = pw.get(e, 0) + 1

    def remove(t: int, a: int, b: int) -> None:
        e = _edge(a, b)
        c = st.total[e] - 1
        if c:
            st.total[e] = c
        else:
            del st.total[e]
        st.odd += 1 if c % 2 else -1
        pw = st.per_walk[t]
        if pw[e] == 1:
            del pw[e]
        else:
            pw[e] -= 1

    def walk(t: int, i: int, left_after: int) -> Iterator[_State]:
        # i steps of trace t are done; left_after = steps in later traces
        seq = st.seqs[t]
        k = lengths[t]
        cur = seq[-1]
        start = seq[0]
        remaining = k - i
        if remaining == 1:
            cands: Sequence[int] = (start,) if cur != start else ()
        else:
            cands = range(st.nv + 1)
        for nxt in cands:
            if nxt == cur or (remaining == 2 and nxt == start):
                continue
            fresh = nxt == st.nv
            if fresh:
                st.nv += 1
            add(t, cur, nxt)
            if not even_only or st.odd <= remaining - 1 + left_after:
                seq.append(nxt)
                if remaining == 1:
                    yield from trace(t + 1)
                else:
                    yield from walk(t, i + 1, left_after)
                seq.pop()
            remove(t, cur, nxt)
            if fresh:
                st.nv -= 1

    def trace(t: int) -> Iterator[_State]:
        if t == r:
            yield st
            return
        left_after = sum(lengths[t + 1:])
        starts = (0,) if t == 0 else range(st.nv + 1)
        for s0 in starts:
            fresh = s0 == st.nv
            if fresh:
                st.nv += 1
            st.seqs[t].append(s0)
            yield from walk(t, 0, left_after)
            st.seqs[t].pop()
            if fresh:
                st.nv -= 1

    if first_walk is None:
        yield from trace(0)
        return

    # replay a pinned first walk, then continue with the remaining traces
    fw = list(first_walk)
    if len(fw) != lengths[0] + 1 or fw[0] != 0 or fw[-1] != 0:
        raise ValueError("pinned first walk has the wrong shape")
    st.seqs[0].append(0)
    st.nv = 1
    for a, b in zip(fw, fw[1:]):
        if b == st.nv:
            st.nv += 1
        add(0, a, b)
        st.seqs[0].append(b)
    if even_only and st.odd > total_steps - lengths[0]:
        return
    yield from trace(1)


def _snapshot(st: _State) -> Path:
    return Path(tuple(Walk.from_vertices(s) for s in st.seqs))


def enumerate_multi(lengths: Sequence[int], *, even_only: bool = False, cap: int | None = None) -> Iterator[Path]:
    """Every path for ``tr A^{k_1} ... tr A^{k_r}``, each exactly once.

    Order is deterministic: trace by trace, existing labels ascending, then
    the fresh label.  ``even_only`` drops paths with an edge run an odd
    number of times.
    """
    lengths = tuple(int(k) for k in lengths)
    if not lengths or any(k < 1 for k in lengths):
        raise ValueError("need at least one trace, each of length >= 1")
    _check_cap(sum(lengths), cap)
    for st in _dfs(lengths, even_only):
        yield _snapshot(st)


def enumerate_single(k: int, *, even_only: bool = False, cap: int | None = None) -> Iterator[Walk]:
    """Every closed restricted-growth walk of ``k`` steps, each exactly once."""
    for p in enumerate_multi((k,), even_only=even_only, cap=cap):
        yield p.walks[0]


def first_walk_prefixes(lengths: Sequence[int], *, even_only: bool = True) -> list[tuple[int, ...]]:
    """Vertex sequences of the first trace, used to split work among processes."""
    remaining = sum(lengths) - lengths[0]
    out = []
    for st in _dfs((lengths[0],), even_only=False):
        if even_only and st.odd > remaining:
            continue
        out.append(tuple(st.seqs[0]))
    return out


def profile(p: Path | Walk) -> PathProfile:
    """Vertex, edge and loop counts of a path."""
    if isinstance(p, Walk):
        p = Path((p,))
    mult: Counter = Counter()
    verts: set[int] = set()
    for w in p.walks:
        mult.update(w.edges())
        verts.update(w.vertices)
    # union-find over vertices for component count
    parent = {v: v for v in verts}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for a, b in mult:
        parent[find(a)] = find(b)
    comps = len({find(v) for v in verts})
    V, E = len(verts), len(mult)
    n_h = Counter(mult.values())
    return PathProfile(
        V=V,
        E=E,
        L=E - V + comps,
        components=comps,
        edge_multiplicities=dict(mult),
        n_h=dict(sorted(n_h.items())),
    )


def edge_connected_components(p: Path) -> list[tuple[int, ...]]:
    """Finest partition of trace positions (0-based) with no edge shared across blocks.

    Walks that only touch at a vertex fall in different blocks.
    """
    r = len(p.walks)
    parent = list(range(r))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    owner: dict[tuple[int, int], int] = {}
    for i, w in enumerate(p.walks):
        for e in w.edges():
            if e in owner:
                parent[find(i)] = find(owner[e])
            else:
                owner[e] = i
    blocks: dict[int, list[int]] = {}
    for i in range(r):
        blocks.setdefault(find(i), []).append(i)
    return sorted(tuple(b) for b in blocks.values())


def profile_json(p: Path) -> str:
    return json.dumps(profile(p).to_json())
