"""Discrete gradients built lower star by lower star, and their V-paths.

A gradient is a partial matching of cells with their cofaces.  Matched
pairs always share the same highest vertex, so function values never
increase along a V-path; the unmatched cells are the critical cells.
"""
from __future__ import annotations

import heapq
import itertools
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .complex import CellComplex, CellId
from .errors import CycleDetected, IndexMismatch, UnknownCell
from .field import ScalarField

_tokens = itertools.count(1)


@dataclass(frozen=True)
class CriticalCell:
    cell: CellId
    morse_index: int
    value: float

    def __str__(self):
        return f"{self.cell}"


@dataclass(frozen=True)
class VPath:
    cells: tuple[CellId, ...]

    @property
    def start(self) -> CellId:
        return self.cells[0]

    @property
    def terminal(self) -> CellId:
        return self.cells[-1]

    def __len__(self):
        return len(self.cells)


@dataclass(eq=False)
class DiscreteGradient:
    complex: CellComplex
    field: ScalarField
    # up[d][i]: index of the (d+1)-cell matched with d-cell i, or -1
    up: list[np.ndarray]
    # down[d][i]: index of the (d-1)-cell matched with d-cell i, or -1 (down[0] unused)
    down: list[np.ndarray]
    token: int = field(default_factory=lambda: next(_tokens))

    @classmethod
    def empty(cls, c: CellComplex, f: ScalarField) -> "DiscreteGradient":
        n = [c.n_cells(d) for d in range(3)]
        up = [np.full(n[0], -1, np.int64), np.full(n[1], -1, np.int64), np.full(n[2], -1, np.int64)]
        down = [np.full(n[0], -1, np.int64), np.full(n[1], -1, np.int64), np.full(n[2], -1, np.int64)]
        return cls(c, f, up, down)

    def copy(self) -> "DiscreteGradient":
        return DiscreteGradient(self.complex, self.field,
                                [a.copy() for a in self.up], [a.copy() for a in self.down])

    def touch(self):
        self.token = next(_tokens)

    def partner(self, cell: CellId) -> CellId | None:
        d, i = cell
        if self.up[d][i] >= 0:
            return CellId(d + 1, int(self.up[d][i]))
        if self.down[d][i] >= 0:
            return CellId(d - 1, int(self.down[d][i]))
        return None

    def is_critical(self, cell: CellId) -> bool:
        return self.up[cell.dim][cell.index] < 0 and self.down[cell.dim][cell.index] < 0

    def pair(self, face: CellId, coface: CellId):
        self.up[face.dim][face.index] = coface.index
        self.down[coface.dim][coface.index] = face.index

    def unpair(self, cell: CellId):
        other = self.partner(cell)
        for x in (cell, other):
            if x is not None:
                self.up[x.dim][x.index] = -1
                self.down[x.dim][x.index] = -1

    def pairs(self):
        for d in range(2):
            for i in np.flatnonzero(self.up[d] >= 0):
                yield CellId(d, int(i)), CellId(d + 1, int(self.up[d][i]))

    def critical(self) -> list[CellId]:
        out = []
        for d in range(3):
            free = (self.up[d] < 0) & (self.down[d] < 0)
            out += [CellId(d, int(i)) for i in np.flatnonzero(free)]
        return out

    def census(self) -> tuple[int, int, int]:
        return tuple(int(np.sum((self.up[d] < 0) & (self.down[d] < 0))) for d in range(3))


# --- construction ------------------------------------------------------------

def _process_lower_star(c: CellComplex, f: ScalarField, v: int):
    """Greedy matching of one lower star.  Returns (pairs, critical)."""
    return lower_star_matching(c, f.rank, v)


def lower_star_matching(c: CellComplex, rank, v: int):
    """``_process_lower_star`` driven by vertex ranks alone.

    Only the relative order of ``v`` and its neighbours matters, so callers
    scanning many nearby fields can pass cheap rank arrays.
    """
    rv = rank[v]
    cedges, ctris = c.edges, c.triangles
    ekey: dict[int, tuple[int]] = {}
    for e in c.vertex_cofaces[v]:
        a, b = cedges[e]
        r = rank[b if a == v else a]
        if r < rv:
            ekey[e] = (int(r),)
    if not ekey:
        return [], [CellId(0, v)]
    edges = list(ekey)

    tris: dict[int, list[int]] = {}
    tkey = {}
    outside: set[int] = set()
    for e in edges:
        for t in c.edge_cofaces[e]:
            if t in tris:
                tris[t].append(e)
            elif t not in outside:
                r1, r2 = (int(rank[u]) for u in ctris[t] if u != v)
                if r1 < rv and r2 < rv:
                    tris[t] = [e]
                    tkey[t] = (r1, r2) if r1 > r2 else (r2, r1)
                else:
                    outside.add(t)

    pairs: list[tuple[CellId, CellId]] = []
    crit: list[CellId] = []
    done_e: set[int] = set()
    done_t: set[int] = set()

    def unpaired(t):
        return [e for e in tris[t] if e not in done_e]

    delta = min(edges, key=lambda e: ekey[e])
    pairs.append((CellId(0, v), CellId(1, delta)))
    done_e.add(delta)
    pq_zero = [(ekey[e], 1, e) for e in edges if e != delta]
    heapq.heapify(pq_zero)
    pq_one: list = []

    def push_cofaces(e):
        for t in c.edge_cofaces[e]:
            if t in tris and t not in done_t and len(unpaired(t)) == 1:
                heapq.heappush(pq_one, (tkey[t], t))

    push_cofaces(delta)
    while pq_one or pq_zero:
        while pq_one:
            _, t = heapq.heappop(pq_one)
            if t in done_t:
                continue
            left = unpaired(t)
            if not left:
                heapq.heappush(pq_zero, (tkey[t], 2, t))
                continue
            e = left[0]
            pairs.append((CellId(1, e), CellId(2, t)))
            done_e.add(e)
            done_t.add(t)
            push_cofaces(e)
        while pq_zero:
            _, dim, x = heapq.heappop(pq_zero)
            if (dim == 1 and x in done_e) or (dim == 2 and x in done_t):
                continue
            crit.append(CellId(dim, x))
            if dim == 1:
                done_e.add(x)
                push_cofaces(x)
            else:
                done_t.add(x)
            break
    return pairs, crit


def build_gradient(c: CellComplex, f: ScalarField | None = None) -> DiscreteGradient:
    """Lower-star gradient of ``f`` (``c`` may be omitted: ``build_gradient(f)``)."""
    if f is None:
        c, f = c.complex, c
    g = DiscreteGradient.empty(c, f)
    for v in range(c.n_vertices):
        for a, b in _process_lower_star(c, f, v)[0]:
            g.pair(a, b)
    return g


def rebuild_local(g: DiscreteGradient, f_new: ScalarField, changed) -> DiscreteGradient:
    """``build_gradient(f_new)`` given ``g = build_gradient(g.field)``.

    Only lower stars of changed vertices and their neighbours are redone.
    """
    c = g.complex
    f_old = g.field
    verts = set(int(v) for v in changed)
    for v in list(verts):
        verts.update(c.neighbors(v))
    out = g.copy()
    out.field = f_new
    up, down = out.up, out.down
    for v in verts:
        star = [(0, v)] + [(1, e) for e in c.vertex_cofaces[v]]
        star += [(2, t) for t in c.vertex_triangles(v)]
        for d, i in star:
            if int(f_old.maxv[d][i]) not in verts and int(f_new.maxv[d][i]) not in verts:
                continue
            j = up[d][i]
            if j >= 0:
                down[d + 1][j] = -1
                up[d][i] = -1
            j = down[d][i]
            if j >= 0:
                up[d - 1][j] = -1
                down[d][i] = -1
    for v in sorted(verts):
        for a, b in _process_lower_star(c, f_new, v)[0]:
            out.pair(a, b)
    return out


def critical_cells(g: DiscreteGradient) -> list[CriticalCell]:
    f = g.field
    out = [CriticalCell(cell, cell.dim, f.cell_value(cell)) for cell in g.critical()]
    out.sort(key=lambda cc: (cc.morse_index, cc.value, f.key(cc.cell), cc.cell.index))
    return out


def as_critical(g: DiscreteGradient, cell) -> CriticalCell:
    if isinstance(cell, CriticalCell):
        return cell
    cell = g.complex.check(CellId(*cell))
    return CriticalCell(cell, cell.dim, g.field.cell_value(cell))


# --- V-paths -----------------------------------------------------------------

def flow_steps(g: DiscreteGradient, tau: CellId):
    """Successors of ``tau`` in the V-path relation.

    Yields ``(sigma, next_tau)``; ``next_tau`` is None when the path stops
    at ``sigma`` (critical, or matched downwards).
    """
    d = tau.dim - 1
    for sigma in g.complex.faces(tau):
        if g.down[tau.dim][tau.index] == sigma.index:
            continue
        j = g.up[d][sigma.index]
        if j >= 0:
            yield sigma, CellId(d + 1, int(j))
        else:
            yield sigma, None


def descending_paths(g: DiscreteGradient, start, limit: int = 1_000_000) -> list[VPath]:
    """All maximal V-paths from ``start``, with multiplicity."""
    start = as_critical(g, start).cell
    if start.dim == 0:
        return []
    out: list[VPath] = []
    stack = [(start, iter(list(flow_steps(g, start))))]
    trail = [start]
    on_trail = {start}
    while stack:
        tau, it = stack[-1]
        step = next(it, None)
        if step is None:
            stack.pop()
            trail.pop()
            on_trail.discard(tau)
            if trail:
                trail.pop()
            continue
        sigma, nxt = step
        if nxt is None:
            out.append(VPath(tuple(trail) + (sigma,)))
            if len(out) > limit:
                raise RuntimeError("path enumeration limit exceeded")
            continue
        if nxt in on_trail:
            raise CycleDetected(f"closed V-path through {nxt}")
        trail += [sigma, nxt]
        on_trail.add(nxt)
        stack.append((nxt, iter(list(flow_steps(g, nxt)))))
    return out


def _postorder(g: DiscreteGradient, start: CellId):
    """Cells of dimension start.dim reachable from ``start``, children first."""
    order = []
    state = {start: 1}
    stack = [(start, iter([n for _, n in flow_steps(g, start) if n is not None]))]
    while stack:
        tau, it = stack[-1]
        nxt = next(it, None)
        if nxt is None:
            stack.pop()
            state[tau] = 2
            order.append(tau)
            continue
        s = state.get(nxt)
        if s == 1:
            raise CycleDetected(f"closed V-path through {nxt}")
        if s is None:
            state[nxt] = 1
            stack.append((nxt, iter([n for _, n in flow_steps(g, nxt) if n is not None])))
    return order


def terminal_counts(g: DiscreteGradient, start) -> Counter:
    """Number of maximal V-paths from ``start`` ending at each terminal cell."""
    start = as_critical(g, start).cell
    if start.dim == 0:
        return Counter()
    memo: dict[CellId, Counter] = {}
    for tau in _postorder(g, start):
        cnt = Counter()
        for sigma, nxt in flow_steps(g, tau):
            if nxt is None:
                cnt[sigma] += 1
            else:
                cnt.update(memo[nxt])
        memo[tau] = cnt
    return memo[start]


def count_paths_to(g: DiscreteGradient, start: CellId, target: CellId) -> dict[CellId, int]:
    """For each cell reachable from ``start``: number of paths from it to ``target``."""
    memo: dict[CellId, int] = {}
    for tau in _postorder(g, start):
        n = 0
        for sigma, nxt in flow_steps(g, tau):
            if nxt is None:
                n += sigma == target
            else:
                n += memo[nxt]
        memo[tau] = n
    return memo


def connecting_paths(g: DiscreteGradient, p, q) -> list[VPath]:
    p, q = as_critical(g, p), as_critical(g, q)
    if p.morse_index != q.morse_index + 1:
        raise IndexMismatch(f"index {p.morse_index} vs {q.morse_index}")
    if count_paths_to(g, p.cell, q.cell).get(p.cell, 0) == 0:
        return []
    return [path for path in descending_paths(g, p) if path.terminal == q.cell]


def unique_connector(g: DiscreteGradient, p: CellId, q: CellId) -> tuple[int, VPath | None]:
    """(number of connecting paths, the path if there is exactly one)."""
    memo = count_paths_to(g, p, q)
    n = memo.get(p, 0)
    if n != 1:
        return n, None
    cells = [p]
    tau = p
    while True:
        for sigma, nxt in flow_steps(g, tau):
            if nxt is None and sigma == q:
                return 1, VPath(tuple(cells + [sigma]))
            if nxt is not None and memo[nxt] == 1:
                cells += [sigma, nxt]
                tau = nxt
                break


def reachable(g: DiscreteGradient, start: CellId, floor: float | None = None) -> set[CellId]:
    """Cells lying on descending V-paths from ``start`` with value >= floor."""
    f = g.field
    ok = (lambda x: True) if floor is None else (lambda x: f.cell_value(x) >= floor)
    out = {start}
    stack = [start]
    while stack:
        tau = stack.pop()
        for sigma, nxt in flow_steps(g, tau):
            if ok(sigma):
                out.add(sigma)
            if nxt is not None and ok(nxt) and nxt not in out:
                out.add(nxt)
                stack.append(nxt)
    return out


def continuation_floor(g: DiscreteGradient, cell: CellId) -> float:
    """Value where the flow leaving a path terminal comes to rest.

    A critical terminal rests at its own value.  A terminal matched
    downwards keeps flowing in the lower dimension; follow it to the end.
    """
    f = g.field
    lowest = f.cell_value(cell)
    stack = [cell]
    seen = {cell}
    while stack:
        x = stack.pop()
        lowest = min(lowest, f.cell_value(x))
        if x.dim == 0 or g.is_critical(x) or g.up[x.dim][x.index] >= 0:
            continue
        for sigma, nxt in flow_steps(g, x):
            y = sigma if nxt is None else nxt
            if y not in seen:
                seen.add(y)
                stack.append(y)
    return lowest


# --- validation --------------------------------------------------------------

def find_cycle(g: DiscreteGradient) -> CellId | None:
    c = g.complex
    for d in (1, 2):
        n = c.n_cells(d)
        indeg = np.zeros(n, dtype=np.int64)
        succ: list[list[int]] = [[] for _ in range(n)]
        for i in range(n):
            tau = CellId(d, i)
            if g.down[d][i] >= 0 and g.up[d - 1][g.down[d][i]] != i:
                return tau
            for _, nxt in flow_steps(g, tau):
                if nxt is not None:
                    succ[i].append(nxt.index)
                    indeg[nxt.index] += 1
        queue = [i for i in range(n) if indeg[i] == 0]
        seen = 0
        while queue:
            i = queue.pop()
            seen += 1
            for j in succ[i]:
                indeg[j] -= 1
                if indeg[j] == 0:
                    queue.append(j)
        if seen != n:
            return CellId(d, int(np.flatnonzero(indeg > 0)[0]))
    return None


def find_cycle_from(g: DiscreteGradient, starts) -> CellId | None:
    """A cell on a closed V-path reachable from ``starts``, or None.

    Cheaper than ``find_cycle`` when a change is known to be local: any
    new cycle must pass through one of the changed cells.
    """
    state: dict[CellId, int] = {}
    for s in starts:
        if s in state:
            continue
        state[s] = 1
        stack = [(s, flow_steps(g, s))]
        while stack:
            tau, it = stack[-1]
            for _, nxt in it:
                if nxt is None:
                    continue
                st = state.get(nxt)
                if st == 1:
                    return nxt
                if st is None:
                    state[nxt] = 1
                    stack.append((nxt, flow_steps(g, nxt)))
                    break
            else:
                state[tau] = 2
                stack.pop()
    return None


def check_acyclic(g: DiscreteGradient, starts=None):
    bad = find_cycle(g) if starts is None else find_cycle_from(g, starts)
    if bad is not None:
        raise CycleDetected(f"closed V-path through {bad}")


def pair_violations(g: DiscreteGradient, f: ScalarField | None = None,
                    near=None) -> list[tuple[CellId, CellId]]:
    """Matched pairs that do not share a lower star under ``f``.

    ``near`` restricts the scan to pairs touching the given vertices.
    """
    f = g.field if f is None else f
    if near is None:
        pairs = g.pairs()
    else:
        c = g.complex
        pairs = set()
        for v in near:
            for cell in c.star(v):
                other = g.partner(cell)
                if other is not None:
                    pairs.add((cell, other) if cell.dim < other.dim else (other, cell))
        pairs = sorted(pairs)
    bad = []
    for a, b in pairs:
        if f.max_vertex(a) != f.max_vertex(b):
            bad.append((a, b))
    return bad


def is_valid_for(g: DiscreteGradient, f: ScalarField) -> bool:
    return not pair_violations(g, f) and find_cycle(g) is None
