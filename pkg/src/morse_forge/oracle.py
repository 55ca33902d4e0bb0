"""Brute-force references for small complexes (a dozen cells or so).

* ``matching_census_oracle`` enumerates every acyclic matching whose pairs
  stay inside lower stars and reports the minimal critical census.
* ``sublevel_pairs_oracle`` tracks persistent Betti numbers of the vertex
  sublevel complexes with GF(2) ranks and recovers pair multiplicities by
  inclusion-exclusion.  No column reduction is involved.
"""
from __future__ import annotations

import itertools
from collections import Counter

import numpy as np

from .complex import CellComplex, CellId
from .field import ScalarField, lower_star
from .gradient import DiscreteGradient, find_cycle


def _matchings(edges):
    """All sets of pairwise-disjoint edges (pairs of cells)."""
    out = []

    def rec(i, used, chosen):
        if i == len(edges):
            out.append(list(chosen))
            return
        rec(i + 1, used, chosen)
        a, b = edges[i]
        if a not in used and b not in used:
            chosen.append(edges[i])
            rec(i + 1, used | {a, b}, chosen)
            chosen.pop()

    rec(0, frozenset(), [])
    return out


def matching_census_oracle(c: CellComplex, f: ScalarField):
    """Return (minimal census, set of censuses attaining the minimal total)."""
    per_star = []
    for v in range(c.n_vertices):
        cells = lower_star(f, v)
        hasse = [(s, t) for t in cells for s in c.faces(t) if s in cells]
        per_star.append(_matchings(sorted(hasse)))
    best_total = None
    best = set()
    for combo in itertools.product(*per_star):
        g = DiscreteGradient.empty(c, f)
        for pairs in combo:
            for s, t in pairs:
                g.pair(s, t)
        if find_cycle(g) is not None:
            continue
        cen = g.census()
        tot = sum(cen)
        if best_total is None or tot < best_total:
            best_total, best = tot, {cen}
        elif tot == best_total:
            best.add(cen)
    return min(best), best


# --- GF(2) linear algebra on int bitmasks --------------------------------------

def _rank(vectors) -> int:
    basis: dict[int, int] = {}
    r = 0
    for v in vectors:
        while v:
            top = v.bit_length() - 1
            if top in basis:
                v ^= basis[top]
            else:
                basis[top] = v
                r += 1
                break
    return r


def _kernel(columns: list[int], n_cols: int) -> list[int]:
    """Kernel of the matrix whose j-th column is ``columns[j]``, as bitmasks over j."""
    pivots: dict[int, tuple[int, int]] = {}
    kernel = []
    for j in range(n_cols):
        v, comb = columns[j], 1 << j
        while v:
            top = v.bit_length() - 1
            if top in pivots:
                pv, pc = pivots[top]
                v ^= pv
                comb ^= pc
            else:
                pivots[top] = (v, comb)
                break
        if not v:
            kernel.append(comb)
    return kernel


def _boundary_cols(c: CellComplex, k: int, cells_k: list[int], cells_km1: list[int]) -> list[int]:
    row = {i: r for r, i in enumerate(cells_km1)}
    cols = []
    for i in cells_k:
        mask = 0
        for face in c.faces(CellId(k, i)):
            mask |= 1 << row[face.index]
        cols.append(mask)
    return cols


def _persistent_betti(c: CellComplex, f: ScalarField, k: int, i: int, j: int) -> int:
    """Rank of H_k(K_i) -> H_k(K_j), K_s = cells whose top vertex has rank <= s."""
    if i < 0:
        return 0
    rank_of = lambda cell: f.rank[f.max_vertex(cell)]
    all_k = [x for x in range(c.n_cells(k)) if rank_of(CellId(k, x)) <= j]
    in_i = [x for x in all_k if rank_of(CellId(k, x)) <= i]
    # cycles of K_i, expressed in the coordinates of all_k
    pos = {x: r for r, x in enumerate(all_k)}
    if k == 0:
        z = [1 << pos[x] for x in in_i]
    else:
        lower = list(range(c.n_cells(k - 1)))
        cols = _boundary_cols(c, k, in_i, lower)
        z = []
        for comb in _kernel(cols, len(in_i)):
            mask = 0
            for r, x in enumerate(in_i):
                if comb >> r & 1:
                    mask |= 1 << pos[x]
            z.append(mask)
    if k + 1 > 2:
        b = []
    else:
        up = [x for x in range(c.n_cells(k + 1)) if rank_of(CellId(k + 1, x)) <= j]
        b = _boundary_cols(c, k + 1, up, all_k)
    dz, db = _rank(z), _rank(b)
    return dz - (dz + db - _rank(z + b))


def sublevel_pairs_oracle(c: CellComplex, f: ScalarField):
    """Vertex-level pairs: Counter of (dim, birth_rank, death_rank) and essentials.

    Essential classes are keyed ``(dim, birth_rank, None)``.
    """
    n = c.n_vertices
    last = n - 1
    out = Counter()
    for k in range(c.dimension + 1):
        beta = {}

        def b(i, j):
            if (i, j) not in beta:
                beta[i, j] = _persistent_betti(c, f, k, i, j)
            return beta[i, j]

        for i in range(n):
            for j in range(i + 1, n):
                mu = b(i, j - 1) - b(i, j) - b(i - 1, j - 1) + b(i - 1, j)
                if mu:
                    out[(k, i, j)] += mu
            ess = b(i, last) - b(i - 1, last)
            if ess:
                out[(k, i, None)] += ess
    return out


def sublevel_betti(c: CellComplex, f: ScalarField) -> tuple[int, int, int]:
    last = c.n_vertices - 1
    return tuple(_persistent_betti(c, f, k, last, last) for k in range(3))
