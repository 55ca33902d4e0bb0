"""Re-check every structural invariant of a (complex, field) pair.

``verify`` raises InvariantViolation at the first broken check and
otherwise returns the names of the checks that ran.
"""
from __future__ import annotations

from collections import Counter

import numpy as np

from .complex import CellId, euler_characteristic
from .errors import InvariantViolation
from .field import ScalarField, lower_star
from .gradient import build_gradient, find_cycle, pair_violations
from .persist import persistence_pairs


def _require(ok: bool, message: str):
    if not ok:
        raise InvariantViolation(message)


def check_complex(c) -> list[str]:
    for t, es in enumerate(c.tri_edges):
        _require(len(set(es)) == 3, f"triangle {t} does not have three edges")
        # every vertex of the triangle lies in exactly two of its edges
        cnt = Counter(v for e in es for v in c.edges[e])
        _require(sorted(cnt) == list(c.triangles[t]) and set(cnt.values()) == {2},
                 f"triangle {t} fails the boundary-of-boundary check")
    for e, (a, b) in enumerate(c.edges):
        _require(a != b, f"edge {e} is degenerate")
        _require(e in c.vertex_cofaces[a] and e in c.vertex_cofaces[b], f"edge {e} missing from vertex cofaces")
        _require(len(c.edge_cofaces[e]) <= 2, f"edge {e} has more than two triangles")
        for t in c.edge_cofaces[e]:
            _require(e in c.tri_edges[t], f"coface {t} of edge {e} does not contain it")
    for v, es in enumerate(c.vertex_cofaces):
        for e in es:
            _require(v in c.edges[e], f"vertex {v} lists edge {e} that does not contain it")
    return ["complex.faces", "complex.boundary_of_boundary", "complex.cofaces_inverse", "complex.manifold_edges"]


def check_field(f: ScalarField) -> list[str]:
    c = f.complex
    n = c.n_vertices
    _require(np.all(np.isfinite(f.values)), "field has non-finite values")
    _require(np.array_equal(np.sort(f.rank), np.arange(n)), "vertex order is not strict")
    for d in (1, 2):
        for i in range(c.n_cells(d)):
            cell = CellId(d, i)
            top = f.cell_value(cell)
            for face in c.faces(cell):
                _require(f.cell_value(face) <= top, f"face {face} of {cell} has a larger value")
    total = sum(len(lower_star(f, v)) for v in range(n))
    _require(total == c.total_cells, "lower stars do not partition the cells")
    return ["field.strict_order", "field.monotone_cells", "field.lower_star_partition"]


def check_gradient(f: ScalarField) -> list[str]:
    c = f.complex
    g = build_gradient(c, f)
    for d in range(2):
        for i in np.flatnonzero(g.up[d] >= 0):
            j = int(g.up[d][i])
            _require(g.down[d + 1][j] == i, f"pair {d}:{i} / {d + 1}:{j} is one-sided")
            _require(d == 1 or g.up[d + 1][j] < 0, f"cell {d + 1}:{j} matched twice")
    bad = pair_violations(g, f)
    _require(not bad, f"pair {bad[0] if bad else ''} leaves its lower star")
    cyc = find_cycle(g)
    _require(cyc is None, f"closed V-path through {cyc}")
    c0, c1, c2 = g.census()
    chi = euler_characteristic(c)
    _require(c0 - c1 + c2 == chi, f"Morse relation fails: {c0} - {c1} + {c2} != {chi}")
    return ["gradient.matching", "gradient.lower_star_pairs", "gradient.acyclic", "gradient.morse_relation"]


def check_persistence(f: ScalarField) -> list[str]:
    c = f.complex
    pairs = persistence_pairs(c, f, keep_zero=True)
    betti = Counter(pp.dim for pp in pairs if pp.essential)
    chi = euler_characteristic(c)
    _require(betti[0] - betti[1] + betti[2] == chi, "essential classes do not sum to the Euler characteristic")
    for pp in pairs:
        if not pp.essential:
            _require(pp.death.morse_index == pp.birth.morse_index + 1, f"pair {pp.birth.cell} has a bad dimension gap")
            _require(pp.persistence >= 0, f"pair {pp.birth.cell} has negative persistence")
    n_cells = 2 * sum(not pp.essential for pp in pairs) + sum(pp.essential for pp in pairs)
    _require(n_cells == c.total_cells, "persistence pairing does not cover every cell once")
    census = build_gradient(c, f).census()
    for k in range(3):
        _require(census[k] >= betti[k], f"weak Morse inequality fails in dimension {k}")
    return ["persist.euler", "persist.pair_dims", "persist.cover", "persist.morse_inequalities"]


def verify(f: ScalarField) -> list[str]:
    out = check_complex(f.complex)
    out += check_field(f)
    out += check_gradient(f)
    out += check_persistence(f)
    return out
