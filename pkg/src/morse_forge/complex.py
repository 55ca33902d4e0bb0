"""Simplicial complexes of dimension <= 2 with dense per-dimension indexing.

Cells are addressed by ``CellId(dim, index)``.  Vertices are ``0..n-1``,
edges and triangles are stored as sorted vertex tuples and indexed in the
order they are first created.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, NamedTuple, Sequence

import numpy as np

from .errors import (
    DanglingVertexIndex,
    DegenerateSimplex,
    DuplicateCell,
    NonManifoldEdge,
    UnknownCell,
)


class CellId(NamedTuple):
    dim: int
    index: int

    def __str__(self):
        return f"{self.dim}:{self.index}"

    @classmethod
    def parse(cls, text: str) -> "CellId":
        d, i = text.split(":")
        return cls(int(d), int(i))


@dataclass(eq=False)
class CellComplex:
    n_vertices: int
    edges: list[tuple[int, int]]
    triangles: list[tuple[int, int, int]]
    edge_index: dict[tuple[int, int], int]
    triangle_index: dict[tuple[int, int, int], int]
    tri_edges: list[tuple[int, int, int]]
    vertex_cofaces: list[list[int]]
    edge_cofaces: list[list[int]]
    boundary: tuple[np.ndarray, np.ndarray, np.ndarray]
    coords: np.ndarray | None = None
    edge_array: np.ndarray = field(init=False, repr=False)
    tri_array: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.edge_array = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        self.tri_array = np.asarray(self.triangles, dtype=np.int64).reshape(-1, 3)

    @property
    def dimension(self) -> int:
        if self.triangles:
            return 2
        return 1 if self.edges else 0

    def n_cells(self, dim: int) -> int:
        return (self.n_vertices, len(self.edges), len(self.triangles))[dim]

    @property
    def total_cells(self) -> int:
        return self.n_vertices + len(self.edges) + len(self.triangles)

    def cells(self, dim: int | None = None) -> Iterator[CellId]:
        dims = range(3) if dim is None else (dim,)
        for d in dims:
            for i in range(self.n_cells(d)):
                yield CellId(d, i)

    def check(self, cell: CellId) -> CellId:
        d, i = cell
        if d not in (0, 1, 2) or not 0 <= i < self.n_cells(d):
            raise UnknownCell(f"no cell {d}:{i}")
        return CellId(d, i)

    def vertices(self, cell: CellId) -> tuple[int, ...]:
        d, i = cell
        if d == 0:
            return (i,)
        if d == 1:
            return self.edges[i]
        return self.triangles[i]

    def faces(self, cell: CellId) -> list[CellId]:
        d, i = cell
        if d == 0:
            return []
        if d == 1:
            return [CellId(0, v) for v in self.edges[i]]
        return [CellId(1, e) for e in self.tri_edges[i]]

    def cofaces(self, cell: CellId) -> list[CellId]:
        d, i = cell
        if d == 0:
            return [CellId(1, e) for e in self.vertex_cofaces[i]]
        if d == 1:
            return [CellId(2, t) for t in self.edge_cofaces[i]]
        return []

    def lookup(self, verts: Sequence[int]) -> CellId:
        key = tuple(sorted(verts))
        if len(key) == 1:
            return self.check(CellId(0, key[0]))
        table = self.edge_index if len(key) == 2 else self.triangle_index
        if key not in table:
            raise UnknownCell(f"no simplex {key}")
        return CellId(len(key) - 1, table[key])

    def is_boundary(self, cell: CellId) -> bool:
        return bool(self.boundary[cell.dim][cell.index])

    def neighbors(self, v: int) -> list[int]:
        out = []
        for e in self.vertex_cofaces[v]:
            a, b = self.edges[e]
            out.append(b if a == v else a)
        return out

    def vertex_triangles(self, v: int) -> set[int]:
        return {t for e in self.vertex_cofaces[v] for t in self.edge_cofaces[e]}

    def star(self, v: int) -> list[CellId]:
        """All cells having ``v`` as a vertex."""
        out = [CellId(0, v)]
        out += [CellId(1, e) for e in self.vertex_cofaces[v]]
        out += [CellId(2, t) for t in sorted(self.vertex_triangles(v))]
        return out


def _dense_vertex_count(simplices, n_vertices):
    used = {v for s in simplices for v in s}
    if any(v < 0 for v in used):
        raise DanglingVertexIndex("negative vertex index")
    if n_vertices is None:
        n_vertices = max(used) + 1 if used else 0
        missing = set(range(n_vertices)) - used
        if missing:
            raise DanglingVertexIndex(f"vertex indices not dense, missing {sorted(missing)[:5]}")
    elif used and max(used) >= n_vertices:
        raise DanglingVertexIndex(f"vertex {max(used)} out of range for {n_vertices} vertices")
    return n_vertices


def build_complex(
    triangles: Iterable[Sequence[int]] | None = None,
    edges: Iterable[Sequence[int]] | None = None,
    n_vertices: int | None = None,
    coords=None,
) -> CellComplex:
    """Build a complex from a triangle list (surface) or an edge list (graph).

    All implied faces are created exactly once.  Boundary cells are the
    edges with a single triangle coface and their vertices; for graphs, the
    degree-one vertices.
    """
    if (triangles is None) == (edges is None):
        raise ValueError("give exactly one of triangles or edges")
    simplices = [tuple(int(v) for v in s) for s in (triangles if triangles is not None else edges)]
    k = 3 if triangles is not None else 2
    for s in simplices:
        if len(s) != k:
            raise DegenerateSimplex(f"expected {k} vertices, got {s}")
        if len(set(s)) != k:
            raise DegenerateSimplex(f"repeated vertex in {s}")
    n = _dense_vertex_count(simplices, n_vertices)

    edge_list: list[tuple[int, int]] = []
    edge_index: dict[tuple[int, int], int] = {}
    tri_list: list[tuple[int, int, int]] = []
    tri_index: dict[tuple[int, int, int], int] = {}
    tri_edges: list[tuple[int, int, int]] = []

    def add_edge(a, b):
        key = (a, b) if a < b else (b, a)
        if key not in edge_index:
            edge_index[key] = len(edge_list)
            edge_list.append(key)
        return edge_index[key]

    if k == 3:
        for s in simplices:
            key = tuple(sorted(s))
            if key in tri_index:
                raise DuplicateCell(f"triangle {key} given twice")
            tri_index[key] = len(tri_list)
            tri_list.append(key)
            a, b, c = key
            tri_edges.append((add_edge(a, b), add_edge(a, c), add_edge(b, c)))
    else:
        for a, b in simplices:
            key = (min(a, b), max(a, b))
            if key in edge_index:
                raise DuplicateCell(f"edge {key} given twice")
            add_edge(a, b)

    vertex_cofaces: list[list[int]] = [[] for _ in range(n)]
    for e, (a, b) in enumerate(edge_list):
        vertex_cofaces[a].append(e)
        vertex_cofaces[b].append(e)
    edge_cofaces: list[list[int]] = [[] for _ in edge_list]
    for t, es in enumerate(tri_edges):
        for e in es:
            edge_cofaces[e].append(t)
    for e, cf in enumerate(edge_cofaces):
        if len(cf) > 2:
            raise NonManifoldEdge(f"edge {edge_list[e]} has {len(cf)} triangles")

    bv = np.zeros(n, dtype=bool)
    be = np.zeros(len(edge_list), dtype=bool)
    bt = np.zeros(len(tri_list), dtype=bool)
    if k == 3:
        for e, cf in enumerate(edge_cofaces):
            if len(cf) == 1:
                be[e] = True
                bv[list(edge_list[e])] = True
                bt[cf[0]] = True
    else:
        for v in range(n):
            bv[v] = len(vertex_cofaces[v]) == 1

    if coords is not None:
        coords = np.asarray(coords, dtype=float)
    return CellComplex(
        n_vertices=n,
        edges=edge_list,
        triangles=tri_list,
        edge_index=edge_index,
        triangle_index=tri_index,
        tri_edges=tri_edges,
        vertex_cofaces=vertex_cofaces,
        edge_cofaces=edge_cofaces,
        boundary=(bv, be, bt),
        coords=coords,
    )


def euler_characteristic(c: CellComplex) -> int:
    return c.n_vertices - len(c.edges) + len(c.triangles)


def disjoint_union(a: CellComplex, b: CellComplex) -> CellComplex:
    if a.triangles or b.triangles:
        if not (a.triangles and b.triangles):
            raise ValueError("cannot mix a surface and a graph")
        tris = a.triangles + [tuple(v + a.n_vertices for v in t) for t in b.triangles]
        return build_complex(triangles=tris, n_vertices=a.n_vertices + b.n_vertices)
    edges = a.edges + [(u + a.n_vertices, v + a.n_vertices) for u, v in b.edges]
    return build_complex(edges=edges, n_vertices=a.n_vertices + b.n_vertices)


# --- standard complexes -------------------------------------------------------

def split_quads(quads):
    """Split quads ``(v00, v10, v11, v01)`` (cyclic order) into triangles.

    The diagonal joins the lowest-index corner to its opposite corner.
    """
    tris = []
    for q in quads:
        lo = int(np.argmin(q))
        a, b, c, d = (q[(lo + j) % 4] for j in range(4))
        tris.append((a, b, c))
        tris.append((a, c, d))
    return tris


def path_graph(n: int) -> CellComplex:
    coords = np.column_stack([np.arange(n, dtype=float), np.zeros(n)])
    return build_complex(edges=[(i, i + 1) for i in range(n - 1)], n_vertices=n, coords=coords)


def cycle_graph(n: int) -> CellComplex:
    ang = 2 * np.pi * np.arange(n) / n
    coords = np.column_stack([np.cos(ang), np.sin(ang)])
    return build_complex(edges=[(i, (i + 1) % n) for i in range(n)], n_vertices=n, coords=coords)


def octahedron() -> CellComplex:
    coords = np.array([[1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1], [0, 0, -1]], float)
    tris = [(x, y, z) for x in (0, 1) for y in (2, 3) for z in (4, 5)]
    return build_complex(triangles=tris, coords=coords)


def grid_complex(nx: int, ny: int) -> CellComplex:
    """Triangulated ``nx`` by ``ny`` vertex grid; vertex id is ``j * nx + i``."""
    quads = []
    for j in range(ny - 1):
        for i in range(nx - 1):
            a = j * nx + i
            quads.append((a, a + 1, a + nx + 1, a + nx))
    xs, ys = np.meshgrid(np.arange(nx, dtype=float), np.arange(ny, dtype=float))
    coords = np.column_stack([xs.ravel(), ys.ravel()])
    return build_complex(triangles=split_quads(quads), n_vertices=nx * ny, coords=coords)


def torus_grid(n: int = 3, m: int | None = None) -> CellComplex:
    """Periodic ``n`` by ``m`` grid; ``n = m = 3`` is the 9-vertex torus."""
    m = n if m is None else m
    quads = []
    for j in range(m):
        for i in range(n):
            v = lambda a, b: (b % m) * n + (a % n)
            quads.append((v(i, j), v(i + 1, j), v(i + 1, j + 1), v(i, j + 1)))
    return build_complex(triangles=split_quads(quads), n_vertices=n * m)


def cylinder(n_around: int, n_rings: int) -> CellComplex:
    """Annulus ``S^1 x [0, 1]``; ring ``r`` holds vertices ``r*n_around .. +n_around-1``.

    Ring 0 and ring ``n_rings - 1`` are the two boundary circles.
    """
    quads = []
    for r in range(n_rings - 1):
        for k in range(n_around):
            k1 = (k + 1) % n_around
            quads.append((r * n_around + k, r * n_around + k1,
                          (r + 1) * n_around + k1, (r + 1) * n_around + k))
    ang = 2 * np.pi * np.arange(n_around) / n_around
    coords = np.array([[np.cos(a), np.sin(a), r] for r in range(n_rings) for a in ang])
    return build_complex(triangles=split_quads(quads), n_vertices=n_around * n_rings, coords=coords)
