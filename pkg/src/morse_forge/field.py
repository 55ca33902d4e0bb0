"""Vertex scalar fields with a strict total order (value, vertex index)."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .complex import CellComplex, CellId
from .errors import LengthMismatch, NonFiniteValue, UnknownCell


@dataclass(eq=False)
class ScalarField:
    complex: CellComplex
    values: np.ndarray
    rank: np.ndarray = field(init=False, repr=False)
    maxv: tuple[np.ndarray, np.ndarray, np.ndarray] = field(init=False, repr=False)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        self.values = vals
        order = np.lexsort((np.arange(len(vals)), vals))
        rank = np.empty(len(vals), dtype=np.int64)
        rank[order] = np.arange(len(vals))
        self.rank = rank
        c = self.complex
        E, T = c.edge_array, c.tri_array
        if len(E):
            me = np.where(rank[E[:, 0]] > rank[E[:, 1]], E[:, 0], E[:, 1])
        else:
            me = np.zeros(0, dtype=np.int64)
        if len(T):
            rt = rank[T]
            mt = T[np.arange(len(T)), np.argmax(rt, axis=1)]
        else:
            mt = np.zeros(0, dtype=np.int64)
        self.maxv = (np.arange(len(vals)), me, mt)

    @property
    def order(self) -> np.ndarray:
        """Vertices from lowest to highest."""
        return np.argsort(self.rank)

    def max_vertex(self, cell: CellId) -> int:
        return int(self.maxv[cell.dim][cell.index])

    def cell_value(self, cell: CellId) -> float:
        return float(self.values[self.maxv[cell.dim][cell.index]])

    def key(self, cell: CellId) -> tuple[int, ...]:
        """Vertex ranks of ``cell`` in decreasing order (lexicographic cell order)."""
        return tuple(sorted((int(self.rank[v]) for v in self.complex.vertices(cell)), reverse=True))

    def with_values(self, values) -> "ScalarField":
        return load_field(self.complex, values)

    def negated(self) -> "ScalarField":
        return load_field(self.complex, -self.values)


@dataclass(frozen=True)
class LevelThreshold:
    value: float
    side: str = "below"

    def holds(self, x: float) -> bool:
        return x < self.value if self.side == "below" else x >= self.value


def load_field(c: CellComplex, per_vertex: Sequence[float]) -> ScalarField:
    vals = np.array(per_vertex, dtype=np.float64).ravel()
    if len(vals) != c.n_vertices:
        raise LengthMismatch(f"{len(vals)} values for {c.n_vertices} vertices")
    if not np.all(np.isfinite(vals)):
        raise NonFiniteValue("field contains NaN or infinite values")
    return ScalarField(c, vals)


def lower_star(f: ScalarField, v) -> set[CellId]:
    """Cells whose highest vertex under the field order is ``v``."""
    c = f.complex
    if isinstance(v, CellId):
        if v.dim != 0:
            raise UnknownCell(f"{v} is not a vertex")
        v = v.index
    c.check(CellId(0, v))
    out = {CellId(0, v)}
    for e in c.vertex_cofaces[v]:
        if f.maxv[1][e] == v:
            out.add(CellId(1, e))
            for t in c.edge_cofaces[e]:
                if f.maxv[2][t] == v:
                    out.add(CellId(2, t))
    return out
