"""Lower-star persistence pairs by boundary matrix reduction over GF(2)."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .complex import CellComplex, CellId
from .field import ScalarField
from .gradient import CriticalCell


@dataclass(frozen=True)
class PersistencePair:
    birth: CriticalCell
    death: CriticalCell | None
    persistence: float
    essential: bool

    @property
    def dim(self) -> int:
        return self.birth.morse_index


def filtration(c: CellComplex, f: ScalarField) -> list[CellId]:
    """Cells ordered by top vertex, then dimension, then vertex ranks."""
    blocks = [f.rank[:, None], f.rank[c.edge_array], f.rank[c.tri_array]]
    keys = np.full((c.total_cells, 4), -1, dtype=np.int64)
    start = 0
    for d, r in enumerate(blocks):
        n = len(r)
        keys[start:start + n, 1] = d
        if n:
            r = -np.sort(-r, axis=1)
            keys[start:start + n, 0] = r[:, 0]
            keys[start:start + n, 2:2 + r.shape[1] - 1] = r[:, 1:]
        start += n
    order = np.lexsort((keys[:, 3], keys[:, 2], keys[:, 1], keys[:, 0]))
    offsets = np.cumsum([0, c.n_vertices, len(c.edges)])
    dims = keys[order, 1]
    return [CellId(int(d), int(i - offsets[d])) for d, i in zip(dims, order)]


def persistence_pairs(c: CellComplex, f: ScalarField, keep_zero: bool = False) -> list[PersistencePair]:
    """Finite and essential pairs of the lower-star filtration.

    Pairs whose two cells share a top vertex carry no topology and are
    dropped unless ``keep_zero``.
    """
    order = filtration(c, f)
    pos = {cell: i for i, cell in enumerate(order)}
    cols: list[int] = [0] * len(order)
    owner: dict[int, int] = {}
    finite = []
    for j, cell in enumerate(order):
        col = 0
        for face in c.faces(cell):
            col |= 1 << pos[face]
        while col:
            low = col.bit_length() - 1
            k = owner.get(low)
            if k is None:
                owner[low] = j
                finite.append((low, j))
                break
            col ^= cols[k]
        cols[j] = col

    def crit(i):
        cell = order[i]
        return CriticalCell(cell, cell.dim, f.cell_value(cell))

    out = []
    paired = set()
    for b, d in finite:
        paired.add(b)
        paired.add(d)
        if not keep_zero and f.max_vertex(order[b]) == f.max_vertex(order[d]):
            continue
        bc, dc = crit(b), crit(d)
        out.append(PersistencePair(bc, dc, dc.value - bc.value, False))
    for i in range(len(order)):
        if i not in paired and cols[i] == 0:
            bc = crit(i)
            out.append(PersistencePair(bc, None, float("inf"), True))
    return out


def schedule(pairs: list[PersistencePair], threshold: float) -> list[tuple[CriticalCell, CriticalCell]]:
    """Finite pairs with persistence <= threshold as (death, birth), shortest first."""
    chosen = [pp for pp in pairs if not pp.essential and pp.persistence <= threshold]
    chosen.sort(key=lambda pp: (pp.persistence, pp.death.morse_index, pp.death.cell.index,
                                pp.birth.cell.index))
    return [(pp.death, pp.birth) for pp in chosen]
