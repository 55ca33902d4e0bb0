"""Small hand-checked scenarios used by the tests, the acceptance suite and the scripts."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .complex import CellComplex, CellId, build_complex, cycle_graph, cylinder, octahedron, path_graph
from .field import ScalarField, load_field
from .gradient import build_gradient, critical_cells


@dataclass(frozen=True)
class PairFixture:
    field: ScalarField
    p: CellId
    q: CellId

    @property
    def complex(self) -> CellComplex:
        return self.field.complex


def multiple_paths() -> PairFixture:
    """4-cycle 0-1-3-2-0 with values equal to vertex ids.

    The maximum edge (2, 3) descends to the minimum v0 along both sides of
    the cycle, so the pair has two connectors.
    """
    c = build_complex(edges=[(0, 1), (1, 3), (3, 2), (2, 0)])
    f = load_field(c, [0.0, 1.0, 2.0, 3.0])
    return PairFixture(f, c.lookup((2, 3)), CellId(0, 0))


def trapped_orbit() -> PairFixture:
    """Path graph with values 2, 0, 5, 1.

    The critical edge (2, 3) reaches the minimum v1 through v2 and ends at
    the boundary vertex v3 (value 1) on its other side.  v3 sits above
    ``value(v1) - epsilon`` for every positive epsilon, so the second orbit
    never escapes below the level under q.
    """
    c = path_graph(4)
    f = load_field(c, [2.0, 0.0, 5.0, 1.0])
    return PairFixture(f, c.lookup((2, 3)), CellId(0, 1))


def cycle_pair() -> PairFixture:
    """4-cycle with values 0, 3, 1, 4: two maxima, two minima.

    The edge (1, 2) tops at v1 and has a single connector to v2.
    """
    c = cycle_graph(4)
    f = load_field(c, [0.0, 3.0, 1.0, 4.0])
    return PairFixture(f, c.lookup((1, 2)), CellId(0, 2))


def dented_cylinder(n_around: int = 8, n_rings: int = 4, dent: float = 0.5) -> PairFixture:
    """Height field on a cylinder with one interior vertex pushed down.

    Without the dent every critical cell lies on the bottom boundary
    circle.  The dent adds an interior minimum and an interior saddle
    joined by one V-path.
    """
    c = cylinder(n_around, n_rings)
    ang = 2 * np.pi * np.arange(n_around) / n_around
    vals = np.array([r + 0.1 * np.cos(a) + 0.01 * k
                     for r in range(n_rings) for k, a in enumerate(ang)])
    v = 2 * n_around + n_around // 2
    vals[v] = dent
    f = load_field(c, vals)
    g = build_gradient(c, f)
    inner = [cc.cell for cc in critical_cells(g) if not c.is_boundary(cc.cell)]
    p = next(x for x in inner if x.dim == 1)
    return PairFixture(f, p, CellId(0, v))


def octahedron_spur() -> PairFixture:
    """Octahedron with a second, shallow minimum at v1 next to the saddle at v2."""
    c = octahedron()
    f = load_field(c, [0.0, 4.5, 5.0, 6.0, 5.5, 8.0])
    g = build_gradient(c, f)
    p = next(cc.cell for cc in critical_cells(g) if cc.morse_index == 1)
    return PairFixture(f, p, CellId(0, 1))


def bump_on_ramp(n: int = 201, height: float = 0.5, width: float = 0.05) -> ScalarField:
    """Increasing ramp on [0, 1] with a Gaussian bump steep enough to add a max and a min."""
    x = np.linspace(0.0, 1.0, n)
    return load_field(path_graph(n), x + height * np.exp(-(x - 0.5) ** 2 / (2 * width ** 2)))
