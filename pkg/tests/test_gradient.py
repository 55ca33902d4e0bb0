import numpy as np
import pytest
from hypothesis import given, strategies as st

from morse_forge.complex import CellId, cycle_graph, euler_characteristic, grid_complex, octahedron, path_graph
from morse_forge.errors import CycleDetected, IndexMismatch
from morse_forge.field import load_field
from morse_forge.gradient import (
    DiscreteGradient,
    build_gradient,
    check_acyclic,
    connecting_paths,
    critical_cells,
    descending_paths,
    find_cycle,
    find_cycle_from,
    pair_violations,
    rebuild_local,
    unique_connector,
)
from morse_forge.oracle import matching_census_oracle

from helpers import medium_complexes, small_complexes


def cycle_fixture():
    c = cycle_graph(4)
    f = load_field(c, [0, 3, 1, 4])
    return c, f, build_gradient(c, f)


def test_monotone_path():
    c = path_graph(4)
    g = build_gradient(c, load_field(c, [0, 1, 2, 3]))
    assert [(x.cell, x.morse_index) for x in critical_cells(g)] == [(CellId(0, 0), 0)]
    assert g.census() == (1, 0, 0)


def test_cycle_critical_cells():
    c, f, g = cycle_fixture()
    crit = critical_cells(g)
    assert [x.cell for x in crit if x.morse_index == 0] == [CellId(0, 0), CellId(0, 2)]
    assert [x.value for x in crit if x.morse_index == 1] == [3.0, 4.0]


def test_cycle_descending_paths():
    c, f, g = cycle_fixture()
    p = c.lookup((1, 2))
    assert f.cell_value(p) == 3
    paths = descending_paths(g, p)
    assert sorted(path.terminal for path in paths) == [CellId(0, 0), CellId(0, 2)]
    assert len(connecting_paths(g, p, CellId(0, 2))) == 1
    assert len(connecting_paths(g, p, CellId(0, 0))) == 1
    n, path = unique_connector(g, p, CellId(0, 2))
    assert n == 1 and path.cells == (p, CellId(0, 2))


def test_index_mismatch():
    c, f, g = cycle_fixture()
    with pytest.raises(IndexMismatch):
        connecting_paths(g, CellId(0, 0), CellId(0, 2))


@pytest.mark.parametrize("seed", range(10))
def test_octahedron_saddles_have_two_paths(seed):
    c = octahedron()
    f = load_field(c, np.random.default_rng(seed).random(6))
    g = build_gradient(c, f)
    for cc in critical_cells(g):
        if cc.morse_index == 1:
            paths = descending_paths(g, cc)
            assert len(paths) == 2
            assert all(g.is_critical(p.terminal) and p.terminal.dim == 0 for p in paths)


def test_cycle_detection():
    c = cycle_graph(3)
    g = DiscreteGradient.empty(c, load_field(c, [0, 1, 2]))
    for v, (a, b) in [(0, (0, 1)), (1, (1, 2)), (2, (0, 2))]:
        g.pair(CellId(0, v), c.lookup((a, b)))
    assert find_cycle(g) is not None
    assert find_cycle_from(g, [CellId(1, 0)]) is not None
    with pytest.raises(CycleDetected):
        check_acyclic(g)
    with pytest.raises(CycleDetected):
        descending_paths(g, CellId(1, 0))


@pytest.mark.parametrize("name", sorted(medium_complexes()))
@pytest.mark.parametrize("seed", range(4))
def test_gradient_invariants(name, seed):
    c = medium_complexes()[name]
    f = load_field(c, np.random.default_rng(seed).random(c.n_vertices))
    g = build_gradient(c, f)
    assert find_cycle(g) is None
    assert pair_violations(g) == []
    c0, c1, c2 = g.census()
    assert c0 - c1 + c2 == euler_characteristic(c)
    if name in ("octahedron", "torus9"):
        assert c0 >= 1 and c2 >= 1
    for a, b in g.pairs():
        assert f.cell_value(a) == f.cell_value(b)
    # determinism, bit for bit
    g2 = build_gradient(c, load_field(c, f.values.copy()))
    for d in range(3):
        assert np.array_equal(g.up[d], g2.up[d]) and np.array_equal(g.down[d], g2.down[d])


@pytest.mark.parametrize("seed", range(6))
def test_paths_descend(seed):
    c = grid_complex(5, 5)
    f = load_field(c, np.random.default_rng(seed).random(25))
    g = build_gradient(c, f)
    for cc in critical_cells(g):
        for path in descending_paths(g, cc):
            vals = [f.cell_value(x) for x in path.cells]
            assert all(b <= a for a, b in zip(vals, vals[1:]))
            tops = [f.max_vertex(x) for x in path.cells]
            for i in range(1, len(path.cells) - 1, 2):
                # leaving a lower star means a strictly lower value
                if tops[i + 1] != tops[i - 1]:
                    assert vals[i + 1] < vals[i - 1]


@pytest.mark.parametrize("name", sorted(small_complexes()))
def test_oracle_census(name):
    c = small_complexes()[name]
    rng = np.random.default_rng(len(name))
    for _ in range(5):
        f = load_field(c, rng.permutation(c.n_vertices).astype(float))
        best, ties = matching_census_oracle(c, f)
        assert len(ties) == 1
        assert build_gradient(c, f).census() == best


@given(st.integers(0, 2**32 - 1), st.lists(st.integers(0, 24), min_size=1, max_size=4))
def test_rebuild_local_matches_full_build(seed, changed):
    c = grid_complex(5, 5)
    rng = np.random.default_rng(seed)
    f = load_field(c, rng.random(25))
    vals = f.values.copy()
    vals[changed] = rng.random(len(changed))
    f2 = load_field(c, vals)
    a, b = rebuild_local(build_gradient(c, f), f2, changed), build_gradient(c, f2)
    for d in range(3):
        assert np.array_equal(a.up[d], b.up[d]) and np.array_equal(a.down[d], b.down[d])
