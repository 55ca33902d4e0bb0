import pytest
from hypothesis import given, strategies as st

from morse_forge.complex import (
    CellId,
    build_complex,
    cycle_graph,
    cylinder,
    disjoint_union,
    euler_characteristic,
    grid_complex,
    octahedron,
    path_graph,
    split_quads,
    torus_grid,
)
from morse_forge.errors import DanglingVertexIndex, DegenerateSimplex, DuplicateCell, NonManifoldEdge, UnknownCell
from morse_forge.verify import check_complex


def test_single_triangle_counts():
    c = build_complex(triangles=[(0, 1, 2)])
    assert (c.n_vertices, len(c.edges), len(c.triangles)) == (3, 3, 1)
    assert euler_characteristic(c) == 1
    assert all(c.boundary[1])


def test_octahedron_counts_and_closed():
    c = octahedron()
    assert (c.n_vertices, len(c.edges), len(c.triangles)) == (6, 12, 8)
    assert euler_characteristic(c) == 2
    assert not any(c.boundary[0]) and not any(c.boundary[1])
    assert all(len(cf) == 2 for cf in c.edge_cofaces)


def test_edge_list_cycle():
    c = build_complex(edges=[(0, 1), (1, 2), (2, 0)])
    assert (c.n_vertices, len(c.edges)) == (3, 3)
    assert euler_characteristic(c) == 0


def test_nine_vertex_torus():
    c = torus_grid(3)
    assert (c.n_vertices, len(c.edges), len(c.triangles)) == (9, 27, 18)
    assert euler_characteristic(c) == 0
    assert all(len(cf) == 2 for cf in c.edge_cofaces)


def test_cylinder_boundary_rings():
    c = cylinder(8, 4)
    assert len(c.triangles) == 48
    assert euler_characteristic(c) == 0
    ring_ends = {v for v in range(c.n_vertices) if c.boundary[0][v]}
    assert ring_ends == set(range(8)) | set(range(24, 32))


def test_grid_diagonal_rule():
    # lowest corner joined to the opposite one
    assert split_quads([(0, 1, 3, 2)]) == [(0, 1, 3), (0, 3, 2)]
    c = grid_complex(2, 2)
    assert (0, 3) in c.edge_index


@pytest.mark.parametrize("make", [octahedron, lambda: torus_grid(3), lambda: grid_complex(5, 4),
                                  lambda: cylinder(6, 3), lambda: cycle_graph(5), lambda: path_graph(4)])
def test_structural_invariants(make):
    c = make()
    check_complex(c)
    for d in (1, 2):
        for i in range(c.n_cells(d)):
            cell = CellId(d, i)
            assert len(c.faces(cell)) == d + 1
            for face in c.faces(cell):
                assert cell in c.cofaces(face)
    for t, es in enumerate(c.tri_edges):
        for a in es:
            for b in es:
                if a != b:
                    assert len(set(c.edges[a]) & set(c.edges[b])) == 1


def test_errors():
    with pytest.raises(DuplicateCell):
        build_complex(triangles=[(0, 1, 2), (2, 1, 0)])
    with pytest.raises(DuplicateCell):
        build_complex(edges=[(0, 1), (1, 0)])
    with pytest.raises(DanglingVertexIndex):
        build_complex(edges=[(0, 2)])
    with pytest.raises(DegenerateSimplex):
        build_complex(triangles=[(0, 0, 1)])
    with pytest.raises(NonManifoldEdge):
        build_complex(triangles=[(0, 1, 2), (0, 1, 3), (0, 1, 4)])
    with pytest.raises(UnknownCell):
        octahedron().check(CellId(2, 8))
    with pytest.raises(UnknownCell):
        octahedron().lookup((0, 1))


def test_lookup_roundtrip():
    c = octahedron()
    for i, tri in enumerate(c.triangles):
        assert c.lookup(tri[::-1]) == CellId(2, i)


@given(st.integers(3, 7), st.integers(3, 7), st.integers(2, 5), st.integers(2, 5))
def test_euler_additive_over_disjoint_union(n1, n2, a, b):
    for x, y in [(cycle_graph(n1), path_graph(n2)), (grid_complex(a, b), octahedron())]:
        u = disjoint_union(x, y)
        assert euler_characteristic(u) == euler_characteristic(x) + euler_characteristic(y)
