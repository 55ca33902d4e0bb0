"""Complex collections shared by several test modules."""
from morse_forge.complex import (
    build_complex,
    cycle_graph,
    grid_complex,
    octahedron,
    path_graph,
    torus_grid,
)


def small_complexes():
    """Every fixture complex with at most 12 cells."""
    out = {
        "triangle": build_complex(triangles=[(0, 1, 2)]),
        "two_triangles": build_complex(triangles=[(0, 1, 2), (1, 2, 3)]),
        "triangle_boundary": cycle_graph(3),
        "cycle4": cycle_graph(4),
        "cycle5": cycle_graph(5),
        "cycle6": cycle_graph(6),
        "path5": path_graph(5),
        "path6": path_graph(6),
        "star": build_complex(edges=[(0, 1), (0, 2), (0, 3), (0, 4)]),
        "y_graph": build_complex(edges=[(0, 1), (1, 2), (1, 3), (3, 4), (3, 5)]),
    }
    return {k: c for k, c in out.items() if c.total_cells <= 12}


def medium_complexes():
    return {
        "octahedron": octahedron(),
        "torus9": torus_grid(3),
        "grid4": grid_complex(4, 4),
        "grid5x3": grid_complex(5, 3),
        "cycle9": cycle_graph(9),
        "path9": path_graph(9),
    }
