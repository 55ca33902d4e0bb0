"""Readers and writers: OFF meshes, field CSVs, JSON reports, pair CSVs, SVG schematics.

Every writer is deterministic: rows are ordered by id, floats are written
with ``repr`` (shortest round-trip form) and JSON keys are sorted.
"""
from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .complex import CellComplex, CellId, build_complex, cycle_graph, path_graph
from .errors import ComplexError, FieldError, ParseError
from .field import ScalarField, load_field


def _lines(text: str) -> list[tuple[int, str]]:
    """Non-empty lines with comments stripped, tagged with 1-based line numbers."""
    out = []
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            out.append((no, line))
    return out


def _read_text(path) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"{path}: {exc.strerror or exc}") from None
    except UnicodeDecodeError:
        raise ParseError(f"{path}: not a text file") from None


# --- OFF -----------------------------------------------------------------------

def parse_off(text: str, source: str = "<off>") -> CellComplex:
    lines = _lines(text)
    if not lines or not lines[0][1].startswith("OFF"):
        raise ParseError(f"{source}: missing OFF header")
    rest = lines[0][1][3:].split()
    body = lines[1:]
    if not rest:
        if not body:
            raise ParseError(f"{source}: missing counts line")
        (no, counts), body = body[0], body[1:]
        rest = counts.split()
    else:
        no = lines[0][0]
    try:
        nv, nf = int(rest[0]), int(rest[1])
    except (IndexError, ValueError):
        raise ParseError(f"{source}:{no}: counts line must read 'V F E'") from None
    if nv < 0 or nf < 0:
        raise ParseError(f"{source}:{no}: negative counts")
    if len(body) < nv + nf:
        raise ParseError(f"{source}: expected {nv} vertices and {nf} faces, file ends early")
    coords = []
    for no, line in body[:nv]:
        parts = line.split()
        try:
            xyz = [float(x) for x in parts[:3]]
        except ValueError:
            raise ParseError(f"{source}:{no}: bad vertex line {line!r}") from None
        if len(xyz) != 3 or not all(math.isfinite(x) for x in xyz):
            raise ParseError(f"{source}:{no}: bad vertex line {line!r}")
        coords.append(xyz)
    tris = []
    for no, line in body[nv:nv + nf]:
        try:
            parts = [int(x) for x in line.split()]
        except ValueError:
            raise ParseError(f"{source}:{no}: bad face line {line!r}") from None
        if len(parts) != 4 or parts[0] != 3:
            raise ParseError(f"{source}:{no}: only triangles '3 i j k' are supported")
        if not all(0 <= v < nv for v in parts[1:]):
            raise ParseError(f"{source}:{no}: vertex index out of range in {line!r}")
        tris.append(parts[1:])
    if len(body) > nv + nf:
        raise ParseError(f"{source}:{body[nv + nf][0]}: trailing data after the last face")
    try:
        return build_complex(triangles=tris, n_vertices=nv, coords=np.array(coords).reshape(-1, 3))
    except ComplexError as exc:
        raise ParseError(f"{source}: {exc}") from None


def read_off(path) -> CellComplex:
    return parse_off(_read_text(path), str(path))


def format_off(c: CellComplex) -> str:
    coords = c.coords if c.coords is not None else np.zeros((c.n_vertices, 3))
    coords = np.asarray(coords, dtype=float)
    if coords.shape[1] < 3:
        coords = np.column_stack([coords, np.zeros((len(coords), 3 - coords.shape[1]))])
    out = ["OFF", f"{c.n_vertices} {len(c.triangles)} {len(c.edges)}"]
    out += [" ".join(repr(float(x)) for x in row[:3]) for row in coords]
    out += [f"3 {a} {b} {t}" for a, b, t in c.triangles]
    return "\n".join(out) + "\n"


def write_off(path, c: CellComplex):
    Path(path).write_text(format_off(c))


# --- fields --------------------------------------------------------------------

def parse_field_csv(text: str, c: CellComplex, source: str = "<csv>") -> ScalarField:
    """Rows ``vertex_id,value``; an optional header row is skipped."""
    vals: dict[int, float] = {}
    for k, (no, line) in enumerate(_lines(text)):
        parts = [p.strip() for p in line.split(",")]
        if len(parts) != 2:
            raise ParseError(f"{source}:{no}: expected 'vertex_id,value', got {line!r}")
        try:
            v, x = int(parts[0]), float(parts[1])
        except ValueError:
            if k == 0:
                continue
            raise ParseError(f"{source}:{no}: expected 'vertex_id,value', got {line!r}") from None
        if not 0 <= v < c.n_vertices:
            raise ParseError(f"{source}:{no}: vertex {v} not in the mesh")
        if v in vals:
            raise ParseError(f"{source}:{no}: vertex {v} given twice")
        vals[v] = x
    missing = c.n_vertices - len(vals)
    if missing:
        first = next(v for v in range(c.n_vertices) if v not in vals)
        raise ParseError(f"{source}: {missing} vertices have no value (first: {first})")
    try:
        return load_field(c, [vals[v] for v in range(c.n_vertices)])
    except FieldError as exc:
        raise ParseError(f"{source}: {exc}") from None


def read_field_csv(path, c: CellComplex) -> ScalarField:
    return parse_field_csv(_read_text(path), c, str(path))


def format_field_csv(f: ScalarField) -> str:
    rows = ["vertex_id,value"] + [f"{v},{float(x)!r}" for v, x in enumerate(f.values)]
    return "\n".join(rows) + "\n"


def write_field_csv(path, f: ScalarField):
    Path(path).write_text(format_field_csv(f))


def parse_values_csv(text: str, source: str = "<csv>") -> np.ndarray:
    """One value per line, for 1-D profiles."""
    out = []
    for k, (no, line) in enumerate(_lines(text)):
        try:
            x = float(line.split(",")[-1])
        except ValueError:
            if k == 0:
                continue
            raise ParseError(f"{source}:{no}: not a number: {line!r}") from None
        if not math.isfinite(x):
            raise ParseError(f"{source}:{no}: non-finite value")
        out.append(x)
    if len(out) < 2:
        raise ParseError(f"{source}: need at least two values")
    return np.array(out)


def read_values_csv(path) -> np.ndarray:
    return parse_values_csv(_read_text(path), str(path))


def format_values_csv(values: Sequence[float]) -> str:
    return "".join(f"{float(x)!r}\n" for x in values)


def write_values_csv(path, values: Sequence[float]):
    Path(path).write_text(format_values_csv(values))


def read_1d(path, cyclic: bool = False) -> ScalarField:
    """A 1-D values CSV as a field on a path graph, or a cycle graph with ``cyclic``."""
    vals = read_values_csv(path)
    if cyclic and len(vals) < 3:
        raise ParseError(f"{path}: a cycle needs at least three values")
    c = cycle_graph(len(vals)) if cyclic else path_graph(len(vals))
    return load_field(c, vals)


# --- reports -------------------------------------------------------------------

def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, CellId):
        return str(obj)
    return obj


def format_json(obj) -> str:
    return json.dumps(_plain(obj), indent=2, sort_keys=True) + "\n"


def write_json(path, obj):
    Path(path).write_text(format_json(obj))


PAIR_COLUMNS = ("birth_dim", "birth_index", "birth_value", "death_dim", "death_index",
                "death_value", "persistence", "essential")


def format_pairs_csv(pairs: Iterable) -> str:
    """Persistence pairs; essential classes leave the death columns empty."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(PAIR_COLUMNS)
    rows = sorted(pairs, key=lambda pp: (pp.birth.cell.dim, pp.birth.value, pp.birth.cell.index))
    for pp in rows:
        b, d = pp.birth, pp.death
        w.writerow([b.cell.dim, b.cell.index, repr(float(b.value)),
                    "" if d is None else d.cell.dim,
                    "" if d is None else d.cell.index,
                    "" if d is None else repr(float(d.value)),
                    "inf" if pp.essential else repr(float(pp.persistence)),
                    "true" if pp.essential else "false"])
    return buf.getvalue()


# --- SVG -----------------------------------------------------------------------

_COLORS = {0: "#1f77b4", 1: "#2ca02c", 2: "#d62728"}


def svg_schematic(f: ScalarField, critical, paths=(), size: int = 480) -> str:
    """Static picture of critical cells and connecting paths.

    1-D inputs are drawn as the value profile over the vertex index.  Inputs
    with planar coordinates (grids) are drawn from above with vertex shading
    by value.  Critical cells are marked at their top vertex, coloured by
    index; each path is a polyline through the top vertices it visits.
    """
    c = f.complex
    vals = f.values
    lo, hi = float(vals.min()), float(vals.max())
    span = hi - lo or 1.0
    pad = 20
    if c.triangles and c.coords is not None:
        xy = np.asarray(c.coords, dtype=float)[:, :2]
    else:
        xy = np.column_stack([np.arange(c.n_vertices, dtype=float), vals])
    mn, mx = xy.min(axis=0), xy.max(axis=0)
    scale = (size - 2 * pad) / np.where(mx - mn > 0, mx - mn, 1.0)
    pts = pad + (xy - mn) * scale
    pts[:, 1] = size - pts[:, 1]

    def at(v):
        return f"{pts[v, 0]:.2f},{pts[v, 1]:.2f}"

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
           f'viewBox="0 0 {size} {size}">',
           f'<rect width="{size}" height="{size}" fill="white"/>']
    if c.triangles:
        for v in range(c.n_vertices):
            g = int(230 - 180 * (vals[v] - lo) / span)
            out.append(f'<circle cx="{pts[v, 0]:.2f}" cy="{pts[v, 1]:.2f}" r="2" '
                       f'fill="rgb({g},{g},{g})"/>')
    else:
        for a, b in c.edges:
            out.append(f'<line x1="{pts[a, 0]:.2f}" y1="{pts[a, 1]:.2f}" x2="{pts[b, 0]:.2f}" '
                       f'y2="{pts[b, 1]:.2f}" stroke="#888" stroke-width="1"/>')
    for path in paths:
        verts = []
        for cell in path.cells:
            v = f.max_vertex(cell)
            if not verts or verts[-1] != v:
                verts.append(v)
        out.append(f'<polyline points="{" ".join(at(v) for v in verts)}" fill="none" '
                   f'stroke="#ff7f0e" stroke-width="1.5"/>')
    for cc in critical:
        v = f.max_vertex(cc.cell)
        out.append(f'<circle cx="{pts[v, 0]:.2f}" cy="{pts[v, 1]:.2f}" r="4" '
                   f'fill="{_COLORS[cc.morse_index]}"><title>{cc.cell} {cc.value!r}</title></circle>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
