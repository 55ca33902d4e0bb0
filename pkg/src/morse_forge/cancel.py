"""Cancellation of a critical pair joined by a single V-path.

The pipeline for a pair ``(p, q)`` of indices ``(k+1, k)``:

1. ``is_cancelable`` checks the index gap, uniqueness of the connecting
   path and that every other descending path from ``p`` escapes below
   ``value(q) - epsilon``.  It dry-runs the realization to fix the support.
2. ``cancel_pair`` reverses the connecting path in the matching.
3. ``realize_function`` moves vertex values inside a narrow band so that the
   reversed matching becomes the lower-star gradient of the new field.  The
   values along the path follow ``cancel_1d``; everything forced below them
   is spread evenly along its constraint chain above ``value(q) - epsilon``.
   A plan is only issued once this realization has been dry-run and checked.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .complex import CellComplex, CellId
from .errors import (
    BudgetTooTight,
    CycleDetected,
    EndpointOrder,
    FrontierConflict,
    IndexMismatch,
    MarginNotMonotone,
    NonMonotoneCensus,
    NotCritical,
    OrbitBelowLevelMissing,
    StalePlan,
)
from .field import ScalarField, load_field
from .gradient import (
    CriticalCell,
    DiscreteGradient,
    VPath,
    lower_star_matching,
    as_critical,
    build_gradient,
    check_acyclic,
    continuation_floor,
    pair_violations,
    reachable,
    rebuild_local,
    terminal_counts,
    unique_connector,
)
from .persist import persistence_pairs, schedule

log = logging.getLogger(__name__)

# grid size used to certify the deformation of every issued plan
SCAN_SAMPLES = 21
# lowered vertices keep 1/(HUG+1) of their room below the bound they must respect
HUG = 8
# how many anchors may be swapped while breaking order cycles
MAX_REANCHOR = 64


@dataclass(frozen=True)
class Rejection:
    reason: str
    detail: str = ""

    def __bool__(self):
        return False


@dataclass(frozen=True)
class CancellationPlan:
    p: CriticalCell
    q: CriticalCell
    path: VPath
    support: frozenset
    epsilon: float
    persistence: float
    token: int = field(repr=False)
    moves: tuple = field(repr=False, default=())
    # False when the new gradient re-matches some pairs of the reversed one
    exact: bool = field(repr=False, default=True)
    # (f, f2, g_new, scan) from the dry run, reused by execute
    _checked: tuple | None = field(repr=False, compare=False, default=None)

    @property
    def support_vertices(self) -> set[int]:
        return {x.index for x in self.support if x.dim == 0}

    def same_as(self, other: "CancellationPlan") -> bool:
        return (self.p.cell, self.q.cell, self.path, self.support) == (
            other.p.cell, other.q.cell, other.path, other.support)


@dataclass
class MonotoneProfile:
    u: np.ndarray
    h: np.ndarray
    h1: np.ndarray


@dataclass
class PathCensus:
    t_samples: list[float]
    census_per_t: list[dict[int, int]]
    t_star: float | None
    transitions: int


def default_epsilon(persistence: float, scale: float = 1.0) -> float:
    if persistence > 0:
        return persistence / 100
    return 1e-9 * max(1.0, abs(scale))


# --- 1-D kernel --------------------------------------------------------------

def cancel_1d(h, margin: int = 1) -> MonotoneProfile:
    """Strictly increasing minorant of ``h`` that agrees with it near both ends."""
    h = np.asarray(h, dtype=float)
    n = len(h)
    if margin < 1 or n < 2:
        raise ValueError("need margin >= 1 and at least two samples")
    if not h[0] < h[-1]:
        raise EndpointOrder(f"h(first)={h[0]} is not below h(last)={h[-1]}")
    m = min(margin, n)
    head, tail = h[:m], h[n - m:]
    if np.any(np.diff(head) <= 0) or np.any(np.diff(tail) <= 0):
        raise MarginNotMonotone("h is not strictly increasing on the margins")
    u = np.linspace(0.0, 1.0, n)
    if 2 * m >= n:
        if np.any(np.diff(h) <= 0):
            raise MarginNotMonotone("margins overlap but h is not increasing")
        return MonotoneProfile(u, h.copy(), h.copy())
    suffix_min = np.minimum.accumulate(h[::-1])[::-1]
    floor = h[m - 1]
    if not suffix_min[m] > floor:
        raise EndpointOrder("h dips to or below its head margin; no increasing minorant exists")
    delta = min((h[-1] - h[0]) / (10 * n), (suffix_min[m] - floor) / (n + 1))
    h1 = h.copy()
    for i in range(n - m - 1, m - 1, -1):
        h1[i] = suffix_min[i] if suffix_min[i] < h1[i + 1] else h1[i + 1] - delta
    return MonotoneProfile(u, h, h1)


# --- order constraints from a matching ----------------------------------------

def _top(f: ScalarField, cell: CellId) -> int:
    return cell.index if cell.dim == 0 else f.max_vertex(cell)


def _other_vertex(c: CellComplex, face: CellId, coface: CellId) -> int:
    (w,) = set(c.vertices(coface)) - set(c.vertices(face))
    return w


def _pair_constraints(g: DiscreteGradient, verts) -> set[tuple[int, tuple[int, ...]]]:
    """Pairs of ``g`` near ``verts`` as ``(w, face vertices)``; ``w`` must sit below the face top."""
    c = g.complex
    out = set()
    for v in verts:
        for sigma in c.star(v):
            tau = g.partner(sigma)
            if tau is None:
                continue
            if tau.dim < sigma.dim:
                sigma, tau = tau, sigma
            out.add((_other_vertex(c, sigma, tau), tuple(c.vertices(sigma))))
    return out


def _resolve(constraints, base, moved, guess, flip: bool = False, banned=frozenset()):
    """Anchor each constraint ``w < max(face)`` to one face vertex.

    Returns edges ``(a, b)`` meaning ``a`` must end below ``b`` in ``base``.
    With ``flip`` the values are negated (raising in the original field),
    so ``w`` becomes the upper end and the anchor the lower one; ties then
    break on ``-index``.

    A fixed face vertex already on the right side of a fixed ``w`` settles
    the constraint.  Otherwise the anchor is the face vertex expected to end
    on the far side: its own value if it stays put, ``guess(v)`` if it moves.
    """
    s = -1 if flip else 1

    memo: dict[int, tuple] = {}

    def goodness(v):
        g = memo.get(v)
        if g is None:
            g = (guess(v) if v in moved else base[v], s * v)
            if flip:
                g = (-g[0], -g[1])
            memo[v] = g
        return g

    # edge -> goodness of the best alternative anchor, None if some
    # constraint behind the edge has no alternative
    out: dict[tuple[int, int], tuple | None] = {}

    def add(w, m, face):
        edge = (m, w) if flip else (w, m)
        alts = [goodness(u) for u in face if u != m]
        alt = max(alts) if alts else None
        if edge in out and (out[edge] is None or alt is None):
            out[edge] = None
        else:
            out[edge] = alt if edge not in out else min(out[edge], alt)

    for w, face in constraints:
        kw = (base[w], s * w)
        face = [u for u in face if (w, u) not in banned]
        if not face:
            raise FrontierConflict(f"no admissible anchor left for vertex {w}")
        if w not in moved:
            ok = [u for u in face if u not in moved and ((base[u], s * u) < kw if flip else (base[u], s * u) > kw)]
            if ok:
                add(w, ok[0], face)
                continue
            # a fixed face vertex on the wrong side of a fixed w can never
            # become the top, so only moving vertices may anchor
            face = [u for u in face if u in moved] or face
        add(w, max(face, key=goodness), face)
    return out


class _Cyclic(FrontierConflict):
    def __init__(self, stuck):
        super().__init__("order constraints around the path are cyclic")
        self.stuck = set(stuck)


class _ForcedCycle(FrontierConflict):
    """No choice of anchors breaks the order cycle; only relaxing can help."""


def _cycle_edges(edges, nodes) -> list[tuple[int, int]]:
    """Edges of one directed cycle inside ``nodes``."""
    succ: dict[int, list[int]] = {}
    for a, b in edges:
        if a in nodes and b in nodes:
            succ.setdefault(a, []).append(b)
    # every stuck node has a stuck predecessor, so walking backwards must loop
    pred = {b: a for a, bs in succ.items() for b in bs}
    v = next(iter(sorted(nodes)))
    seen: dict[int, int] = {}
    walk = []
    while v not in seen:
        seen[v] = len(walk)
        walk.append(v)
        v = pred[v]
    loop = walk[seen[v]:]
    return [(loop[i + 1], loop[i]) if i + 1 < len(loop) else (loop[0], loop[-1])
            for i in range(len(loop))]


def _place(base, moved: set[int], edges, caps: dict[int, float], floor: float) -> dict[int, float]:
    """Values for the moved vertices.

    A vertex keeps its target (its cap, or its own value) when that fits
    strictly between what must lie below and above it.  Otherwise it goes
    just under its upper bound, leaving room for the chain above it.
    """
    preds = {v: set() for v in moved}
    succs = {v: set() for v in moved}
    strict = {v: np.inf for v in moved}
    target = {v: min(caps.get(v, base[v]), base[v]) for v in moved}
    fixed_low = {v: [] for v in moved}
    for w, m in edges:
        if w in moved and m in moved:
            preds[m].add(w)
            succs[w].add(m)
        elif w in moved:
            strict[w] = min(strict[w], base[m])
        elif m in moved:
            fixed_low[m].append(base[w])
    indeg = {v: len(preds[v]) for v in moved}
    ready = [v for v in moved if indeg[v] == 0]
    order = []
    while ready:
        v = ready.pop()
        order.append(v)
        for s in succs[v]:
            indeg[s] -= 1
            if indeg[s] == 0:
                ready.append(s)
    if len(order) != len(moved):
        raise _Cyclic([v for v in moved if indeg[v] > 0])
    bound, hi_star, above = {}, {}, {}
    for v in reversed(order):
        bound[v] = min([strict[v]] + [hi_star[s] for s in succs[v]])
        hi_star[v] = min(bound[v], target[v])
        above[v] = 1 + max((above[s] for s in succs[v]), default=-1)
    x: dict[int, float] = {}
    for v in order:
        top = hi_star[v]
        lows = [x[u] for u in preds[v]] + [b for b in fixed_low[v] if b < top]
        hard = max(lows, default=-np.inf)
        if hard < target[v] < bound[v]:
            x[v] = float(target[v])
            continue
        if floor < top:
            lows.append(floor)
        if lows:
            low = max(lows)
        else:
            low = top - max(base[v] - top, 1e-9 * max(1.0, abs(top)))
        val = top - (top - low) * (above[v] + 1) / (above[v] + 1 + HUG)
        if not low < val < top:
            raise FrontierConflict(f"no room to place vertex {v} in ({low}, {top})")
        x[v] = val
    return x


def _lower_cascade(g: DiscreteGradient, base: np.ndarray, caps: dict[int, float], floor: float,
                   flip: bool = False, relax: bool = False, budget: float = np.inf) -> dict[int, float]:
    """Lower vertices of ``base`` until every pair of ``g`` shares a lower star.

    Values only decrease.  The set of moved vertices grows until no fixed
    vertex sits above a moved one it must stay below.  With ``flip``,
    ``base`` holds negated values and the lower-star condition is read in
    the original field, so the same code raises vertices there.

    Some reversed matchings are not the lower-star gradient of any field:
    their order constraints close a cycle whatever anchors are chosen.
    With ``relax`` such a cycle is cut at a pair away from the arc; that
    pair is then re-matched by the local rebuild instead of being kept.
    The cascade stops early once some vertex would move more than ``budget``.
    """
    s = -1 if flip else 1
    base = base.tolist() if isinstance(base, np.ndarray) else base
    moved = {v for v, cap in caps.items() if cap < base[v]}
    banned: set[tuple[int, int]] = set()
    dropped: set[tuple[int, int]] = set()
    constraints: set = set()
    seen: set[int] = set()
    while True:
        constraints |= _pair_constraints(g, moved - seen)
        seen |= moved
        edges = _resolve(constraints, base, moved, lambda v: caps.get(v, floor), flip, banned)
        for e in dropped:
            edges.pop(e, None)
        try:
            x = _place(base, moved, edges, caps, floor)
        except _Cyclic as exc:
            if len(banned) + len(dropped) > MAX_REANCHOR:
                raise FrontierConflict(str(exc)) from None
            cycle = _cycle_edges(edges, exc.stuck)
            loose = [e for e in cycle if edges[e] is not None]
            if loose:
                # swap the anchor whose best alternative looks safest
                a, b = max(loose, key=lambda e: edges[e])
                banned.add((b, a) if flip else (a, b))
            elif relax:
                dropped.add(min(cycle, key=lambda e: ((e[0] in caps) + (e[1] in caps), e)))
            else:
                raise _ForcedCycle(str(exc)) from None
            continue
        worst = max((base[v] - val for v, val in x.items()), default=0.0)
        if worst > budget:
            raise FrontierConflict(f"perturbation {worst} exceeds bound")
        grow = {a for a, b in edges
                if a not in moved and (base[a], s * a) > (x.get(b, base[b]), s * b)}
        if not grow:
            return {v: val for v, val in x.items() if val != base[v]}
        moved |= grow


def _reverse(g: DiscreteGradient, path: VPath) -> DiscreteGradient:
    out = g.copy()
    cells = path.cells
    for i in range(1, len(cells) - 1, 2):
        out.unpair(cells[i])
    for i in range(0, len(cells) - 1, 2):
        out.pair(cells[i + 1], cells[i])
    return out


def _arc(f: ScalarField, path: VPath) -> list[int]:
    """Distinct top vertices along ``path``, from ``p`` down to ``q``."""
    arc = []
    for cell in path.cells:
        v = _top(f, cell)
        if not arc or arc[-1] != v:
            arc.append(v)
    return arc


def _arc_caps(arc: list[int], vals: np.ndarray, floor: float, top_q: float, epsilon: float,
              profile: str = "minorant") -> dict[int, float] | None:
    """Target values for the arc vertices, increasing along ``arc``.

    ``vals`` decrease along the arc and end at ``top_q``.  ``minorant`` is
    the ``cancel_1d`` profile.  ``mirror`` flips the arc affinely into
    ``[top_q - epsilon/2, top_q]`` so that every consecutive pair of arc
    vertices swaps order at the same instant of the straight-line
    deformation; it is also an increasing minorant with the same margins.
    Returns None when the profile does not apply.
    """
    vals = np.asarray(vals, dtype=np.float64)
    if profile == "mirror":
        span = vals[0] - vals[-1]
        if len(arc) < 2 or not span > 0 or np.any(np.diff(vals) >= 0):
            return None
        lo = top_q - epsilon / 2
        h1 = lo + (top_q - lo) * (vals[0] - vals) / span
        if np.any(np.diff(h1) <= 0) or not h1[0] > floor:
            return None
        return {v: float(x) for v, x in zip(arc, h1)}
    h = np.concatenate([[floor], vals, [top_q + epsilon]])
    prof = cancel_1d(h, margin=1)
    return {v: float(x) for v, x in zip(arc, prof.h1[1:-1])}


# realization candidates, tried in order: which way vertices move, and the arc profile
CANDIDATES = tuple((mode, profile, relax)
                   for relax in (False, True)
                   for profile in ("mirror", "minorant")
                   for mode in ("lower", "raise"))


def _dry_run(g, f, p, q, path, epsilon, mode="lower", profile="minorant", relax=False):
    """Reversed matching, new values and the resulting gradient.

    ``lower`` pulls the arc from ``p`` down to the level of ``q``; ``raise``
    is the same construction on ``-f`` and lifts the arc from ``q`` up to
    the level of ``p``.  ``relax`` lets the new gradient differ from the
    reversed matching away from the arc (same census, checked later).
    """
    g2 = _reverse(g, path)
    check_acyclic(g2, path.cells[::2])
    arc = _arc(f, path)
    if mode == "lower":
        base, level, flip = f.values, q.value, False
    else:
        base, level, flip = -f.values, -p.value, True
        arc = arc[::-1]
    floor = level - epsilon
    caps = _arc_caps(arc, base[arc], floor, level, epsilon, profile)
    if caps is None:
        raise FrontierConflict(f"{profile} profile does not apply")
    moves = _lower_cascade(g2, base, caps, floor, flip, relax, p.value - q.value + epsilon)
    if flip:
        moves = {v: -x for v, x in moves.items()}
    new_vals = f.values.copy()
    for v, x in moves.items():
        new_vals[v] = x
    f2 = load_field(f.complex, new_vals)
    touched = set(moves) | set(arc)
    g_new = rebuild_local(g2, f2, touched)
    return g2, moves, f2, g_new


def _support(g, f, p, q, path, epsilon, moves, g_new) -> frozenset:
    c = g.complex
    base = reachable(g, p.cell, q.value - epsilon) | set(path.cells)
    sup = set(base)
    for cell in base:
        sup.update(c.cofaces(cell))
    for v in moves:
        sup.update(c.star(v))
    keep = {p.cell, q.cell}
    survivors = (set(g.critical()) | set(g_new.critical())) - keep
    return frozenset(sup - survivors)


# --- public operations ---------------------------------------------------------

def is_cancelable(g: DiscreteGradient, f: ScalarField, p, q, epsilon: float | None = None,
                  require_escape: bool = True):
    """A ``CancellationPlan`` or a falsy ``Rejection`` naming the failed check."""
    p, q = as_critical(g, p), as_critical(g, q)
    for x in (p, q):
        if not g.is_critical(x.cell):
            raise NotCritical(f"{x.cell} is matched")
    p = CriticalCell(p.cell, p.cell.dim, f.cell_value(p.cell))
    q = CriticalCell(q.cell, q.cell.dim, f.cell_value(q.cell))
    if p.morse_index != q.morse_index + 1:
        return Rejection("IndexMismatch", f"index {p.morse_index} vs {q.morse_index}")
    persistence = p.value - q.value
    n, path = unique_connector(g, p.cell, q.cell)
    if n == 0:
        return Rejection("NoPath", f"no V-path from {p.cell} to {q.cell}")
    if n > 1:
        return Rejection("MultiplePaths", f"{n} V-paths from {p.cell} to {q.cell}")
    if not (f.rank[_top(f, p.cell)] > f.rank[_top(f, q.cell)]):
        return Rejection("NoPath", "connector does not descend")
    floors = {}
    for term, k in terminal_counts(g, p.cell).items():
        if term == q.cell:
            k -= 1
        if k:
            floors[term] = continuation_floor(g, term)
    if epsilon is None:
        epsilon = default_epsilon(persistence, q.value)
        # keep every other escape strictly below the band under q
        below = [x for x in floors.values() if x < q.value]
        if below:
            epsilon = min(epsilon, (q.value - max(below)) / 2)
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    level = q.value - epsilon
    if require_escape:
        for term, x in floors.items():
            if not x < level:
                return Rejection("TrappedOrbit", f"path from {p.cell} rests at {term} above {level}")
    failures = []
    cyclic = set()
    for mode, profile, relax in CANDIDATES:
        if relax and (mode, profile) not in cyclic:
            # relaxing only changes anything once the exact run met a forced cycle
            continue
        try:
            g2, moves, f2, g_new = _dry_run(g, f, p, q, path, epsilon, mode, profile, relax)
            support = _support(g, f, p, q, path, epsilon, moves, g_new)
            plan = CancellationPlan(p, q, path, support, epsilon, persistence, g.token,
                                    tuple(sorted(moves.items())), exact=not relax)
            _check_realization(g2, f, f2, g_new, plan)
            scan = sample_deformation(f, f2, plan, SCAN_SAMPLES)
            if scan.transitions != 1:
                raise FrontierConflict(f"support census changes {scan.transitions} times along the deformation")
            object.__setattr__(plan, "_checked", (f, f2, g_new, scan))
        except (FrontierConflict, NonMonotoneCensus) as exc:
            if isinstance(exc, _ForcedCycle):
                cyclic.add((mode, profile))
            failures.append(f"{mode}/{profile}{'/relaxed' if relax else ''}: {exc}")
            continue
        return plan
    return Rejection("FrontierConflict", "; ".join(failures))


def cancel_pair(g: DiscreteGradient, plan: CancellationPlan) -> DiscreteGradient:
    """Matching with the connecting path of ``plan`` reversed."""
    if plan.token != g.token:
        raise StalePlan("gradient changed since the plan was made")
    out = _reverse(g, plan.path)
    check_acyclic(out, plan.path.cells[::2])
    return out


def _check_realization(g2: DiscreteGradient, f: ScalarField, f2: ScalarField,
                       g_new: DiscreteGradient, plan: CancellationPlan):
    """Raise FrontierConflict unless ``f2`` realizes ``g2`` within the plan's contract."""
    pair = (plan.p.cell, plan.q.cell)
    moved = set(np.flatnonzero(f2.values != f.values).tolist())
    outside = moved - plan.support_vertices
    if outside:
        raise FrontierConflict(f"vertices {sorted(outside)[:5]} moved outside the support", pair)
    near = moved | {_top(f, x) for x in plan.path.cells}
    bad = pair_violations(g2 if plan.exact else g_new, f2, near)
    if bad:
        raise FrontierConflict(f"{len(bad)} pairs leave their lower star, e.g. {bad[0]}", pair)
    if g_new.census() != g2.census():
        raise FrontierConflict(f"census {g_new.census()} != {g2.census()}", pair)
    dev = float(np.max(np.abs(f2.values - f.values))) if moved else 0.0
    if dev > plan.persistence + plan.epsilon:
        raise FrontierConflict(f"perturbation {dev} exceeds bound", pair)


def _realize(g2: DiscreteGradient, f: ScalarField, plan: CancellationPlan):
    new_vals = f.values.copy()
    for v, x in plan.moves:
        new_vals[v] = x
    f2 = load_field(f.complex, new_vals)
    touched = {v for v, _ in plan.moves} | {_top(f, x) for x in plan.path.cells}
    g_new = rebuild_local(g2, f2, touched)
    _check_realization(g2, f, f2, g_new, plan)
    return f2, g_new


def realize_function(g2: DiscreteGradient, f: ScalarField, plan: CancellationPlan) -> ScalarField:
    """Field whose lower-star gradient has the census of ``g2``; equals ``f`` off the support."""
    return _realize(g2, f, plan)[0]


def descending_region(g: DiscreteGradient, f: ScalarField, p: CellId, a: float) -> set[int]:
    """Vertices above ``a`` on descending paths of ``p``, closed under the matching order."""
    c = g.complex
    region = set()
    for cell in reachable(g, p, a):
        for v in c.vertices(cell):
            if f.values[v] > a:
                region.add(v)
    while True:
        edges = _resolve(_pair_constraints(g, region), f.values, region, lambda v: a)
        grow = {w for w, m in edges if m in region and w not in region and f.values[w] > a}
        if not grow:
            return region
        region |= grow


def lower_critical_value(g: DiscreteGradient, f: ScalarField, p, a: float, epsilon: float) -> ScalarField:
    """Push the value of ``p`` into ``(a, a + epsilon)`` keeping ``g`` a valid gradient."""
    p = as_critical(g, p)
    value = f.cell_value(p.cell)
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    if not a < value:
        raise ValueError(f"level {a} is not below value {value}")
    if value < a + epsilon:
        return f
    for term in terminal_counts(g, p.cell):
        if continuation_floor(g, term) > a:
            raise OrbitBelowLevelMissing(f"descending path to {term} stays above {a}")
    region = sorted(descending_region(g, f, p.cell, a), key=lambda v: (f.values[v], v))
    n = len(region)
    old = f.values[region]
    # compress towards a: order is kept and no vertex ever rises, so fixed
    # anchors above a moving vertex stay above it; shrink further while a
    # fixed anchor between a and the old value is still overtaken
    scale = epsilon / (old[-1] - a) * n / (n + 1)
    for _ in range(60):
        new = a + (old - a) * scale
        if np.any(np.diff(new) < 0) or np.any(np.diff(new)[np.diff(old) > 0] == 0) or not new[0] > a:
            break
        vals = f.values.copy()
        vals[region] = new
        f2 = load_field(f.complex, vals)
        if not pair_violations(g, f2, region):
            return f2
        scale /= 2
    raise BudgetTooTight(f"cannot fit {n} vertices inside ({a}, {a + epsilon}) without breaking a matched pair")


def _ranks(values: np.ndarray) -> np.ndarray:
    order = np.lexsort((np.arange(len(values)), values))
    rank = np.empty(len(values), dtype=np.int64)
    rank[order] = np.arange(len(values))
    return rank


def _census(c: CellComplex, rank: np.ndarray, verts, support) -> dict[int, int]:
    out = {0: 0, 1: 0, 2: 0}
    for v in verts:
        for cell in lower_star_matching(c, rank, v)[1]:
            if cell in support:
                out[cell.dim] += 1
    return {k: n for k, n in out.items() if n}


def support_census(f: ScalarField, support) -> dict[int, int]:
    """Critical cells of the lower-star gradient of ``f`` that lie in ``support``, by dimension."""
    c = f.complex
    verts = sorted({v for cell in support for v in c.vertices(cell)})
    return _census(c, f.rank, verts, support)


def sample_deformation(f: ScalarField, f_prime: ScalarField, plan: CancellationPlan, n: int) -> PathCensus:
    """Support census along ``(1 - t) f + t f'`` on a uniform grid of ``n`` times."""
    if n < 3:
        raise ValueError("need n >= 3")
    c = f.complex
    support = plan.support
    verts = sorted({v for cell in support for v in c.vertices(cell)})
    moved = set(np.flatnonzero(f.values != f_prime.values).tolist())
    # a lower star depends only on the order of the vertex and its
    # neighbours; vertices with no moving neighbour never change
    local = {v: [v, *c.neighbors(v)] for v in verts}
    dynamic = [v for v in verts if moved.intersection(local[v])]
    static = _census(c, f.rank, [v for v in verts if v not in set(dynamic)], support)
    watch = np.array(sorted({u for v in dynamic for u in local[v]}), dtype=np.int64)
    # neighbourhoods as rows of positions into ``watch``; short rows are
    # padded with a slot that always ranks last
    pos = {u: i for i, u in enumerate(watch.tolist())}
    width = max((len(local[v]) for v in dynamic), default=1)
    rows = np.full((len(dynamic), width), len(watch), dtype=np.int64)
    for i, v in enumerate(dynamic):
        rows[i, :len(local[v])] = [pos[u] for u in local[v]]
    cache: dict = {}
    ts = np.linspace(0.0, 1.0, n)
    census = []
    last_order = None
    for t in ts:
        vals = (1 - t) * f.values + t * f_prime.values
        order = np.lexsort((watch, vals[watch]))
        if last_order is not None and np.array_equal(order, last_order):
            census.append(dict(census[-1]))
            continue
        last_order = order
        wrank = np.empty(len(watch) + 1, dtype=np.int64)
        wrank[order] = np.arange(len(watch))
        wrank[-1] = len(watch)
        perms = np.argsort(wrank[rows], axis=1).tolist()
        rank = None
        out = dict(static)
        for v, perm in zip(dynamic, perms):
            key = (v, tuple(perm))
            crit = cache.get(key)
            if crit is None:
                if rank is None:
                    rank = _ranks(vals)
                crit = cache[key] = lower_star_matching(c, rank, v)[1]
            for cell in crit:
                if cell in support:
                    out[cell.dim] = out.get(cell.dim, 0) + 1
        census.append(out)
    t_star = None
    for t, cen in zip(ts, census):
        if not cen and t_star is None:
            t_star = float(t)
        elif cen and t_star is not None:
            raise NonMonotoneCensus(f"support census {cen} reappears at t={t}")
    transitions = sum(1 for a, b in zip(census, census[1:]) if a != b)
    return PathCensus([float(t) for t in ts], census, t_star, transitions)


# --- batch driver ------------------------------------------------------------

@dataclass
class SimplifyReport:
    plans: list[dict] = field(default_factory=list)
    final_census: dict[str, int] = field(default_factory=dict)
    euler: int = 0
    transitions: list[float | None] = field(default_factory=list)
    total_perturbation: float = 0.0
    perturbation_bound: float = 0.0
    rejected: int = 0

    def to_json(self) -> dict:
        return {
            "plans": self.plans,
            "final_census": self.final_census,
            "euler": self.euler,
            "transitions": self.transitions,
            "total_perturbation": self.total_perturbation,
            "perturbation_bound": self.perturbation_bound,
        }


def _critical_at(g: DiscreteGradient, f: ScalarField, dim: int, v: int) -> list[CellId]:
    return [x for x in g.complex.star(v) if x.dim == dim and g.is_critical(x) and _top(f, x) == v]


def plan_record(plan: CancellationPlan, f_before: ScalarField, f_after: ScalarField) -> dict:
    return {
        "p": str(plan.p.cell),
        "q": str(plan.q.cell),
        "p_vertex": _top(f_before, plan.p.cell),
        "q_vertex": _top(f_before, plan.q.cell),
        "persistence": plan.persistence,
        "epsilon": plan.epsilon,
        "support_size": len(plan.support),
        "max_perturbation": float(np.max(np.abs(f_after.values - f_before.values))),
    }


def execute(g: DiscreteGradient, f: ScalarField, plan: CancellationPlan):
    """cancel_pair + realize; returns (new field, its gradient)."""
    g2 = cancel_pair(g, plan)
    if plan._checked is not None and plan._checked[0] is f:
        return plan._checked[1], plan._checked[2]
    return _realize(g2, f, plan)


def simplify(c: CellComplex, f: ScalarField, threshold: float, epsilon: float | None = None,
             census_scan: int | None = None, on_step=None):
    """Cancel pairs of persistence <= threshold, shortest first, until none is cancelable."""
    if threshold < 0:
        raise ValueError("threshold must be >= 0")
    report = SimplifyReport()
    g = build_gradient(c, f)
    cur = f
    eps_sum = 0.0
    while True:
        progress = False
        for death, birth in schedule(persistence_pairs(c, cur), threshold):
            vd, vb = _top(cur, death.cell), _top(cur, birth.cell)
            done = False
            for pc in _critical_at(g, cur, death.morse_index, vd):
                for qc in _critical_at(g, cur, birth.morse_index, vb):
                    pers = cur.cell_value(pc) - cur.cell_value(qc)
                    if pers > threshold:
                        continue
                    plan = is_cancelable(g, cur, pc, qc, epsilon)
                    if not plan:
                        report.rejected += 1
                        continue
                    f_new, g_new = execute(g, cur, plan)
                    rec = plan_record(plan, cur, f_new)
                    if census_scan:
                        scan = plan._checked[3] if census_scan == SCAN_SAMPLES else \
                            sample_deformation(cur, f_new, plan, census_scan)
                        report.transitions.append(scan.t_star)
                    if on_step is not None:
                        on_step(plan, cur, f_new)
                    report.plans.append(rec)
                    eps_sum += plan.epsilon
                    log.debug("canceled %s/%s persistence %.4g", plan.p.cell, plan.q.cell, plan.persistence)
                    g, cur = g_new, f_new
                    done = progress = True
                    break
                if done:
                    break
        if not progress:
            break
    cen = g.census()
    report.final_census = {"c0": cen[0], "c1": cen[1], "c2": cen[2]}
    report.euler = cen[0] - cen[1] + cen[2]
    report.total_perturbation = float(np.max(np.abs(cur.values - f.values))) if len(f.values) else 0.0
    report.perturbation_bound = threshold + eps_sum
    return cur, report
