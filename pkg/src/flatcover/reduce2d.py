"""Hardness gadgets: 3-precoloring extension on grid graphs as a flat-cover instance.

A partial 3-coloring of an induced subgraph of the integer grid is turned into
a sticker/stain pair whose coverability answers the coloring question.  Each
vertex ``v`` becomes a block anchored at ``8*v``: an uncolored vertex places
the 8x8 core ``Q0``, a vertex precolored ``i`` places the 10x10 sticker in the
orientation standing for color ``i``, shifted by ``(-1, -1)`` so the box
centers line up.  The sticker is built so that a centered copy covers the core
in exactly the three color orientations, and copies on adjacent blocks collide
exactly when they share an orientation.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import product
from typing import Iterable, Mapping

from .cover import (
    CoverWitness,
    Decision,
    OracleSizeError,
    Placement,
    SearchBudget,
    enumerate_minimal_covers,
    flat_cover_decide,
    verify_cover,
)
from .poly import Cell, Polyomino, parse_poly, transforms_of

COLORS = (1, 2, 3)

#: Orientation index (into ``transforms_of(gadget_sticker())``) for each color.
#: Color 1 is the sticker as drawn; colors 2 and 3 are its +90 and -90 degree
#: rotations.  ``check_gadget_properties`` re-derives all three from scratch.
COLOR_ORIENTATIONS = (7, 4, 2)

#: The vertex block for color ``i`` sits at ``8*v + COLOR_BLOCK_SHIFT``.
COLOR_BLOCK_SHIFT = (-1, -1)

_STICKER_TEXT = """\
10 10
0000001000
0110001110
0111111110
0011111100
0011111100
1111111111
0011111100
0111111110
0100001110
0000001000
"""

_CORE_TEXT = """\
8 8
11000011
01111111
01111110
01111110
01111110
01111110
11111110
10000011
"""


class ReductionError(ValueError):
    """Malformed instance, coloring, or instance text."""


def gadget_sticker() -> Polyomino:
    """The 10x10 sticker used by the reduction (55 cells)."""
    return _gadgets()[0]


def gadget_q0() -> Polyomino:
    """The 8x8 vertex core: intersection of the three color orientations."""
    return _gadgets()[1]


@lru_cache(maxsize=1)
def _gadgets() -> tuple[Polyomino, Polyomino]:
    return parse_poly(_STICKER_TEXT), parse_poly(_CORE_TEXT)


def _color_images() -> tuple[Polyomino, ...]:
    imgs = transforms_of(gadget_sticker())
    return tuple(imgs[o] for o in COLOR_ORIENTATIONS)


@dataclass(frozen=True, init=False)
class PrecolorInstance:
    """Vertices of an induced grid graph with a partial coloring.

    Edges are implicit: vertex pairs at L1 distance 1.  An instance whose
    precolored part already breaks properness is still accepted; its coloring
    side is then unsatisfiable, though the built stain can remain coverable
    because covers are free to turn copies against the demanded colors.
    """

    vertices: frozenset[Cell]
    precolored: tuple[tuple[Cell, int], ...]

    def __init__(
        self,
        vertices: Iterable[Cell],
        precolored: Mapping[Cell, int] | Iterable[tuple[Cell, int]] = (),
    ):
        verts = frozenset((int(x), int(y)) for x, y in vertices)
        items = precolored.items() if isinstance(precolored, Mapping) else precolored
        colored = {}
        for (x, y), color in items:
            v = (int(x), int(y))
            if v not in verts:
                raise ReductionError(f"precolored vertex {v} is not a vertex")
            if color not in COLORS:
                raise ReductionError(f"color must be 1, 2 or 3, got {color!r}")
            if colored.get(v, color) != color:
                raise ReductionError(f"vertex {v} precolored twice")
            colored[v] = color
        object.__setattr__(self, "vertices", verts)
        object.__setattr__(
            self, "precolored", tuple(sorted(colored.items(), key=_vertex_key))
        )

    def precoloring(self) -> dict[Cell, int]:
        return dict(self.precolored)

    def edges(self) -> tuple[tuple[Cell, Cell], ...]:
        """Implicit edges: vertex pairs at L1 distance 1, each listed once."""
        out = []
        for x, y in self.vertices:
            for u in ((x + 1, y), (x, y + 1)):
                if u in self.vertices:
                    out.append(((x, y), u))
        return tuple(sorted(out, key=lambda e: (_vertex_key(e), e)))

    def is_connected(self) -> bool:
        verts = self.vertices
        if not verts:
            return False
        seen = {min(verts)}
        frontier = [min(verts)]
        while frontier:
            x, y = frontier.pop()
            for u in ((x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)):
                if u in verts and u not in seen:
                    seen.add(u)
                    frontier.append(u)
        return len(seen) == len(verts)


def _vertex_key(pair) -> tuple[int, int]:
    (x, y) = pair[0] if isinstance(pair[0], tuple) else pair
    return (y, x)


@dataclass(frozen=True)
class ReductionOutput2D:
    """The built instance: sticker, stain, and the vertex anchor map.

    Anchors are the ``8*v`` scaling expressed in the stain's own coordinates:
    polyominoes are stored translation-normalized, so the whole construction
    is shifted by ``origin_shift`` to put the stain's bounding box at the
    origin, and ``anchor_of(v) == 8*v + origin_shift``.
    """

    sticker: Polyomino
    stain: Polyomino
    anchors: tuple[tuple[Cell, Cell], ...]
    origin_shift: Cell

    def anchor_of(self, vertex: Cell) -> Cell:
        for v, a in self.anchors:
            if v == vertex:
                return a
        raise KeyError(vertex)


def build_instance(inst: PrecolorInstance) -> ReductionOutput2D:
    """Place one block per vertex and take the union.

    Uncolored vertices contribute the core at ``8*v``; precolored ones the
    sticker in their color orientation at ``8*v + (-1, -1)``.  The blocks are
    pairwise disjoint unless two adjacent vertices are precolored alike, in
    which case their blocks overlap and the union is kept as is.
    """
    if not inst.vertices:
        raise ReductionError("instance has no vertices")
    if not inst.is_connected():
        raise ReductionError("vertex graph is disconnected")
    sticker, core = _gadgets()
    images = _color_images()
    colored = inst.precoloring()
    cells: set[Cell] = set()
    total = 0
    for v in sorted(inst.vertices, key=_vertex_key):
        x, y = v
        if v in colored:
            block = images[colored[v] - 1].translated(8 * x - 1, 8 * y - 1)
        else:
            block = core.translated(8 * x, 8 * y)
        cells |= block
        total += len(block)
    if _precolored_part_proper(inst):
        # Disjointness of the placed blocks is what makes the stain size a
        # straight sum; it can only fail for adjacent same-color blocks.
        assert total == len(cells), "vertex blocks overlap unexpectedly"
    stain = Polyomino(cells)
    sx = -min(x for x, _ in cells)
    sy = -min(y for _, y in cells)
    anchors = tuple(
        (v, (8 * v[0] + sx, 8 * v[1] + sy))
        for v in sorted(inst.vertices, key=_vertex_key)
    )
    return ReductionOutput2D(sticker, stain, anchors, (sx, sy))


def _precolored_part_proper(inst: PrecolorInstance) -> bool:
    colored = inst.precoloring()
    return all(
        colored.get(u) is None or colored.get(v) is None or colored[u] != colored[v]
        for u, v in inst.edges()
    )


def witness_from_coloring(
    inst: PrecolorInstance, coloring: Mapping[Cell, int]
) -> CoverWitness:
    """Turn a proper coloring extension into a cover: one copy per vertex.

    The copy for vertex ``v`` is the sticker in the orientation of ``v``'s
    color, placed exactly where a colored vertex block would sit.
    """
    colored = inst.precoloring()
    for v in sorted(inst.vertices, key=_vertex_key):
        if v not in coloring:
            raise ReductionError(f"coloring misses vertex {v}")
        if coloring[v] not in COLORS:
            raise ReductionError(f"color must be 1, 2 or 3, got {coloring[v]!r}")
        if v in colored and coloring[v] != colored[v]:
            raise ReductionError(
                f"coloring gives {v} color {coloring[v]}, precolored {colored[v]}"
            )
    for u, v in inst.edges():
        if coloring[u] == coloring[v]:
            raise ReductionError(
                f"improper coloring: adjacent {u} and {v} share color {coloring[u]}"
            )
    out = build_instance(inst)
    sx, sy = out.origin_shift
    placements = tuple(
        Placement(
            COLOR_ORIENTATIONS[coloring[v] - 1],
            (8 * v[0] - 1 + sx, 8 * v[1] - 1 + sy),
        )
        for v in sorted(inst.vertices, key=_vertex_key)
    )
    return CoverWitness(out.sticker, out.stain, placements)


def brute_precoloring(inst: PrecolorInstance) -> dict[Cell, int] | None:
    """Backtracking search for a proper coloring extension; None if there is none."""
    if len(inst.vertices) > 20:
        raise OracleSizeError(
            f"instance has {len(inst.vertices)} vertices; the oracle accepts at most 20"
        )
    if not inst.vertices:
        return {}
    order = sorted(inst.vertices, key=_vertex_key)
    index = {v: i for i, v in enumerate(order)}
    neighbors: list[list[int]] = [[] for _ in order]
    for u, v in inst.edges():
        neighbors[index[u]].append(index[v])
        neighbors[index[v]].append(index[u])
    fixed = {index[v]: c for v, c in inst.precolored}
    assignment = [0] * len(order)

    def extend(i: int) -> bool:
        if i == len(order):
            return True
        # Each edge is enforced at its later endpoint, so checking assigned
        # (earlier) neighbors covers all constraints, fixed colors included.
        for color in (fixed[i],) if i in fixed else COLORS:
            if all(assignment[j] != color for j in neighbors[i] if j < i):
                assignment[i] = color
                if extend(i + 1):
                    return True
        assignment[i] = 0
        return False

    if not extend(0):
        return None
    return {order[i]: assignment[i] for i in range(len(order))}


@dataclass(frozen=True)
class GadgetReport:
    """Outcome of re-verifying the three sticker properties from scratch."""

    core_single_covers: tuple[Placement, ...]
    core_complete: bool
    color_single_covers: tuple[int, int, int]
    overlap_table: tuple[tuple[int, int, Cell, bool], ...]
    diagonals_clear: bool
    minimal_cover_counts: tuple[int, int, int, int] | None
    property1: bool
    property2: bool
    property3: bool

    @property
    def ok(self) -> bool:
        return self.property1 and self.property2 and self.property3


def check_gadget_properties(
    budget: SearchBudget = SearchBudget.unlimited(),
    count_all_minimal: bool = False,
) -> GadgetReport:
    """Re-verify the three facts the reduction stands on.

    1. The core has exactly three one-copy covers: the color orientations,
       centered (box offset ``(-1, -1)``).
    2. Each color image has exactly one one-copy cover, itself.
    3. Copies on adjacent vertex blocks (axis offset 8) overlap exactly when
       they share an orientation.

    Inclusion-minimal covers with more copies exist as well;
    ``count_all_minimal`` additionally counts them (slow), since the one-copy
    reading is an interpretation the report should make visible.
    """
    sticker, core = _gadgets()
    images = _color_images()

    res = enumerate_minimal_covers(sticker, core, budget, max_placements=1)
    singles = tuple(w.placements[0] for w in res.witnesses)
    expected = {
        Placement(o, COLOR_BLOCK_SHIFT) for o in COLOR_ORIENTATIONS
    }
    property1 = res.complete and set(singles) == expected and len(singles) == 3

    color_counts = []
    property2 = True
    for color, image in zip(COLORS, images):
        r = enumerate_minimal_covers(sticker, image, budget, max_placements=1)
        color_counts.append(len(r.witnesses))
        identity = Placement(COLOR_ORIENTATIONS[color - 1], (0, 0))
        property2 = property2 and r.complete and r.witnesses and (
            tuple(w.placements[0] for w in r.witnesses) == (identity,)
        )

    table = []
    property3 = True
    for (i, gi), (j, gj) in product(enumerate(images), repeat=2):
        for offset in ((8, 0), (0, 8)):
            overlaps = bool(gi.cellset & gj.translated(*offset))
            property3 = property3 and overlaps == (i == j)
            table.append((COLORS[i], COLORS[j], offset, overlaps))
    # Diagonal neighbors are not grid edges, but a cover built from a proper
    # coloring also needs diagonal blocks disjoint, whatever their colors.
    diagonals_clear = not any(
        gi.cellset & gj.translated(*offset)
        for gi, gj in product(images, repeat=2)
        for offset in ((8, 8), (8, -8))
    )
    property3 = property3 and diagonals_clear

    counts = None
    if count_all_minimal:
        full = [enumerate_minimal_covers(sticker, core, budget)]
        full += [enumerate_minimal_covers(sticker, img, budget) for img in images]
        counts = tuple(len(r.witnesses) for r in full)

    return GadgetReport(
        core_single_covers=singles,
        core_complete=res.complete,
        color_single_covers=tuple(color_counts),
        overlap_table=tuple(table),
        diagonals_clear=diagonals_clear,
        minimal_cover_counts=counts,
        property1=bool(property1),
        property2=bool(property2),
        property3=bool(property3),
    )


@dataclass(frozen=True)
class RoundTrip2D:
    """Both sides of the equivalence on one instance."""

    satisfiable: bool
    decision: Decision
    witness_ok: bool | None
    agree: bool | None

    @property
    def conclusive(self) -> bool:
        return self.agree is not None


def roundtrip_2d(
    inst: PrecolorInstance, budget: SearchBudget = SearchBudget.unlimited()
) -> RoundTrip2D:
    """Answer the coloring question twice: by brute force and via the stain.

    An Unknown cover decision is reported as inconclusive, never as agreement.
    On the satisfiable side the constructed witness is verified as well.
    """
    coloring = brute_precoloring(inst)
    out = build_instance(inst)
    decision = flat_cover_decide(out.sticker, out.stain, budget)
    witness_ok = None
    if coloring is not None:
        witness_ok = verify_cover(witness_from_coloring(inst, coloring))
    if decision.is_unknown:
        agree = None
    else:
        agree = decision.is_coverable == (coloring is not None)
        if witness_ok is False:
            agree = False
    return RoundTrip2D(
        satisfiable=coloring is not None,
        decision=decision,
        witness_ok=witness_ok,
        agree=agree,
    )


def parse_grid3c(text: str) -> PrecolorInstance:
    """Read an instance: one ``x y [color]`` line per vertex, ``#`` comments."""
    vertices: list[Cell] = []
    seen: set[Cell] = set()
    precolored = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) not in (2, 3):
            raise ReductionError(
                f"line {lineno}: expected 'x y' or 'x y color', got {raw!r}"
            )
        try:
            values = [int(p) for p in parts]
        except ValueError:
            raise ReductionError(f"line {lineno}: non-integer field in {raw!r}") from None
        v = (values[0], values[1])
        if v in seen:
            raise ReductionError(f"line {lineno}: duplicate vertex {v}")
        seen.add(v)
        vertices.append(v)
        if len(values) == 3:
            if values[2] not in COLORS:
                raise ReductionError(
                    f"line {lineno}: color must be 1, 2 or 3, got {values[2]}"
                )
            precolored.append((v, values[2]))
    if not vertices:
        raise ReductionError("no vertices in instance text")
    return PrecolorInstance(vertices, precolored)


def render_grid3c(inst: PrecolorInstance) -> str:
    """Inverse of parse_grid3c, one sorted vertex per line."""
    colored = inst.precoloring()
    lines = []
    for v in sorted(inst.vertices, key=_vertex_key):
        suffix = f" {colored[v]}" if v in colored else ""
        lines.append(f"{v[0]} {v[1]}{suffix}")
    return "\n".join(lines) + "\n"
