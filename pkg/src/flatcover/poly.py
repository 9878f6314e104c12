"""Exact polyomino arithmetic on the integer grid.

Cells are ``(x, y)`` pairs with +x to the right and +y up.  A polyomino is a
finite, nonempty, edge-connected set of cells, stored translation-normalized
so the bounding box touches both axes, with cells sorted by ``(y, x)``.  That
sorted tuple is the shape's *encoding*; the canonical form of a shape is the
lexicographically smallest encoding over its eight dihedral images.
"""
from __future__ import annotations

from functools import lru_cache
from typing import Iterable, Iterator

Cell = tuple[int, int]

#: The dihedral group of the square.  Index 0 is the identity, 1..3 rotate
#: counterclockwise by 90/180/270 degrees, 4..7 are the reflections.
TRANSFORMS = (
    lambda x, y: (x, y),
    lambda x, y: (-y, x),
    lambda x, y: (-x, -y),
    lambda x, y: (y, -x),
    lambda x, y: (-x, y),
    lambda x, y: (x, -y),
    lambda x, y: (y, x),
    lambda x, y: (-y, -x),
)
NUM_TRANSFORMS = len(TRANSFORMS)

_PROBE = ((3, 7), (-2, 5))


def _transform_signature(t) -> tuple[Cell, ...]:
    return tuple(t(x, y) for x, y in _PROBE)


_SIG_TO_INDEX = {_transform_signature(t): i for i, t in enumerate(TRANSFORMS)}

#: COMPOSE[a][b] is the index of "apply b, then a".
COMPOSE = tuple(
    tuple(
        _SIG_TO_INDEX[tuple(TRANSFORMS[a](*TRANSFORMS[b](x, y)) for x, y in _PROBE)]
        for b in range(NUM_TRANSFORMS)
    )
    for a in range(NUM_TRANSFORMS)
)

#: INVERSE[a] is the index of the transform undoing transform a.
INVERSE = tuple(COMPOSE[a].index(0) for a in range(NUM_TRANSFORMS))


class PolyominoError(ValueError):
    """Base class for malformed polyomino input."""


class GridFormatError(PolyominoError):
    """Grid text whose header, dimensions or characters are invalid."""


class EmptyShapeError(PolyominoError):
    """A cell set with no cells."""


class DisconnectedShapeError(PolyominoError):
    """A cell set that is not edge-connected."""


def _neighbors(cell: Cell) -> tuple[Cell, Cell, Cell, Cell]:
    x, y = cell
    return ((x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1))


def _connected(cells: frozenset[Cell]) -> bool:
    seen = {next(iter(cells))}
    frontier = list(seen)
    while frontier:
        cur = frontier.pop()
        for nb in _neighbors(cur):
            if nb in cells and nb not in seen:
                seen.add(nb)
                frontier.append(nb)
    return len(seen) == len(cells)


class Polyomino:
    """Immutable connected cell set, normalized to the first quadrant.

    ``cells`` is the sorted-by-(y, x) tuple of normalized cells and is the
    total order used whenever shapes are compared or listed deterministically.
    """

    __slots__ = ("cells", "_cellset")

    def __init__(self, cells: Iterable[Cell]):
        cellset = frozenset((int(x), int(y)) for x, y in cells)
        if not cellset:
            raise EmptyShapeError("polyomino needs at least one cell")
        if not _connected(cellset):
            raise DisconnectedShapeError(f"cell set is not edge-connected: {sorted(cellset)}")
        dx = min(x for x, _ in cellset)
        dy = min(y for _, y in cellset)
        ordered = tuple(sorted(((x - dx, y - dy) for x, y in cellset), key=lambda c: (c[1], c[0])))
        object.__setattr__(self, "cells", ordered)
        object.__setattr__(self, "_cellset", frozenset(ordered))

    def __setattr__(self, name, value):  # pragma: no cover - immutability guard
        raise AttributeError("Polyomino is immutable")

    @property
    def cellset(self) -> frozenset[Cell]:
        return self._cellset

    def __len__(self) -> int:
        return len(self.cells)

    def __iter__(self) -> Iterator[Cell]:
        return iter(self.cells)

    def __contains__(self, cell: Cell) -> bool:
        return cell in self._cellset

    def __eq__(self, other) -> bool:
        return isinstance(other, Polyomino) and self.cells == other.cells

    def __hash__(self) -> int:
        return hash(self.cells)

    def __lt__(self, other: "Polyomino") -> bool:
        return self.cells < other.cells

    def __repr__(self) -> str:
        return f"Polyomino({self.width}x{self.height}, {len(self)} cells)"

    @property
    def width(self) -> int:
        return 1 + max(x for x, _ in self.cells)

    @property
    def height(self) -> int:
        return 1 + max(y for _, y in self.cells)

    def transformed(self, t: int) -> "Polyomino":
        f = TRANSFORMS[t]
        return Polyomino(f(x, y) for x, y in self.cells)

    def translated(self, dx: int, dy: int) -> frozenset[Cell]:
        """Cell set of this shape shifted by (dx, dy); not normalized."""
        return frozenset((x + dx, y + dy) for x, y in self.cells)

    def row(self, index: int) -> tuple[Cell, ...]:
        """Cells in the given 1-based row counted from the top side down."""
        y = self.height - index
        return tuple(c for c in self.cells if c[1] == y)

    def row_index(self, cell: Cell) -> int:
        """1-based row number of ``cell`` counted from the top side."""
        return self.height - cell[1]


def parse_poly(text: str) -> Polyomino:
    """Parse the grid format: a header line ``H W`` and H rows, top row first.

    ``#`` or ``1`` mark cells; ``.``, ``0`` and space are empty.  Rows may be
    shorter than W (the remainder is empty) but never longer.
    """
    lines = text.splitlines()
    while lines and not lines[-1].strip():
        lines.pop()
    if not lines:
        raise GridFormatError("empty input")
    header = lines[0].split()
    if len(header) != 2:
        raise GridFormatError(f"header must be 'H W', got {lines[0]!r}")
    try:
        height, width = int(header[0]), int(header[1])
    except ValueError:
        raise GridFormatError(f"header must be 'H W', got {lines[0]!r}") from None
    if height <= 0 or width <= 0:
        raise GridFormatError(f"dimensions must be positive, got {height}x{width}")
    body = lines[1:]
    if len(body) != height:
        raise GridFormatError(f"expected {height} rows, got {len(body)}")
    cells = []
    for i, line in enumerate(body):
        if len(line.rstrip()) > width:
            raise GridFormatError(f"row {i + 1} longer than width {width}: {line!r}")
        for j, ch in enumerate(line):
            if ch in "#1":
                cells.append((j, height - 1 - i))
            elif ch not in ". 0":
                raise GridFormatError(f"bad character {ch!r} in row {i + 1}")
    if not cells:
        raise EmptyShapeError("grid contains no cells")
    return Polyomino(cells)


def render_poly(poly: Polyomino) -> str:
    """Inverse of parse_poly: header plus a `#`/`.` grid, top row first."""
    w, h = poly.width, poly.height
    rows = []
    for i in range(h):
        y = h - 1 - i
        rows.append("".join("#" if (x, y) in poly else "." for x in range(w)))
    return "\n".join([f"{h} {w}"] + rows)


def to_svg(poly: Polyomino, unit: int = 16) -> str:
    """Render the shape as a standalone SVG document."""
    w, h = poly.width, poly.height
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w * unit}" height="{h * unit}" '
        f'viewBox="0 0 {w * unit} {h * unit}">'
    ]
    for x, y in poly.cells:
        parts.append(
            f'<rect x="{x * unit}" y="{(h - 1 - y) * unit}" width="{unit}" height="{unit}" '
            f'fill="#4a90d9" stroke="#1c3a5e" stroke-width="1"/>'
        )
    parts.append("</svg>")
    return "\n".join(parts)


def transforms_of(poly: Polyomino) -> tuple[Polyomino, ...]:
    """Distinct dihedral images, sorted by their encodings.

    The result has 1, 2, 4 or 8 members depending on the shape's symmetry.
    """
    images = {poly.transformed(t) for t in range(NUM_TRANSFORMS)}
    return tuple(sorted(images))


def canonical(poly: Polyomino) -> Polyomino:
    """Representative of the free shape: smallest encoding among all images."""
    return transforms_of(poly)[0]


def includes(region: Iterable[Cell] | Polyomino, shape: Polyomino) -> bool:
    """True if ``region`` contains a congruent copy of ``shape`` as a subset.

    ``region`` is any finite cell set; it does not need to be connected.  Only
    the copy of ``shape`` itself must be connected, which it is by congruence.
    """
    cells = region.cellset if isinstance(region, Polyomino) else frozenset(region)
    if len(shape.cells) > len(cells):
        return False
    for image in transforms_of(shape):
        ax, ay = image.cells[0]
        rest = image.cells[1:]
        for cx, cy in cells:
            dx, dy = cx - ax, cy - ay
            if all((x + dx, y + dy) in cells for x, y in rest):
                return True
    return False


def find_inclusion(region: Iterable[Cell] | Polyomino, shape: Polyomino):
    """Like includes(), but returns the embedded copy's cells, or None.

    The returned value is ``(transform_index_into_transforms_of, offset,
    cells)`` for the first embedding in scan order.
    """
    cells = region.cellset if isinstance(region, Polyomino) else frozenset(region)
    if len(shape.cells) > len(cells):
        return None
    for t, image in enumerate(transforms_of(shape)):
        ax, ay = image.cells[0]
        for cx, cy in sorted(cells, key=lambda c: (c[1], c[0])):
            dx, dy = cx - ax, cy - ay
            if all((x + dx, y + dy) in cells for x, y in image.cells):
                return t, (dx, dy), image.translated(dx, dy)
    return None


def is_simply_connected(poly: Polyomino) -> bool:
    """True if the shape has no holes.

    Checked by flood-filling the complement inside the bounding box inflated
    by one ring: the shape is hole-free iff the whole complement is reached.
    """
    w, h = poly.width, poly.height
    cellset = poly.cellset
    seen = {(-1, -1)}
    frontier = [(-1, -1)]
    while frontier:
        cur = frontier.pop()
        for nb in _neighbors(cur):
            x, y = nb
            if -1 <= x <= w and -1 <= y <= h and nb not in cellset and nb not in seen:
                seen.add(nb)
                frontier.append(nb)
    return len(seen) == (w + 2) * (h + 2) - len(cellset)


_COORD_LIMIT = 2**31


def enlarge(poly: Polyomino, n: int) -> Polyomino:
    """Double the shape ceil(log2 n) times so every measure is at least n.

    One doubling step reflects the shape about its right side and unions,
    then reflects the result about its top side and unions.  Reflected images
    share no cells with the original and meet it edge-to-edge, so each step
    preserves connectedness while doubling width, height and cell count twice
    over.  The point of the construction: each copy of the doubled shape
    decomposes into congruent copies of the original, so a sticker that
    cannot cover a stain still cannot after doubling.
    """
    if n < 1:
        raise ValueError(f"target measure must be positive, got {n}")
    steps = (n - 1).bit_length()
    if max(poly.width, poly.height) << steps > _COORD_LIMIT:
        raise OverflowError(f"enlarge({n}) would exceed coordinate limit {_COORD_LIMIT}")
    cells = set(poly.cells)
    for _ in range(steps):
        hi = max(x for x, _ in cells)
        cells |= {(2 * hi + 1 - x, y) for x, y in cells}
        top = max(y for _, y in cells)
        cells |= {(x, 2 * top + 1 - y) for x, y in cells}
    return Polyomino(cells)


@lru_cache(maxsize=None)
def free_polyominoes(size: int) -> tuple[Polyomino, ...]:
    """All free polyominoes with ``size`` cells, canonical, sorted.

    Counts for sizes 1..7 are 1, 1, 2, 5, 12, 35, 108.
    """
    if size < 1:
        raise ValueError(f"size must be positive, got {size}")
    if size == 1:
        return (Polyomino([(0, 0)]),)
    shapes = set()
    for base in free_polyominoes(size - 1):
        cellset = base.cellset
        grown = set()
        for cell in base.cells:
            for nb in _neighbors(cell):
                if nb not in cellset:
                    grown.add(nb)
        for nb in grown:
            shapes.add(canonical(Polyomino(base.cells + (nb,))))
    return tuple(sorted(shapes))
