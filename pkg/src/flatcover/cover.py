"""Deciding whether a sticker flatly covers a stain.

A *flat cover* of a stain Q by a sticker P is a set of pairwise-disjoint
congruent copies of P whose union contains Q; copies may stick out of Q.
The solver below is a complete depth-first search: it always attacks the
lexicographically smallest (by (y, x)) uncovered stain cell and branches over
every placement covering it.  Since disjointness forces each copy in a cover
to claim a distinct stain cell, the target-cell sequence of a cover is
determined, so the search visits every minimal cover exactly once.
"""
from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Iterable

from .poly import Cell, Polyomino, transforms_of

COVERABLE = "coverable"
NOT_COVERABLE = "not_coverable"
UNKNOWN = "unknown"


@dataclass(frozen=True)
class Placement:
    """One copy of the sticker: orientation index into transforms_of, then shift."""

    orientation: int
    offset: Cell


@dataclass(frozen=True)
class CoverWitness:
    sticker: Polyomino
    stain: Polyomino
    placements: tuple[Placement, ...]

    def placement_cells(self, p: Placement) -> frozenset[Cell]:
        image = transforms_of(self.sticker)[p.orientation]
        return image.translated(*p.offset)


@dataclass(frozen=True)
class Decision:
    status: str
    witness: CoverWitness | None = None
    nodes: int = 0

    @property
    def is_coverable(self) -> bool:
        return self.status == COVERABLE

    @property
    def is_not_coverable(self) -> bool:
        return self.status == NOT_COVERABLE

    @property
    def is_unknown(self) -> bool:
        return self.status == UNKNOWN


@dataclass(frozen=True)
class SearchBudget:
    """Node/wall-time bounds; a node is one placement tried in the DFS."""

    max_nodes: int | None = None
    max_seconds: float | None = None

    @classmethod
    def unlimited(cls) -> "SearchBudget":
        return cls(None, None)

    @classmethod
    def nodes(cls, n: int) -> "SearchBudget":
        return cls(max_nodes=n)

    @classmethod
    def seconds(cls, s: float) -> "SearchBudget":
        return cls(max_seconds=s)


@dataclass(frozen=True)
class EnumerationResult:
    witnesses: tuple[CoverWitness, ...]
    complete: bool
    nodes: int


def placements_covering(
    sticker: Polyomino, occupied: Iterable[Cell], target: Cell
) -> list[Placement]:
    """All placements of the sticker that contain ``target`` and avoid ``occupied``.

    Ordered by (orientation index, offset); at most 8*|sticker| entries.
    """
    occ = occupied.cellset if isinstance(occupied, Polyomino) else frozenset(occupied)
    if target in occ:
        raise ValueError(f"target {target} already occupied")
    tx, ty = target
    out = []
    for o, image in enumerate(transforms_of(sticker)):
        for cx, cy in image.cells:
            dx, dy = tx - cx, ty - cy
            if all((x + dx, y + dy) not in occ for x, y in image.cells):
                out.append(Placement(o, (dx, dy)))
    out.sort(key=lambda p: (p.orientation, p.offset))
    return out


class _Budget:
    __slots__ = ("max_nodes", "deadline", "nodes")

    def __init__(self, budget: SearchBudget):
        self.max_nodes = budget.max_nodes
        self.deadline = None if budget.max_seconds is None else time.monotonic() + budget.max_seconds
        self.nodes = 0

    def spend(self) -> bool:
        """Count one tried placement; False once the budget is gone."""
        if self.max_nodes is not None and self.nodes >= self.max_nodes:
            return False
        if self.deadline is not None and time.monotonic() > self.deadline:
            return False
        self.nodes += 1
        return True


class _DiffSets:
    """Collision tests between placements via difference sets.

    Placements (o1, t1) and (o2, t2) overlap iff t1 - t2 lies in
    {b - a : a in cells(o1), b in cells(o2)}.  Sets are built lazily per
    orientation pair; large stickers switch to sorted numpy arrays.
    """

    _NUMPY_CUTOFF = 400_000

    def __init__(self, orient_cells: list[tuple[Cell, ...]]):
        self._cells = orient_cells
        self._sets: dict[tuple[int, int], object] = {}

    def _build(self, o1: int, o2: int):
        a_cells = self._cells[o1]
        b_cells = self._cells[o2]
        if len(a_cells) * len(b_cells) >= self._NUMPY_CUTOFF:
            import numpy as np

            ax = np.array([c[0] for c in a_cells], dtype=np.int64)
            ay = np.array([c[1] for c in a_cells], dtype=np.int64)
            bx = np.array([c[0] for c in b_cells], dtype=np.int64)
            by = np.array([c[1] for c in b_cells], dtype=np.int64)
            dx = (bx[None, :] - ax[:, None]).ravel()
            dy = (by[None, :] - ay[:, None]).ravel()
            enc = dx * (1 << 22) + dy
            enc = np.unique(enc)
            return enc
        return frozenset(
            (bx - ax) * (1 << 22) + (by - ay) for ax, ay in a_cells for bx, by in b_cells
        )

    def collide(self, o1: int, t1: Cell, o2: int, t2: Cell) -> bool:
        key = (o1, o2)
        ds = self._sets.get(key)
        if ds is None:
            ds = self._build(o1, o2)
            self._sets[key] = ds
        enc = (t1[0] - t2[0]) * (1 << 22) + (t1[1] - t2[1])
        if isinstance(ds, frozenset):
            return enc in ds
        import numpy as np

        i = np.searchsorted(ds, enc)
        return bool(i < len(ds) and ds[i] == enc)


class _Exhausted(Exception):
    pass


class _Engine:
    """Shared machinery for decide and enumerate on one (sticker, stain) pair."""

    def __init__(self, sticker: Polyomino, stain: Polyomino, prune_interference: int | None = None):
        self.sticker = sticker
        self.stain = stain
        self.prune_interference = prune_interference
        self.orients = transforms_of(sticker)
        self.orient_cells = [img.cells for img in self.orients]
        self.orient_bbox = [(img.width, img.height) for img in self.orients]
        self.diffs = _DiffSets(self.orient_cells)
        stain_cells = stain.cells  # already (y, x)-sorted: the target order
        index_of = {c: i for i, c in enumerate(stain_cells)}
        table: dict[tuple[int, Cell], int] = {}
        self.placements: list[tuple[int, Cell]] = []
        self.covermask: list[int] = []
        for o, cells in enumerate(self.orient_cells):
            for sx, sy in stain_cells:
                for cx, cy in cells:
                    key = (o, (sx - cx, sy - cy))
                    if key in table:
                        continue
                    dx, dy = key[1]
                    mask = 0
                    for x, y in cells:
                        j = index_of.get((x + dx, y + dy))
                        if j is not None:
                            mask |= 1 << j
                    table[key] = len(self.placements)
                    self.placements.append(key)
                    self.covermask.append(mask)
        order = sorted(range(len(self.placements)), key=lambda i: self.placements[i])
        self.by_target: list[list[int]] = [[] for _ in stain_cells]
        for pid in order:
            mask = self.covermask[pid]
            for i in range(len(stain_cells)):
                if mask >> i & 1:
                    self.by_target[i].append(pid)
        self.full = (1 << len(stain_cells)) - 1

    def _collides(self, pid: int, placed: list[int]) -> bool:
        o, t = self.placements[pid]
        for qid in placed:
            po, pt = self.placements[qid]
            if self.diffs.collide(o, t, po, pt):
                return True
        return False

    def _interferes_too_deep(self, pid: int, placed: list[int]) -> bool:
        """Bounding-box interpenetration depth against any placed copy."""
        limit = self.prune_interference
        o, (x, y) = self.placements[pid]
        w, h = self.orient_bbox[o]
        for qid in placed:
            po, (px, py) = self.placements[qid]
            pw, ph = self.orient_bbox[po]
            ox = min(x + w, px + pw) - max(x, px)
            oy = min(y + h, py + ph) - max(y, py)
            if ox > limit and oy > limit:
                return True
        return False

    def search(
        self,
        budget: SearchBudget,
        *,
        first_only: bool,
        cap: int | None = None,
        max_placements: int | None = None,
    ):
        bud = _Budget(budget)
        witnesses: list[tuple[int, ...]] = []
        placed: list[int] = []
        pruned = False

        def rec(covered: int) -> bool:
            nonlocal pruned
            if covered == self.full:
                witnesses.append(tuple(placed))
                return first_only or (cap is not None and len(witnesses) >= cap)
            if max_placements is not None and len(placed) >= max_placements:
                return False
            rest = ~covered & self.full
            target = (rest & -rest).bit_length() - 1
            for pid in self.by_target[target]:
                if not bud.spend():
                    raise _Exhausted
                if self.covermask[pid] & covered:
                    continue  # would overlap a placed copy on an already-covered stain cell
                if self._collides(pid, placed):
                    continue
                if self.prune_interference is not None and self._interferes_too_deep(pid, placed):
                    pruned = True
                    continue
                placed.append(pid)
                stop = rec(covered | self.covermask[pid])
                placed.pop()
                if stop:
                    return True
            return False

        try:
            capped = rec(0)
            exhausted = False
        except _Exhausted:
            capped = False
            exhausted = True
        return witnesses, bud.nodes, exhausted, pruned, capped

    def to_witness(self, pids: tuple[int, ...]) -> CoverWitness:
        return CoverWitness(
            self.sticker,
            self.stain,
            tuple(Placement(o, t) for o, t in (self.placements[p] for p in pids)),
        )


def flat_cover_decide(
    sticker: Polyomino,
    stain: Polyomino,
    budget: SearchBudget = SearchBudget.unlimited(),
    *,
    prune_interference: int | None = None,
    engine: str = "auto",
) -> Decision:
    """Complete DFS decision with budget; Unknown only when the budget runs out.

    With ``prune_interference`` set, branches where a new copy's bounding box
    interpenetrates a placed copy deeper than the limit on both axes are cut;
    a cover found is still sound, but exhaustion then only supports Unknown.

    ``engine`` picks the implementation: "python" is the reference engine,
    "fast" the compiled one (same search, same answers), "auto" chooses fast
    for searches big enough to amortize array setup and compilation.
    """
    if engine not in ("auto", "python", "fast"):
        raise ValueError(f"unknown engine {engine!r}")
    if engine != "python" and prune_interference is None:
        from . import _fastcover

        big_budget = budget.max_nodes is None or budget.max_nodes >= 500_000
        big_problem = len(sticker.cells) * len(stain.cells) >= 300
        if engine == "fast" or (_fastcover.HAVE_NUMBA and big_budget and big_problem):
            return _fastcover.decide(sticker, stain, budget)
    elif engine == "fast":
        raise ValueError("the fast engine does not support prune_interference")
    eng = _Engine(sticker, stain, prune_interference)
    witnesses, nodes, exhausted, pruned, _ = eng.search(budget, first_only=True)
    if witnesses:
        return Decision(COVERABLE, eng.to_witness(witnesses[0]), nodes)
    if exhausted or pruned:
        return Decision(UNKNOWN, None, nodes)
    return Decision(NOT_COVERABLE, None, nodes)


def enumerate_minimal_covers(
    sticker: Polyomino,
    stain: Polyomino,
    budget: SearchBudget = SearchBudget.unlimited(),
    cap: int = 1_000_000,
    max_placements: int | None = None,
) -> EnumerationResult:
    """All covers in which every copy meets the stain, up to ``cap``.

    The DFS target-cell discipline generates each cover once, so no dedup is
    needed; ``complete`` is False if the cap or the budget cut the search off.
    ``max_placements`` restricts the enumeration to covers of at most that many
    copies (e.g. 1 for single-copy covers).
    """
    if cap < 1:
        raise ValueError("cap must be at least 1")
    eng = _Engine(sticker, stain)
    witnesses, nodes, exhausted, _, capped = eng.search(
        budget, first_only=False, cap=cap, max_placements=max_placements
    )
    complete = not exhausted and not capped
    return EnumerationResult(
        tuple(eng.to_witness(w) for w in witnesses), complete, nodes
    )


def verify_cover(witness: CoverWitness) -> bool:
    """Check the three cover invariants by plain set arithmetic."""
    cellsets = [witness.placement_cells(p) for p in witness.placements]
    union: set[Cell] = set()
    total = 0
    for cs in cellsets:
        union |= cs
        total += len(cs)
    if total != len(union):
        return False  # some pair of copies overlaps
    if not witness.stain.cellset <= union:
        return False
    return all(cs & witness.stain.cellset for cs in cellsets)


class OracleSizeError(ValueError):
    """brute_force_oracle refuses shapes beyond its guard sizes."""


def brute_force_oracle(sticker: Polyomino, stain: Polyomino) -> bool:
    """Definition-level coverability check on small shapes.

    Enumerates subsets of the complete placement list (every orientation and
    every offset meeting the stain) in index order, keeping only pairwise
    disjoint ones, and tests coverage directly on bit grids.  Disjointness
    already caps useful subsets at |stain| copies.  Shares nothing with the
    DFS solver beyond the shape type.
    """
    if len(stain.cells) > 6:
        raise OracleSizeError(f"stain has {len(stain.cells)} cells; oracle allows at most 6")
    if len(sticker.cells) > 8:
        raise OracleSizeError(f"sticker has {len(sticker.cells)} cells; oracle allows at most 8")
    margin = max(sticker.width, sticker.height) - 1
    x0, y0 = -margin, -margin
    gw = stain.width + 2 * margin
    gh = stain.height + 2 * margin

    def bit(x: int, y: int) -> int:
        return 1 << ((y - y0) * gw + (x - x0))

    stain_mask = 0
    for x, y in stain.cells:
        stain_mask |= bit(x, y)

    masks = []
    for image in sorted(transforms_of(sticker)):
        offs = set()
        for cx, cy in image.cells:
            for sx, sy in stain.cells:
                offs.add((sx - cx, sy - cy))
        for dx, dy in sorted(offs):
            m = 0
            for x, y in image.cells:
                m |= bit(x + dx, y + dy)
            masks.append(m)

    def rec(start: int, used: int, covered: int) -> bool:
        if covered & stain_mask == stain_mask:
            return True
        for i in range(start, len(masks)):
            m = masks[i]
            if m & used:
                continue
            if rec(i + 1, used | m, covered | m):
                return True
        return False

    return rec(0, 0, 0)
