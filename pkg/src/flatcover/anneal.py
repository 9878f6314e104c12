"""Simulated-annealing search for counterexample stickers.

Candidates are trees (edge-connected, acyclic cell sets) symmetric under all
eight square-grid transforms outside a small central core; only the core may
be asymmetric, so the candidate itself never includes the target stain.  The
search walks candidate space with cell toggles, 2x2/3x3 region flips, and
pair swaps, scored by how many one- or two-copy covers of the stain survive,
with surcharges that steer toward candidates whose remaining covers are easy
to destroy.  A zero-penalty candidate is only ever reported after the full
unpruned solver confirms NotCoverable.

Everything lives on a (2R+1)^2 working board, one byte per cell, so the hot
paths compile with numba when it is available.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np

from .cover import SearchBudget, flat_cover_decide
from .poly import Cell, Polyomino, transforms_of

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        return wrap


__all__ = [
    "AnnealError",
    "Candidate",
    "Move",
    "PenaltyBreakdown",
    "SearchOutcome",
    "SearchParams",
    "anneal",
    "apply_move",
    "initial_candidate",
    "load_params",
    "penalty",
    "propose_move",
    "save_params",
]

MOVE_KINDS = ("toggle", "flip2", "flip3", "swap")

# Penalty scale constants.  One-copy covers are maximally bad; a capped pair
# enumeration is bad but better than any one-copy cover; a candidate already
# proven coverable by the full solver must never look attractive again.
ONE_COVER_WEIGHT = 1.0e6
CAP_BASE = 1.0e4
MEMO_COVERABLE = 1.0e5
MEMO_UNKNOWN = 5.0e4
BLOCK_SCALE = 1_000_000
SMALL_WEIGHT = 2000.0

# The eight grid transforms as integer matrices (m00, m01, m10, m11).
_MATS = np.array(
    [
        [1, 0, 0, 1],
        [0, -1, 1, 0],
        [-1, 0, 0, -1],
        [0, 1, -1, 0],
        [-1, 0, 0, 1],
        [0, 1, 1, 0],
        [1, 0, 0, -1],
        [0, -1, -1, 0],
    ],
    dtype=np.int64,
)


class AnnealError(Exception):
    """Bad search input, most often a stain with no counterexample."""


@dataclass(frozen=True)
class SearchParams:
    """Knobs for the annealing search.

    ``initial_temperature=None`` calibrates so roughly half of the uphill
    moves from the start state would be accepted.  Weights and caps beyond
    the temperature schedule shape the penalty, see :func:`penalty`.
    """

    initial_temperature: float | None = None
    cooling_rate: float = 0.99995
    steps: int = 200_000
    restart_count: int = 1
    rng_seed: int = 0
    near_weight: float = 0.5
    blocking_weight: float = 1.0
    interference_limit: int | None = None
    near_distance: int = 2
    box_radius: int = 24
    core_radius: int = 3
    move_weights: tuple[float, float, float, float] = (1.0, 1.0, 1.0, 1.0)
    pair_cap: int = 2000
    block_pair_cap: int = 64
    min_cells: int = 40
    verify_nodes: int = 50_000_000
    verify_seconds: float = 300.0
    initial_cells: int = 120
    checkpoint_every: int = 20_000

    def __post_init__(self):
        if not 0.0 < self.cooling_rate < 1.0:
            raise ValueError("cooling_rate must be in (0, 1)")
        if min(self.near_weight, self.blocking_weight) < 0:
            raise ValueError("weights must be >= 0")
        if not 1 <= self.box_radius <= 100:
            raise ValueError("box_radius out of range")
        if self.core_radius >= self.box_radius:
            raise ValueError("core_radius must be smaller than box_radius")
        if len(self.move_weights) != 4 or min(self.move_weights) < 0 or sum(self.move_weights) == 0:
            raise ValueError("move_weights must be 4 nonnegative values, not all zero")


@dataclass(frozen=True)
class PenaltyBreakdown:
    """Penalty parts; ``components`` carries the exact integer counters."""

    one_sticker_covers: int
    two_sticker_covers: int
    near_surcharge: float
    blocking_surcharge: float
    small_surcharge: float
    capped: bool
    memo_surcharge: float
    total: float
    components: tuple[int, ...]


@dataclass(frozen=True)
class Move:
    kind: str
    cells: tuple[Cell, ...]
    states: tuple[int, ...]


@dataclass(frozen=True)
class SearchOutcome:
    found: bool
    counterexample: Polyomino | None
    stain: Polyomino
    best_total: float
    best_candidate: Polyomino
    steps_done: int
    accepted: int
    verifications: int
    elapsed: float


# --------------------------------------------------------------------------
# compiled kernels


@njit(cache=True)
def _tree_check(grid):
    """(cells, edges, connected) of the occupancy grid; tree iff e == n-1."""
    H = grid.shape[0]
    n = 0
    edges = 0
    sx = -1
    sy = -1
    for by in range(H):
        for bx in range(H):
            if grid[by, bx]:
                n += 1
                if sx < 0:
                    sx = bx
                    sy = by
                if bx + 1 < H and grid[by, bx + 1]:
                    edges += 1
                if by + 1 < H and grid[by + 1, bx]:
                    edges += 1
    if n == 0:
        return 0, 0, 0
    seen = np.zeros((H, H), np.uint8)
    queue = np.empty(H * H, np.int32)
    queue[0] = sy * H + sx
    seen[sy, sx] = 1
    head = 0
    tail = 1
    reached = 1
    while head < tail:
        v = queue[head]
        head += 1
        by = v // H
        bx = v % H
        for k in range(4):
            nx = bx + (1 if k == 0 else -1 if k == 1 else 0)
            ny = by + (1 if k == 2 else -1 if k == 3 else 0)
            if 0 <= nx < H and 0 <= ny < H and grid[ny, nx] and not seen[ny, nx]:
                seen[ny, nx] = 1
                queue[tail] = ny * H + nx
                tail += 1
                reached += 1
    return n, edges, 1 if reached == n else 0


@njit(cache=True)
def _includes_stain_at(grid, R, added, sor):
    """1 if the grid holds a stain copy through any of the added cells."""
    H = grid.shape[0]
    n_or = sor.shape[0]
    ns = sor.shape[1]
    for t in range(added.shape[0]):
        ax = added[t, 0]
        ay = added[t, 1]
        for o in range(n_or):
            for k in range(ns):
                tx = ax - sor[o, k, 0]
                ty = ay - sor[o, k, 1]
                ok = True
                for j in range(ns):
                    bx = sor[o, j, 0] + tx + R
                    by = sor[o, j, 1] + ty + R
                    if bx < 0 or bx >= H or by < 0 or by >= H or grid[by, bx] == 0:
                        ok = False
                        break
                if ok:
                    return 1
    return 0


@njit(cache=True)
def _prepare(grid, R, d, mats):
    """Oriented boards, near masks, cell lists, and bboxes for the penalty."""
    H = grid.shape[0]
    n = 0
    for by in range(H):
        for bx in range(H):
            if grid[by, bx]:
                n += 1
    grids8 = np.zeros((8, H, H), np.uint8)
    near8 = np.zeros((8, H, H), np.uint8)
    cl = np.zeros((8, n, 2), np.int64)
    bb = np.zeros((8, 4), np.int64)
    keep = np.ones(8, np.uint8)
    for g in range(8):
        idx = 0
        for by in range(H):
            for bx in range(H):
                if grid[by, bx]:
                    x = bx - R
                    y = by - R
                    gx = mats[g, 0] * x + mats[g, 1] * y
                    gy = mats[g, 2] * x + mats[g, 3] * y
                    grids8[g, gy + R, gx + R] = 1
                    cl[g, idx, 0] = gx
                    cl[g, idx, 1] = gy
                    idx += 1
    for g in range(1, 8):
        for g2 in range(g):
            if keep[g2] == 0:
                continue
            same = True
            for by in range(H):
                for bx in range(H):
                    if grids8[g, by, bx] != grids8[g2, by, bx]:
                        same = False
                        break
                if not same:
                    break
            if same:
                keep[g] = 0
                break
    for g in range(8):
        if keep[g] == 0:
            continue
        xmin = cl[g, 0, 0]
        xmax = xmin
        ymin = cl[g, 0, 1]
        ymax = ymin
        smin = xmin + ymin
        smax = smin
        dmin = xmin - ymin
        dmax = dmin
        for k in range(n):
            x = cl[g, k, 0]
            y = cl[g, k, 1]
            xmin = min(xmin, x)
            xmax = max(xmax, x)
            ymin = min(ymin, y)
            ymax = max(ymax, y)
            smin = min(smin, x + y)
            smax = max(smax, x + y)
            dmin = min(dmin, x - y)
            dmax = max(dmax, x - y)
        bb[g, 0] = xmin
        bb[g, 1] = xmax
        bb[g, 2] = ymin
        bb[g, 3] = ymax
        for k in range(n):
            x = cl[g, k, 0]
            y = cl[g, k, 1]
            if (
                x - xmin <= d
                or xmax - x <= d
                or y - ymin <= d
                or ymax - y <= d
                or (x + y) - smin <= d
                or smax - (x + y) <= d
                or (x - y) - dmin <= d
                or dmax - (x - y) <= d
            ):
                near8[g, y + R, x + R] = 1
    return grids8, near8, keep, cl, n, bb


@njit(cache=True)
def _penalty_kernel(grid, grids8, near8, keep, cl, ncells, bb, mats, stains, R, pair_cap, block_cap, ifl):
    """Integer penalty components.

    Returns [one_covers, two_covers, near_covers, block_scaled, capped,
    proxy, placements, candidate_pairs].  A placement is an oriented copy of
    the candidate that touches the stain; covers are single placements, or
    non-overlapping pairs whose masks union to the full stain.  When the
    complementary-mask candidate pairs outnumber pair_cap the enumeration is
    skipped and their count becomes a gradient proxy.
    """
    H = grid.shape[0]
    ns = stains.shape[0]
    FULL = (1 << ns) - 1
    sxmin = stains[0, 0]
    sxmax = sxmin
    symin = stains[0, 1]
    symax = symin
    for k in range(ns):
        sxmin = min(sxmin, stains[k, 0])
        sxmax = max(sxmax, stains[k, 0])
        symin = min(symin, stains[k, 1])
        symax = max(symax, stains[k, 1])
    maxp = 8 * (sxmax - sxmin + H + 1) * (symax - symin + H + 1)
    po = np.empty(maxp, np.int64)
    ptx = np.empty(maxp, np.int64)
    pty = np.empty(maxp, np.int64)
    pm = np.empty(maxp, np.int64)
    pn = np.empty(maxp, np.int64)
    np_ = 0
    for g in range(8):
        if keep[g] == 0:
            continue
        for ty in range(symin - R, symax + R + 1):
            for tx in range(sxmin - R, sxmax + R + 1):
                m = 0
                nm = 0
                for k in range(ns):
                    bx = stains[k, 0] - tx + R
                    by = stains[k, 1] - ty + R
                    if 0 <= bx < H and 0 <= by < H and grids8[g, by, bx]:
                        m |= 1 << k
                        if near8[g, by, bx]:
                            nm |= 1 << k
                if m:
                    po[np_] = g
                    ptx[np_] = tx
                    pty[np_] = ty
                    pm[np_] = m
                    pn[np_] = nm
                    np_ += 1
    out = np.zeros(8, np.int64)
    W1 = 0
    near = 0
    for i in range(np_):
        if pm[i] == FULL:
            W1 += 1
            if pn[i] == FULL:
                near += 1
    bcnt = np.zeros(FULL + 1, np.int64)
    for i in range(np_):
        bcnt[pm[i]] += 1
    boff = np.zeros(FULL + 2, np.int64)
    for m in range(FULL + 1):
        boff[m + 1] = boff[m] + bcnt[m]
    order = np.empty(np_, np.int64)
    fill = boff[: FULL + 1].copy()
    for i in range(np_):
        order[fill[pm[i]]] = i
        fill[pm[i]] += 1
    cand = 0
    for m1 in range(FULL + 1):
        if bcnt[m1] == 0:
            continue
        for m2 in range(m1, FULL + 1):
            if bcnt[m2] == 0 or (m1 | m2) != FULL:
                continue
            if m1 == m2:
                cand += bcnt[m1] * (bcnt[m1] - 1) // 2
            else:
                cand += bcnt[m1] * bcnt[m2]
    out[0] = W1
    out[6] = np_
    out[7] = cand
    if cand > pair_cap:
        out[2] = near
        out[4] = 1
        out[5] = min(cand, 10**15)
        return out
    W2 = 0
    block = 0
    stamp = np.zeros((H, H), np.int32)
    gen = 0
    for m1 in range(FULL + 1):
        if bcnt[m1] == 0:
            continue
        for m2 in range(m1, FULL + 1):
            if bcnt[m2] == 0 or (m1 | m2) != FULL:
                continue
            for a in range(boff[m1], boff[m1 + 1]):
                i = order[a]
                gi = po[i]
                bstart = a + 1 if m1 == m2 else boff[m2]
                for b in range(bstart, boff[m2 + 1]):
                    j = order[b]
                    gj = po[j]
                    ax1 = bb[gi, 0] + ptx[i]
                    ax2 = bb[gi, 1] + ptx[i]
                    ay1 = bb[gi, 2] + pty[i]
                    ay2 = bb[gi, 3] + pty[i]
                    bx1 = bb[gj, 0] + ptx[j]
                    bx2 = bb[gj, 1] + ptx[j]
                    by1 = bb[gj, 2] + pty[j]
                    by2 = bb[gj, 3] + pty[j]
                    dx = min(ax2, bx2) - max(ax1, bx1) + 1
                    dy = min(ay2, by2) - max(ay1, by1) + 1
                    if ifl >= 0 and dx > ifl and dy > ifl:
                        continue
                    overlap = False
                    if dx > 0 and dy > 0:
                        for k in range(ncells):
                            cx = cl[gi, k, 0] + ptx[i] - ptx[j] + R
                            cy = cl[gi, k, 1] + pty[i] - pty[j] + R
                            if 0 <= cx < H and 0 <= cy < H and grids8[gj, cy, cx]:
                                overlap = True
                                break
                    if overlap:
                        continue
                    W2 += 1
                    if pn[i] == pm[i] and pn[j] == pm[j]:
                        near += 1
                    if W2 > block_cap:
                        continue
                    # cells whose addition to the candidate makes the two
                    # copies collide: preimages of each other's cells, plus
                    # the locus where both images of the new cell coincide
                    gen += 1
                    nb = 0
                    di = 1 if mats[gi, 0] * mats[gi, 3] - mats[gi, 1] * mats[gi, 2] > 0 else -1
                    dj = 1 if mats[gj, 0] * mats[gj, 3] - mats[gj, 1] * mats[gj, 2] > 0 else -1
                    for k in range(ncells):
                        ux = cl[gj, k, 0] + ptx[j] - ptx[i]
                        uy = cl[gj, k, 1] + pty[j] - pty[i]
                        cx = di * (mats[gi, 3] * ux - mats[gi, 1] * uy)
                        cy = di * (mats[gi, 0] * uy - mats[gi, 2] * ux)
                        if -R <= cx <= R and -R <= cy <= R and grid[cy + R, cx + R] == 0:
                            if stamp[cy + R, cx + R] != gen:
                                stamp[cy + R, cx + R] = gen
                                nb += 1
                        ux = cl[gi, k, 0] + ptx[i] - ptx[j]
                        uy = cl[gi, k, 1] + pty[i] - pty[j]
                        cx = dj * (mats[gj, 3] * ux - mats[gj, 1] * uy)
                        cy = dj * (mats[gj, 0] * uy - mats[gj, 2] * ux)
                        if -R <= cx <= R and -R <= cy <= R and grid[cy + R, cx + R] == 0:
                            if stamp[cy + R, cx + R] != gen:
                                stamp[cy + R, cx + R] = gen
                                nb += 1
                    m00 = mats[gi, 0] - mats[gj, 0]
                    m01 = mats[gi, 1] - mats[gj, 1]
                    m10 = mats[gi, 2] - mats[gj, 2]
                    m11 = mats[gi, 3] - mats[gj, 3]
                    ex = ptx[j] - ptx[i]
                    ey = pty[j] - pty[i]
                    if m00 != 0 or m01 != 0 or m10 != 0 or m11 != 0:
                        det = m00 * m11 - m01 * m10
                        if det != 0:
                            nx = ex * m11 - ey * m01
                            ny = ey * m00 - ex * m10
                            if nx % det == 0 and ny % det == 0:
                                cx = nx // det
                                cy = ny // det
                                if -R <= cx <= R and -R <= cy <= R and grid[cy + R, cx + R] == 0:
                                    if stamp[cy + R, cx + R] != gen:
                                        stamp[cy + R, cx + R] = gen
                                        nb += 1
                        elif m01 == 0 and m11 == 0:
                            okx = False
                            cx = 0
                            if m00 != 0:
                                if ex % m00 == 0:
                                    cx = ex // m00
                                    okx = m10 * cx == ey
                            elif ex == 0:
                                if m10 != 0 and ey % m10 == 0:
                                    cx = ey // m10
                                    okx = True
                            if okx and -R <= cx <= R:
                                for cy in range(-R, R + 1):
                                    if grid[cy + R, cx + R] == 0 and stamp[cy + R, cx + R] != gen:
                                        stamp[cy + R, cx + R] = gen
                                        nb += 1
                        else:
                            for cx in range(-R, R + 1):
                                if m01 != 0:
                                    num = ex - m00 * cx
                                    if num % m01 != 0:
                                        continue
                                    cy = num // m01
                                    if m10 * cx + m11 * cy != ey:
                                        continue
                                else:
                                    if m00 * cx != ex:
                                        continue
                                    num = ey - m10 * cx
                                    if num % m11 != 0:
                                        continue
                                    cy = num // m11
                                if -R <= cy <= R and grid[cy + R, cx + R] == 0:
                                    if stamp[cy + R, cx + R] != gen:
                                        stamp[cy + R, cx + R] = gen
                                        nb += 1
                    block += BLOCK_SCALE // (nb + 1)
    out[1] = W2
    out[2] = near
    out[3] = block
    return out


# --------------------------------------------------------------------------
# candidate plumbing


def _rep_of(cell: Cell) -> Cell:
    """Canonical octant representative: 0 <= y <= x."""
    x, y = abs(cell[0]), abs(cell[1])
    return (x, y) if x >= y else (y, x)


def _orbit(rep: Cell) -> frozenset[Cell]:
    x, y = rep
    return frozenset(
        {(x, y), (-y, x), (-x, -y), (y, -x), (-x, y), (y, x), (x, -y), (-y, -x)}
    )


@lru_cache(maxsize=32)
def _stain_orientations(stain: Polyomino) -> np.ndarray:
    images = transforms_of(stain)
    ns = len(stain.cells)
    sor = np.zeros((len(images), ns, 2), np.int64)
    for o, img in enumerate(images):
        for k, (x, y) in enumerate(img.cells):
            sor[o, k, 0] = x
            sor[o, k, 1] = y
    return sor


class Candidate:
    """One sticker candidate bound to its target stain.

    ``core`` holds literal cells inside the central box of Chebyshev radius
    ``core_radius``; ``domain`` holds octant representatives (0 <= y <= x)
    strictly outside it, expanded eightfold.  ``grid`` caches the full
    occupancy board, which all kernels consume.
    """

    __slots__ = ("stain", "radius", "core_radius", "core", "domain", "grid", "_cellseq")

    def __init__(self, stain, radius, core_radius, core=(), domain=(), grid=None):
        self.stain = stain
        self.radius = radius
        self.core_radius = core_radius
        self.core = frozenset(core)
        self.domain = frozenset(domain)
        self._cellseq = None
        for x, y in self.core:
            if max(abs(x), abs(y)) > core_radius:
                raise ValueError(f"core cell {(x, y)} outside the core box")
        for rep in self.domain:
            if rep != _rep_of(rep) or max(rep) <= core_radius or rep[0] > radius:
                raise ValueError(f"bad domain representative {rep}")
        if grid is None:
            grid = np.zeros((2 * radius + 1, 2 * radius + 1), np.uint8)
            for x, y in self.cells():
                grid[y + radius, x + radius] = 1
        self.grid = grid

    def cells(self) -> frozenset[Cell]:
        full = set(self.core)
        for rep in self.domain:
            full |= _orbit(rep)
        return frozenset(full)

    def cell_seq(self) -> tuple[Cell, ...]:
        """Cells in sorted order, cached; proposal sampling reads this."""
        if self._cellseq is None:
            self._cellseq = tuple(sorted(self.cells()))
        return self._cellseq

    def occupied(self, cell: Cell) -> bool:
        x, y = cell
        return bool(self.grid[y + self.radius, x + self.radius])

    def as_polyomino(self) -> Polyomino:
        return Polyomino(self.cells())

    def size(self) -> int:
        return int(self.grid.sum())


def _key_of(candidate: Candidate, cell: Cell):
    x, y = cell
    if max(abs(x), abs(y)) <= candidate.core_radius:
        return ("core", cell)
    return ("dom", _rep_of(cell))


def propose_move(candidate: Candidate, rng: np.random.Generator,
                 weights: tuple[float, ...] = (1.0, 1.0, 1.0, 1.0)) -> Move:
    """Sample one of the four move kinds by the configured weights.

    Target squares are drawn from the neighborhood of the current shape (a
    random cell plus a small offset); uniform sampling over the whole board
    would waste nearly every proposal at realistic radii.
    """
    acc = 0.0
    pick = rng.random() * sum(weights)
    kind = MOVE_KINDS[-1]
    for name, w in zip(MOVE_KINDS, weights):
        acc += w
        if pick < acc:
            kind = name
            break
    R = candidate.radius
    seq = candidate.cell_seq()

    def near(spread: int, lo: int = -R, hi: int = R) -> Cell:
        x, y = seq[int(rng.integers(0, len(seq)))]
        x += int(rng.integers(-spread, spread + 1))
        y += int(rng.integers(-spread, spread + 1))
        return (min(max(x, lo), hi), min(max(y, lo), hi))

    if kind == "toggle":
        c = near(2)
        return Move(kind, (c,), (0 if candidate.occupied(c) else 1,))
    if kind in ("flip2", "flip3"):
        side = 2 if kind == "flip2" else 3
        ax, ay = near(3, -R, R - side + 1)
        cells = tuple((ax + i, ay + j) for j in range(side) for i in range(side))
        states = tuple(int(s) for s in rng.integers(0, 2, side * side))
        return Move(kind, cells, states)
    c1 = near(2)
    c2 = near(4)
    return Move(
        "swap",
        (c1, c2),
        (1 if candidate.occupied(c2) else 0, 1 if candidate.occupied(c1) else 0),
    )


def apply_move(candidate: Candidate, move: Move):
    """(new candidate, None) if all invariants hold, else (None, reason).

    Cells inside the core box change individually; any other cell stands for
    its whole eight-image orbit.  When one move targets the same orbit twice
    the last state wins.
    """
    targets: dict = {}
    for cell, state in zip(move.cells, move.states):
        targets[_key_of(candidate, cell)] = state
    changes = []
    for key, state in targets.items():
        probe = key[1]
        if bool(state) != candidate.occupied(probe):
            changes.append((key, state))
    if not changes:
        return None, "no-op"
    R = candidate.radius
    grid = candidate.grid.copy()
    core = set(candidate.core)
    domain = set(candidate.domain)
    added = []
    for (region, cell), state in changes:
        affected = (cell,) if region == "core" else tuple(_orbit(cell))
        for x, y in affected:
            grid[y + R, x + R] = state
            if state:
                added.append((x, y))
        if region == "core":
            core.add(cell) if state else core.discard(cell)
        else:
            domain.add(cell) if state else domain.discard(cell)
    n, edges, connected = _tree_check(grid)
    if n == 0:
        return None, "empty"
    if not connected:
        return None, "disconnected"
    if edges != n - 1:
        return None, "cyclic"
    if added:
        sor = _stain_orientations(candidate.stain)
        arr = np.array(added, np.int64).reshape(-1, 2)
        if _includes_stain_at(grid, R, arr, sor):
            return None, "includes-stain"
    new = Candidate(candidate.stain, R, candidate.core_radius, core, domain, grid)
    return new, None


def _components(candidate: Candidate, params: SearchParams) -> tuple[int, ...]:
    grids8, near8, keep, cl, ncells, bb = _prepare(
        candidate.grid, candidate.radius, params.near_distance, _MATS
    )
    stains = np.array(candidate.stain.cells, np.int64).reshape(-1, 2)
    ifl = -1 if params.interference_limit is None else params.interference_limit
    out = _penalty_kernel(
        candidate.grid, grids8, near8, keep, cl, ncells, bb, _MATS,
        stains, candidate.radius, params.pair_cap, params.block_pair_cap, ifl,
    )
    return tuple(int(v) for v in out) + (int(ncells),)


def _total(components: tuple[int, ...], params: SearchParams, memo_surcharge: float = 0.0) -> float:
    W1, W2, near, block, capped, proxy = components[:6]
    size = components[8]
    total = float(W2)
    total += ONE_COVER_WEIGHT * W1
    total += params.near_weight * near
    total += params.blocking_weight * (block / BLOCK_SCALE)
    if capped:
        total += CAP_BASE + min(proxy, 10**12) * 1.0e-3
    total += SMALL_WEIGHT * max(0, params.min_cells - size)
    total += memo_surcharge
    return total


def penalty(candidate: Candidate, stain: Polyomino | None = None,
            params: SearchParams = SearchParams(), memo_surcharge: float = 0.0) -> PenaltyBreakdown:
    """Score a candidate; deterministic for fixed inputs.

    Base term: one-copy covers (weight 10^6) plus non-overlapping two-copy
    covers of the stain.  Surcharges: covers whose covering cells all sit
    within ``near_distance`` of the sticker's bounding-box sides or outermost
    45-degree diagonals; per two-copy cover, a term growing as the number of
    single-cell additions that would break that cover shrinks; and a strong
    push away from candidates below ``min_cells`` (tiny stickers trivially
    admit no two-copy cover yet are coverable with more copies, a degenerate
    attractor the paper-style base term cannot see).
    """
    if stain is not None and stain.cells != candidate.stain.cells:
        raise ValueError("candidate was built for a different stain")
    comp = _components(candidate, params)
    W1, W2, near, block, capped, proxy = comp[:6]
    return PenaltyBreakdown(
        one_sticker_covers=W1,
        two_sticker_covers=W2,
        near_surcharge=params.near_weight * near,
        blocking_surcharge=params.blocking_weight * (block / BLOCK_SCALE),
        small_surcharge=SMALL_WEIGHT * max(0, params.min_cells - comp[8]),
        capped=bool(capped),
        memo_surcharge=memo_surcharge,
        total=_total(comp, params, memo_surcharge),
        components=comp,
    )


def initial_candidate(stain: Polyomino, params: SearchParams, rng: np.random.Generator) -> Candidate:
    """Random symmetric tree grown cell by cell from the origin."""
    cand = Candidate(stain, params.box_radius, params.core_radius, core=((0, 0),))
    attempts = 0
    limit = params.initial_cells * 400
    while cand.size() < params.initial_cells and attempts < limit:
        attempts += 1
        cells = sorted(cand.cells())
        x, y = cells[int(rng.integers(0, len(cells)))]
        dx, dy = ((1, 0), (-1, 0), (0, 1), (0, -1))[int(rng.integers(0, 4))]
        target = (x + dx, y + dy)
        if abs(target[0]) > params.box_radius or abs(target[1]) > params.box_radius:
            continue
        if cand.occupied(target):
            continue
        new, _reason = apply_move(cand, Move("toggle", (target,), (1,)))
        if new is not None:
            cand = new
    return cand


# --------------------------------------------------------------------------
# the annealing loop


def _calibrate_temperature(cand: Candidate, comp, params: SearchParams,
                           rng: np.random.Generator) -> float:
    """Temperature at which the median uphill move accepts with p = 1/2."""
    base = _total(comp, params)
    ups = []
    for _ in range(120):
        new, _reason = apply_move(cand, propose_move(cand, rng, params.move_weights))
        if new is None:
            continue
        delta = _total(_components(new, params), params) - base
        if delta > 0:
            ups.append(delta)
    if not ups:
        return 1.0
    ups.sort()
    return max(ups[len(ups) // 2] / math.log(2.0), 1e-9)


def _checkpoint_payload(stain, params, chain, step, temperature, cand, comp,
                        best, rng, elapsed):
    return {
        "stain": sorted(stain.cells),
        "box_radius": params.box_radius,
        "core_radius": params.core_radius,
        "chain": chain,
        "step": step,
        "temperature": temperature,
        "core": sorted(cand.core),
        "domain": sorted(cand.domain),
        "components": list(comp),
        "best_total": best[0],
        "best_core": sorted(best[1].core),
        "best_domain": sorted(best[1].domain),
        "rng_state": rng.bit_generator.state,
        "elapsed": elapsed,
    }


def _restore_rng(state) -> np.random.Generator:
    rng = np.random.default_rng(0)
    rng.bit_generator.state = state
    return rng


def anneal(stain: Polyomino, params: SearchParams, *, force: bool = False,
           checkpoint_path: str | Path | None = None, resume: bool = False,
           results_dir: str | Path | None = None) -> SearchOutcome:
    """Hunt for a sticker that cannot cover ``stain``.

    Refuses stains classified always-coverable unless ``force`` is set (for
    experiments, e.g. probing which catalog shapes actually admit
    counterexamples).  Zero-penalty candidates go through the full unpruned
    solver; only NotCoverable ends the search.  Deterministic per rng_seed;
    restart chains use seed + chain index.
    """
    if not force:
        from .classify import classify

        verdict = classify(stain)
        if verdict.always_coverable:
            raise AnnealError(
                f"stain is always coverable (fits catalog entry {verdict.entry}); "
                "no counterexample exists"
            )
    start_time = time.monotonic()
    ckpt = Path(checkpoint_path) if checkpoint_path else None
    state = None
    if resume and ckpt is not None and ckpt.exists():
        state = json.loads(ckpt.read_text())
        saved_stain = [tuple(c) for c in state["stain"]]
        if saved_stain != sorted(stain.cells) or state["box_radius"] != params.box_radius:
            raise AnnealError("checkpoint does not match this stain/params")
    memo: dict[bytes, float] = {}
    best_total = math.inf
    best_cand = None
    accepted = 0
    verifications = 0
    steps_done = 0
    found = None
    first_chain = state["chain"] if state else 0
    for chain in range(first_chain, params.restart_count):
        rng = np.random.default_rng(params.rng_seed + chain)
        if state is not None and chain == state["chain"]:
            cand = Candidate(
                stain, params.box_radius, params.core_radius,
                [tuple(c) for c in state["core"]], [tuple(c) for c in state["domain"]],
            )
            comp = _components(cand, params)
            temperature = state["temperature"]
            step0 = state["step"]
            rng = _restore_rng(state["rng_state"])
            bc = Candidate(
                stain, params.box_radius, params.core_radius,
                [tuple(c) for c in state["best_core"]], [tuple(c) for c in state["best_domain"]],
            )
            if state["best_total"] < best_total:
                best_total, best_cand = state["best_total"], bc
        else:
            cand = initial_candidate(stain, params, rng)
            comp = _components(cand, params)
            step0 = 0
            temperature = params.initial_temperature
            if temperature is None:
                temperature = _calibrate_temperature(cand, comp, params, rng)
        total = _total(comp, params, memo.get(cand.grid.tobytes(), 0.0))
        if total < best_total:
            best_total, best_cand = total, cand
        for step in range(step0, params.steps):
            steps_done += 1
            temperature *= params.cooling_rate
            move = propose_move(cand, rng, params.move_weights)
            new, _reason = apply_move(cand, move)
            if new is not None:
                ncomp = _components(new, params)
                ntotal = _total(ncomp, params, memo.get(new.grid.tobytes(), 0.0))
                delta = ntotal - total
                if delta <= 0 or rng.random() < math.exp(-delta / max(temperature, 1e-12)):
                    cand, comp, total = new, ncomp, ntotal
                    accepted += 1
                    if total == 0.0:
                        verifications += 1
                        shape = cand.as_polyomino()
                        budget = SearchBudget(params.verify_nodes, params.verify_seconds)
                        decision = flat_cover_decide(shape, stain, budget)
                        if decision.is_not_coverable:
                            found = shape
                        else:
                            memo[cand.grid.tobytes()] = (
                                MEMO_COVERABLE if decision.is_coverable else MEMO_UNKNOWN
                            )
                            total = _total(comp, params, memo[cand.grid.tobytes()])
                    if total < best_total:
                        best_total, best_cand = total, cand
            if found is not None or (
                ckpt is not None and (step + 1) % params.checkpoint_every == 0
            ):
                elapsed = time.monotonic() - start_time
                if ckpt is not None:
                    payload = _checkpoint_payload(
                        stain, params, chain, step + 1, temperature, cand, comp,
                        (best_total, best_cand), rng, elapsed,
                    )
                    ckpt.write_text(json.dumps(payload))
                if found is not None:
                    break
        state = None
        if found is not None:
            break
    elapsed = time.monotonic() - start_time
    if found is not None and results_dir is not None:
        from .poly import render_poly

        outdir = Path(results_dir)
        outdir.mkdir(parents=True, exist_ok=True)
        tag = f"{len(stain.cells)}cell-{abs(hash(stain.cells)) % 10**8:08d}"
        path = outdir / f"counterexample-{tag}-{found.width}x{found.height}.txt"
        path.write_text(render_poly(found) + "\n")
    return SearchOutcome(
        found=found is not None,
        counterexample=found,
        stain=stain,
        best_total=best_total,
        best_candidate=(best_cand or cand).as_polyomino(),
        steps_done=steps_done,
        accepted=accepted,
        verifications=verifications,
        elapsed=elapsed,
    )


# --------------------------------------------------------------------------
# params file round trip (key = value lines)


def save_params(params: SearchParams, path: str | Path) -> None:
    lines = ["# annealing search parameters"]
    for name in SearchParams.__dataclass_fields__:
        value = getattr(params, name)
        if isinstance(value, tuple):
            value = ",".join(str(v) for v in value)
        lines.append(f"{name} = {value}")
    Path(path).write_text("\n".join(lines) + "\n")


def load_params(path: str | Path) -> SearchParams:
    fields = SearchParams.__dataclass_fields__
    values: dict = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise AnnealError(f"{path}:{lineno}: expected 'name = value'")
        name, _, text = line.partition("=")
        name = name.strip()
        text = text.strip()
        if name not in fields:
            raise AnnealError(f"{path}:{lineno}: unknown parameter {name!r}")
        if name == "move_weights":
            values[name] = tuple(float(v) for v in text.split(","))
        elif text.lower() == "none":
            values[name] = None
        elif name in ("initial_temperature", "cooling_rate", "near_weight",
                      "blocking_weight", "verify_seconds"):
            values[name] = float(text)
        else:
            values[name] = int(text)
    return SearchParams(**values)
