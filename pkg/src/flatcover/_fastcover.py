"""Array-based DFS core for big cover decisions.

Same search as the reference engine in :mod:`flatcover.cover` -- identical
placement order, target rule, and node accounting -- compiled with numba when
available.  The kernel is resumable: it runs in node slices so wall-clock
budgets stay responsive without per-node clock reads.
"""

from __future__ import annotations

import time

import numpy as np

from .cover import (
    COVERABLE,
    NOT_COVERABLE,
    UNKNOWN,
    CoverWitness,
    Decision,
    Placement,
    SearchBudget,
)
from .poly import Polyomino, transforms_of

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        return wrap


_ENC = 1 << 22  # same (dx, dy) encoding as the reference collision sets

_FOUND = 1
_EXHAUSTED = 0
_PAUSED = 2


class FastProblem:
    """Placement table and collision data in flat arrays."""

    def __init__(self, sticker: Polyomino, stain: Polyomino):
        self.sticker = sticker
        self.stain = stain
        orients = transforms_of(sticker)
        orient_cells = [img.cells for img in orients]
        n_orient = len(orients)
        stain_cells = stain.cells
        n = len(stain_cells)
        words = (n + 63) // 64
        index_of = {c: i for i, c in enumerate(stain_cells)}

        placements = sorted(
            {
                (o, sx - cx, sy - cy)
                for o, cells in enumerate(orient_cells)
                for sx, sy in stain_cells
                for cx, cy in cells
            }
        )
        npl = len(placements)
        cover = np.zeros((npl, words), dtype=np.uint64)
        orient = np.empty(npl, dtype=np.int64)
        offx = np.empty(npl, dtype=np.int64)
        offy = np.empty(npl, dtype=np.int64)
        buckets: list[list[int]] = [[] for _ in range(n)]
        for pid, (o, dx, dy) in enumerate(placements):
            orient[pid] = o
            offx[pid] = dx
            offy[pid] = dy
            for x, y in orient_cells[o]:
                j = index_of.get((x + dx, y + dy))
                if j is not None:
                    cover[pid, j >> 6] |= np.uint64(1 << (j & 63))
                    buckets[j].append(pid)

        tgt_start = np.zeros(n + 1, dtype=np.int64)
        for i, b in enumerate(buckets):
            tgt_start[i + 1] = tgt_start[i] + len(b)
        tgt_pids = np.empty(int(tgt_start[-1]), dtype=np.int32)
        for i, b in enumerate(buckets):
            tgt_pids[tgt_start[i] : tgt_start[i + 1]] = b

        pair_start = np.zeros(n_orient * n_orient + 1, dtype=np.int64)
        chunks = []
        for o1 in range(n_orient):
            a = np.array(orient_cells[o1], dtype=np.int64)
            for o2 in range(n_orient):
                b = np.array(orient_cells[o2], dtype=np.int64)
                # new copy (o1, t1) hits placed copy (o2, t2) iff
                # t1 - t2 is one of {b - a}
                enc = np.unique(
                    (b[None, :, 0] - a[:, None, 0]).ravel() * _ENC
                    + (b[None, :, 1] - a[:, None, 1]).ravel()
                )
                chunks.append(enc)
                pair_start[o1 * n_orient + o2 + 1] = pair_start[o1 * n_orient + o2] + len(enc)
        pair_diffs = np.concatenate(chunks)

        full = np.zeros(words, dtype=np.uint64)
        for j in range(n):
            full[j >> 6] |= np.uint64(1 << (j & 63))

        self.placements = placements
        self.n = n
        self.words = words
        self.n_orient = n_orient
        self.cover = cover
        self.orient = orient
        self.offx = offx
        self.offy = offy
        self.tgt_start = tgt_start
        self.tgt_pids = tgt_pids
        self.pair_start = pair_start
        self.pair_diffs = pair_diffs
        self.full = full
        # search state, reusable across slices
        depth_cap = n + 1
        self.placed = np.zeros(depth_cap, dtype=np.int32)
        self.iters = np.zeros(depth_cap, dtype=np.int64)
        self.tgts = np.zeros(depth_cap, dtype=np.int64)
        self.covstack = np.zeros((depth_cap + 1, words), dtype=np.uint64)
        self.state = np.zeros(2, dtype=np.int64)  # depth, total nodes
        self.iters[0] = self.tgt_start[0]

    def run_slice(self, max_new_nodes: int) -> tuple[int, int]:
        return _dfs_kernel(
            self.tgt_start,
            self.tgt_pids,
            self.cover,
            self.orient,
            self.offx,
            self.offy,
            self.n_orient,
            self.pair_start,
            self.pair_diffs,
            self.full,
            self.words,
            self.placed,
            self.iters,
            self.tgts,
            self.covstack,
            self.state,
            max_new_nodes,
        )

    def witness(self) -> CoverWitness:
        pids = self.placed[: self.state[0] + 1]
        return CoverWitness(
            self.sticker,
            self.stain,
            tuple(
                Placement(self.placements[p][0], (self.placements[p][1], self.placements[p][2]))
                for p in pids
            ),
        )


@njit(cache=True)
def _dfs_kernel(
    tgt_start,
    tgt_pids,
    cover,
    orient,
    offx,
    offy,
    n_orient,
    pair_start,
    pair_diffs,
    full,
    words,
    placed,
    iters,
    tgts,
    covstack,
    state,
    max_new_nodes,
):
    zero = np.uint64(0)
    one = np.uint64(1)
    depth = state[0]
    nodes = 0
    while depth >= 0:
        t = tgts[depth]
        end = tgt_start[t + 1]
        i = iters[depth]
        moved = False
        while i < end:
            if nodes >= max_new_nodes:
                iters[depth] = i
                state[0] = depth
                state[1] += nodes
                return _PAUSED, nodes
            nodes += 1
            pid = tgt_pids[i]
            i += 1
            ok = True
            for w in range(words):
                if cover[pid, w] & covstack[depth, w] != zero:
                    ok = False
                    break
            if not ok:
                continue
            o1 = orient[pid]
            x1 = offx[pid]
            y1 = offy[pid]
            hit = False
            for d in range(depth):
                q = placed[d]
                enc = (x1 - offx[q]) * 4194304 + (y1 - offy[q])
                key = o1 * n_orient + orient[q]
                lo = pair_start[key]
                hi = pair_start[key + 1]
                while lo < hi:
                    mid = (lo + hi) >> 1
                    v = pair_diffs[mid]
                    if v < enc:
                        lo = mid + 1
                    elif v > enc:
                        hi = mid
                    else:
                        hit = True
                        break
                if hit:
                    break
            if hit:
                continue
            placed[depth] = pid
            iters[depth] = i
            done = True
            for w in range(words):
                cw = covstack[depth, w] | cover[pid, w]
                covstack[depth + 1, w] = cw
                if cw != full[w]:
                    done = False
            if done:
                state[0] = depth
                state[1] += nodes
                return _FOUND, nodes
            nt = -1
            for w in range(words):
                inv = ~covstack[depth + 1, w] & full[w]
                if inv != zero:
                    b = 0
                    while (inv >> np.uint64(b)) & one == zero:
                        b += 1
                    nt = w * 64 + b
                    break
            depth += 1
            tgts[depth] = nt
            iters[depth] = tgt_start[nt]
            moved = True
            break
        if moved:
            continue
        depth -= 1
    state[0] = -1
    state[1] += nodes
    return _EXHAUSTED, nodes


def decide(
    sticker: Polyomino,
    stain: Polyomino,
    budget: SearchBudget = SearchBudget.unlimited(),
    slice_nodes: int = 20_000_000,
    problem: FastProblem | None = None,
) -> Decision:
    """Budgeted decision, returning the same Decision the reference engine would.

    Wall-clock budgets are checked between node slices, so ``max_seconds`` is
    honoured at ``slice_nodes`` granularity.  Pass a prepared ``problem`` to
    resume a previous partial search with more budget.
    """
    prob = problem if problem is not None else FastProblem(sticker, stain)
    deadline = None if budget.max_seconds is None else time.monotonic() + budget.max_seconds
    while True:
        remaining = None if budget.max_nodes is None else budget.max_nodes - int(prob.state[1])
        if remaining is not None and remaining <= 0:
            return Decision(UNKNOWN, None, int(prob.state[1]))
        if deadline is not None and time.monotonic() >= deadline:
            return Decision(UNKNOWN, None, int(prob.state[1]))
        step = slice_nodes if remaining is None else min(slice_nodes, remaining)
        status, _ = prob.run_slice(step)
        if status == _FOUND:
            return Decision(COVERABLE, prob.witness(), int(prob.state[1]))
        if status == _EXHAUSTED:
            return Decision(NOT_COVERABLE, None, int(prob.state[1]))
