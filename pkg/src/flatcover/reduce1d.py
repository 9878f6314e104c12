"""One-dimensional flat covers: exact cover by 3-sets as a template question.

An X3C instance (universe of 3q elements, r three-element sets) becomes a
single *template* — a finite set of integer positions — such that a segment of
length L can be covered by disjoint translated copies of the template exactly
when the instance has an exact cover.  The template concatenates one frame
gadget and r set gadgets, spaced out by a Golomb ruler so that distinct
gadgets can never be confused, and a complete DFS solver decides the segment
question directly.

Bitstrings are the construction language (gadgets are literal 0/1 strings);
positions are the solving language.  Converters go both ways.
"""
from __future__ import annotations

import time
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Sequence

from .cover import COVERABLE, NOT_COVERABLE, UNKNOWN, Decision, OracleSizeError, SearchBudget

_MONOTONE_TIME_SLICE = 4096  # budget clock checks are amortized over this many nodes


class X3CError(ValueError):
    """Malformed instance, instance text, or chosen-set list."""


@dataclass(frozen=True, init=False)
class X3CInstance:
    """Exact Cover by 3-Sets input: U = {0, ..., 3q-1} and r candidate sets."""

    q: int
    sets: tuple[frozenset[int], ...]

    def __init__(self, q: int, sets: Iterable[Iterable[int]]):
        if q < 1:
            raise X3CError(f"q must be positive, got {q}")
        frozen = []
        for k, s in enumerate(sets, start=1):
            fs = frozenset(int(e) for e in s)
            if len(fs) != 3:
                raise X3CError(f"set {k} must have exactly 3 distinct elements, got {sorted(fs)}")
            if not all(0 <= e < 3 * q for e in fs):
                raise X3CError(f"set {k} has elements outside 0..{3 * q - 1}: {sorted(fs)}")
            frozen.append(fs)
        object.__setattr__(self, "q", int(q))
        object.__setattr__(self, "sets", tuple(frozen))

    @property
    def r(self) -> int:
        return len(self.sets)

    def universe(self) -> frozenset[int]:
        return frozenset(range(3 * self.q))


@dataclass(frozen=True)
class OneDTemplate:
    """The built template and the parameters that shaped it.

    ``positions`` lives in the template bitstring's own frame: the frame
    gadget starts at index 0, so the smallest position is ``5*r`` (the left
    stopper's zero padding), not 0, whenever r > 0.
    """

    positions: frozenset[int]
    element_size: int
    target_length: int
    gadget_size: int
    ruler: tuple[int, ...]

    @property
    def span(self) -> int:
        return max(self.positions) - min(self.positions) + 1


@dataclass(frozen=True)
class OneDWitness:
    """Shifts of the template forming a cover of the target segment."""

    shifts: tuple[int, ...]


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


def golomb_ruler(r: int) -> list[int]:
    """r+1 marks 0 = a_0 < ... < a_r with all pairwise differences distinct.

    Erdos-Turan style: a_i = 2*p*i + (i^2 mod p) over the smallest prime
    p >= r+1, which keeps a_r below 2*p^2 <= 8*(r+1)^2.
    """
    if r < 0:
        raise ValueError(f"r must be non-negative, got {r}")
    p = r + 1
    while not _is_prime(p):
        p += 1
    return [2 * p * i + (i * i) % p for i in range(r + 1)]


def bits_to_positions(bits: str, offset: int = 0) -> frozenset[int]:
    """1-positions of a 0/1 string, shifted by ``offset``."""
    bad = set(bits) - {"0", "1"}
    if bad:
        raise X3CError(f"bitstring may contain only 0 and 1, found {sorted(bad)}")
    return frozenset(offset + i for i, b in enumerate(bits) if b == "1")


def positions_to_bits(positions: Iterable[int], length: int | None = None) -> str:
    """Inverse of bits_to_positions for non-negative positions."""
    pos = set(positions)
    if not pos:
        return "0" * (length or 0)
    if min(pos) < 0:
        raise X3CError("positions must be non-negative to render a bitstring")
    n = max(pos) + 1 if length is None else length
    if n <= max(pos):
        raise X3CError(f"length {n} too short for position {max(pos)}")
    return "".join("1" if i in pos else "0" for i in range(n))


def set_code(inst: X3CInstance, index: int) -> str:
    """The 3qN-bit body of set gadget ``index`` (1-based): an N-block per element."""
    n = element_size(inst)
    members = inst.sets[index - 1]
    return "".join("1" * n if j in members else "0" * n for j in range(3 * inst.q))


def element_size(inst: X3CInstance) -> int:
    return 10 * (3 * inst.q + inst.r + 1)


def target_length(inst: X3CInstance) -> int:
    n = element_size(inst)
    return 2 * n * n + 3 * inst.q * n


def gadget_size(inst: X3CInstance) -> int:
    return target_length(inst) + 10 * (inst.r + 1)


def frame_gadget(inst: X3CInstance) -> str:
    """G0: stoppers around a main body of two 1-runs separated by the blank."""
    n, r = element_size(inst), inst.r
    left = "0" * (5 * r) + "11110"
    body = "1" * (n * n) + "0" * (3 * inst.q * n) + "1" * (n * n)
    return left + body + left[::-1]


def set_gadget(inst: X3CInstance, index: int) -> str:
    """G_index (1-based): stoppers around the zero-padded set code."""
    if not 1 <= index <= inst.r:
        raise X3CError(f"set index must be in 1..{inst.r}, got {index}")
    n, r = element_size(inst), inst.r
    left = "0" * (5 * (r - index)) + "11011" + "0" * (5 * index)
    body = "0" * (n * n) + set_code(inst, index) + "0" * (n * n)
    return left + body + left[::-1]


def build_template(inst: X3CInstance) -> OneDTemplate:
    """Concatenate the gadgets at ruler-spaced offsets 2*a_i*W."""
    w = gadget_size(inst)
    ruler = golomb_ruler(inst.r)
    gadgets = [frame_gadget(inst)]
    gadgets += [set_gadget(inst, i) for i in range(1, inst.r + 1)]
    positions: set[int] = set()
    for a, bits in zip(ruler, gadgets):
        assert len(bits) == w, "gadget length must equal W"
        positions |= bits_to_positions(bits, offset=2 * a * w)
    return OneDTemplate(
        positions=frozenset(positions),
        element_size=element_size(inst),
        target_length=target_length(inst),
        gadget_size=w,
        ruler=tuple(ruler),
    )


def _as_mask(positions: Iterable[int]) -> tuple[int, int]:
    """(bitmask, base) with bit k standing for position base+k."""
    pos = sorted(positions)
    if not pos:
        raise ValueError("positions must be non-empty")
    base = pos[0]
    mask = 0
    for p in pos:
        mask |= 1 << (p - base)
    return mask, base


def solve_1d(
    positions: Iterable[int],
    length: int,
    budget: SearchBudget = SearchBudget.unlimited(),
) -> Decision:
    """Complete DFS for covering {0, ..., length-1} by disjoint template copies.

    Each node places a copy hitting the smallest still-uncovered target
    position; copies may protrude anywhere outside the segment.  Collision
    tests are whole-template bitmask ANDs, memoized per relative shift.
    """
    template, base = _as_mask(positions)
    if length < 1:
        raise ValueError(f"length must be positive, got {length}")
    offsets = [p - base for p in sorted(set(positions))]
    target_mask = (1 << length) - 1

    collide_memo: dict[int, bool] = {0: True}

    def collides(delta: int) -> bool:
        got = collide_memo.get(delta)
        if got is None:
            got = bool(template & (template >> delta)) if delta > 0 else collides(-delta)
            collide_memo[delta] = got
        return got

    deadline = None
    if budget.max_seconds is not None:
        deadline = time.monotonic() + budget.max_seconds
    max_nodes = budget.max_nodes
    nodes = 0
    placed: list[int] = []  # shifts of the copies, in placement order
    out_of_budget = False

    def _shifted(mask: int, k: int) -> int:
        return mask << k if k >= 0 else mask >> -k

    def search(covered: int) -> tuple[int, ...] | None:
        nonlocal nodes, out_of_budget
        missing = target_mask & ~covered
        if not missing:
            return tuple(placed)
        target = (missing & -missing).bit_length() - 1
        for off in offsets:
            shift = target - off - base
            nodes += 1
            if max_nodes is not None and nodes > max_nodes:
                out_of_budget = True
                return None
            if deadline is not None and nodes % _MONOTONE_TIME_SLICE == 0:
                if time.monotonic() > deadline:
                    out_of_budget = True
                    return None
            if any(collides(shift - s) for s in placed):
                continue
            placed.append(shift)
            got = search(covered | _shifted(template, shift + base))
            if got is not None or out_of_budget:
                if got is not None:
                    return got
                placed.pop()
                return None
            placed.pop()
        return None

    witness = search(0)
    if witness is not None:
        return Decision(COVERABLE, OneDWitness(witness), nodes)
    if out_of_budget:
        return Decision(UNKNOWN, None, nodes)
    return Decision(NOT_COVERABLE, None, nodes)


def verify_1d(positions: Iterable[int], length: int, witness: OneDWitness) -> bool:
    """Disjointness and coverage by plain set arithmetic, solver-independent."""
    pos = frozenset(positions)
    union: set[int] = set()
    total = 0
    for s in witness.shifts:
        copy = {p + s for p in pos}
        union |= copy
        total += len(copy)
    if total != len(union):
        return False
    return set(range(length)) <= union


def witness_from_x3c(inst: X3CInstance, chosen: Sequence[int]) -> OneDWitness:
    """Cover built from an exact cover: frame copy plus one copy per chosen set.

    Each shift aligns the relevant gadget's main body with the target segment;
    the frame's 1-runs fill the flanks and the chosen codes tile the blank.
    """
    picked = list(chosen)
    if len(set(picked)) != len(picked):
        raise X3CError(f"chosen set indices repeat: {picked}")
    for k in picked:
        if not 1 <= k <= inst.r:
            raise X3CError(f"chosen index {k} out of range 1..{inst.r}")
    union: set[int] = set()
    size = 0
    for k in picked:
        union |= inst.sets[k - 1]
        size += 3
    if size != 3 * inst.q or union != inst.universe():
        raise X3CError(f"chosen sets {picked} are not an exact cover of the universe")
    w = gadget_size(inst)
    ruler = golomb_ruler(inst.r)
    margin = 5 * (inst.r + 1)
    shifts = [-margin] + [-2 * ruler[k] * w - margin for k in picked]
    return OneDWitness(tuple(shifts))


def brute_x3c(inst: X3CInstance) -> list[int] | None:
    """First exact cover by enumerating q-subsets of the sets; None if there is none."""
    if inst.r > 25:
        raise OracleSizeError(f"{inst.r} sets; the X3C oracle accepts at most 25")
    universe = inst.universe()
    for picked in combinations(range(1, inst.r + 1), inst.q):
        union: set[int] = set()
        size = 0
        for k in picked:
            union |= inst.sets[k - 1]
            size += 3
        if size == 3 * inst.q and union == universe:
            return list(picked)
    return None


def brute_1d_oracle(positions: Iterable[int], length: int) -> bool:
    """Subset enumeration over all useful shifts; exponential, tiny inputs only."""
    pos = sorted(set(positions))
    span = pos[-1] - pos[0] + 1
    if len(pos) > 4 or span > 8 or length > 10:
        raise OracleSizeError(
            f"oracle limits are 4 elements, span 8, length 10; "
            f"got {len(pos)} elements, span {span}, length {length}"
        )
    lo = -(pos[-1])  # copy must meet [0, length): smallest useful shift
    hi = length - pos[0]  # and largest
    shifts = range(lo, hi)
    target = set(range(length))
    copies = {s: {p + s for p in pos} for s in shifts}
    useful = [s for s in shifts if copies[s] & target]

    def extend(i: int, used: set[int], covered: set[int]) -> bool:
        if target <= covered:
            return True
        if i == len(useful):
            return False
        s = useful[i]
        if not used & copies[s]:
            if extend(i + 1, used | copies[s], covered | (copies[s] & target)):
                return True
        return extend(i + 1, used, covered)

    return extend(0, set(), set())


def parse_x3c(text: str) -> X3CInstance:
    """Read an instance: header line "q r", then r lines of three elements."""
    rows = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            rows.append(line)
    if not rows:
        raise X3CError("empty instance text")
    head = rows[0].split()
    if len(head) != 2:
        raise X3CError(f"header must be 'q r', got {rows[0]!r}")
    try:
        q, r = int(head[0]), int(head[1])
    except ValueError:
        raise X3CError(f"header must be two integers, got {rows[0]!r}") from None
    if len(rows) - 1 != r:
        raise X3CError(f"expected {r} set lines, found {len(rows) - 1}")
    sets = []
    for line in rows[1:]:
        parts = line.split()
        if len(parts) != 3:
            raise X3CError(f"each set line needs 3 integers, got {line!r}")
        try:
            sets.append([int(p) for p in parts])
        except ValueError:
            raise X3CError(f"non-integer element in {line!r}") from None
    return X3CInstance(q, sets)


def render_x3c(inst: X3CInstance) -> str:
    lines = [f"{inst.q} {inst.r}"]
    lines += [" ".join(str(e) for e in sorted(s)) for s in inst.sets]
    return "\n".join(lines) + "\n"


def template_to_rle(template: OneDTemplate) -> str:
    """Run-length text: header line, then "bit count" pairs covering the span.

    The bitstring starts at position 0 of the template frame (so a leading
    zero-run records the stopper padding) and stops at the last 1.
    """
    bits = positions_to_bits(template.positions)
    lines = [
        f"N {template.element_size} L {template.target_length} "
        f"W {template.gadget_size} ruler {','.join(map(str, template.ruler))}"
    ]
    i = 0
    while i < len(bits):
        j = i
        while j < len(bits) and bits[j] == bits[i]:
            j += 1
        lines.append(f"{bits[i]} {j - i}")
        i = j
    return "\n".join(lines) + "\n"


def template_from_rle(text: str) -> OneDTemplate:
    """Inverse of template_to_rle."""
    lines = [ln for ln in (raw.strip() for raw in text.splitlines()) if ln]
    if not lines:
        raise X3CError("empty template text")
    head = lines[0].split()
    try:
        if head[0::2] != ["N", "L", "W", "ruler"]:
            raise ValueError
        n, length, w = int(head[1]), int(head[3]), int(head[5])
        ruler = tuple(int(v) for v in head[7].split(","))
    except (ValueError, IndexError):
        raise X3CError(f"bad template header {lines[0]!r}") from None
    bits = []
    for ln in lines[1:]:
        parts = ln.split()
        if len(parts) != 2 or parts[0] not in "01":
            raise X3CError(f"bad run line {ln!r}")
        try:
            count = int(parts[1])
        except ValueError:
            raise X3CError(f"bad run line {ln!r}") from None
        if count < 1:
            raise X3CError(f"run length must be positive in {ln!r}")
        bits.append(parts[0] * count)
    return OneDTemplate(
        positions=bits_to_positions("".join(bits)),
        element_size=n,
        target_length=length,
        gadget_size=w,
        ruler=ruler,
    )
