"""Constant-time always-coverability classification via the shape catalog.

A stain is always coverable (some congruent-copies cover exists for *every*
sticker) iff it fits inside one of 6 maximal catalog shapes (family J);
otherwise it contains one of 18 minimal catalog shapes (family I), each of
which comes with a pre-verified counterexample sticker.  Shapes with 7 or
more cells always contain an I member.

Catalog files live next to this module under ``catalog/``; set the
``FLATCOVER_CATALOG`` environment variable to point somewhere else.
"""

from __future__ import annotations

import os
import time
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

from .cover import Decision, SearchBudget, flat_cover_decide
from .poly import (
    TRANSFORMS,
    Polyomino,
    PolyominoError,
    canonical,
    find_inclusion,
    free_polyominoes,
    includes,
    parse_poly,
    transforms_of,
)

__all__ = [
    "CatalogEntry",
    "CatalogError",
    "Classification",
    "catalog_I",
    "catalog_J",
    "classify",
    "verify_catalog",
    "exhaustive_partition_check",
    "CatalogCheck",
    "CatalogReport",
    "PartitionReport",
]

# Entry names in catalog order: smallest shapes first, then by label.  The
# classifier reports the first match, so this order is part of the contract.
_I_NAMES = (
    "5/I", "5/U", "5/V", "5/X", "5/Z",
    "6/5", "6/8", "6/9", "6/B", "6/C", "6/D",
    "6/F", "6/P", "6/R", "6/T", "6/W", "6/Z",
    "7/1110_0011_0001_0001",
)
_J_NAMES = ("5/Y", "5/T", "5/F", "6/3", "6/N", "6/S")


class CatalogError(Exception):
    """A catalog data file is missing or does not parse."""


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    stain: Polyomino
    counterexample: Polyomino | None = None


@dataclass(frozen=True)
class Classification:
    """Verdict for one stain; exactly one of the two kinds."""

    always_coverable: bool
    entry: str
    counterexample: Polyomino | None = None


def _catalog_root() -> Path:
    override = os.environ.get("FLATCOVER_CATALOG")
    if override:
        return Path(override)
    return Path(__file__).resolve().parent / "catalog"


def _load_entry(root: Path, family: str, name: str) -> CatalogEntry:
    size = name.split("/", 1)[0]
    stain_path = root / family / f"{name}.stain"
    try:
        stain = parse_poly(stain_path.read_text())
    except (OSError, PolyominoError) as exc:
        raise CatalogError(f"catalog entry {family}/{name}: {exc}") from exc
    if len(stain.cells) != int(size):
        raise CatalogError(
            f"catalog entry {family}/{name}: stain has {len(stain.cells)} cells"
        )
    counterexample = None
    if family == "I":
        sticker_path = root / family / f"{name}.sticker"
        if sticker_path.exists():
            try:
                counterexample = parse_poly(sticker_path.read_text())
            except (OSError, PolyominoError) as exc:
                raise CatalogError(f"catalog entry {family}/{name}: {exc}") from exc
    return CatalogEntry(name, stain, counterexample)


@lru_cache(maxsize=None)
def _load_family(root_str: str, family: str) -> tuple[CatalogEntry, ...]:
    root = Path(root_str)
    names = _I_NAMES if family == "I" else _J_NAMES
    entries = tuple(_load_entry(root, family, name) for name in names)
    shapes = {canonical(e.stain) for e in entries}
    if len(shapes) != len(entries):
        raise CatalogError(f"catalog family {family} has duplicate shapes")
    return entries


def catalog_I() -> tuple[CatalogEntry, ...]:
    """The 18 minimal not-always-coverable shapes, in catalog order."""
    return _load_family(str(_catalog_root()), "I")


def catalog_J() -> tuple[CatalogEntry, ...]:
    """The 6 maximal always-coverable shapes, in catalog order."""
    return _load_family(str(_catalog_root()), "J")


def _oriented_counterexample(entry: CatalogEntry, orientation: int) -> Polyomino | None:
    """The entry's sticker, turned the same way as the found stain embedding.

    ``orientation`` indexes transforms_of(entry.stain).  Any grid transform
    mapping the stain onto that image also maps the sticker onto a shape that
    cannot cover the embedded copy, hence cannot cover the larger stain.
    """
    if entry.counterexample is None:
        return None
    target = transforms_of(entry.stain)[orientation]
    for g, t in enumerate(TRANSFORMS):
        if Polyomino(t(c) for c in entry.stain.cells) == target:
            return Polyomino(t(c) for c in entry.counterexample.cells)
    raise AssertionError(f"orientation {orientation} not reachable")  # pragma: no cover


def classify(stain: Polyomino) -> Classification:
    """Decide always-coverability; O(1) beyond the inclusion scan windows."""
    for entry in catalog_I():
        found = find_inclusion(stain, entry.stain)
        if found is not None:
            orientation, _offset, _cells = found
            return Classification(
                always_coverable=False,
                entry=entry.name,
                counterexample=_oriented_counterexample(entry, orientation),
            )
    if len(stain.cells) >= 7:  # pragma: no cover - partition law excludes this
        raise AssertionError("stain with >= 7 cells contains no catalog I member")
    for entry in catalog_J():
        if includes(entry.stain, stain):
            return Classification(always_coverable=True, entry=entry.name)
    raise AssertionError("stain escaped the catalog partition")  # pragma: no cover


@dataclass(frozen=True)
class CatalogCheck:
    name: str
    outcome: str  # "not_coverable" | "coverable" | "unknown" | "missing"
    nodes: int
    seconds: float

    @property
    def flagged(self) -> bool:
        return self.outcome != "not_coverable"


@dataclass(frozen=True)
class CatalogReport:
    checks: tuple[CatalogCheck, ...]

    @property
    def ok(self) -> bool:
        return all(not c.flagged for c in self.checks)


def verify_catalog(budget: SearchBudget = SearchBudget.unlimited()) -> CatalogReport:
    """Re-run every I entry's counterexample against its stain.

    Each entry gets a fresh copy of ``budget``.  Unknown results and missing
    sticker files are flagged in the report, never passed silently.
    """
    checks = []
    for entry in catalog_I():
        if entry.counterexample is None:
            checks.append(CatalogCheck(entry.name, "missing", 0, 0.0))
            continue
        start = time.monotonic()
        decision = flat_cover_decide(entry.counterexample, entry.stain, budget)
        elapsed = time.monotonic() - start
        checks.append(CatalogCheck(entry.name, decision.status, decision.nodes, elapsed))
    return CatalogReport(tuple(checks))


@dataclass(frozen=True)
class PartitionReport:
    # size -> (shape count, shapes containing an I member, shapes inside a J member)
    counts: dict[int, tuple[int, int, int]]
    violations: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.violations


def exhaustive_partition_check() -> PartitionReport:
    """Enumerate all free shapes of 1..7 cells and check the catalog laws.

    Sizes 1..6: containing an I member and fitting in a J member are mutually
    exclusive and exhaustive.  Size 7: every shape contains an I member.
    """
    i_shapes = [e.stain for e in catalog_I()]
    j_shapes = [e.stain for e in catalog_J()]
    counts: dict[int, tuple[int, int, int]] = {}
    violations = []
    for size in range(1, 8):
        shapes = free_polyominoes(size)
        n_inc = n_in = 0
        for shape in shapes:
            inc_i = any(includes(shape, m) for m in i_shapes)
            in_j = any(includes(m, shape) for m in j_shapes)
            n_inc += inc_i
            n_in += in_j
            if size <= 6 and inc_i == in_j:
                kind = "both" if inc_i else "neither"
                violations.append(f"size {size}: {kind}: {shape.cells}")
            elif size == 7 and not inc_i:
                violations.append(f"size 7: no I member: {shape.cells}")
        counts[size] = (len(shapes), n_inc, n_in)
    return PartitionReport(counts, tuple(violations))
