"""The acceptance gate: one test per shipped claim, run at stated budgets.

Each test prints/fails as a single line under ``pytest -v``.  Long-running
optional parts are gated behind environment variables rather than silently
weakened:

* ``FLATCOVER_OVERNIGHT_SECONDS`` — per-entry budget for re-verifying the
  full refutation catalog (criterion 3b); unset skips it.
* ``FLATCOVER_EXHAUSTIVE=1`` — also re-verify the 325x325 sticker of entry
  6/5 (criterion 3c); Unknown is an accepted outcome there.

Known-honest failures are left failing on purpose; see the assertion
messages for what is missing or wrong.
"""
import math
import os
import time
from itertools import combinations, product

import numpy as np
import pytest

from flatcover import anneal as an
from flatcover.classify import (
    catalog_I,
    exhaustive_partition_check,
    verify_catalog,
)
from flatcover.cover import (
    SearchBudget,
    brute_force_oracle,
    flat_cover_decide,
    verify_cover,
)
from flatcover.poly import Polyomino, free_polyominoes, is_simply_connected
from flatcover.reduce1d import (
    X3CInstance,
    brute_x3c,
    build_template,
    frame_gadget,
    golomb_ruler,
    set_gadget,
    solve_1d,
    verify_1d,
    witness_from_x3c,
)
from flatcover.reduce2d import (
    PrecolorInstance,
    brute_precoloring,
    check_gadget_properties,
    roundtrip_2d,
    witness_from_coloring,
)

I_PENT = Polyomino([(x, 0) for x in range(5)])


# --------------------------------------------------------------------------
# 1. the vertex gadget: 3 covers of the core, 1 per color image, overlap iff
#    equal colors (seconds)


def test_criterion_1_gadget_properties():
    start = time.monotonic()
    report = check_gadget_properties()
    elapsed = time.monotonic() - start
    assert report.property1, "core must have exactly the 3 centered color covers"
    assert report.property2, "each color image must have exactly 1 cover, itself"
    assert report.property3, "axis-adjacent copies must overlap iff colors match"
    assert report.core_complete
    assert report.color_single_covers == (1, 1, 1)
    assert len(report.core_single_covers) == 3
    assert elapsed < 60, f"gadget re-verification took {elapsed:.1f}s, expected seconds"


# --------------------------------------------------------------------------
# 2. the solver agrees with the brute-force oracle on every free sticker of
#    at most 5 cells against every free stain of at most 4 (< 1 minute)


def test_criterion_2_solver_matches_oracle_grid():
    start = time.monotonic()
    stickers = [p for n in (1, 2, 3, 4, 5) for p in free_polyominoes(n)]
    stains = [p for n in (1, 2, 3, 4) for p in free_polyominoes(n)]
    pairs = 0
    for sticker in stickers:
        for stain in stains:
            want = brute_force_oracle(sticker, stain)
            got = flat_cover_decide(sticker, stain, SearchBudget(10_000_000, 30))
            assert not got.is_unknown, (sticker.cells, stain.cells)
            assert got.is_coverable == want, (sticker.cells, stain.cells)
            if got.is_coverable:
                assert verify_cover(got.witness)
            pairs += 1
    elapsed = time.monotonic() - start
    assert pairs == 21 * 9
    assert elapsed < 60, f"{pairs} pairs took {elapsed:.1f}s, expected < 1 minute"


# --------------------------------------------------------------------------
# 3. the refutation catalog: each counterexample sticker really cannot cover
#    its stain


def test_criterion_3a_pentomino_I_refuted_in_ten_minutes():
    entry = catalog_I()[0]
    assert entry.name == "5/I"
    assert entry.counterexample is not None, (
        "no counterexample sticker is shipped for 5/I: the annealing "
        "pipeline has not rediscovered one yet (the source text prints no "
        "coordinates, so the shape cannot be transcribed; see the search "
        "notes in the repository history)"
    )
    decision = flat_cover_decide(
        entry.counterexample, entry.stain, SearchBudget(max_seconds=600)
    )
    assert decision.is_not_coverable, (
        f"5/I sticker was not refuted within 10 minutes: {decision.status}"
    )


def test_criterion_3b_remaining_entries_overnight():
    budget = os.environ.get("FLATCOVER_OVERNIGHT_SECONDS")
    if budget is None:
        pytest.skip("set FLATCOVER_OVERNIGHT_SECONDS to re-verify the catalog")
    seconds = float(budget)
    failures = []
    for entry in catalog_I():
        if entry.name in ("5/I", "6/5"):
            continue
        if entry.counterexample is None:
            failures.append(f"{entry.name}: sticker missing")
            continue
        decision = flat_cover_decide(
            entry.counterexample, entry.stain, SearchBudget(max_seconds=seconds)
        )
        if not decision.is_not_coverable:
            failures.append(f"{entry.name}: {decision.status}")
    assert not failures, "; ".join(failures)


def test_criterion_3c_hexomino_5_exhaustive():
    if os.environ.get("FLATCOVER_EXHAUSTIVE") != "1":
        pytest.skip("set FLATCOVER_EXHAUSTIVE=1 to attempt the 325x325 sticker")
    entry = next(e for e in catalog_I() if e.name == "6/5")
    assert entry.counterexample is not None, "no sticker shipped for 6/5"
    decision = flat_cover_decide(
        entry.counterexample, entry.stain, SearchBudget(max_seconds=86_400)
    )
    # Unknown is acceptable at this size; a cover would disprove the entry
    assert not decision.is_coverable


# --------------------------------------------------------------------------
# 4. the small-shape partition: exact counts and the either-or law


def test_criterion_4_partition_counts_exact():
    report = exhaustive_partition_check()
    assert report.ok, report.violations
    totals = [report.counts[size][0] for size in range(1, 8)]
    assert totals == [1, 1, 2, 5, 12, 35, 108]
    # every heptomino contains a minimal bad shape; none fits a maximal good one
    assert report.counts[7] == (108, 108, 0)


# --------------------------------------------------------------------------
# 5. every shipped counterexample sticker is simply connected


def test_criterion_5_counterexamples_simply_connected():
    # absence of stickers is criterion 3's failure, not a hole violation;
    # this test is vacuously true while none are shipped
    for entry in catalog_I():
        if entry.counterexample is not None:
            assert is_simply_connected(entry.counterexample), (
                f"{entry.name}: counterexample has a hole"
            )


# --------------------------------------------------------------------------
# 6. the 1D family over the 3-element universe: satisfiable instances give
#    verified witnesses, the unsatisfiable one is proved uncoverable


def test_criterion_6_one_dimensional_family():
    start = time.monotonic()
    # r copies of the only triple over {0,1,2}; r = 0 is the unsat case
    for r in (1, 2):
        inst = X3CInstance(1, [(0, 1, 2)] * r)
        template = build_template(inst)
        chosen = brute_x3c(inst)
        assert chosen is not None
        witness = witness_from_x3c(inst, chosen)
        assert verify_1d(template.positions, template.target_length, witness)
        # structural: every gadget ends in the reversal of its stopper block,
        # and the active stopper leaves a single 0 (trailing for the frame,
        # centered for sets — the patterns that pin shifted copies apart)
        stop = 5 * (r + 1)
        gadgets = [frame_gadget(inst)] + [
            set_gadget(inst, i) for i in range(1, r + 1)
        ]
        for g in gadgets:
            assert g[-stop:] == g[:stop][::-1]
        assert "11110" in frame_gadget(inst)[:stop]
        for i in range(1, r + 1):
            assert "11011" in set_gadget(inst, i)[:stop]
    # structural: copies shifted by the ruler marks collide iff the chosen
    # sets intersect (frame uses mark 0, set k uses mark k+1)
    pick = X3CInstance(2, [(0, 1, 2), (3, 4, 5), (0, 3, 4)])
    template = build_template(pick)
    cells = set(template.positions)
    shift = [-2 * a * template.gadget_size - 5 * (pick.r + 1)
             for a in template.ruler]
    frame_copy = {p + shift[0] for p in cells}
    copies = [{p + shift[k + 1] for p in cells} for k in range(pick.r)]
    for i in range(pick.r):
        assert not (frame_copy & copies[i])
        for j in range(i + 1, pick.r):
            meets = bool(set(pick.sets[i]) & set(pick.sets[j]))
            assert bool(copies[i] & copies[j]) == meets, (i, j)
    inst = X3CInstance(1, [])
    template = build_template(inst)
    assert brute_x3c(inst) is None
    # structural facts of the frame-only template
    assert template.element_size == 40
    assert template.target_length == 3320
    assert template.gadget_size == 3330
    assert min(template.positions) == 0
    assert len(template.positions) == 2 * 40 * 40 + 8
    decision = solve_1d(
        template.positions, template.target_length,
        SearchBudget(max_nodes=50_000_000, max_seconds=900),
    )
    assert decision.is_not_coverable, (
        f"unsat r=0 instance not refuted: {decision.status} at {decision.nodes} nodes"
    )
    elapsed = time.monotonic() - start
    assert elapsed < 900, f"family took {elapsed:.0f}s, expected minutes"


# --------------------------------------------------------------------------
# 7. the 2D reduction round trip on all instances with at most 3 vertices


def _small_instances():
    shapes = [
        [(0, 0)],
        [(0, 0), (1, 0)],
        [(0, 0), (0, 1)],
        [(0, 0), (1, 0), (2, 0)],
        [(0, 0), (0, 1), (0, 2)],
        [(0, 0), (1, 0), (1, 1)],
        [(0, 0), (1, 0), (0, 1)],
        [(0, 0), (0, 1), (1, 1)],
        [(1, 0), (0, 1), (1, 1)],
    ]
    for cells in shapes:
        for colors in product((0, 1, 2, 3), repeat=len(cells)):
            precolor = {c: k for c, k in zip(cells, colors) if k}
            yield PrecolorInstance(cells, precolor)


def _properly_precolored(inst):
    colored = inst.precoloring()
    return all(
        colored[a] != colored[b]
        for a, b in inst.edges()
        if a in colored and b in colored
    )


def test_criterion_7a_roundtrip_proper_side():
    """Witness direction on every instance; solver direction where tractable."""
    checked = 0
    for inst in _small_instances():
        coloring = brute_precoloring(inst)
        # on paths of <= 3 vertices, 3 colors extend any proper precoloring
        assert (coloring is not None) == _properly_precolored(inst), inst
        if coloring is not None:
            assert verify_cover(witness_from_coloring(inst, coloring)), inst
        checked += 1
    assert checked == 4 + 2 * 16 + 6 * 64
    # the solver agrees end to end on every single-vertex instance
    for colors in ({}, {(0, 0): 1}, {(0, 0): 2}, {(0, 0): 3}):
        inst = PrecolorInstance([(0, 0)], colors)
        trip = roundtrip_2d(inst, SearchBudget.nodes(20_000_000))
        assert trip.conclusive and trip.agree, colors


def test_criterion_7b_roundtrip_literal_equivalence():
    """The construction's equivalence quantified over *all* precolorings.

    Improperly precolored edges make the coloring side unsatisfiable while
    the built stain stays coverable (covers may turn copies differently than
    the precoloring demands), so this direction of the claim is false as
    stated.  The test records the refutation; it is expected to fail."""
    for vertices, colors in (
        ([(0, 0), (0, 1)], {(0, 0): 1, (0, 1): 1}),
        ([(0, 0), (1, 0)], {(0, 0): 2, (1, 0): 2}),
    ):
        inst = PrecolorInstance(vertices, colors)
        trip = roundtrip_2d(inst, SearchBudget(1_000_000_000, 120))
        assert trip.conclusive, "budget too small to settle the instance"
        assert trip.agree, (
            f"equivalence fails on improper precoloring {colors}: "
            f"colorable={trip.satisfiable} but stain decided "
            f"{trip.decision.status} ({trip.decision.nodes} nodes)"
        )


# --------------------------------------------------------------------------
# 8. the difference ruler: Sidon property and the quadratic bound up to 200


def test_criterion_8_ruler_sidon_up_to_200():
    for r in range(201):
        ruler = golomb_ruler(r)
        assert len(ruler) == r + 1 and ruler[0] == 0
        diffs = [b - a for a, b in combinations(ruler, 2)]
        assert len(diffs) == len(set(diffs)), f"r={r} not Sidon"
        assert ruler[-1] <= 8 * (r + 1) ** 2, f"r={r} exceeds the bound"


# --------------------------------------------------------------------------
# 9. annealing soundness: incremental bookkeeping equals recomputation over
#    1000+ accepted moves, invariants hold at every accepted step, and every
#    zero-penalty candidate goes through the full solver


def test_criterion_9_annealing_soundness(monkeypatch):
    params = an.SearchParams(
        initial_temperature=150.0, cooling_rate=0.9995, steps=400,
        restart_count=1, rng_seed=5, box_radius=6, core_radius=2,
        min_cells=6, initial_cells=14, pair_cap=2000, block_pair_cap=64,
        verify_nodes=50_000, verify_seconds=10.0,
    )
    rng = np.random.default_rng(5)
    cand = an.initial_candidate(I_PENT, params, rng)
    comp = an._components(cand, params)
    total = an._total(comp, params)
    accepted = proposals = 0
    while accepted < 1000:
        proposals += 1
        assert proposals < 200_000, "walk stalled"
        move = an.propose_move(cand, rng, params.move_weights)
        new, _reason = an.apply_move(cand, move)
        if new is None:
            continue
        ncomp = an._components(new, params)
        ntotal = an._total(ncomp, params)
        delta = ntotal - total
        if delta <= 0 or rng.random() < math.exp(-delta / 2000.0):
            accepted += 1
            cells = new.cells()
            # tree invariant
            edges = sum((x + 1, y) in cells for x, y in cells)
            edges += sum((x, y + 1) in cells for x, y in cells)
            assert edges == len(cells) - 1, "accepted candidate is not a tree"
            # symmetry invariant outside the free core box
            for x, y in cells:
                if max(abs(x), abs(y)) > new.core_radius:
                    orbit = {(x, y), (-x, y), (x, -y), (-x, -y),
                             (y, x), (-y, x), (y, -x), (-y, -x)}
                    assert orbit <= cells, "orbit symmetry broken"
            # exact delta == recompute
            rebuilt = an.Candidate(new.stain, new.radius, new.core_radius,
                                   new.core, new.domain)
            assert np.array_equal(rebuilt.grid, new.grid)
            assert an._components(rebuilt, params) == ncomp
            cand, comp, total = new, ncomp, ntotal

    # zero-penalty candidates are always verified by the unpruned solver
    calls = []
    real = an.flat_cover_decide

    def recording(sticker, stain, budget, **kwargs):
        calls.append((budget, kwargs))
        return real(sticker, stain, budget, **kwargs)

    monkeypatch.setattr(an, "flat_cover_decide", recording)
    zp = an.SearchParams(
        initial_temperature=50.0, cooling_rate=0.999, steps=300,
        restart_count=1, rng_seed=3, box_radius=4, core_radius=2,
        min_cells=1, initial_cells=1, pair_cap=2000, block_pair_cap=64,
        verify_nodes=200_000, verify_seconds=10.0,
    )
    outcome = an.anneal(I_PENT, zp)
    assert outcome.verifications == len(calls) >= 1
    for budget, kwargs in calls:
        assert budget.max_nodes == 200_000 and budget.max_seconds == 10.0
        assert not kwargs, "verification must run the full solver, unpruned"
    assert not outcome.found
