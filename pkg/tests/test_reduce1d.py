from itertools import combinations

import pytest
from hypothesis import given, settings, strategies as st

from flatcover.cover import COVERABLE, NOT_COVERABLE, OracleSizeError, SearchBudget
from flatcover.reduce1d import (
    OneDWitness,
    X3CError,
    X3CInstance,
    bits_to_positions,
    brute_1d_oracle,
    brute_x3c,
    build_template,
    element_size,
    frame_gadget,
    gadget_size,
    golomb_ruler,
    parse_x3c,
    positions_to_bits,
    render_x3c,
    set_code,
    set_gadget,
    solve_1d,
    target_length,
    template_from_rle,
    template_to_rle,
    verify_1d,
    witness_from_x3c,
)

# Over the universe {0,1,2} every candidate triple is the whole universe, so
# the q=1 family is indexed by r alone: r copies of {0,1,2}.
R0 = X3CInstance(1, [])
R1 = X3CInstance(1, [(0, 1, 2)])
R2 = X3CInstance(1, [(0, 1, 2), (0, 1, 2)])


def test_instance_validation():
    assert R0.r == 0 and R1.r == 1 and R2.r == 2
    assert R1.universe() == frozenset({0, 1, 2})
    with pytest.raises(X3CError):
        X3CInstance(0, [(0, 1, 2)])
    with pytest.raises(X3CError):
        X3CInstance(1, [(0, 1, 1)])  # not three distinct
    with pytest.raises(X3CError):
        X3CInstance(1, [(0, 1, 3)])  # element outside 0..3q-1


# --------------------------------------------------------------------------
# the difference ruler


def test_golomb_small():
    assert golomb_ruler(0) == [0]
    assert golomb_ruler(1) == [0, 5]
    assert golomb_ruler(2) == [0, 7, 13]
    assert golomb_ruler(4) == [0, 11, 24, 34, 41]


@given(st.integers(0, 60))
@settings(max_examples=30, deadline=None)
def test_golomb_is_sidon(r):
    ruler = golomb_ruler(r)
    assert len(ruler) == r + 1
    assert ruler == sorted(ruler) and ruler[0] == 0
    diffs = [b - a for a, b in combinations(ruler, 2)]
    assert len(diffs) == len(set(diffs))
    assert ruler[-1] <= 8 * (r + 1) ** 2


# --------------------------------------------------------------------------
# sizes and gadget strings


def test_size_formulas():
    # N = 10(3q + r + 1), L = 2N^2 + 3qN, W = L + 10(r + 1)
    assert element_size(R0) == 40
    assert target_length(R0) == 3320
    assert gadget_size(R0) == 3330
    assert element_size(R1) == 50
    assert target_length(R1) == 5150
    assert gadget_size(R1) == 5170
    assert element_size(R2) == 60
    assert target_length(R2) == 7380
    assert gadget_size(R2) == 7410


def test_frame_gadget_structure():
    g = frame_gadget(R1)
    n = element_size(R1)
    assert len(g) == gadget_size(R1)
    assert g[:10] == "0000011110"
    assert g[-10:] == "0111100000"  # right stopper is the left one reversed
    assert g[10:-10] == "1" * n * n + "0" * 3 * n + "1" * n * n


def test_set_gadget_structure():
    g = set_gadget(R1, 1)
    n = element_size(R1)
    assert len(g) == gadget_size(R1)
    assert g[:10] == "1101100000"
    assert g[-10:] == "0000011011"  # 11011 stopper is a palindrome
    assert g[10:-10] == "0" * n * n + set_code(R1, 1) + "0" * n * n
    # set {0,1,2} covers every element, so the code is a solid 3N run
    assert set_code(R1, 1) == "1" * 3 * n
    # with two sets the stopper offsets separate the copies
    assert set_gadget(R2, 1)[:15] == "000001101100000"
    assert set_gadget(R2, 2)[:15] == "110110000000000"
    with pytest.raises(X3CError):
        set_gadget(R1, 2)


def test_bits_positions_duality():
    bits = "0110100"
    pos = bits_to_positions(bits)
    assert pos == {1, 2, 4}
    assert positions_to_bits(pos, len(bits)) == bits
    assert bits_to_positions(bits, offset=10) == {11, 12, 14}
    with pytest.raises(X3CError):
        bits_to_positions("012")


def test_build_template_r0():
    template = build_template(R0)
    assert template.element_size == 40
    assert template.target_length == 3320
    assert template.gadget_size == 3330
    assert template.ruler == (0,)
    assert min(template.positions) == 0  # no stopper padding when r = 0


def test_build_template_r1():
    template = build_template(R1)
    assert template.gadget_size == 5170
    assert template.ruler == (0, 5)
    assert len(template.positions) == 5166
    # with r >= 1 the frame's left stopper starts with 5r zeros
    assert min(template.positions) == 5


def test_rle_round_trip():
    for inst in (R0, R1):
        template = build_template(inst)
        assert template_from_rle(template_to_rle(template)) == template
    text = template_to_rle(build_template(R1))
    assert text.splitlines()[0] == "N 50 L 5150 W 5170 ruler 0,5"


# --------------------------------------------------------------------------
# the 1D solver and its oracle


def test_solve_trivial():
    d = solve_1d([0], 5)
    assert d.status == COVERABLE
    assert verify_1d([0], 5, d.witness)


def test_solve_smallest_uncoverable():
    # the template {0,1,3} cannot tile any length-4 window disjointly
    d = solve_1d([0, 1, 3], 4)
    assert d.status == NOT_COVERABLE
    assert not brute_1d_oracle([0, 1, 3], 4)


def test_solve_budget_unknown():
    template = build_template(R1)
    d = solve_1d(
        template.positions, template.target_length, SearchBudget.nodes(3)
    )
    assert d.is_unknown


def test_verify_rejects_bad_witnesses():
    assert not verify_1d([0, 1], 4, OneDWitness((0, 1)))  # overlap
    assert not verify_1d([0, 2], 3, OneDWitness((0,)))  # gap at 1
    assert not verify_1d([0], 2, OneDWitness((0, 0)))  # duplicate shift


def test_oracle_guards():
    with pytest.raises(OracleSizeError):
        brute_1d_oracle([0, 1, 2, 3, 4], 3)  # too many elements
    with pytest.raises(OracleSizeError):
        brute_1d_oracle([0, 9], 3)  # span too wide
    with pytest.raises(OracleSizeError):
        brute_1d_oracle([0], 11)  # target too long


def test_solver_matches_oracle_everywhere():
    templates = [(0,) + rest
                 for size in (1, 2, 3, 4)
                 for rest in combinations(range(1, 8), size - 1)]
    checked = 0
    for template in templates:
        for length in range(1, 11):
            expect = brute_1d_oracle(template, length)
            d = solve_1d(template, length)
            assert d.status == (COVERABLE if expect else NOT_COVERABLE), (
                template,
                length,
            )
            if expect:
                assert verify_1d(template, length, d.witness)
            checked += 1
    assert checked == 640


# --------------------------------------------------------------------------
# witnesses from exact covers


def test_witness_r1():
    witness = witness_from_x3c(R1, [1])
    template = build_template(R1)
    assert verify_1d(template.positions, template.target_length, witness)
    # frame at -5(r+1); chosen set 1 sits at ruler mark a_1 = 5
    assert witness.shifts == (-10, -2 * 5 * 5170 - 10)


def test_witness_r2_either_copy():
    template = build_template(R2)
    for chosen, mark in (([1], 7), ([2], 13)):
        witness = witness_from_x3c(R2, chosen)
        assert verify_1d(template.positions, template.target_length, witness)
        assert witness.shifts == (-15, -2 * mark * 7410 - 15)


def test_witness_rejects_non_exact_cover():
    with pytest.raises(X3CError):
        witness_from_x3c(R2, [1, 2])  # two copies overlap
    with pytest.raises(X3CError):
        witness_from_x3c(R0, [])  # nothing covers the universe
    with pytest.raises(X3CError):
        witness_from_x3c(R1, [2])  # no such set
    with pytest.raises(X3CError):
        witness_from_x3c(R2, [1, 1])  # repeated index


def test_brute_x3c():
    assert brute_x3c(R0) is None
    assert brute_x3c(R1) == [1]
    assert brute_x3c(R2) == [1]
    two = X3CInstance(2, [(0, 1, 2), (3, 4, 5), (0, 2, 4)])
    assert brute_x3c(two) == [1, 2]
    # every pair of sets shares {0, 1}, so no two are disjoint
    assert brute_x3c(X3CInstance(2, [(0, 1, 2), (0, 1, 3), (0, 1, 4)])) is None


# --------------------------------------------------------------------------
# instance text format


def test_x3c_round_trip():
    for inst in (R0, R1, R2):
        assert parse_x3c(render_x3c(inst)) == inst
    assert parse_x3c("2 2\n0 1 2\n3 4 5\n# trailing comment\n") == X3CInstance(
        2, [(0, 1, 2), (3, 4, 5)]
    )
    assert parse_x3c("1 0\n") == R0


def test_x3c_parse_errors():
    with pytest.raises(X3CError):
        parse_x3c("")
    with pytest.raises(X3CError):
        parse_x3c("1 2\n0 1 2\n")  # header promises two sets
    with pytest.raises(X3CError):
        parse_x3c("1 1\n0 1\n")  # set is not a triple
    with pytest.raises(X3CError):
        parse_x3c("one 1\n0 1 2\n")
