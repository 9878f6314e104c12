import shutil
from pathlib import Path

import pytest

from flatcover.classify import (
    CatalogError,
    PartitionReport,
    catalog_I,
    catalog_J,
    classify,
    exhaustive_partition_check,
    verify_catalog,
)
from flatcover.cover import SearchBudget
from flatcover.poly import (
    Polyomino,
    includes,
    is_simply_connected,
    transforms_of,
)

RECT_2x5 = Polyomino([(x, y) for x in range(5) for y in range(2)])


def test_catalog_shape_counts():
    eyes = catalog_I()
    jays = catalog_J()
    assert len(eyes) == 18
    assert len(jays) == 6
    assert [e.name for e in eyes[:5]] == ["5/I", "5/U", "5/V", "5/X", "5/Z"]
    assert [e.name for e in jays] == ["5/Y", "5/T", "5/F", "6/3", "6/N", "6/S"]
    sizes = sorted(len(e.stain.cells) for e in eyes)
    assert sizes == [5] * 5 + [6] * 12 + [7]
    assert all(len(e.stain.cells) in (5, 6) for e in jays)


def test_catalog_shapes_simply_connected():
    for entry in catalog_I() + catalog_J():
        assert is_simply_connected(entry.stain), entry.name
        if entry.counterexample is not None:
            assert is_simply_connected(entry.counterexample), entry.name


def test_minimality_of_family_I():
    # no member properly contains another (else the smaller one wins anyway)
    eyes = [e.stain for e in catalog_I()]
    for a in eyes:
        for b in eyes:
            if a is not b:
                assert not includes(a, b)


def test_classify_catalog_members():
    for entry in catalog_I():
        verdict = classify(entry.stain)
        assert not verdict.always_coverable
        assert verdict.entry == entry.name
    for entry in catalog_J():
        verdict = classify(entry.stain)
        assert verdict.always_coverable
        assert verdict.entry == entry.name


def test_classify_small_shapes():
    assert classify(Polyomino([(0, 0)])).always_coverable
    assert classify(Polyomino([(0, 0), (1, 0)])).always_coverable
    square = Polyomino([(0, 0), (1, 0), (0, 1), (1, 1)])
    assert classify(square).always_coverable


def test_classify_first_match_order():
    # the 2x5 rectangle contains several I members; the scan reports 5/I
    verdict = classify(RECT_2x5)
    assert not verdict.always_coverable
    assert verdict.entry == "5/I"


def test_classify_transform_invariance():
    for entry in catalog_I() + catalog_J():
        want = classify(entry.stain)
        for image in transforms_of(entry.stain):
            got = classify(Polyomino(image.cells))
            assert got.always_coverable == want.always_coverable
            assert got.entry == want.entry


def test_classify_counterexample_orientation():
    # when a sticker ships, a transformed stain gets a matching transformed
    # sticker: the classification must stay internally consistent
    for entry in catalog_I():
        if entry.counterexample is None:
            continue
        for image in transforms_of(entry.stain):
            verdict = classify(Polyomino(image.cells))
            assert verdict.counterexample is not None
            assert len(verdict.counterexample.cells) == len(
                entry.counterexample.cells
            )


def test_verify_catalog_flags_everything_unproven():
    report = verify_catalog(SearchBudget.nodes(10))
    assert len(report.checks) == 18
    for check in report.checks:
        assert check.outcome in ("missing", "unknown", "coverable", "not_coverable")
        if check.outcome != "not_coverable":
            assert check.flagged
    # a 10-node budget proves nothing, so the report cannot be clean
    # unless every entry were already refuted at 10 nodes (it is not)
    assert not report.ok


def test_partition_counts():
    report = exhaustive_partition_check()
    assert isinstance(report, PartitionReport)
    assert report.ok and not report.violations
    totals = {size: report.counts[size][0] for size in range(1, 8)}
    assert totals == {1: 1, 2: 1, 3: 2, 4: 5, 5: 12, 6: 35, 7: 108}
    # sizes 1..4: everything fits a J member, nothing holds an I member
    for size in range(1, 5):
        total, with_i, in_j = report.counts[size]
        assert (with_i, in_j) == (0, total)
    assert report.counts[5] == (12, 5, 7)
    assert report.counts[6] == (35, 32, 3)
    assert report.counts[7] == (108, 108, 0)


def test_catalog_missing_root(monkeypatch, tmp_path):
    monkeypatch.setenv("FLATCOVER_CATALOG", str(tmp_path / "nowhere"))
    with pytest.raises(CatalogError):
        catalog_I()


def test_catalog_corrupt_entry(monkeypatch, tmp_path):
    source = Path(__file__).resolve().parents[1] / "src" / "flatcover" / "catalog"
    root = tmp_path / "catalog"
    shutil.copytree(source, root)
    (root / "I" / "5" / "U.stain").write_text("1 2\n11\n")  # wrong cell count
    monkeypatch.setenv("FLATCOVER_CATALOG", str(root))
    with pytest.raises(CatalogError):
        catalog_I()
