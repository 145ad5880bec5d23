import numpy as np
import pytest

from dualsyll.dataset import (
    DataError,
    ParseError,
    SchemaError,
    load_table,
    normalize_rows,
    read_table,
    to_targets,
    validate_report,
    write_table,
)
from dualsyll.syllogism import RESPONSES, canonical_codes

from conftest import write_table as write_csv


def test_load_well_formed(synthetic_csv):
    m = load_table(synthetic_csv)
    assert len(m.codes) == 64
    assert list(m.codes) == canonical_codes()
    assert m.percentages.shape == (64, 9)


def test_rows_reordered_to_canonical(tmp_path, synthetic_pct):
    codes = canonical_codes()
    order = list(reversed(range(64)))
    path = write_csv(tmp_path / "rev.csv", synthetic_pct[order], [codes[i] for i in order])
    m = load_table(path)
    np.testing.assert_array_equal(m.percentages, synthetic_pct)


def test_missing_row_named(tmp_path, synthetic_pct):
    codes = canonical_codes()
    path = write_csv(tmp_path / "short.csv", synthetic_pct[:-1], codes[:-1])
    with pytest.raises(SchemaError, match="OO4"):
        load_table(path)


def test_duplicate_row_named(tmp_path, synthetic_pct):
    codes = canonical_codes()
    codes[5] = codes[4]
    path = write_csv(tmp_path / "dup.csv", synthetic_pct, codes)
    with pytest.raises(SchemaError, match=f"duplicate code {codes[4]}"):
        load_table(path)


def test_missing_column_named(tmp_path, synthetic_pct):
    path = write_csv(tmp_path / "nocol.csv", synthetic_pct[:, :8],
                     header=("code",) + RESPONSES[:8])
    with pytest.raises(SchemaError, match="NVC"):
        read_table(path)


def test_non_numeric_cell(tmp_path, synthetic_pct):
    path = write_csv(tmp_path / "bad.csv", synthetic_pct)
    lines = path.read_text().splitlines()
    cells = lines[3].split(",")
    cells[4] = "x"
    lines[3] = ",".join(cells)
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(ParseError, match=r"row AA3, column Oac"):
        read_table(path)


def test_row_sum_99_accepted_and_flagged(tmp_path):
    pct = np.tile([60, 5, 10, 0, 5, 0, 10, 0, 10], (64, 1)).astype(float)
    pct[7, 0] = 59  # sums to 99, as rounding in a published table would
    m = load_table(write_csv(tmp_path / "t.csv", pct))
    summary = validate_report(m)
    assert summary.ok
    assert summary.row_sum_min == 99.0
    assert m.codes[7] in summary.needs_renormalization


def test_bad_row_sum_rejected_with_row(tmp_path):
    pct = np.tile([60, 5, 10, 0, 5, 0, 10, 0, 10], (64, 1)).astype(float)
    pct[2, 0] = 56.5  # sum 96.5
    with pytest.raises(DataError, match=r"AA3: sum 96.5"):
        load_table(write_csv(tmp_path / "t.csv", pct))


def test_negative_cell_listed():
    pct = np.tile([60, 5, 10, 0, 5, 0, 10, 0, 10], (64, 1)).astype(float)
    pct[10, 3] = -1
    pct[10, 0] = 61
    from dualsyll.dataset import HumanMatrix
    from dualsyll.syllogism import enumerate_syllogisms
    m = HumanMatrix(tuple(canonical_codes()), pct, tuple(enumerate_syllogisms()))
    summary = validate_report(m)
    assert not summary.ok
    assert any("row AI3, column Oac" in msg for msg in summary.issues)
    assert m.percentages[10, 3] == -1  # never mutated


def test_validation_uniform_column_totals():
    from dualsyll.dataset import HumanMatrix
    from dualsyll.syllogism import enumerate_syllogisms
    pct = np.full((64, 9), 100 / 9)
    m = HumanMatrix(tuple(canonical_codes()), pct, tuple(enumerate_syllogisms()))
    summary = validate_report(m)
    for total in summary.column_totals.values():
        assert total == pytest.approx(64 / 9 * 100)
    assert summary.lines()[0] == "64 rows OK"


def test_to_targets_examples():
    rows = normalize_rows(np.array([[100, 0, 0, 0, 0, 0, 0, 0, 0]]) / 100)
    np.testing.assert_array_equal(rows[0], [1, 0, 0, 0, 0, 0, 0, 0, 0])
    rows = normalize_rows(np.full((1, 9), 11.0) / 100)
    np.testing.assert_allclose(rows[0], np.full(9, 1 / 9), rtol=0, atol=1e-15)
    entries = [60, 5, 10, 0, 5, 0, 10, 0, 10]
    rows = normalize_rows(np.array([entries]) / 100)
    # hand normalization: entries / 100 (the row already sums to 100)
    np.testing.assert_allclose(rows[0], [e / 100 for e in entries], atol=1e-15)
    assert rows[0][3] == 0.0 and rows[0][5] == 0.0


def test_to_targets_contract(synthetic_csv):
    t = to_targets(load_table(synthetic_csv))
    assert t.shape == (64, 9)
    assert np.all(t >= 0)
    np.testing.assert_allclose(t.sum(1), 1.0, atol=1e-9)
    np.testing.assert_allclose(normalize_rows(t), t, atol=1e-15)
    assert np.all((t == 0) == (load_table(synthetic_csv).percentages == 0))


def test_all_zero_row_is_error():
    with pytest.raises(DataError):
        normalize_rows(np.zeros((1, 9)))


def test_round_trip(tmp_path, synthetic_csv):
    m = load_table(synthetic_csv)
    write_table(m, tmp_path / "again.csv")
    assert load_table(tmp_path / "again.csv") == m
    write_table(m, tmp_path / "prem.csv", premises=True)
    assert load_table(tmp_path / "prem.csv") == m


def test_explicit_premises_override_figure(tmp_path, synthetic_pct):
    path = write_csv(tmp_path / "h.csv", synthetic_pct)
    lines = path.read_text().splitlines()
    lines[0] += ",p1,p2"
    for i in range(1, len(lines)):
        lines[i] += ",,"
    lines[1] = lines[1][:-2] + ",Aba,Acb"  # AA1 re-expressed in figure-2 order
    path.write_text("\n".join(lines) + "\n")
    m = load_table(path)
    assert m.syllogisms[0].premise1.format() == "Aba"
    assert m.syllogisms[2].premise1.format() == "Aab"  # AA3 keeps the default
    plain = load_table(write_csv(tmp_path / "plain.csv", synthetic_pct))
    assert not np.array_equal(m.features[0], plain.features[0])
    np.testing.assert_array_equal(m.features[1:], plain.features[1:])


def test_premise_mood_mismatch_rejected(tmp_path, synthetic_pct):
    path = write_csv(tmp_path / "h.csv", synthetic_pct)
    lines = path.read_text().splitlines()
    lines[0] += ",p1,p2"
    for i in range(1, len(lines)):
        lines[i] += ",,"
    lines[1] = lines[1][:-2] + ",Eab,Abc"
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(SchemaError, match="AA1"):
        load_table(path)
