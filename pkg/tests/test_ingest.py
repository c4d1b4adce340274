import io

import numpy as np
import pytest

from contextfield import (
    apply_filter,
    load_csv,
    normalize_minmax,
    parse_filter,
)
from contextfield.errors import (
    EmptyDataset,
    MalformedClause,
    NonNumericCell,
    RaggedRow,
    UnknownAttribute,
)


def test_load_cars_fixture(cars_dataset):
    assert cars_dataset.n == 392
    assert cars_dataset.d == 7
    assert cars_dataset.attribute_names == [
        "MPG", "CYL", "Hpower", "weight", "Accel", "year", "origin",
    ]


def test_load_universities_fixture(universities_dataset):
    assert universities_dataset.n == 46
    assert universities_dataset.d == 14


def test_header_only_raises():
    with pytest.raises(EmptyDataset):
        load_csv(io.StringIO("a,b,c\n"))


def test_non_numeric_cell_reports_location():
    with pytest.raises(NonNumericCell) as exc:
        load_csv(io.StringIO("name,a,b\nx,1,2\ny,oops,4\nz,oops,5\n"))
    assert exc.value.row == 2
    assert exc.value.column == "a"


def test_ragged_row():
    with pytest.raises(RaggedRow):
        load_csv(io.StringIO("a,b\n1,2\n3\n"))


def test_nan_rejected():
    with pytest.raises(NonNumericCell):
        load_csv(io.StringIO("a,b\n1,2\nnan,4\n"))


def test_synthetic_labels_without_label_column():
    ds = load_csv(io.StringIO("a,b\n1,2\n3,4\n"))
    assert ds.row_labels == ["row_0", "row_1"]


def test_duplicate_labels_deduplicated():
    ds = load_csv(io.StringIO("name,a,b\nfoo,1,2\nfoo,3,4\n"))
    assert ds.row_labels == ["foo", "foo#2"]


def test_byte_stream_input():
    ds = load_csv(io.BytesIO(b"a,b\n1,2\n3,4\n"))
    assert ds.n == 2


def test_normalize_column():
    ds = load_csv(io.StringIO("a,b\n2,0\n4,1\n6,2\n"))
    nds = normalize_minmax(ds)
    assert np.allclose(nds.values[:, 0], [0.0, 0.5, 1.0])


def test_normalize_constant_column_is_half():
    ds = load_csv(io.StringIO("a,b\n5,0\n5,1\n5,2\n"))
    with pytest.warns(UserWarning):
        nds = normalize_minmax(ds)
    assert np.all(nds.values[:, 0] == 0.5)


def test_normalize_minmax_random_columns():
    # Oracle: per-column min/max scan.
    rng = np.random.default_rng(7)
    values = rng.uniform(-10, 10, (5, 3))
    ds = load_csv(io.StringIO(
        "a,b,c\n" + "\n".join(",".join(repr(float(v)) for v in row) for row in values)
    ))
    nds = normalize_minmax(ds)
    for k in range(3):
        assert nds.values[:, k].min() == 0.0
        assert nds.values[:, k].max() == 1.0


def test_normalize_idempotent():
    rng = np.random.default_rng(11)
    values = rng.uniform(0, 100, (8, 4))
    csv_text = "a,b,c,d\n" + "\n".join(
        ",".join(repr(float(v)) for v in row) for row in values
    )
    nds = normalize_minmax(load_csv(io.StringIO(csv_text)))
    again_text = "a,b,c,d\n" + "\n".join(
        ",".join(repr(float(v)) for v in row) for row in nds.values
    )
    nds2 = normalize_minmax(load_csv(io.StringIO(again_text)))
    assert np.max(np.abs(nds2.values - nds.values)) <= 1e-12


def test_normalize_round_trip():
    rng = np.random.default_rng(13)
    values = rng.uniform(-50, 50, (9, 3))
    csv_text = "a,b,c\n" + "\n".join(
        ",".join(repr(float(v)) for v in row) for row in values
    )
    ds = load_csv(io.StringIO(csv_text))
    nds = normalize_minmax(ds)
    for k in range(3):
        recon = nds.denormalize_column(k)
        scale = np.max(np.abs(ds.values[:, k]))
        assert np.max(np.abs(recon - ds.values[:, k])) <= 1e-9 * scale


def test_parse_filter_three_clauses():
    p = parse_filter("academic>9,athletic>9,tuition<18000")
    assert p.clauses == (
        ("academic", ">", 9.0),
        ("athletic", ">", 9.0),
        ("tuition", "<", 18000.0),
    )


def test_parse_filter_empty_is_all_true():
    ds = load_csv(io.StringIO("a,b\n1,2\n3,4\n"))
    mask = apply_filter(ds, parse_filter(""))
    assert mask.all()


def test_parse_filter_malformed():
    with pytest.raises(MalformedClause):
        parse_filter("a>>3")
    with pytest.raises(MalformedClause):
        parse_filter("a=3")


def test_parse_filter_unknown_attribute_lists_names():
    with pytest.raises(UnknownAttribute) as exc:
        parse_filter("nope>1", attribute_names=["a", "b"])
    assert "a, b" in str(exc.value)


def test_unsatisfiable_threshold_selects_nothing(cars_dataset):
    mask = apply_filter(cars_dataset, parse_filter("MPG>1e12"))
    assert not mask.any()


def test_apply_filter_single_clause():
    ds = load_csv(io.StringIO("x,y\n-1,0\n1,0\n"))
    mask = apply_filter(ds, parse_filter("x>0"))
    assert mask.tolist() == [False, True]


def test_apply_filter_matches_per_row_oracle():
    rng = np.random.default_rng(23)
    values = rng.uniform(0, 10, (20, 2))
    csv_text = "a,b\n" + "\n".join(
        ",".join(repr(float(v)) for v in row) for row in values
    )
    ds = load_csv(io.StringIO(csv_text))
    mask = apply_filter(ds, parse_filter("a>4,b<=7"))
    for i in range(20):
        assert mask[i] == (values[i, 0] > 4 and values[i, 1] <= 7)


def test_apply_filter_permutation_equivariant():
    rng = np.random.default_rng(29)
    values = rng.uniform(0, 10, (15, 2))
    perm = rng.permutation(15)

    def build(rows):
        return load_csv(io.StringIO(
            "a,b\n" + "\n".join(",".join(repr(float(v)) for v in r) for r in rows)
        ))

    p = parse_filter("a>5")
    mask = apply_filter(build(values), p)
    mask_perm = apply_filter(build(values[perm]), p)
    assert np.array_equal(mask[perm], mask_perm)
