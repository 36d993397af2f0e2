import numpy as np
import pytest

from penprox import (
    Dataset,
    DesignSpec,
    LikelihoodFamily,
    expand_second_order,
    hierarchical_groups,
    load_csv,
    second_order_map,
    standardize_columns,
)
from penprox.errors import DataError


def _write_csv(path, text):
    path.write_text(text)
    return str(path)


def test_load_csv_known_matrix(tmp_path):
    src = _write_csv(tmp_path / "d.csv", "a,b,y\n1,10,0\n2,20,1\n3,30,0\n")
    ds = load_csv(DesignSpec(source=src, response_column="y", standardize=False, intercept=False))
    assert np.array_equal(ds.X, [[1, 10], [2, 20], [3, 30]])
    assert np.array_equal(ds.y, [0, 1, 0])
    assert ds.feature_names == ["a", "b"]


def test_load_csv_standardizes(tmp_path):
    rng = np.random.default_rng(2)
    rows = ["x0,x1,y"] + [f"{a},{b},{c}" for a, b, c in rng.normal(5, 3, (50, 3))]
    src = _write_csv(tmp_path / "d.csv", "\n".join(rows))
    ds = load_csv(DesignSpec(source=src, response_column="y"))
    assert np.all(np.abs(ds.X.mean(axis=0)) < 1e-12)
    assert np.all(np.abs(ds.X.std(axis=0) - 1.0) < 1e-12)
    assert ds.intercept
    m = ds.model_rows()
    assert m.shape == (50, 3)
    assert np.all(m[:, -1] == 1.0)


def test_constant_column_centered_not_scaled():
    X = np.column_stack([np.full(10, 7.0), np.arange(10.0)])
    xs, center, scale, const = standardize_columns(X)
    assert const[0] and not const[1]
    assert scale[0] == 1.0
    assert np.all(xs[:, 0] == 0.0)


def test_load_csv_errors(tmp_path):
    with pytest.raises(DataError):
        load_csv(DesignSpec(source=str(tmp_path / "absent.csv"), response_column="y"))
    src = _write_csv(tmp_path / "m.csv", "a,y\n1,2\n")
    with pytest.raises(DataError):
        load_csv(DesignSpec(source=src, response_column="z"))
    src = _write_csv(tmp_path / "nn.csv", "a,y\n1,2\nfoo,3\n")
    with pytest.raises(DataError):
        load_csv(DesignSpec(source=src, response_column="y"))
    src = _write_csv(tmp_path / "empty.csv", "")
    with pytest.raises(DataError):
        load_csv(DesignSpec(source=src, response_column="y"))


@pytest.mark.parametrize("p,expected", [(7, 35), (23, 299)])
def test_expansion_column_counts(p, expected):
    assert second_order_map(p).n_expanded == expected


def test_expansion_count_identity_range():
    for p in range(2, 101):
        assert second_order_map(p).n_expanded == 2 * p + p * (p - 1) // 2


def test_expand_row_arithmetic():
    emap = second_order_map(2)
    out = expand_second_order(np.array([1.0, 2.0]), emap)
    assert np.array_equal(out, [1.0, 2.0, 1.0, 4.0, 2.0])


def test_expand_block_matches_rowwise(rng):
    emap = second_order_map(6)
    X = rng.standard_normal((20, 6))
    block = expand_second_order(X, emap)
    rows = np.stack([expand_second_order(X[i], emap) for i in range(20)])
    assert np.array_equal(block, rows)
    again = expand_second_order(X, emap)
    assert np.array_equal(block, again)


def test_expand_length_mismatch():
    with pytest.raises(ValueError):
        expand_second_order(np.ones(3), second_order_map(4))


def test_hierarchical_groups_small():
    gs = hierarchical_groups(2)
    assert gs.n_groups == 1
    assert np.array_equal(gs.members(0), [0, 1, 2, 3, 4])

    gs = hierarchical_groups(3)
    assert gs.n_groups == 3
    # main effect 0 sits in the (0,1) and (0,2) pair groups
    emap = second_order_map(3)
    pair_of = {pair: g for g, pair in enumerate(emap.pairs)}
    assert set(gs.memberships[0]) == {pair_of[(0, 1)], pair_of[(0, 2)]}


def test_hierarchical_groups_counts():
    p = 45
    gs = hierarchical_groups(p)
    assert gs.n_groups == p * (p - 1) // 2 == 990
    sizes = [gs.members(g).size for g in range(gs.n_groups)]
    assert set(sizes) == {5}
    for j in range(2 * p):  # mains and quadratics
        assert gs.memberships[j].size == p - 1
    for j in range(2 * p, gs.n_predictors):  # interactions
        assert gs.memberships[j].size == 1


def test_hierarchical_groups_requires_two():
    with pytest.raises(ValueError):
        hierarchical_groups(1)


def test_dataset_model_rows_with_expansion_and_intercept(rng):
    X = rng.standard_normal((8, 3))
    ds = Dataset(X=X, y=np.zeros(8), expansion=second_order_map(3), intercept=True)
    assert ds.n_penalized == 9
    assert ds.n_model_columns == 10
    rows = ds.model_rows([2, 5])
    assert rows.shape == (2, 10)
    assert np.array_equal(rows[:, :9], expand_second_order(X[[2, 5]], second_order_map(3)))
    assert np.all(rows[:, 9] == 1.0)
    names = ds.model_column_names()
    assert names[-1] == "(intercept)"
    assert len(names) == 10


def test_original_scale_back_transform(tmp_path):
    src = tmp_path / "d.csv"
    rng = np.random.default_rng(7)
    X = rng.normal(3.0, 2.0, (60, 2))
    y = 1.5 * X[:, 0] - 2.0 * X[:, 1] + 4.0 + 0.01 * rng.standard_normal(60)
    lines = ["a,b,y"] + [f"{r[0]},{r[1]},{v}" for r, v in zip(X, y)]
    src.write_text("\n".join(lines))
    ds = load_csv(DesignSpec(source=str(src), response_column="y"))
    beta_std = np.linalg.lstsq(ds.model_rows(), ds.y, rcond=None)[0]
    coefs, icept = ds.original_scale_coefficients(beta_std)
    assert coefs == pytest.approx([1.5, -2.0], abs=1e-2)
    assert icept == pytest.approx(4.0, abs=5e-2)


def test_dataset_validation():
    with pytest.raises(DataError):
        Dataset(X=np.ones((3, 2)), y=np.ones(4))
    with pytest.raises(DataError):
        Dataset(X=np.array([[np.nan]]), y=np.ones(1))
    with pytest.raises(DataError):
        Dataset(X=np.ones((3, 2)), y=np.ones(3), expansion=second_order_map(3))
