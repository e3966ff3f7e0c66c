import numpy as np
import pytest

from gblstsvm.dataset import (
    DataError,
    Dataset,
    NormParams,
    gen_crossplane,
    gen_ndc,
    inject_label_noise,
    load_csv,
    minmax_normalize,
    split_indices,
    train_test_split,
    write_csv,
)
from gblstsvm.models import fit_lstsvm


def _write(tmp_path, text, name="d.csv"):
    p = tmp_path / name
    p.write_text(text)
    return p


# --- Dataset -----------------------------------------------------------------


def test_dataset_rejects_bad_labels():
    with pytest.raises(DataError):
        Dataset(np.zeros((2, 1)), [1, 0])


def test_dataset_rejects_nonfinite_and_shape():
    with pytest.raises(DataError):
        Dataset(np.array([[np.nan]]), [1])
    with pytest.raises(DataError):
        Dataset(np.zeros((2, 1)), [1])
    with pytest.raises(DataError):
        Dataset(np.zeros((0, 1)), [])


def test_dataset_is_read_only():
    d = Dataset(np.zeros((2, 1)), [1, -1])
    with pytest.raises(ValueError):
        d.features[0, 0] = 1.0


# --- load_csv ------------------------------------------------------------------


def test_load_csv_basic(tmp_path):
    d = load_csv(_write(tmp_path, "1.0,2.0,1\n3.0,4.0,-1\n"))
    assert d.m == 2 and d.n_features == 2
    np.testing.assert_array_equal(d.labels, [1, -1])
    np.testing.assert_array_equal(d.features, [[1, 2], [3, 4]])


def test_load_csv_zero_one_labels(tmp_path):
    d = load_csv(_write(tmp_path, "1,0\n2,1\n3,0\n"))
    np.testing.assert_array_equal(d.labels, [-1, 1, -1])


def test_load_csv_one_two_labels(tmp_path):
    d = load_csv(_write(tmp_path, "1,1\n2,2\n"))
    np.testing.assert_array_equal(d.labels, [-1, 1])


def test_load_csv_non_numeric_feature(tmp_path):
    with pytest.raises(DataError, match="non-numeric feature"):
        load_csv(_write(tmp_path, "1.0,a,1\n"))


def test_load_csv_ragged(tmp_path):
    with pytest.raises(DataError, match="columns"):
        load_csv(_write(tmp_path, "1,2,1\n1,-1\n"))


def test_load_csv_unmappable_label(tmp_path):
    with pytest.raises(DataError):
        load_csv(_write(tmp_path, "1,3\n2,5\n"))


def test_load_csv_header_and_label_column(tmp_path):
    d = load_csv(_write(tmp_path, "y,a,b\n1,0.5,0.25\n-1,1.5,2\n"), label_column=0)
    assert d.names == ("a", "b")
    np.testing.assert_array_equal(d.labels, [1, -1])
    np.testing.assert_array_equal(d.features, [[0.5, 0.25], [1.5, 2.0]])


def test_load_csv_label_map(tmp_path):
    d = load_csv(_write(tmp_path, "1,cat\n2,dog\n"), label_map={"cat": 1, "dog": -1})
    np.testing.assert_array_equal(d.labels, [1, -1])


def test_load_csv_missing_file(tmp_path):
    with pytest.raises(DataError):
        load_csv(tmp_path / "nope.csv")


def test_csv_round_trip(tmp_path):
    d = gen_crossplane(20, 0.1, seed=3)
    write_csv(d, tmp_path / "x.csv")
    back = load_csv(tmp_path / "x.csv")
    np.testing.assert_array_equal(back.features, d.features)
    np.testing.assert_array_equal(back.labels, d.labels)
    assert back.names == d.names


# --- normalization -------------------------------------------------------------


def test_minmax_affine_map():
    d = Dataset(np.array([[0.0, 3.0], [5.0, 3.0], [10.0, 3.0]]), [1, -1, 1])
    n, p = minmax_normalize(d)
    np.testing.assert_array_equal(n.features[:, 0], [0, 0.5, 1])
    np.testing.assert_array_equal(n.features[:, 1], [0, 0, 0])
    assert isinstance(p, NormParams)


def test_minmax_identity_on_unit_column():
    d = Dataset(np.array([[0.0], [0.25], [1.0]]), [1, -1, 1])
    n, _ = minmax_normalize(d)
    np.testing.assert_array_equal(n.features, d.features)


def test_norm_round_trip_and_dict():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(30, 4)) * [1, 10, 100, 1e-3] + [0, 5, -7, 2]
    d = Dataset(X, np.where(rng.random(30) < 0.5, 1, -1))
    n, p = minmax_normalize(d)
    assert n.features.min() >= 0 and n.features.max() <= 1
    back = p.invert(n.features)
    assert np.max(np.abs(back - X) / np.abs(X)) < 1e-12
    q = NormParams.from_dict(p.to_dict())
    np.testing.assert_array_equal(q.apply(X), n.features)


# --- split ----------------------------------------------------------------------


def test_split_sizes_and_partition():
    d = Dataset(np.arange(10.0).reshape(-1, 1), [1, -1] * 5)
    tr, te = train_test_split(d, 0.7, seed=1)
    assert (tr.m, te.m) == (7, 3)
    a, b = split_indices(10, 0.7, 1)
    assert set(a) | set(b) == set(range(10)) and not set(a) & set(b)
    np.testing.assert_array_equal(tr.features[:, 0], a)


def test_split_deterministic():
    d = Dataset(np.arange(50.0).reshape(-1, 1), [1, -1] * 25)
    a = train_test_split(d, 0.7, seed=9)[0].features
    b = train_test_split(d, 0.7, seed=9)[0].features
    np.testing.assert_array_equal(a, b)


@pytest.mark.parametrize("frac", [0.0, 1.0, 1.5, 0.01])
def test_split_rejects(frac):
    d = Dataset(np.arange(10.0).reshape(-1, 1), [1, -1] * 5)
    with pytest.raises(DataError):
        train_test_split(d, frac, 0)


# --- noise -----------------------------------------------------------------------


def test_noise_zero_is_identity():
    d = gen_crossplane(10, 0.0, 0)
    assert inject_label_noise(d, 0.0, 1) is d


def test_noise_flips_exact_count():
    d = gen_crossplane(10, 0.0, 0)
    n = inject_label_noise(d, 0.2, 5)
    assert int(np.sum(n.labels != d.labels)) == 2
    np.testing.assert_array_equal(n.features, d.features)
    again = inject_label_noise(d, 0.2, 5)
    np.testing.assert_array_equal(n.labels, again.labels)


@pytest.mark.parametrize("rate", [-0.1, 0.6])
def test_noise_rejects_rate(rate):
    with pytest.raises(DataError):
        inject_label_noise(gen_crossplane(10), rate, 0)


# --- generators --------------------------------------------------------------------


def test_crossplane_shape_and_lines():
    d = gen_crossplane(130, 0.01, 0)
    assert (d.m, d.n_features) == (130, 2)
    exact = gen_crossplane(40, 0.0, 2)
    x, y = exact.features.T
    assert np.all(y[exact.labels == 1] == x[exact.labels == 1])
    assert np.all(y[exact.labels == -1] == -x[exact.labels == -1])
    assert abs(int(np.sum(exact.labels == 1)) - 20) <= 1


def test_crossplane_deterministic_and_min_size():
    np.testing.assert_array_equal(gen_crossplane(30, 0.1, 4).features, gen_crossplane(30, 0.1, 4).features)
    with pytest.raises(DataError):
        gen_crossplane(3)


def test_ndc_shape_balance_determinism():
    d = gen_ndc(10000, 32, 4.0, 0)
    assert (d.m, d.n_features) == (10000, 32)
    frac = float(np.mean(d.labels == 1))
    assert 0.4 <= frac <= 0.6
    e = gen_ndc(500, 5, 4.0, 7)
    np.testing.assert_array_equal(e.features, gen_ndc(500, 5, 4.0, 7).features)
    with pytest.raises(DataError):
        gen_ndc(1, 3)


def test_ndc_large_separation_is_linearly_separable():
    d = gen_ndc(3000, 8, 10.0, 1)
    A, B = d.class_split()
    p = fit_lstsvm(A, B, 1.0, 1.0)
    assert float(np.mean(p.predict(d.features) == d.labels)) >= 0.99
