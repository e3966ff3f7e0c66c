import math

import numpy as np
import pytest

from gblstsvm.dataset import Dataset, gen_ndc
from gblstsvm.eval import (
    AccuracyTable,
    Grid,
    StatsError,
    accuracy,
    average_ranks,
    derived_seed,
    friedman,
    kfold_grid_search,
    kfold_indices,
    quick_grid,
    rank_matrix,
    wilcoxon_signed_rank,
    win_tie_loss,
)
from oracles import friedman_chi2, midranks

REFERENCE_RANKS = [3.88, 5.26, 5.15, 2.59, 1.62, 2.50]


@pytest.fixture
def acc_table(fixtures_dir):
    return AccuracyTable.from_csv(fixtures_dir / "linear_accuracy_0pct.csv")


# --- accuracy ----------------------------------------------------------------------


def test_accuracy_examples():
    assert accuracy([1, -1, 1, 1], [1, -1, -1, 1]) == 0.75
    assert accuracy([1], [1]) == 1.0
    with pytest.raises(ValueError):
        accuracy([1, 1], [1])
    with pytest.raises(ValueError):
        accuracy([], [])


# --- grid ---------------------------------------------------------------------------


def test_grid_sizes():
    g = Grid()
    assert len(g.points("gblstsvm", "linear")) == 11 * 5 * 3
    assert len(g.points("lsgblstsvm", "gaussian")) == 11 * 11 * 11 * 5 * 3
    assert len(g.points("lstsvm", "linear")) == 11
    assert len(Grid(tie=False).points("lstsvm", "linear")) == 121


def test_grid_tie_and_defaults():
    for hp in quick_grid().points("lsgblstsvm", "linear"):
        assert hp.c2 == hp.c1 and hp.c4 == hp.c3 and hp.sigma == 1.0
    for hp in quick_grid().points("gblstsvm", "linear"):
        assert hp.c3 == hp.c4 == 1.0
    with pytest.raises(ValueError):
        Grid().points("svm", "linear")


def test_kfold_partition():
    folds = kfold_indices(23, 5, 0)
    assert sorted(np.concatenate(folds).tolist()) == list(range(23))
    assert {len(f) for f in folds} <= {4, 5}
    with pytest.raises(ValueError):
        kfold_indices(3, 5, 0)


def test_derived_seed_stable_and_distinct():
    assert derived_seed(0, 1, 2) == derived_seed(0, 1, 2)
    assert derived_seed(0, 1, 2) != derived_seed(0, 2, 1)


def test_grid_search_single_point():
    d = gen_ndc(200, 3, 6.0, 0)
    g = Grid(c=(1.0,), pur=(0.95,), num=(2,))
    res = kfold_grid_search(d, g, 5, "gblstsvm", "linear", 0)
    assert len(res.points) == 1 and res.best == res.points[0]
    assert res.score >= 0.95


def test_grid_search_deterministic_and_threaded():
    d = gen_ndc(150, 3, 3.0, 1)
    g = Grid(c=(1e-2, 1.0, 1e2), pur=(0.94, 0.97), num=(2,))
    a = kfold_grid_search(d, g, 3, "lsgblstsvm", "linear", 4)
    b = kfold_grid_search(d, g, 3, "lsgblstsvm", "linear", 4, workers=3)
    assert a.best == b.best
    np.testing.assert_array_equal(a.scores, b.scores)


def test_grid_search_separable():
    d = gen_ndc(300, 4, 10.0, 2)
    best, score = kfold_grid_search(d, quick_grid(), 5, "lsgblstsvm", "linear", 0)
    assert score >= 0.99


def test_grid_search_gaussian_selects_sigma_from_grid():
    X = np.random.default_rng(0).normal(size=(120, 2))
    y = np.where((X**2).sum(axis=1) < 1.2, 1, -1)
    g = Grid(c=(1.0, 100.0), sigma=(0.5, 2.0), pur=(0.97,), num=(2,))
    best, score = kfold_grid_search(Dataset(X, y), g, 4, "gblstsvm", "gaussian", 0)
    assert best.sigma in (0.5, 2.0)
    assert score >= 0.8


# --- ranks -----------------------------------------------------------------------------


def test_ranks_match_midrank_oracle(acc_table):
    R = rank_matrix(acc_table)
    for row, acc in zip(R, acc_table.acc):
        np.testing.assert_allclose(row, midranks([-round(v, 10) for v in acc]))


def test_average_ranks_reproduce_reference(acc_table):
    np.testing.assert_allclose(average_ranks(acc_table), REFERENCE_RANKS, atol=0.005)


def test_rank_ties_are_midranks():
    t = AccuracyTable(("a", "b", "c"), ("x",), [[0.9, 0.9, 0.8]])
    np.testing.assert_array_equal(rank_matrix(t), [[1.5, 1.5, 3.0]])


# --- Friedman ------------------------------------------------------------------------


def test_friedman_reference_ranks():
    r = friedman(REFERENCE_RANKS, 34)
    assert r.chi2 == pytest.approx(110.03, abs=0.01)
    assert r.chi2 == pytest.approx(friedman_chi2(REFERENCE_RANKS, 34), rel=1e-12)
    assert r.ff == pytest.approx(60.54, abs=0.05)
    assert r.reject


def test_friedman_null_and_small():
    r = friedman([3.5] * 6, 20)
    assert r.chi2 == pytest.approx(0.0, abs=1e-12) and r.ff == pytest.approx(0.0, abs=1e-12)
    assert not r.reject
    with pytest.raises(StatsError):
        friedman([1.0, 2.0], 2)  # chi2 = 2 = M(l-1): F_F undefined
    assert friedman_chi2([1.0, 2.0], 2) == 2.0


def test_friedman_rejects_degenerate_inputs():
    with pytest.raises(StatsError):
        friedman([1.0], 10)
    with pytest.raises(StatsError):
        friedman([1.0, 2.0], 1)


def test_friedman_critical_override():
    assert not friedman(REFERENCE_RANKS, 34, critical=1e6).reject
    assert friedman(REFERENCE_RANKS, 34).critical == pytest.approx(2.27, abs=0.01)


# --- Wilcoxon ------------------------------------------------------------------------


def test_wilcoxon_small_example():
    w = wilcoxon_signed_rank([1, -2, 3], [0, 0, 0])
    assert (w.r_plus, w.r_minus, w.n) == (4.0, 2.0, 3)


def test_wilcoxon_all_zero():
    w = wilcoxon_signed_rank([0.5, 0.7], [0.5, 0.7])
    assert (w.r_plus, w.r_minus, w.p, w.n) == (0.0, 0.0, 1.0, 0)


def test_wilcoxon_table(acc_table):
    w = wilcoxon_signed_rank(acc_table.column("GBLSTSVM"), acc_table.column("SVM"))
    assert (w.r_plus, w.r_minus) == (465.0, 0.0)
    assert 1.819e-6 / 2 <= w.p <= 1.819e-6 * 2
    assert w.r_plus + w.r_minus == w.n * (w.n + 1) / 2


def test_wilcoxon_antisymmetric_and_sums():
    rng = np.random.default_rng(3)
    a, b = rng.random(25), rng.random(25)
    w, v = wilcoxon_signed_rank(a, b), wilcoxon_signed_rank(b, a)
    assert (w.r_plus, w.r_minus) == (v.r_minus, v.r_plus)
    assert w.p == pytest.approx(v.p)
    assert w.r_plus + w.r_minus == pytest.approx(25 * 26 / 2)


def test_wilcoxon_p_near_exact_for_large_n():
    from scipy.stats import wilcoxon

    rng = np.random.default_rng(4)
    a, b = rng.random(60), rng.random(60) + 0.05
    w = wilcoxon_signed_rank(a, b)
    ref = wilcoxon(a, b, correction=True, method="approx")
    assert w.p == pytest.approx(ref.pvalue, rel=1e-6)


def test_wilcoxon_length_mismatch():
    with pytest.raises(ValueError):
        wilcoxon_signed_rank([1.0], [1.0, 2.0])


# --- win-tie-loss -------------------------------------------------------------------


def test_win_threshold():
    w = win_tie_loss(np.zeros(34), np.zeros(34))
    assert w.threshold == pytest.approx(22.71, abs=0.005)
    assert w.threshold == pytest.approx(17 + 1.96 * math.sqrt(34) / 2)


def test_win_tie_loss_identical_and_dominant():
    a = np.linspace(0.5, 0.9, 34)
    same = win_tie_loss(a, a)
    assert same.wins == 17 and same.losses == 17 and same.ties == 34
    dom = win_tie_loss(a, a - 0.01)
    assert dom.wins == 34 and dom.losses == 0 and dom.significant


def test_win_tie_loss_table(acc_table):
    w = win_tie_loss(acc_table.column("GBLSTSVM"), acc_table.column("SVM"))
    assert (w.raw_wins, w.ties, w.raw_losses) == (30, 4, 0)
    assert w.significant


# --- table I/O ------------------------------------------------------------------------


def test_table_csv_round_trip(tmp_path, acc_table):
    acc_table.to_csv(tmp_path / "t.csv")
    back = AccuracyTable.from_csv(tmp_path / "t.csv")
    assert back.models == acc_table.models and back.datasets == acc_table.datasets
    np.testing.assert_allclose(back.acc, acc_table.acc, atol=5e-7)


def test_table_validation(tmp_path):
    with pytest.raises(StatsError):
        AccuracyTable(("a",), ("x", "y"), [[0.5]])
    with pytest.raises(StatsError):
        AccuracyTable(("a", "b"), ("x",), [[0.5, 1.5]])
    p = tmp_path / "bad.csv"
    p.write_text("dataset,a,b\nx,0.5\n")
    with pytest.raises(StatsError):
        AccuracyTable.from_csv(p)
    with pytest.raises(KeyError):
        AccuracyTable(("a",), ("x",), [[0.5]]).column("b")
