import logging

import numpy as np
import pytest
from scipy.spatial.distance import pdist

from graphlet_lp.atlas import CATEGORY_NAMES, FEATURE_NAMES
from graphlet_lp.domains import (NetworkRecord, clustering_csv, clustering_stat, mean_pairwise_distance, pca_2d,
                                 pca_csv, read_corpus_index, read_records, violin_data, winning_csv, winning_rates,
                                 write_records)
from graphlet_lp.errors import AnalysisError, DataError


def record(name, domain, top=None, values=None, subdomain=None):
    v = np.full(27, 0.1) if values is None else np.asarray(values, dtype=float)
    if top:
        v = v.copy()
        v[FEATURE_NAMES.index(top)] = 1.0
    return NetworkRecord(name, f"{name}.txt", domain, subdomain, (-v).tolist(), v.tolist(), {"auc": 0.9})


def test_pca_rank_one_has_zero_second_ratio():
    d = np.random.default_rng(0).normal(size=27)
    X = np.outer(np.linspace(-2, 3, 8), d)
    res = pca_2d(X)
    assert res.explained_variance_ratio[0] == pytest.approx(1.0, abs=1e-12)
    assert res.explained_variance_ratio[1] == pytest.approx(0.0, abs=1e-12)


def test_pca_reproduces_2d_data_up_to_sign():
    rng = np.random.default_rng(1)
    X = np.zeros((30, 27))
    X[:, 0] = rng.normal(scale=5, size=30)
    X[:, 1] = rng.normal(scale=1, size=30)
    X[:, 1] -= X[:, 1].mean()
    X[:, 0] -= X[:, 0].mean()
    res = pca_2d(X)
    # rank-2 data: the projection is a rigid motion of the original plane
    assert pdist(res.coords) == pytest.approx(pdist(X[:, :2]), abs=1e-9)
    assert res.explained_variance_ratio.sum() == pytest.approx(1.0, abs=1e-12)


def test_pca_matches_svd():
    X = np.random.default_rng(2).normal(size=(100, 27))
    res = pca_2d(X)
    s = np.linalg.svd(X - X.mean(axis=0), compute_uv=False)
    ratio = s ** 2 / (s ** 2).sum()
    assert res.explained_variance_ratio == pytest.approx(ratio[:2], abs=1e-8)


def test_pca_sign_convention_and_row_order():
    X = np.random.default_rng(3).normal(size=(40, 27))
    res = pca_2d(X)
    for comp in res.components:
        assert comp[np.argmax(np.abs(comp))] > 0
    perm = np.random.default_rng(4).permutation(40)
    again = pca_2d(X[perm])
    assert again.coords == pytest.approx(res.coords[perm], abs=1e-10)


def test_pca_too_few_rows():
    with pytest.raises(AnalysisError):
        pca_2d(np.zeros((2, 27)))


def test_two_point_distance():
    assert mean_pairwise_distance([[0, 0], [3, 4]]) == 5.0
    stat = clustering_stat([[0, 0], [3, 4], [9, 9]], ["a", "a", "b"], "a")
    assert stat.d_bar == 5.0


def test_whole_corpus_domain():
    coords = np.random.default_rng(5).normal(size=(12, 2))
    stat = clustering_stat(coords, ["a"] * 12, "a")
    assert stat.d_tilde_mean == pytest.approx(stat.d_bar, abs=1e-12)
    assert stat.p_value == 1.0


def test_tight_cluster_is_censored():
    rng = np.random.default_rng(6)
    coords = np.vstack([rng.normal(scale=10, size=(60, 2)), rng.normal(scale=0.01, size=(10, 2))])
    labels = ["bg"] * 60 + ["tight"] * 10
    stat = clustering_stat(coords, labels, "tight", S=100, seed=0)
    assert stat.p_value == "< 0.01" and stat.exceed == 0


def test_clustering_errors():
    with pytest.raises(AnalysisError):
        clustering_stat([[0, 0], [1, 1], [2, 2]], ["a", "b", "b"], "a")
    with pytest.raises(AnalysisError):
        clustering_stat([[0, 0], [1, 1], [2, 2]], ["a", "a", "b"], "a", S=50)


def test_shuffled_labels_give_uniform_p():
    rng = np.random.default_rng(7)
    coords = rng.normal(size=(40, 2))
    ps = []
    for rep in range(200):
        labels = np.array(["a"] * 8 + ["b"] * 32)
        rng.shuffle(labels)
        st = clustering_stat(coords, labels, "a", S=100, seed=rep)
        ps.append(0.0 if isinstance(st.p_value, str) else st.p_value)
    # p = s/S lives on a grid; bin by the half-open decile (k/10, (k+1)/10]
    bins = np.clip(np.ceil(np.asarray(ps) * 10) - 1, 0, 9).astype(int)
    freq = np.bincount(bins, minlength=10) / 200
    assert np.all(np.abs(freq - 0.1) <= 0.05), freq


def test_winning_rates_single_network():
    rates = winning_rates([record("n", "social", top="M2")])
    assert rates["social"]["M2"] == 1.0
    assert sum(rates["social"].values()) == 1.0


def test_winning_rates_rows_sum_to_one():
    rng = np.random.default_rng(8)
    recs = [record(f"n{i}", f"d{i % 3}", values=rng.random(27)) for i in range(31)]
    for gran in ("feature", "category"):
        for table in winning_rates(recs, granularity=gran).values():
            assert sum(table.values()) == pytest.approx(1.0, abs=1e-12)
    cat = winning_rates(recs, granularity="category")
    assert set(next(iter(cat.values()))) == set(CATEGORY_NAMES)


def test_winning_rate_ties_go_to_lowest_index():
    rates = winning_rates([record("n", "x", values=np.ones(27))])
    assert rates["x"]["N1"] == 1.0


def test_winning_rates_skip_empty_and_group_by_subdomain(caplog):
    empty = NetworkRecord("e", "e.txt", "bio")
    with caplog.at_level(logging.WARNING):
        rates = winning_rates([empty, record("n", "soc", top="M2", subdomain="online")], group_by="subdomain")
    assert list(rates) == ["(none)", "online"] or "online" in rates
    assert "bio" not in winning_rates([empty, record("n", "soc", top="M2")])
    with pytest.raises(AnalysisError):
        winning_rates([], granularity="orbit")


def test_violin_endpoints():
    vals, flat = violin_data([4.0, 2.0, 3.0])
    assert vals.tolist() == [0.0, 1.0, 0.5] and not flat
    vals, flat = violin_data([7, 7, 7])
    assert flat and not vals.any()


def test_record_roundtrip_and_validation(tmp_path):
    recs = [record("a", "x", top="N1"), record("b", "y", top="M2")]
    write_records(recs, tmp_path / "r.jsonl")
    back = read_records(tmp_path / "r.jsonl")
    assert [r.to_json() for r in back] == [r.to_json() for r in recs]
    with pytest.raises(DataError):
        NetworkRecord("bad", "p", "d", shap_signature=[0.0] * 5)


def test_corpus_index(tmp_path):
    (tmp_path / "idx.csv").write_text("path,name,domain,subdomain\nnets/a.txt,a,social,\n/abs/b.txt,,bio,protein\n")
    entries = read_corpus_index(tmp_path / "idx.csv")
    assert entries[0].path == str(tmp_path / "nets/a.txt") and entries[0].subdomain is None
    assert entries[1].name == "b.txt" and entries[1].subdomain == "protein"
    (tmp_path / "bad.csv").write_text("path,name,domain,subdomain\nx.txt,x,,\n")
    with pytest.raises(DataError):
        read_corpus_index(tmp_path / "bad.csv")


def test_csv_writers():
    recs = [record(f"n{i}", "d" if i < 3 else "e", values=np.arange(27) * (i + 1.0)) for i in range(5)]
    text = pca_csv(recs, pca_2d([r.shap_signature for r in recs]))
    assert text.splitlines()[0] == "name,domain,subdomain,pc1,pc2" and len(text.splitlines()) == 6
    stat = clustering_stat(np.arange(10.0).reshape(5, 2), [r.domain for r in recs], "d")
    assert clustering_csv([stat]).splitlines()[0] == "domain,d_bar,d_tilde_mean,p_value,runs"
    assert winning_csv({"d": {"M2": 1.0}}).splitlines()[1] == "d,M2,1.0"
