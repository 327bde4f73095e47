import numpy as np
import pytest

from graphlet_lp.atlas import EDGE_LABELS, FEATURE_NAMES, NODE_LABELS
from graphlet_lp.boosting import Hyperparameters
from graphlet_lp.errors import ConfigurationError
from graphlet_lp.pipeline import ModelSpec, explain_run, network_signature, run_once
from graphlet_lp.protocol import build_phase_matrices, make_split
from graphlet_lp.synthetic import erdos_renyi, preferential_attachment, star_rich, triadic_closure

FAST = Hyperparameters(max_trees=20)


@pytest.mark.parametrize("model_id,features", [("od", FEATURE_NAMES), ("n-only", NODE_LABELS),
                                               ("m-only", EDGE_LABELS), ("single:M9", ("M9",)),
                                               ("classical:RA", ("RA",))])
def test_model_spec(model_id, features):
    spec = ModelSpec.parse(model_id)
    assert spec.features == features and spec.classical == model_id.startswith("classical")


@pytest.mark.parametrize("bad", ["", "svm", "single:M13", "classical:XYZ", "single"])
def test_model_spec_rejects(bad):
    with pytest.raises(ConfigurationError):
        ModelSpec.parse(bad)


def test_subset_models_share_pipeline(karate):
    plan = make_split(karate, 0)
    orbit = build_phase_matrices(karate, plan)
    for model_id, width in (("od", 27), ("n-only", 15), ("m-only", 12)):
        res = run_once(karate, model_id, 0, FAST, orbit=orbit, plan=plan)
        assert res.matrices.train.values.shape[1] == width
        assert np.array_equal(res.matrices.test.pairs, orbit.test.pairs)
        assert 0 <= res.metrics.auc <= 1


def test_run_once_reproducible(lesmis):
    a = run_once(lesmis, "od", 3, FAST)
    b = run_once(lesmis, "od", 3, FAST)
    assert a.model.to_json() == b.model.to_json() and np.array_equal(a.probabilities, b.probabilities)


def test_explanation_local_accuracy(karate):
    res = run_once(karate, "od", 1, FAST)
    rep = explain_run(res.model, res.matrices.test, res.matrices.train)
    assert rep.per_sample.shape == (len(res.matrices.test), 27)
    assert rep.local_accuracy_gap() <= 1e-6


def test_generators_are_seeded_and_simple():
    for gen in (lambda s: preferential_attachment(200, seed=s), lambda s: triadic_closure(200, seed=s),
                lambda s: star_rich(200, seed=s), lambda s: erdos_renyi(100, 0.05, s)):
        a, b = gen(1), gen(1)
        assert np.array_equal(a.edges(), b.edges())
        e = a.edges()
        assert np.all(e[:, 0] < e[:, 1]) and len(np.unique(e, axis=0)) == len(e)


def test_triadic_closure_is_clustered_and_star_rich_is_not():
    from graphlet_lp.orbits import node_orbit_table
    tc, sr = triadic_closure(300, seed=0), star_rich(300, seed=0)
    tri = lambda g: node_orbit_table(g)[:, 3].sum()
    assert tri(tc) > 10 * tri(sr)


def test_triadic_closure_signature_ranks_m2_first():
    hits = sum(network_signature(triadic_closure(500, seed=s), seed=s).top_feature == "M2" for s in range(3))
    assert hits >= 2


@pytest.mark.slow
def test_od_beats_cn_on_karate_over_many_seeds(karate):
    # each 10-run block is noisy on a 78-edge graph; the direction shows up over 50 seeds
    od, cn = [], []
    for seed in range(50):
        plan = make_split(karate, seed)
        orbit = build_phase_matrices(karate, plan)
        od.append(run_once(karate, "od", seed, orbit=orbit, plan=plan).metrics.auc)
        cn.append(run_once(karate, "classical:CN", seed, orbit=orbit, plan=plan).metrics.auc)
    assert np.mean(od) > np.mean(cn)
