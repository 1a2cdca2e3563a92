import numpy as np
import pytest

from icenet import TrainConfig, generate_synthetic, run_suite, train_full
from icenet.config import ConfigError
from icenet.dataset import ANTONYM, SYNONYM, pair_arrays
from icenet.embeddings import oov_vector
from icenet.autodiff import Tensor
from icenet.encoders import f1, f2
from icenet.gcn import NodeReps, score_features
from icenet.graph import score_pairs, train_m_init
from icenet.trainer import ablate, adjacency_checksum

TINY = dict(d=16, p=8, q=6, enc_hidden=12, gcn_hidden=10, init_epochs=30, epochs=15, lr=0.01)


@pytest.fixture(scope="module")
def corpus():
    return generate_synthetic(words_per_cluster=8, d=16, seed=1)


@pytest.fixture(scope="module")
def tiny_run(corpus):
    return train_full(*corpus, TrainConfig(**TINY))


def test_default_config_losses_decrease_over_ten_epochs():
    ds, table = generate_synthetic()
    rec = train_full(ds, table, TrainConfig(d=32, init_epochs=10, epochs=10, patience=0))
    init_totals = [a + b for a, b in rec.init_losses]
    assert len(init_totals) == 10 and np.all(np.diff(init_totals) < 0)
    joint = [row["total"] for row in rec.losses]
    assert len(joint) == 10 and joint[-1] < joint[0]


def test_recorded_total_is_sum_of_parts(tiny_run):
    for row in tiny_run.losses:
        assert row["total"] == pytest.approx(row["L1"] + row["L2"] + row["L3"], abs=1e-9)
    assert set(tiny_run.metrics) == {"dev", "test"}
    assert tiny_run.wall_clock > 0


def test_graphs_are_frozen_during_joint_training(tiny_run):
    assert tiny_run.adjacency_before[0] and tiny_run.adjacency_before == tiny_run.adjacency_after
    model = tiny_run.model
    assert adjacency_checksum(model.adj_h) == tiny_run.adjacency_before[0]


def test_best_dev_snapshot_is_restored(corpus, tiny_run):
    ds, _ = corpus
    assert tiny_run.model.evaluate(ds.dev).f1 == max(tiny_run.dev_f1)
    assert tiny_run.dev_f1[tiny_run.best_epoch] == max(tiny_run.dev_f1)


def test_baseline2_has_no_graphs(corpus):
    rec = train_full(*corpus, TrainConfig(**TINY, variant="baseline2-no-gcn"))
    assert rec.graphs is None and rec.model.adj_h is None and not rec.graph_stats
    ds, _ = corpus
    idx = rec.model.index
    h, t = pair_arrays(ds.test[:3], idx)
    X = Tensor(rec.model.X)
    F1, F2 = f1(X, rec.model.encoders).data, f2(X, rec.model.encoders).data
    got = rec.model.features(ds.test[:3]).data
    cos = lambda a, b: np.sum(a * b, 1) / np.linalg.norm(a, axis=1) / np.linalg.norm(b, axis=1)
    np.testing.assert_allclose(got[:, 0], cos(F2[h], F2[t]), atol=1e-12)
    np.testing.assert_allclose(got[:, 1], cos(F1[h], F1[t]), atol=1e-12)


def test_baseline1_replaces_every_vector(corpus):
    ds, table = corpus
    cfg = TrainConfig(**dict(TINY, init_epochs=2, epochs=2), variant="baseline1-random-vectors")
    rec = train_full(ds, table, cfg)
    w = ds.vocabulary[0]
    np.testing.assert_array_equal(rec.model.X[0], oov_vector(w, 16, cfg.oov_seed + cfg.seed))
    assert not np.array_equal(rec.model.X[0], table.lookup(w))


def test_identity_graphs_match_a_per_node_mlp_head(corpus):
    ds, table = corpus
    rec = train_full(ds, table, TrainConfig(**dict(TINY, epochs=3), scheme="A2"))
    m = rec.model
    assert (m.adj_h != m.adj_h.T).nnz == 0
    np.testing.assert_array_equal(m.adj_h.toarray(), np.eye(len(m.vocabulary)))
    X = Tensor(m.X)
    F1, F2 = f1(X, m.encoders).data, f2(X, m.encoders).data
    g = m.gcn
    mlp = lambda F, br: np.maximum(F @ getattr(g, f"W_{br}1").data, 0) @ getattr(g, f"W_{br}2").data
    reps = NodeReps(*(Tensor(mlp(F, br)) for F, br in ((F1, "hh"), (F1, "ht"), (F2, "th"), (F2, "tt"))))
    h, t = pair_arrays(ds.test, m.index)
    np.testing.assert_allclose(m.features(ds.test).data, score_features(h, t, reps).data, atol=1e-12)


def test_same_seed_is_bit_identical(corpus):
    cfg = TrainConfig(**dict(TINY, epochs=4))
    a, b = train_full(*corpus, cfg), train_full(*corpus, cfg)
    assert a.metrics["test"].as_dict() == b.metrics["test"].as_dict()
    assert a.losses == b.losses
    for k, v in a.model.encoders.tensors().items():
        assert v.data.tobytes() == b.model.encoders.tensors()[k].data.tobytes()


def test_m_init_separates_antonyms_from_synonyms(corpus):
    ds, table = corpus
    cfg = TrainConfig(**TINY)
    params = train_m_init(ds, table, cfg)
    X = table.matrix(ds.vocabulary)
    idx = ds.word_index()
    ant = [p for p in ds.all_pairs() if p.label == ANTONYM]
    syn = [p for p in ds.all_pairs() if p.label == SYNONYM]
    y_ant = score_pairs(params, X, *pair_arrays(ant, idx))
    y_syn = score_pairs(params, X, *pair_arrays(syn, idx))
    assert y_ant.mean() > y_syn.mean()


def test_cold_start_changes_the_starting_point(corpus):
    warm = train_full(*corpus, TrainConfig(**dict(TINY, epochs=1, patience=0)))
    cold = train_full(*corpus, TrainConfig(**dict(TINY, epochs=1, patience=0), cold_start=True))
    assert warm.losses[0]["L1"] != cold.losses[0]["L1"]


def test_dimension_mismatch_is_a_configuration_error(corpus):
    with pytest.raises(ConfigError):
        train_full(*corpus, TrainConfig(d=300))


def test_suite_aggregates_over_seeds_and_workers_agree(corpus):
    cfg = TrainConfig(**dict(TINY, init_epochs=5, epochs=3))
    serial = run_suite(*corpus, cfg, n_runs=2)
    pooled = run_suite(*corpus, cfg, n_runs=2, workers=2)
    assert [r.config.seed for r in serial.records] == [0, 1]
    assert serial.test.as_dict() == pooled.test.as_dict()
    with pytest.raises(ValueError):
        run_suite(*corpus, cfg, n_runs=0)


def test_ablate_returns_every_scheme(corpus):
    cfg = TrainConfig(**dict(TINY, init_epochs=5, epochs=2))
    out = ablate(*corpus, cfg, schemes=("A1", "A4"), n_runs=1)
    assert set(out) == {"A1", "A4"}
    assert out["A1"].records[0].config.scheme == "A1"
