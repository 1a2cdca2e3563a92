from collections import namedtuple

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from icenet.config import TrainConfig
from icenet.dataset import ANTONYM, SYNONYM, RelationPair, SplitDataset
from icenet.embeddings import EmbeddingTable
from icenet.encoders import EncoderParams
from icenet.graph import (PROBABLE_ANTONYM, PROBABLE_SYNONYM, UNASSIGNED, AttentionContext,
                          AttentiveGraph, ConfigurationError, PairScore, attach_attention,
                          build_dicts, build_graphs, classify_score, construct,
                          inject_score_noise, normalize, read_graph, score_pair, write_graph)
from icenet.synthetic import generate_synthetic
from oracles import renormalized_dense

P = namedtuple("P", "head tail")


def scored(rows):
    return [PairScore(P(h, t), y) for h, t, y in rows]


def words_of(graph):
    return {tuple(sorted(e)) for e in graph.edge_words()}


def test_six_pair_hand_instance():
    rows = [("a", "t1", 0.30), ("b", "t1", 0.12), ("c", "t2", 0.05),
            ("d", "t2", 0.20), ("e", "t3", 0.14), ("f", "t3", 0.02)]
    dicts = build_dicts(scored(rows), ant_thr=0.10, syn_thr=0.15)
    assert sorted(ps.score for ps in dicts.antonyms()) == [0.12, 0.14, 0.20, 0.30]
    assert sorted(ps.score for ps in dicts.synonyms()) == [0.02, 0.05]
    assert all(ps.kind == PROBABLE_ANTONYM for ps in dicts.antonyms())
    assert all(ps.kind == PROBABLE_SYNONYM for ps in dicts.synonyms())


def test_threshold_is_inclusive_and_empty_input():
    dicts = build_dicts(scored([("a", "b", 0.10)]), 0.10, 0.05)
    assert [ps.score for ps in dicts.ant_t["b"]] == [0.10]
    empty = build_dicts([])
    assert not (empty.syn_h or empty.ant_h or empty.syn_t or empty.ant_t)


def test_pruning_band_between_thresholds():
    # with SYN_thr below ANT_thr a gap exists; pairs inside it are dropped
    assert classify_score(0.12, ant_thr=0.15, syn_thr=0.10) == UNASSIGNED
    dicts = build_dicts(scored([("a", "t", 0.12), ("b", "t", 0.13)]), ant_thr=0.15, syn_thr=0.10)
    g_h, g_t = build_graphs(dicts, ["a", "b", "t"], ["a", "b", "t"])
    assert not g_h.edges and not g_t.edges


def test_triangle_and_single_head():
    dicts = build_dicts(scored([("a", "t1", 0.0), ("b", "t1", 0.0), ("c", "t1", 0.0),
                                ("z", "t9", 0.0)]))
    g_h, _ = build_graphs(dicts)
    assert words_of(g_h) == {("a", "b"), ("a", "c"), ("b", "c")}


def test_mixed_instance_has_no_second_order_closure():
    dicts = build_dicts(scored([("a", "t1", 0.5), ("b", "t1", 0.5),
                                ("b", "t2", 0.0), ("c", "t2", 0.0)]))
    g_h, g_t = build_graphs(dicts)
    assert words_of(g_h) == {("a", "b"), ("b", "c")}
    assert not g_h.has_edge("a", "c")
    assert not g_t.edges


def test_tail_graph_mirrors_head_graph():
    dicts = build_dicts(scored([("h", "x", 0.5), ("h", "y", 0.0), ("h", "z", 0.3)]))
    _, g_t = build_graphs(dicts)
    # x and z share head h in the antonym dictionary, y is alone in the synonym one
    assert words_of(g_t) == {("x", "z")}


def test_duplicate_edges_merge_by_max():
    g = AttentiveGraph(["a", "b"])
    g.add_edge("a", "b", 0.3)
    g.add_edge("b", "a", 0.7)
    g.add_edge("a", "b", 0.5)
    assert g.edges == {(0, 1): 0.7}


def test_normalize_small_cases():
    np.testing.assert_array_equal(normalize(AttentiveGraph(["a"])).toarray(), [[1.0]])
    g = AttentiveGraph(["a", "b"])
    g.add_edge("a", "b")
    np.testing.assert_allclose(normalize(g).toarray(), np.full((2, 2), 0.5), atol=1e-15)
    path = AttentiveGraph(["a", "b", "c"])
    path.add_edge("a", "b")
    path.add_edge("b", "c")
    s2, s6 = 1 / 2, 1 / np.sqrt(6)
    hand = np.array([[s2, s6, 0], [s6, 1 / 3, s6], [0, s6, s2]])
    np.testing.assert_allclose(normalize(path).toarray(), hand, atol=1e-15)


def test_isolated_node_gets_unit_self_loop():
    g = AttentiveGraph(["a", "b", "c"])
    g.add_edge("a", "b")
    row = normalize(g).toarray()[2]
    np.testing.assert_array_equal(row, [0, 0, 1])


@st.composite
def weighted_graphs(draw):
    n = draw(st.integers(1, 50))
    seed = draw(st.integers(0, 2**31))
    density = draw(st.floats(0.0, 1.0))
    rng = np.random.default_rng(seed)
    g = AttentiveGraph([f"n{i}" for i in range(n)])
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < density:
                g.edges[(i, j)] = float(rng.uniform(0, 1))
    return g


@settings(max_examples=100, deadline=None)
@given(weighted_graphs())
def test_normalized_matrix_symmetric_bounded_and_matches_dense(g):
    m = normalize(g).toarray()
    np.testing.assert_allclose(m, m.T, rtol=0, atol=1e-15)
    assert np.all(m >= 0)
    eig = np.linalg.eigvalsh(m)
    assert eig.min() >= -1 - 1e-12 and eig.max() <= 1 + 1e-12
    np.testing.assert_allclose(m, renormalized_dense(g.adjacency().toarray()), atol=1e-14)


def test_scheme_a2_is_identity_exactly():
    dicts = build_dicts(scored([("a", "t", 0.5), ("b", "t", 0.5), ("c", "t", 0.0)]))
    g_h, _ = build_graphs(dicts)
    assert g_h.edges
    a2 = attach_attention(g_h, "A2")
    assert (normalize(a2).toarray() == np.eye(len(g_h))).all()


def _two_edge_graph():
    dicts = build_dicts(scored([("a", "t", 0.50), ("b", "t", 0.11), ("c", "u", 0.40),
                                ("d", "u", 0.60)]))
    return build_graphs(dicts)[0]


VEC = {"a": np.array([1.0, 0.0]), "b": np.array([1.0, 1.0]),
       "c": np.array([0.0, 1.0]), "d": np.array([-1.0, -0.2])}


def test_a1_seeded_uniform_and_deterministic():
    g = _two_edge_graph()
    ctx = AttentionContext(seed=4)
    w1 = sorted(attach_attention(g, "A1", ctx).edges.values())
    w2 = sorted(attach_attention(g, "A1", ctx).edges.values())
    assert w1 == w2 and all(0.1 <= w <= 0.9 for w in w1)
    assert w1 != sorted(attach_attention(g, "A1", AttentionContext(seed=5)).edges.values())


def test_a3_a4_cosines_clamped():
    g = _two_edge_graph()
    a3 = attach_attention(g, "A3", AttentionContext(raw_vectors=VEC))
    assert a3.edges[(g.index["a"], g.index["b"])] == pytest.approx(1 / np.sqrt(2))
    # c and d have negative cosine, clamped to 0
    assert a3.edges[(g.index["c"], g.index["d"])] == 0.0
    a4 = attach_attention(g, "A4", AttentionContext(enc1_vectors=lambda w: VEC[w] * 3))
    assert a4.edges[(g.index["a"], g.index["b"])] == pytest.approx(1 / np.sqrt(2))


def test_a5_halves_low_confidence_edges():
    g = _two_edge_graph()
    ctx = AttentionContext(enc1_vectors=VEC, raw_vectors=VEC)
    a4, a5 = attach_attention(g, "A4", ctx), attach_attention(g, "A5", ctx)
    ab = (g.index["a"], g.index["b"])
    # b-t scored 0.11, within 0.05 of ANT_thr = 0.10
    assert a5.edges[ab] == pytest.approx(a4.edges[ab] / 2)
    cd = (g.index["c"], g.index["d"])
    assert a5.edges[cd] == a4.edges[cd]


def test_missing_context_is_a_configuration_error():
    g = _two_edge_graph()
    for scheme in ("A3", "A4", "A5"):
        with pytest.raises(ConfigurationError):
            attach_attention(g, scheme, AttentionContext())
    with pytest.raises(ConfigurationError):
        attach_attention(g, "A9")


def test_graph_text_roundtrip(tmp_path):
    g = attach_attention(_two_edge_graph(), "A1", AttentionContext(seed=1))
    write_graph(tmp_path / "g.tsv", g)
    back = read_graph(tmp_path / "g.tsv")
    assert back.nodes == g.nodes and back.edges == g.edges and back.scheme == "A1"
    with pytest.raises(ValueError):
        (tmp_path / "bad.tsv").write_text("nope\n")
        read_graph(tmp_path / "bad.tsv")


def test_score_pair_positive_self_product_and_determinism():
    params = EncoderParams.zeros(3, 4, 5)
    # zero hidden weights and unit output bias: both encoders output tanh(1) everywhere
    params.b12.data[:] = 1.0
    params.b22.data[:] = 1.0
    table = EmbeddingTable.from_dict({"a": [1.0, 2.0, 3.0], "b": [0.0, -1.0, 0.5]})
    pair = RelationPair("a", "b", SYNONYM)
    y = score_pair(params, pair, table)
    assert y == pytest.approx(np.tanh(4 * np.tanh(1.0) ** 2)) and y > 0
    assert y == score_pair(params, pair, table)


def test_score_noise_shuffles_a_fraction():
    scores = np.arange(100, dtype=float)
    noisy = inject_score_noise(scores, 0.1, seed=0)
    assert sorted(noisy) == sorted(scores)
    assert (noisy != scores).sum() <= 10
    np.testing.assert_array_equal(inject_score_noise(scores, 0.0, 0), scores)


def test_construction_ignores_evaluation_labels():
    ds, table = generate_synthetic(words_per_cluster=6, d=8)
    flip = {SYNONYM: ANTONYM, ANTONYM: SYNONYM}
    flipped = SplitDataset(ds.word_class, ds.train,
                           [RelationPair(p.head, p.tail, flip[p.label], "dev") for p in ds.dev],
                           [RelationPair(p.head, p.tail, flip[p.label], "test") for p in ds.test])
    cfg = TrainConfig(d=8, p=6, enc_hidden=7)
    params = EncoderParams.init(8, 6, 7, seed=1)
    X = table.matrix(ds.vocabulary)
    a, b = construct(ds, params, X, cfg), construct(flipped, params, X, cfg)
    assert a.g_h.edges == b.g_h.edges and a.g_t.edges == b.g_t.edges
