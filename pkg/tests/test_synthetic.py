import numpy as np
import pytest

from icenet.config import ConfigError
from icenet.dataset import ANTONYM, SYNONYM
from icenet.synthetic import cluster_of, generate_synthetic
from oracles import best_threshold_f1, cosine


def test_balanced_with_requested_size():
    ds, table = generate_synthetic(n_clusters=4, words_per_cluster=10, antonym_cluster_pairs=2,
                                   noise=0.05, pairs_per_class=60)
    labels = [p.label for p in ds.all_pairs()]
    assert labels.count(SYNONYM) == labels.count(ANTONYM) == 60
    assert table.dim == 32 and all(w in table for w in ds.vocabulary)


def test_default_split_fractions():
    ds, _ = generate_synthetic()
    n = len(ds.all_pairs())
    assert (len(ds.train), len(ds.dev), len(ds.test)) == (round(0.7 * n), round(0.1 * n),
                                                          n - round(0.7 * n) - round(0.1 * n))


def test_labels_follow_cluster_structure():
    ds, _ = generate_synthetic(words_per_cluster=8)
    opposed = {frozenset((0, 1)), frozenset((2, 3))}
    for p in ds.all_pairs():
        ch, ct = cluster_of(p.head), cluster_of(p.tail)
        if p.label == SYNONYM:
            assert ch == ct
        else:
            assert frozenset((ch, ct)) in opposed


def test_noise_free_cosine_separates_classes():
    ds, table = generate_synthetic(noise=0.0, words_per_cluster=10)
    pairs = ds.all_pairs()
    sims = np.array([cosine(table.lookup(p.head), table.lookup(p.tail)) for p in pairs])
    labels = np.array([p.y for p in pairs])
    assert best_threshold_f1(sims, labels) == 1.0


def test_deterministic_given_seed():
    a, ta = generate_synthetic(seed=5, words_per_cluster=6)
    b, tb = generate_synthetic(seed=5, words_per_cluster=6)
    assert a == b and np.array_equal(ta.vectors, tb.vectors)


def test_lexical_variant_passes_the_check():
    ds, _ = generate_synthetic(lexical=True)
    assert ds.lexical_split and ds.check_lexical_split()


@pytest.mark.parametrize("kwargs", [dict(n_clusters=1), dict(words_per_cluster=1),
                                    dict(antonym_cluster_pairs=0), dict(n_clusters=2,
                                    antonym_cluster_pairs=2), dict(pairs_per_class=10**6),
                                    dict(noise=-1.0)])
def test_infeasible_sizes(kwargs):
    with pytest.raises(ConfigError):
        generate_synthetic(**kwargs)
