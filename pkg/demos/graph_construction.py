"""How scored pairs become the two attentive graphs.

Seven hand-picked pairs with fixed relation scores are sorted into probable
antonyms and synonyms, turned into head and tail graphs, weighted by two
attention schemes and renormalized. Everything printed here is small enough to
check by eye.

    python3 demos/graph_construction.py
"""

import numpy as np

from icenet.dataset import RelationPair
from icenet.graph import (AttentionContext, PairScore, attach_attention, build_dicts,
                          build_graphs, normalize)

# the label is irrelevant here: construction only reads words and scores
rows = [("hot", "cold", 0.30), ("warm", "cold", 0.12), ("big", "large", 0.05),
        ("huge", "large", 0.20), ("fast", "slow", 0.14), ("quick", "slow", 0.02),
        ("hot", "freezing", 0.25)]
scores = [PairScore(RelationPair(h, t, "antonym", "train"), y) for h, t, y in rows]

# antonym threshold 0.10 is tested first, so every score >= 0.10 is an antonym
dicts = build_dicts(scores, ant_thr=0.10, syn_thr=0.15)
print("probable antonyms:", [(p.head, p.tail, p.score) for p in dicts.antonyms()])
print("probable synonyms:", [(p.head, p.tail, p.score) for p in dicts.synonyms()])

# heads sharing a tail are linked in the head graph, tails sharing a head in the tail graph.
# Links only form within one relation: big and huge share "large" but disagree on it.
g_h, g_t = build_graphs(dicts)
print("\nhead-graph edges:", sorted(tuple(sorted(e)) for e in g_h.edge_words()))
print("tail-graph edges:", sorted(tuple(sorted(e)) for e in g_t.edge_words()))

# attention: A1 draws random weights, A3 uses cosine of the raw word vectors
rng = np.random.default_rng(0)
words = sorted({w for h, t, _ in rows for w in (h, t)})
vectors = {w: rng.normal(size=8) for w in words}
vectors["warm"] = vectors["hot"] + 0.3 * rng.normal(size=8)  # make one pair similar
ctx = AttentionContext(vectors.__getitem__, vectors.__getitem__, 0.10, 0.15, 0.05, seed=0)

for scheme in ("A1", "A3"):
    g = attach_attention(g_h, scheme, ctx)
    print(f"\n{scheme} head-graph weights:")
    for (i, j), w in sorted(g.edges.items()):
        print(f"  {g.nodes[i]:>6} -- {g.nodes[j]:<6} {w:.3f}")

adj = normalize(attach_attention(g_h, "A3", ctx)).toarray()
print("\nrenormalized head adjacency (A3):")
print("  nodes:", g_h.nodes)
print(np.array2string(adj, precision=3, suppress_small=True))
print("symmetric:", np.array_equal(adj, adj.T),
      " eigenvalues:", np.round(np.linalg.eigvalsh(adj), 3))
