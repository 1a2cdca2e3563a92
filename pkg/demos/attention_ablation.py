"""Which edge weights help when the preliminary scores are unreliable?

A fraction of the preliminary relation scores is shuffled before the graphs
are built, so some edges join words that do not belong together. Each attention
scheme then trains on graphs grown from the same preliminary model:

    A1  random weights          A2  no edges (identity adjacency)
    A3  raw-vector cosine       A4  cosine of the first encoder's outputs
    A5  A4, halved for pairs whose score sits close to a threshold

Weights that reflect learned similarity (A4/A5) should damp the spurious edges
that random weights (A1) pass through unchanged.

    python3 demos/attention_ablation.py [noise] [runs]
"""

import sys

from icenet import TrainConfig, generate_synthetic
from icenet.metrics import format_table
from icenet.trainer import ablate

noise = float(sys.argv[1]) if len(sys.argv) > 1 else 0.1
runs = int(sys.argv[2]) if len(sys.argv) > 2 else 2

ds, table = generate_synthetic(seed=0)
cfg = TrainConfig(d=table.dim, score_noise=noise)
results = ablate(ds, table, cfg, ("A1", "A2", "A3", "A4", "A5"), n_runs=runs)
print(f"score noise {noise:.0%}, {runs} run(s) per scheme, mean test scores\n")
print(format_table({s: r.test for s, r in results.items()}))
