"""``icenet`` command line: train, eval, build-graph, ablate, synth-data."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .autodiff import Tensor
from .checkpoint import load_checkpoint, save_checkpoint
from .config import SCHEMES, TrainConfig
from .dataset import SPLITS, load_dataset, save_dataset
from .embeddings import load_embeddings, save_embeddings
from .encoders import f1
from .graph import AttentionContext, attach_attention, construct, train_m_init, write_graph
from .metrics import format_table
from .synthetic import generate_synthetic
from .trainer import ablate, run_suite, train_full


def _config(args) -> TrainConfig:
    cfg = TrainConfig.load(args.config) if args.config else TrainConfig()
    overrides = {}
    for item in args.set or []:
        if "=" not in item:
            raise SystemExit(f"--set expects key=value, got {item!r}")
        k, v = item.split("=", 1)
        overrides[k.strip()] = v.strip()
    if overrides:
        cfg = TrainConfig.from_dict({**cfg.to_dict(), **overrides})
    return cfg


def _inputs(args, cfg: TrainConfig):
    ds = load_dataset(args.data, word_class=args.word_class or cfg.word_class,
                      lexical_split=args.lexical)
    table = load_embeddings(args.embeddings, cfg.d, oov_seed=cfg.oov_seed)
    return ds, table


def _write_json(path, payload) -> None:
    if path:
        Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True, default=str) + "\n",
                              encoding="utf-8")


def cmd_train(args) -> int:
    cfg = _config(args)
    ds, table = _inputs(args, cfg)
    if args.runs > 1:
        suite = run_suite(ds, table, cfg, n_runs=args.runs, workers=args.workers)
        print(format_table({f"{ds.word_class}/test": suite.test, f"{ds.word_class}/dev": suite.dev}))
        _write_json(args.record, suite.summary())
        return 0
    rec = train_full(ds, table, cfg)
    if args.checkpoint:
        save_checkpoint(args.checkpoint, rec.model, cfg, meta={"best_epoch": rec.best_epoch},
                        dataset=ds)
        rec.checkpoint_path = str(args.checkpoint)
    print(format_table({f"{ds.word_class}/{s}": rec.metrics[s] for s in ("dev", "test")}))
    _write_json(args.record, rec.summary())
    return 0


def cmd_eval(args) -> int:
    ckpt = load_checkpoint(args.checkpoint)
    ds = ckpt.dataset
    if args.data:
        ds = load_dataset(args.data, word_class=args.word_class or ckpt.config.word_class)
    if ds is None:
        raise SystemExit("checkpoint carries no dataset; pass --data DIR")
    missing = {w for p in ds.split(args.split) for w in (p.head, p.tail)} - set(ckpt.model.vocabulary)
    if missing:
        raise SystemExit(f"{len(missing)} word(s) of the {args.split} split are not graph nodes "
                         f"of this checkpoint (e.g. {sorted(missing)[0]!r})")
    rep = ckpt.model.evaluate(ds.split(args.split))
    print(format_table({f"{ds.word_class}/{args.split}": rep}))
    _write_json(args.record, {"split": args.split, "metrics": rep.as_dict(),
                              "checkpoint": str(args.checkpoint)})
    return 0


def cmd_build_graph(args) -> int:
    cfg = _config(args)
    ds, table = _inputs(args, cfg)
    table.prepopulate(ds.vocabulary)
    m_init = train_m_init(ds, table, cfg)
    X = table.matrix(ds.vocabulary)
    bundle = construct(ds, m_init, X, cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_graph(out / "G_h.tsv", bundle.g_h)
    write_graph(out / "G_t.tsv", bundle.g_t)

    # weight summary for every scheme over the same edge sets
    index = ds.word_index()
    F1 = f1(Tensor(X), m_init).data
    ctx = AttentionContext(lambda w: X[index[w]], lambda w: F1[index[w]], cfg.ant_thr,
                           cfg.syn_thr, cfg.confidence_band, cfg.seed)
    stats = {"G_h": bundle.g_h.stats(), "G_t": bundle.g_t.stats(), "schemes": {}}
    print("graph\tnodes\tedges\tscheme\tw_min\tw_mean\tw_max")
    for name, g in (("G_h", bundle.g_h), ("G_t", bundle.g_t)):
        for s in SCHEMES:
            st = attach_attention(g, s, ctx).stats()
            stats["schemes"].setdefault(name, {})[s] = {k: st[k] for k in
                                                        ("weight_min", "weight_mean", "weight_max")}
            print(f"{name}\t{st['nodes']}\t{st['edges']}\t{s}\t{st['weight_min']:.4f}\t"
                  f"{st['weight_mean']:.4f}\t{st['weight_max']:.4f}")
    for name in ("G_h", "G_t"):
        hist = stats[name]["degree_histogram"]
        print(f"{name} degree histogram\t" + " ".join(f"{d}:{c}" for d, c in sorted(hist.items())))
    _write_json(args.record or out / "graph_stats.json", stats)
    return 0


def cmd_ablate(args) -> int:
    cfg = _config(args)
    ds, table = _inputs(args, cfg)
    schemes = [s.strip() for s in args.schemes.split(",") if s.strip()]
    bad = [s for s in schemes if s not in SCHEMES]
    if bad:
        raise SystemExit(f"unknown scheme(s) {bad}; choose from {','.join(SCHEMES)}")
    results = ablate(ds, table, cfg, schemes, n_runs=args.runs)
    print(format_table({s: r.test for s, r in results.items()}))
    _write_json(args.record, {s: r.summary() for s, r in results.items()})
    return 0


def cmd_synth_data(args) -> int:
    ds, table = generate_synthetic(n_clusters=args.clusters, words_per_cluster=args.words,
                                   antonym_cluster_pairs=args.opposed, d=args.dim,
                                   noise=args.noise, seed=args.seed, lexical=args.lexical)
    out = Path(args.out)
    save_dataset(ds, out)
    save_embeddings(out / "embeddings.txt", table)
    print("split\tpairs\tantonym_ratio")
    for s in SPLITS:
        print(f"{s}\t{len(ds.split(s))}\t{ds.balance(s):.3f}")
    print(f"vocabulary\t{len(ds.vocabulary)}\t")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="icenet", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def data_args(p):
        p.add_argument("--data", required=True, help="directory with train/dev/test TSV files")
        p.add_argument("--embeddings", required=True, help="word-vector text file")
        p.add_argument("--config", help="flat key = value config file")
        p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config key")
        p.add_argument("--word-class")
        p.add_argument("--lexical", action="store_true", help="treat the splits as lexical")
        p.add_argument("--record", help="write the JSON run record here")

    p = sub.add_parser("train", help="train and evaluate")
    data_args(p)
    p.add_argument("--checkpoint", help="save the trained model here (.npz)")
    p.add_argument("--runs", type=int, default=1)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a checkpoint")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--split", choices=SPLITS, default="test")
    p.add_argument("--data", help="dataset directory (defaults to the pairs stored in the checkpoint)")
    p.add_argument("--word-class")
    p.add_argument("--record")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("build-graph", help="train M_init and write G_h / G_t")
    data_args(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_build_graph)

    p = sub.add_parser("ablate", help="compare attention schemes")
    data_args(p)
    p.add_argument("--schemes", default=",".join(SCHEMES))
    p.add_argument("--runs", type=int, default=5)
    p.set_defaults(func=cmd_ablate)

    p = sub.add_parser("synth-data", help="write a synthetic corpus and its embeddings")
    p.add_argument("--out", required=True)
    p.add_argument("--clusters", type=int, default=4)
    p.add_argument("--words", type=int, default=25)
    p.add_argument("--opposed", type=int, default=2)
    p.add_argument("--dim", type=int, default=32)
    p.add_argument("--noise", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--lexical", action="store_true")
    p.set_defaults(func=cmd_synth_data)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
