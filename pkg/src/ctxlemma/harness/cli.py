"""``ctxlemma`` command-line driver."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from ..corpus import CorpusError, read_corpus, write_corpus, write_gold
from ..encoding import ContextPolicy, Vocab
from ..metrics import read_id_file, score_files
from ..seq2seq import checkpoint
from ..seq2seq.training import Predictor, TrainConfig, train
from . import config as cfg
from .experiment import ExperimentSpec, eval_windows, run_experiment
from .toy import ToySpec, write_toy_corpus

log = logging.getLogger("ctxlemma")

_TRAIN_FIELDS = [k.name for k in cfg.TRAIN_KEYS]


def _train_config(values: dict) -> TrainConfig:
    return TrainConfig(seed=values["seed"], **{k: values[k] for k in _TRAIN_FIELDS})


def cmd_prepare(args) -> int:
    corpus = read_corpus(args.corpus)
    print(f"{args.corpus}: {len(corpus.documents)} documents, {len(corpus.samples)} samples")
    if args.output:
        write_corpus(args.output, corpus.documents, corpus.samples)
    if args.gold:
        with open(args.gold, "w", encoding="utf-8", newline="\n") as fh:
            write_gold(fh, corpus.samples)
    return 0


def cmd_gen_toy(args) -> int:
    values = cfg.resolve(args, cfg.TOY_KEYS, required=("output",))
    out = values.pop("output")
    paths = write_toy_corpus(ToySpec(**values), out)
    for name, p in paths.items():
        print(f"{name}: {p}")
    return 0


def cmd_train(args) -> int:
    values = cfg.resolve(args, cfg.TRAIN_CMD_KEYS, required=("train", "output", "seed"))
    conf = _train_config(values)
    policy = ContextPolicy.parse(values["train_policy"], conf.max_span)
    train_c = read_corpus(values["train"])
    dev_c = read_corpus(values["dev"]) if values["dev"] else None
    result = train(train_c, dev_c, policy, conf)
    out = Path(values["output"])
    out.mkdir(parents=True, exist_ok=True)
    result.vocab.save(out / "vocab.tsv")
    checkpoint.save(out / "model.ckpt", result.params, result.vocab.digest())
    (out / "train_log.csv").write_text("\n".join(result.log_rows()) + "\n", encoding="utf-8")
    print(f"best epoch {result.best_epoch}; wrote {out / 'model.ckpt'}")
    return 0


def cmd_predict(args) -> int:
    vocab = Vocab.load(args.vocab)
    params = checkpoint.load(args.checkpoint, vocab)
    conf = TrainConfig(d=params.d, h=params.h, seed=args.seed,
                       max_decode_len_factor=args.max_decode_len_factor, max_span=args.max_span)
    corpus = read_corpus(args.corpus)
    policy = ContextPolicy.parse(args.context, args.max_span)
    windows = eval_windows(corpus, policy, args.seed, args.max_span)
    predictor = Predictor(params, vocab, conf)
    preds = predictor([s.orthographic for s in corpus.samples], windows)
    with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
        for s, p in zip(corpus.samples, preds):
            fh.write(f"{s.sample_id}\t{p}\n")
    if predictor.truncated:
        log.warning("%d predictions hit the decode length cap", predictor.truncated)
    return 0


def cmd_score(args) -> int:
    metrics, missing = score_files(read_id_file(args.predictions), read_id_file(args.gold))
    if missing:
        log.warning("%d gold ids have no prediction; counted as wrong", len(missing))
    line = metrics.csv_line() + "\n"
    if args.output:
        Path(args.output).write_text(line, encoding="utf-8")
    else:
        sys.stdout.write(line)
    return 0


def cmd_sweep(args) -> int:
    values = cfg.resolve(args, cfg.SWEEP_KEYS, required=("train", "test", "output", "seed"))
    spec = ExperimentSpec(
        train=values["train"], dev=values["dev"], test=values["test"], output=values["output"],
        seed=values["seed"], models=values["models"], train_policy=values["train_policy"],
        eval_contexts=values["eval_contexts"], train_config=_train_config(values),
        format=values["format"], figures=values["figures"],
    )
    report = run_experiment(spec)
    print(f"{len(report.rows)} rows written to {spec.output}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ctxlemma", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prepare", help="validate a corpus file; optionally rewrite it and emit a gold file")
    p.add_argument("corpus")
    p.add_argument("--output", help="normalised corpus output")
    p.add_argument("--gold", help="write sample_id<TAB>lemma gold file")
    p.set_defaults(func=cmd_prepare)

    p = sub.add_parser("gen-toy", help="generate a synthetic trigger-ambiguity corpus")
    cfg.add_key_flags(p, cfg.TOY_KEYS)
    p.set_defaults(func=cmd_gen_toy)

    p = sub.add_parser("train", help="train the seq2seq lemmatizer")
    cfg.add_key_flags(p, cfg.TRAIN_CMD_KEYS)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="lemmatize a corpus with a trained checkpoint")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--vocab", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--output", required=True, help="sample_id<TAB>prediction file")
    p.add_argument("--context", default="none", help="none | <k> | variable[:p:kmin:kmax]")
    p.add_argument("--seed", type=int, default=0, help="seed for variable-context draws")
    p.add_argument("--max_span", type=int, default=64)
    p.add_argument("--max_decode_len_factor", type=float, default=2.0)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("score", help="exact-match scores: n,acc_cs,acc_ci,score")
    p.add_argument("predictions")
    p.add_argument("gold")
    p.add_argument("--output", help="write the CSV line here instead of stdout")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("sweep", help="train models and evaluate over eval contexts")
    cfg.add_key_flags(p, cfg.SWEEP_KEYS)
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (CorpusError, ValueError, FileNotFoundError, checkpoint.CheckpointError) as exc:
        print(f"ctxlemma {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
