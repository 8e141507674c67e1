"""Experiment sweeps: train each requested model once, evaluate it under every eval context."""

from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Callable, Sequence

from ..baselines import Lexicon, identity_lemmatize, predict_tree, train_tree_classifier
from ..corpus import ContextWindow, Corpus, read_corpus, truncate_window
from ..encoding import ContextPolicy, make_rng, sample_context_length
from ..metrics import Metrics, evaluate
from ..seq2seq import checkpoint
from ..seq2seq.training import Predictor, TrainConfig, train

log = logging.getLogger(__name__)

MODELS = ("identity", "lexicon", "edit_tree", "seq2seq")
EVAL_SEED_OFFSET = 1000

Lemmatizer = Callable[[Sequence[str], Sequence[ContextWindow | None]], list[str]]


@dataclass(frozen=True)
class ExperimentSpec:
    train: str
    test: str
    output: str
    seed: int
    dev: str | None = None
    models: tuple[str, ...] = MODELS
    train_policy: str = "variable"
    eval_contexts: tuple[str, ...] = ("none", "8", "16", "32", "64", "variable")
    train_config: TrainConfig = field(default_factory=TrainConfig)
    format: str = "csv"
    figures: bool = True

    @property
    def max_span(self) -> int:
        return self.train_config.max_span

    def validate(self) -> None:
        if not self.eval_contexts:
            raise ValueError("no eval contexts requested")
        if not self.models:
            raise ValueError("no models requested")
        for m in self.models:
            if m not in MODELS:
                raise ValueError(f"unknown model {m!r}; choose from {', '.join(MODELS)}")
        if len(set(self.models)) != len(self.models) or len(set(self.eval_contexts)) != len(self.eval_contexts):
            raise ValueError("duplicate model or eval context")
        for c in self.eval_contexts:
            ContextPolicy.parse(c, self.max_span)
        ContextPolicy.parse(self.train_policy, self.max_span)
        if self.format not in ("csv", "tsv", "markdown"):
            raise ValueError(f"unknown report format {self.format!r}")
        if self.train_config.seed != self.seed:
            raise ValueError("train_config.seed must equal the experiment seed")

    def canonical(self) -> str:
        """Stable text form of every field; the config hash is taken over this."""
        lines = []
        for f in fields(self):
            value = getattr(self, f.name)
            if f.name == "train_config":
                for k, v in sorted(value.as_dict().items()):
                    lines.append(f"train_config.{k}={v!r}")
            else:
                lines.append(f"{f.name}={value!r}")
        return "\n".join(lines) + "\n"

    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical().encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class ReportRow:
    model: str
    train_policy: str
    eval_context: str
    metrics: Metrics


@dataclass
class SweepReport:
    rows: list[ReportRow]
    provenance: dict[str, str]
    complete: bool = True

    def by_model(self) -> dict[str, list[ReportRow]]:
        out: dict[str, list[ReportRow]] = {}
        for r in self.rows:
            out.setdefault(r.model, []).append(r)
        return out


def corpus_hash(paths: Sequence[str | None]) -> str:
    h = hashlib.sha256()
    for p in paths:
        if p is None:
            h.update(b"\0none\0")
            continue
        data = Path(p).read_bytes()
        h.update(len(data).to_bytes(8, "little"))
        h.update(data)
    return h.hexdigest()


def eval_policy(label: str, train_policy: ContextPolicy, max_span: int) -> ContextPolicy:
    """Bare ``variable`` at eval time reuses the training settings when training was variable."""
    if label == "variable" and train_policy.kind == "variable":
        return train_policy
    return ContextPolicy.parse(label, max_span)


def eval_windows(corpus: Corpus, policy: ContextPolicy, seed: int, max_span: int) -> list[ContextWindow | None]:
    """Fixed k truncates one max-span window; variable re-samples per example from ``seed``."""
    rng = make_rng(seed)
    out = []
    for s in corpus.samples:
        k = sample_context_length(policy, rng)
        out.append(None if k is None else truncate_window(corpus.window(s, max_span), k))
    return out


def build_model(name: str, spec: ExperimentSpec, train_c: Corpus, dev_c: Corpus | None, out_dir: Path) -> Lemmatizer:
    if name == "identity":
        return lambda phrases, windows: [identity_lemmatize(p) for p in phrases]
    if name == "lexicon":
        lex = Lexicon(train_c.pairs())
        return lambda phrases, windows: [lex.lemmatize(p) for p in phrases]
    if name == "edit_tree":
        model = train_tree_classifier(train_c.pairs())
        (out_dir / "edit_trees.txt").write_text(model.dump(), encoding="utf-8")
        if model.skipped_phrases:
            log.info("edit_tree: skipped %d phrases with mismatched token counts", model.skipped_phrases)
        return lambda phrases, windows: [predict_tree(model, p) for p in phrases]
    if name == "seq2seq":
        policy = ContextPolicy.parse(spec.train_policy, spec.max_span)
        cfg = spec.train_config
        result = train(train_c, dev_c, policy, cfg)
        sub = out_dir / "seq2seq"
        sub.mkdir(exist_ok=True)
        result.vocab.save(sub / "vocab.tsv")
        checkpoint.save(sub / "model.ckpt", result.params, result.vocab.digest())
        (sub / "train_log.csv").write_text("\n".join(result.log_rows()) + "\n", encoding="utf-8")
        predictor = Predictor(result.params, result.vocab, cfg)
        return lambda phrases, windows: predictor(phrases, windows)
    raise ValueError(f"unknown model {name!r}")


def run_experiment(spec: ExperimentSpec) -> SweepReport:
    from .report import emit_report, write_failure

    spec.validate()
    out_dir = Path(spec.output)
    out_dir.mkdir(parents=True, exist_ok=True)
    provenance = {"seed": str(spec.seed), "config_hash": spec.config_hash()}
    report = SweepReport([], provenance)
    train_policy = ContextPolicy.parse(spec.train_policy, spec.max_span)
    try:
        provenance["corpus_hash"] = corpus_hash([spec.train, spec.dev, spec.test])
        train_c = read_corpus(spec.train)
        dev_c = read_corpus(spec.dev) if spec.dev else None
        test_c = read_corpus(spec.test)
        gold = [s.lemma for s in test_c.samples]
        phrases = [s.orthographic for s in test_c.samples]
        contexts = []
        for i, label in enumerate(spec.eval_contexts):
            policy = eval_policy(label, train_policy, spec.max_span)
            seed = spec.seed + EVAL_SEED_OFFSET + i
            contexts.append((policy, eval_windows(test_c, policy, seed, spec.max_span)))
        for name in spec.models:
            log.info("model %s", name)
            lemmatize = build_model(name, spec, train_c, dev_c, out_dir)
            policy_label = train_policy.label if name == "seq2seq" else "-"
            for policy, windows in contexts:
                preds = lemmatize(phrases, windows)
                metrics = evaluate(zip(preds, gold))
                report.rows.append(ReportRow(name, policy_label, policy.label, metrics))
    except BaseException as exc:
        report.complete = False
        if report.rows:
            emit_report(report, out_dir, spec.format, figures=False)
        write_failure(out_dir, exc)
        raise
    emit_report(report, out_dir, spec.format, figures=spec.figures)
    return report
