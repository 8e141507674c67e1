"""Training loop, greedy prediction and per-epoch dev evaluation."""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from ..corpus import DEFAULT_MAX_SPAN, ContextWindow, Corpus, LemmaSample, truncate_window
from ..encoding import (
    ContextPolicy,
    Vocab,
    build_vocab,
    decode_ids,
    encode_example,
    make_rng,
    pack_input,
    sample_context_length,
)
from ..metrics import Metrics, evaluate
from .model import ModelParams, NonFiniteError, greedy_decode, init_params, loss_and_grads
from .optim import AdamState, adam_step

log = logging.getLogger(__name__)


@dataclass
class TrainConfig:
    d: int = 32
    h: int = 64
    learning_rate: float = 0.005
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    batch_size: int = 16
    epochs: int = 30
    seed: int = 0
    gradient_clip_norm: float = 5.0
    teacher_forcing: bool = True
    max_decode_len_factor: float = 2.0
    max_span: int = DEFAULT_MAX_SPAN

    def __post_init__(self):
        for name in ("d", "h", "learning_rate", "epsilon", "batch_size", "epochs",
                     "gradient_clip_norm", "max_decode_len_factor", "max_span"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not (0 < self.beta1 < 1 and 0 < self.beta2 < 1):
            raise ValueError("beta1 and beta2 must lie in (0, 1)")
        if not self.teacher_forcing:
            raise ValueError("only teacher-forced training is supported")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")

    def as_dict(self) -> dict:
        return asdict(self)


class TrainingDiverged(FloatingPointError):
    def __init__(self, epoch: int, step: int, detail: str):
        self.epoch, self.step = epoch, step
        super().__init__(f"training diverged at epoch {epoch}, step {step}: {detail}")


@dataclass
class EpochLog:
    epoch: int
    train_loss: float
    dev: Metrics | None


@dataclass
class TrainResult:
    params: ModelParams
    vocab: Vocab
    history: list[EpochLog] = field(default_factory=list)
    best_epoch: int = 0

    def log_rows(self) -> list[str]:
        rows = ["epoch,train_loss,dev_n,dev_acc_cs,dev_acc_ci,dev_score"]
        for e in self.history:
            if e.dev is None:
                rows.append(f"{e.epoch},{e.train_loss:.6f},,,,")
            else:
                rows.append(f"{e.epoch},{e.train_loss:.6f},{e.dev.csv_line()}")
        return rows


def context_window(corpus: Corpus, sample: LemmaSample, k: int | None, max_span: int) -> ContextWindow | None:
    if k is None:
        return None
    return truncate_window(corpus.window(sample, max_span), k)


def sampled_windows(corpus: Corpus, policy: ContextPolicy, rng: np.random.Generator, max_span: int):
    """One context draw per sample, in corpus order."""
    full = [corpus.window(s, max_span) for s in corpus.samples]
    out = []
    for w in full:
        k = sample_context_length(policy, rng)
        out.append(None if k is None else truncate_window(w, k))
    return out


def decode_cap(phrase: str, config: TrainConfig) -> int:
    return int(config.max_decode_len_factor * len(phrase)) + 8


class Predictor:
    """Greedy decoding over a batch of phrases; counts outputs truncated at the length cap."""

    def __init__(self, params: ModelParams, vocab: Vocab, config: TrainConfig, batch_size: int = 64):
        self.params, self.vocab, self.config = params, vocab, config
        self.batch_size = batch_size
        self.truncated = 0

    def __call__(self, phrases: Sequence[str], windows: Sequence[ContextWindow | None]) -> list[str]:
        out: list[str | None] = [None] * len(phrases)
        jobs = []
        for i, (phrase, w) in enumerate(zip(phrases, windows)):
            if not phrase:
                out[i] = ""
                continue
            jobs.append((i, pack_input(phrase, w, self.vocab), decode_cap(phrase, self.config)))
        # group by length to keep padding small; results are order-independent
        jobs.sort(key=lambda j: (len(j[1]), j[0]))
        for lo in range(0, len(jobs), self.batch_size):
            chunk = jobs[lo:lo + self.batch_size]
            ids, capped = greedy_decode(self.params, [j[1] for j in chunk], [j[2] for j in chunk])
            for (i, _, _), seq, hit in zip(chunk, ids, capped):
                out[i] = decode_ids(seq, self.vocab)
                self.truncated += int(hit)
        return out  # type: ignore[return-value]


def predict(params: ModelParams, phrase: str, window: ContextWindow | None, vocab: Vocab, config: TrainConfig) -> str:
    return Predictor(params, vocab, config)([phrase], [window])[0]


def evaluate_model(params, vocab, config, corpus: Corpus, windows) -> Metrics:
    preds = Predictor(params, vocab, config)([s.orthographic for s in corpus.samples], windows)
    return evaluate(zip(preds, (s.lemma for s in corpus.samples)))


def train(
    train_corpus: Corpus,
    dev_corpus: Corpus | None,
    policy: ContextPolicy,
    config: TrainConfig,
    vocab: Vocab | None = None,
    dev_policy: ContextPolicy | None = None,
) -> TrainResult:
    """Teacher-forced Adam training; returns the parameters with the best dev score.

    Without a dev corpus the final epoch's parameters are returned.
    """
    if not train_corpus.samples:
        raise ValueError("empty training corpus")
    if dev_corpus is not None:
        overlap = {s.sample_id for s in train_corpus.samples} & {s.sample_id for s in dev_corpus.samples}
        if overlap:
            raise ValueError(f"train and dev share {len(overlap)} sample ids")
    if vocab is None:
        vocab = build_vocab(train_corpus.samples, train_corpus.documents)
    params = init_params(vocab.size, config.d, config.h, config.seed)
    state = AdamState.zeros(params)
    rng = make_rng(config.seed + 1)
    max_span = config.max_span
    full = [train_corpus.window(s, max_span) for s in train_corpus.samples]

    dev_windows = None
    if dev_corpus is not None:
        dev_rng = make_rng(config.seed + 2)
        dev_windows = sampled_windows(dev_corpus, dev_policy or policy, dev_rng, max_span)

    result = TrainResult(params.copy(), vocab)
    best_score = -1.0
    n = len(train_corpus.samples)
    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(n)
        examples = []
        for i in order:
            k = sample_context_length(policy, rng)
            w = None if k is None else truncate_window(full[i], k)
            examples.append(encode_example(train_corpus.samples[i], w, k, vocab))
        total = 0.0
        for step, lo in enumerate(range(0, n, config.batch_size)):
            batch = examples[lo:lo + config.batch_size]
            try:
                with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
                    loss, grads = loss_and_grads(params, [e.input_ids for e in batch], [e.target_ids for e in batch])
            except NonFiniteError as exc:
                raise TrainingDiverged(epoch, step, str(exc)) from None
            if not np.isfinite(loss):
                raise TrainingDiverged(epoch, step, "non-finite loss")
            total += loss
            scale = 1.0 / len(batch)
            for g in grads.arrays():
                g *= scale
            try:
                adam_step(params, grads, state, config)
            except FloatingPointError as exc:
                raise TrainingDiverged(epoch, step, str(exc)) from None
        train_loss = total / n
        dev = None
        if dev_corpus is not None:
            dev = evaluate_model(params, vocab, config, dev_corpus, dev_windows)
            if dev.score > best_score:
                best_score = dev.score
                result.params = params.copy()
                result.best_epoch = epoch
        else:
            result.params = params.copy()
            result.best_epoch = epoch
        result.history.append(EpochLog(epoch, train_loss, dev))
        log.info("epoch %d loss %.5f dev %s", epoch, train_loss, dev.csv_line() if dev else "-")
    return result
