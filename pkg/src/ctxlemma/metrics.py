"""Exact-match lemma accuracy: case-sensitive, case-insensitive and the weighted score."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

CS_WEIGHT = 0.2
CI_WEIGHT = 0.8

# Codepoints whose full lowercase mapping is longer than the simple one.
_SIMPLE_LOWER_OVERRIDES = {"İ": "i"}


def simple_lower(ch: str) -> str:
    """Unicode simple (one-to-one) lowercase mapping of a single codepoint."""
    low = _SIMPLE_LOWER_OVERRIDES.get(ch)
    if low is not None:
        return low
    low = ch.lower()
    return low if len(low) == 1 else ch


def fold_case(text: str) -> str:
    return "".join(simple_lower(ch) for ch in text)


def match_cs(prediction: str, gold: str) -> bool:
    return prediction == gold


def match_ci(prediction: str, gold: str) -> bool:
    return len(prediction) == len(gold) and fold_case(prediction) == fold_case(gold)


def combined_score(acc_cs: float, acc_ci: float) -> float:
    return CS_WEIGHT * acc_cs + CI_WEIGHT * acc_ci


@dataclass(frozen=True)
class Metrics:
    """Match counts over ``n`` samples; accuracies are derived from the integer counts."""

    n: int
    n_cs: int
    n_ci: int

    @property
    def acc_cs(self) -> float:
        return self.n_cs / self.n

    @property
    def acc_ci(self) -> float:
        return self.n_ci / self.n

    @property
    def score(self) -> float:
        return combined_score(self.acc_cs, self.acc_ci)

    def __add__(self, other: "Metrics") -> "Metrics":
        return Metrics(self.n + other.n, self.n_cs + other.n_cs, self.n_ci + other.n_ci)

    def csv_line(self) -> str:
        return f"{self.n},{self.acc_cs:.6f},{self.acc_ci:.6f},{self.score:.6f}"


def evaluate(pairs: Iterable[tuple[str, str]]) -> Metrics:
    n = n_cs = n_ci = 0
    for pred, gold in pairs:
        n += 1
        if pred == gold:
            n_cs += 1
            n_ci += 1
        elif match_ci(pred, gold):
            n_ci += 1
    if n == 0:
        raise ValueError("cannot evaluate an empty set of predictions")
    return Metrics(n, n_cs, n_ci)


def read_id_file(path) -> dict[str, str]:
    """``sample_id<TAB>text`` lines; the text may be empty."""
    out: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\r\n")
            if not line:
                continue
            key, sep, text = line.partition("\t")
            if not sep:
                raise ValueError(f"{path}:{lineno}: expected sample_id<TAB>text")
            if key in out:
                raise ValueError(f"{path}:{lineno}: duplicate sample id {key!r}")
            out[key] = text
    return out


def score_files(predictions: Mapping[str, str], gold: Mapping[str, str]) -> tuple[Metrics, list[str]]:
    """Join on sample id. Gold ids without a prediction count as wrong and are returned."""
    if not gold:
        raise ValueError("gold file is empty")
    missing = [k for k in gold if k not in predictions]
    present = [(predictions[k], g) for k, g in gold.items() if k in predictions]
    if not present:
        return Metrics(len(gold), 0, 0), missing
    m = evaluate(present)
    return Metrics(len(gold), m.n_cs, m.n_ci), missing
