"""Synthetic corpora where some lemmas depend on a nearby trigger token.

Words are ``stem + ending``. Unambiguous endings map to one lemma ending
regardless of context. Ambiguous endings map to a lemma ending chosen by a
trigger token (a determiner) placed one to three tokens before the word, so
without context the best a lemmatizer can do on them is guess.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..corpus import Document, LemmaSample, serialize_corpus
from ..encoding import make_rng

CONSONANTS = "bdfgklmnprstwz"
VOWELS = "aeiou"

DEFAULT_UNAMBIGUOUS = (
    ("", ""),
    ("a", "a"),
    ("owi", ""),
    ("em", ""),
    ("ami", "a"),
    ("ą", "a"),
)
DEFAULT_AMBIGUOUS = (
    ("y", (("ten", ""), ("ta", "a"))),
    ("u", (("ten", ""), ("to", "o"))),
)
DEFAULT_FILLER = (
    "i", "w", "na", "z", "do", "się", "nie", "jest", "był", "bardzo", "już", "tam",
    "gdzie", "kiedy", "potem", "tylko", "także", "mówi", "widzi", "ma", "dla", "przy",
    "nad", "pod", "o", "lecz", "więc", "dziś", "jutro", "wczoraj",
)


class RuleConflict(ValueError):
    pass


@dataclass(frozen=True)
class ToyRules:
    unambiguous: tuple[tuple[str, str], ...] = DEFAULT_UNAMBIGUOUS
    ambiguous: tuple[tuple[str, tuple[tuple[str, str], ...]], ...] = DEFAULT_AMBIGUOUS
    filler: tuple[str, ...] = DEFAULT_FILLER

    @property
    def triggers(self) -> set[str]:
        return {trig for _, options in self.ambiguous for trig, _ in options}

    def validate(self) -> None:
        seen: dict[str, str] = {}
        for surf, lem in self.unambiguous:
            if seen.setdefault(surf, lem) != lem:
                raise RuleConflict(f"ending {surf!r} maps to both {seen[surf]!r} and {lem!r}")
        for surf, options in self.ambiguous:
            if surf in seen:
                raise RuleConflict(f"ending {surf!r} is both ambiguous and unambiguous")
            lemmas = {}
            for trig, lem in options:
                if lemmas.setdefault(trig, lem) != lem:
                    raise RuleConflict(f"trigger {trig!r} gives two lemmas for ending {surf!r}")
            if len(set(lemmas.values())) < 2:
                raise RuleConflict(f"ambiguous ending {surf!r} needs at least two distinct lemmas")
        if self.triggers & set(self.filler):
            raise RuleConflict("trigger tokens must not appear among filler words")
        endings = [s for s, _ in self.unambiguous] + [s for s, _ in self.ambiguous]
        for e in endings:
            if e and e[0] in CONSONANTS:
                raise RuleConflict(f"ending {e!r} starts with a stem consonant")

    def lemma_for(self, stem: str, ending: str, trigger: str | None = None) -> str:
        for surf, lem in self.unambiguous:
            if surf == ending:
                return stem + lem
        for surf, options in self.ambiguous:
            if surf == ending:
                for trig, lem in options:
                    if trig == trigger:
                        return stem + lem
                raise RuleConflict(f"ending {ending!r} needs one of the triggers {[t for t, _ in options]}")
        raise RuleConflict(f"unknown ending {ending!r}")


@dataclass
class ToySpec:
    n_train: int = 1000
    n_dev: int = 200
    n_test: int = 200
    ambiguous_fraction: float = 0.3
    seed: int = 7
    n_stems: int = 60
    held_out_stems: bool = False
    proper_fraction: float = 0.1
    rules: ToyRules = field(default_factory=ToyRules)

    def __post_init__(self):
        if not 0.0 <= self.ambiguous_fraction <= 1.0:
            raise ValueError("ambiguous_fraction must be in [0, 1]")
        if min(self.n_train, self.n_dev, self.n_test) < 0 or self.n_stems < 3:
            raise ValueError("sizes must be non-negative and n_stems >= 3")


@dataclass
class ToySplit:
    name: str
    documents: list[Document]
    samples: list[LemmaSample]
    ambiguous_ids: list[str]


def make_stems(n: int, rng: np.random.Generator) -> list[str]:
    stems: list[str] = []
    seen = set()
    while len(stems) < n:
        syl = int(rng.integers(1, 3, endpoint=True))
        s = "".join(CONSONANTS[rng.integers(len(CONSONANTS))] + VOWELS[rng.integers(len(VOWELS))] for _ in range(syl))
        s += CONSONANTS[rng.integers(len(CONSONANTS))]
        if s not in seen:
            seen.add(s)
            stems.append(s)
    return stems


def _split_stems(stems: list[str], held_out: bool) -> dict[str, list[str]]:
    if not held_out:
        return {"train": stems, "dev": stems, "test": stems}
    n = len(stems)
    a, b = int(n * 0.6), int(n * 0.8)
    return {"train": stems[:a], "dev": stems[a:b], "test": stems[b:]}


def _make_split(name: str, n: int, stems: list[str], spec: ToySpec, rng: np.random.Generator) -> ToySplit:
    rules = spec.rules
    n_amb = int(round(n * spec.ambiguous_fraction))
    flags = np.zeros(n, dtype=bool)
    flags[:n_amb] = True
    rng.shuffle(flags)
    docs, samples, amb_ids = [], [], []
    seen: dict[tuple, str] = {}
    filler = rules.filler
    for i in range(n):
        stem = stems[rng.integers(len(stems))]
        if rng.random() < spec.proper_fraction:
            stem = stem.capitalize()
        doc_len = int(rng.integers(5, 12, endpoint=True))
        tokens = [filler[j] for j in rng.integers(len(filler), size=doc_len)]
        if flags[i]:
            ending, options = rules.ambiguous[rng.integers(len(rules.ambiguous))]
            trigger = options[rng.integers(len(options))][0]
            dist = int(rng.integers(1, 3, endpoint=True))
            pos = int(rng.integers(dist, doc_len))
            tokens[pos - dist] = trigger
        else:
            ending = rules.unambiguous[rng.integers(len(rules.unambiguous))][0]
            trigger = None
            pos = int(rng.integers(doc_len))
        word = stem + ending
        lemma = rules.lemma_for(stem, ending, trigger)
        tokens[pos] = word
        doc_id = f"{name}-{i:05d}"
        key = tuple(tokens) + (pos,)
        if seen.setdefault(key, lemma) != lemma:
            raise RuleConflict(f"same surface and context with two lemmas in {doc_id}")
        docs.append(Document(doc_id, tuple(tokens)))
        sample = LemmaSample(doc_id, pos, pos + 1, word, lemma)
        samples.append(sample)
        if flags[i]:
            amb_ids.append(sample.sample_id)
    return ToySplit(name, docs, samples, amb_ids)


def generate_toy_corpus(spec: ToySpec) -> dict[str, ToySplit]:
    spec.rules.validate()
    rng = make_rng(spec.seed)
    stems = make_stems(spec.n_stems, rng)
    by_split = _split_stems(stems, spec.held_out_stems)
    sizes = {"train": spec.n_train, "dev": spec.n_dev, "test": spec.n_test}
    return {name: _make_split(name, n, by_split[name], spec, rng) for name, n in sizes.items()}


def write_toy_corpus(spec: ToySpec, out_dir) -> dict[str, Path]:
    """Write ``<split>.txt`` corpus files and ``<split>.ambiguous`` sample-id lists."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {}
    for name, split in generate_toy_corpus(spec).items():
        path = out / f"{name}.txt"
        path.write_text(serialize_corpus(split.documents, split.samples), encoding="utf-8", newline="\n")
        (out / f"{name}.ambiguous").write_text("".join(f"{i}\n" for i in split.ambiguous_ids), encoding="utf-8")
        paths[name] = path
    return paths


def read_id_list(path) -> list[str]:
    return [line for line in Path(path).read_text(encoding="utf-8").splitlines() if line]
