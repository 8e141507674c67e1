"""Reference lemmatizers: identity, training lexicon and an edit-tree classifier.

Edit trees follow the longest-common-substring construction: the tree for
``(word, lemma)`` splits both strings around their longest common substring,
keeps it, and recurses into the prefixes and suffixes. A :class:`Split` node
records how many characters of the *word* lie before and after the kept
substring, so trees do not mention the stem and generalise across words.
"""

from __future__ import annotations

import json
import math
from collections import Counter, defaultdict
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

SUFFIX_LENGTHS = (1, 2, 3, 4, 5)


def identity_lemmatize(phrase: str) -> str:
    return phrase


@dataclass(frozen=True)
class Replace:
    source: str
    target: str


@dataclass(frozen=True)
class Split:
    prefix_len: int
    suffix_len: int
    left: "EditTree"
    right: "EditTree"


EditTree = Union[Replace, Split]


def longest_common_substring(a: str, b: str) -> tuple[int, int, int]:
    """Return ``(start_a, start_b, length)``; ties go to the smallest start in ``a``, then in ``b``."""
    best = (0, 0, 0)
    prev = [0] * (len(b) + 1)
    for i in range(1, len(a) + 1):
        cur = [0] * (len(b) + 1)
        ai = a[i - 1]
        for j in range(1, len(b) + 1):
            if ai == b[j - 1]:
                n = prev[j - 1] + 1
                cur[j] = n
                if n > best[2]:
                    best = (i - n, j - n, n)
        prev = cur
    return best


def build_edit_tree(word: str, lemma: str) -> EditTree:
    sw, sl, n = longest_common_substring(word, lemma)
    if n == 0:
        return Replace(word, lemma)
    return Split(
        sw,
        len(word) - sw - n,
        build_edit_tree(word[:sw], lemma[:sl]),
        build_edit_tree(word[sw + n:], lemma[sl + n:]),
    )


def apply_edit_tree(tree: EditTree, word: str) -> str | None:
    """Lemma for ``word`` or ``None`` when the tree does not apply."""
    if isinstance(tree, Replace):
        return tree.target if word == tree.source else None
    end = len(word) - tree.suffix_len
    if tree.prefix_len > end:
        return None
    left = apply_edit_tree(tree.left, word[:tree.prefix_len])
    if left is None:
        return None
    right = apply_edit_tree(tree.right, word[end:])
    if right is None:
        return None
    return left + word[tree.prefix_len:end] + right


def _tree_obj(tree: EditTree):
    if isinstance(tree, Replace):
        return ["R", tree.source, tree.target]
    return ["S", tree.prefix_len, tree.suffix_len, _tree_obj(tree.left), _tree_obj(tree.right)]


def serialize_tree(tree: EditTree) -> str:
    return json.dumps(_tree_obj(tree), ensure_ascii=False, separators=(",", ":"))


def _tree_from_obj(obj) -> EditTree:
    if obj[0] == "R":
        return Replace(obj[1], obj[2])
    if obj[0] == "S":
        return Split(obj[1], obj[2], _tree_from_obj(obj[3]), _tree_from_obj(obj[4]))
    raise ValueError(f"bad edit tree node {obj!r}")


def parse_tree(text: str) -> EditTree:
    return _tree_from_obj(json.loads(text))


IDENTITY_TREE = Split(0, 0, Replace("", ""), Replace("", ""))


def token_pairs(samples: Iterable[tuple[str, str]]) -> tuple[list[tuple[str, str]], int]:
    """Split phrases into positional (word, lemma) pairs; returns pairs and the count of skipped phrases."""
    pairs: list[tuple[str, str]] = []
    skipped = 0
    for phrase, lemma in samples:
        words, lemmas = phrase.split(" "), lemma.split(" ")
        if len(words) != len(lemmas):
            skipped += 1
            continue
        pairs.extend(zip(words, lemmas))
    return pairs, skipped


class Lexicon:
    """Most frequent training lemma per orthographic form; unseen forms pass through."""

    def __init__(self, samples: Iterable[tuple[str, str]]):
        self.counts: dict[str, Counter] = defaultdict(Counter)
        for ortho, lemma in samples:
            self.counts[ortho][lemma] += 1
        self.map = {
            ortho: min(c.items(), key=lambda kv: (-kv[1], kv[0]))[0]
            for ortho, c in self.counts.items()
        }

    def lookup(self, ortho: str) -> str | None:
        return self.map.get(ortho)

    def lemmatize(self, phrase: str) -> str:
        found = self.map.get(phrase)
        return phrase if found is None else found


def _suffixes(word: str) -> list[tuple[int, str]]:
    return [(k, word[-k:]) for k in SUFFIX_LENGTHS if k <= len(word)]


@dataclass
class TreeClassifierModel:
    inventory: list[str]                       # serialized trees, sorted
    trees: list[EditTree]
    tree_counts: dict[str, int]
    feature_counts: dict[tuple[int, str], Counter]
    n_pairs: int
    skipped_phrases: int

    def __post_init__(self):
        self.feature_totals = {f: sum(c.values()) for f, c in self.feature_counts.items()}

    def score(self, key: str, word: str) -> float:
        """Add-one smoothed log score of a tree given the word's suffixes."""
        size = len(self.inventory)
        s = math.log((self.tree_counts.get(key, 0) + 1) / (self.n_pairs + size))
        for feat in _suffixes(word):
            c = self.feature_counts.get(feat)
            if c is None:
                continue
            s += math.log((c.get(key, 0) + 1) / (self.feature_totals[feat] + size))
        return s

    def predict_word(self, word: str) -> str:
        best: tuple[float, str] | None = None
        best_out = word
        for key, tree in zip(self.inventory, self.trees):
            out = apply_edit_tree(tree, word)
            if out is None:
                continue
            cand = (-self.score(key, word), key)
            if best is None or cand < best:
                best, best_out = cand, out
        return best_out

    def dump(self) -> str:
        rows = sorted(self.tree_counts.items(), key=lambda kv: (-kv[1], kv[0]))
        return "".join(f"{n}\t{key}\n" for key, n in rows)


def train_tree_classifier(samples: Sequence[tuple[str, str]]) -> TreeClassifierModel:
    if not samples:
        raise ValueError("cannot train on an empty set")
    pairs, skipped = token_pairs(samples)
    if not pairs:
        raise ValueError("no usable (word, lemma) pairs after splitting phrases")
    tree_counts: Counter = Counter()
    feature_counts: dict[tuple[int, str], Counter] = defaultdict(Counter)
    parsed: dict[str, EditTree] = {}
    for word, lemma in pairs:
        tree = build_edit_tree(word, lemma)
        key = serialize_tree(tree)
        parsed.setdefault(key, tree)
        tree_counts[key] += 1
        for feat in _suffixes(word):
            feature_counts[feat][key] += 1
    inventory = sorted(parsed)
    return TreeClassifierModel(
        inventory=inventory,
        trees=[parsed[k] for k in inventory],
        tree_counts=dict(tree_counts),
        feature_counts=dict(feature_counts),
        n_pairs=len(pairs),
        skipped_phrases=skipped,
    )


def predict_tree(model: TreeClassifierModel, phrase: str) -> str:
    """Per-token prediction, joined by single spaces."""
    return " ".join(model.predict_word(w) for w in phrase.split(" "))
