"""Character vocabulary, (phrase, context) packing and context-length sampling.

Packed input layout with context::

    phrase SEP left-context LMARK phrase RMARK right-context

Context tokens are joined by single spaces. Without context the input is the
phrase alone. Targets are the lemma characters followed by EOS.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .corpus import ContextWindow, Document, LemmaSample

PAD, BOS, EOS, SEP, LMARK, RMARK, UNK = range(7)
SPECIALS = ("PAD", "BOS", "EOS", "SEP", "LMARK", "RMARK", "UNK")
N_SPECIALS = len(SPECIALS)
REPLACEMENT_CHAR = "�"

_VOCAB_HEADER = "#specials\t" + " ".join(f"{name}={i}" for i, name in enumerate(SPECIALS))


class Vocab:
    """Codepoint to id map; specials occupy ids 0..6, codepoints follow in scalar order."""

    def __init__(self, codepoints: Iterable[str]):
        chars = sorted(set(codepoints))
        self.chars: tuple[str, ...] = tuple(chars)
        self.id_of = {ch: i + N_SPECIALS for i, ch in enumerate(chars)}

    @property
    def size(self) -> int:
        return N_SPECIALS + len(self.chars)

    def __len__(self) -> int:
        return self.size

    def __eq__(self, other):
        return isinstance(other, Vocab) and self.chars == other.chars

    def __hash__(self):
        return hash(self.chars)

    def ids(self, text: str) -> list[int]:
        get = self.id_of.get
        return [get(ch, UNK) for ch in text]

    def char(self, i: int) -> str:
        return self.chars[i - N_SPECIALS]

    def dumps(self) -> str:
        lines = [_VOCAB_HEADER]
        lines += [f"{self.id_of[ch]}\t{ord(ch):04X}" for ch in self.chars]
        return "\n".join(lines) + "\n"

    def digest(self) -> bytes:
        return hashlib.sha256(self.dumps().encode("utf-8")).digest()

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.dumps())

    @classmethod
    def loads(cls, text: str) -> "Vocab":
        lines = text.splitlines()
        if not lines or lines[0] != _VOCAB_HEADER:
            raise ValueError("vocab file: bad or missing specials header")
        chars = []
        for n, line in enumerate(lines[1:], start=N_SPECIALS):
            id_s, hex_s = line.split("\t")
            if int(id_s) != n:
                raise ValueError(f"vocab file: ids not dense at {id_s}")
            chars.append(chr(int(hex_s, 16)))
        vocab = cls(chars)
        if list(vocab.chars) != chars:
            raise ValueError("vocab file: codepoints not in ascending order")
        return vocab

    @classmethod
    def load(cls, path) -> "Vocab":
        with open(path, encoding="utf-8") as fh:
            return cls.loads(fh.read())


def build_vocab(samples: Sequence[LemmaSample], docs: Sequence[Document]) -> Vocab:
    if not samples:
        raise ValueError("cannot build a vocabulary from an empty training set")
    chars: set[str] = set()
    for s in samples:
        chars.update(s.orthographic)
        chars.update(s.lemma)
    for d in docs:
        for tok in d.tokens:
            chars.update(tok)
        if len(d.tokens) > 1:
            chars.add(" ")
    return Vocab(chars)


@dataclass(frozen=True)
class EncodedExample:
    input_ids: tuple[int, ...]
    target_ids: tuple[int, ...]

    @property
    def input_len(self) -> int:
        return len(self.input_ids)


def pack_input(phrase: str, window: ContextWindow | None, vocab: Vocab) -> list[int]:
    ids = vocab.ids(phrase)
    if window is None:
        return ids
    ids.append(SEP)
    ids += vocab.ids(" ".join(window.left))
    ids.append(LMARK)
    ids += vocab.ids(phrase)
    ids.append(RMARK)
    ids += vocab.ids(" ".join(window.right))
    return ids


def encode_example(
    sample: LemmaSample,
    window: ContextWindow | None,
    policy_k: int | None,
    vocab: Vocab,
    fixed_input_len: int | None = None,
) -> EncodedExample:
    """Pack one sample. ``policy_k=None`` means no context; otherwise ``window`` is used as given."""
    if policy_k is not None:
        if window is None:
            raise ValueError("context requested but no window supplied")
        if len(window.left) > policy_k or len(window.right) > policy_k:
            raise ValueError(f"window wider than policy_k={policy_k}; truncate it first")
    ids = pack_input(sample.orthographic, None if policy_k is None else window, vocab)
    if not ids:
        raise ValueError(f"empty input for sample {sample.sample_id}")
    if fixed_input_len is not None:
        if len(ids) > fixed_input_len:
            raise ValueError(f"input of {len(ids)} ids exceeds fixed_input_len={fixed_input_len}")
        ids += [PAD] * (fixed_input_len - len(ids))
    target = vocab.ids(sample.lemma) + [EOS]
    return EncodedExample(tuple(ids), tuple(target))


def decode_ids(ids: Iterable[int], vocab: Vocab) -> str:
    out = []
    size = vocab.size
    for i in ids:
        i = int(i)
        if not 0 <= i < size:
            raise ValueError(f"id {i} out of range for vocab of size {size}")
        if i == EOS:
            break
        if i == UNK:
            out.append(REPLACEMENT_CHAR)
        elif i >= N_SPECIALS:
            out.append(vocab.char(i))
        # PAD, BOS and the context markers carry no text
    return "".join(out)


@dataclass(frozen=True)
class ContextPolicy:
    """``none``, ``fixed`` (k words) or ``variable`` (p_none, k_min..k_max)."""

    kind: str
    k: int = 0
    p_none: float = 0.0
    k_min: int = 0
    k_max: int = 0

    @classmethod
    def none(cls) -> "ContextPolicy":
        return cls("none")

    @classmethod
    def fixed(cls, k: int, max_span: int = 64) -> "ContextPolicy":
        if not 1 <= k <= max_span:
            raise ValueError(f"fixed context k must be in 1..{max_span}, got {k}")
        return cls("fixed", k=k)

    @classmethod
    def variable(cls, p_none: float = 0.30, k_min: int = 8, k_max: int = 64, max_span: int = 64) -> "ContextPolicy":
        if not 0.0 <= p_none <= 1.0:
            raise ValueError("p_none must be a probability")
        if not 1 <= k_min <= k_max <= max_span:
            raise ValueError(f"need 1 <= k_min <= k_max <= {max_span}, got {k_min}, {k_max}")
        return cls("variable", p_none=p_none, k_min=k_min, k_max=k_max)

    @classmethod
    def parse(cls, text: str, max_span: int = 64) -> "ContextPolicy":
        """``none`` | ``<k>`` | ``fixed:<k>`` | ``variable`` | ``variable:<p>:<kmin>:<kmax>``."""
        text = text.strip()
        if text == "none":
            return cls.none()
        if text.startswith("variable"):
            parts = text.split(":")
            if len(parts) == 1:
                return cls.variable(max_span=max_span)
            if len(parts) != 4:
                raise ValueError(f"bad variable policy {text!r}")
            return cls.variable(float(parts[1]), int(parts[2]), int(parts[3]), max_span)
        if text.startswith("fixed:"):
            text = text[len("fixed:"):]
        try:
            k = int(text)
        except ValueError:
            raise ValueError(f"unrecognised context policy {text!r}") from None
        return cls.fixed(k, max_span)

    @property
    def label(self) -> str:
        if self.kind == "none":
            return "none"
        if self.kind == "fixed":
            return f"fixed-{self.k}"
        return f"variable-{self.p_none:g}-{self.k_min}-{self.k_max}"

    def __str__(self):
        if self.kind == "fixed":
            return str(self.k)
        if self.kind == "variable":
            return f"variable:{self.p_none:g}:{self.k_min}:{self.k_max}"
        return "none"


def make_rng(seed: int) -> np.random.Generator:
    """PCG64 stream; ``Generator.integers`` draws bounded ints without modulo bias."""
    return np.random.Generator(np.random.PCG64(seed))


def sample_context_length(policy: ContextPolicy, rng: np.random.Generator) -> int | None:
    if policy.kind == "none":
        return None
    if policy.kind == "fixed":
        return policy.k
    if rng.random() < policy.p_none:
        return None
    return int(rng.integers(policy.k_min, policy.k_max, endpoint=True))
