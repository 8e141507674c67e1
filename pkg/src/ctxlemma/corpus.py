"""Pre-tokenized corpus records and context windows around lemma samples.

Corpus files are UTF-8, one record per line::

    D<TAB>doc_id<TAB>token1 token2 ... tokenN
    S<TAB>doc_id<TAB>start<TAB>end<TAB>orthographic<TAB>lemma

``#`` lines are comments, blank lines are skipped. A sample must follow the
document it references.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence, TextIO

DEFAULT_MAX_SPAN = 64


class CorpusError(ValueError):
    """Raised for malformed corpus input; carries the 1-based line number."""

    def __init__(self, message: str, lineno: int | None = None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


def _check_token(tok: str) -> None:
    if not tok:
        raise ValueError("empty token")
    if any(ch.isspace() for ch in tok):
        raise ValueError(f"token contains whitespace: {tok!r}")


@dataclass(frozen=True)
class Document:
    id: str
    tokens: tuple[str, ...]

    def __post_init__(self):
        if not self.tokens:
            raise ValueError(f"document {self.id!r} has no tokens")
        for tok in self.tokens:
            _check_token(tok)


@dataclass(frozen=True)
class LemmaSample:
    doc_id: str
    start: int
    end: int
    orthographic: str
    lemma: str

    @property
    def sample_id(self) -> str:
        return f"{self.doc_id}:{self.start}-{self.end}"

    @property
    def span(self) -> tuple[int, int]:
        return self.start, self.end


@dataclass(frozen=True)
class ContextWindow:
    left: tuple[str, ...]
    right: tuple[str, ...]
    max_span: int

    def __post_init__(self):
        if self.max_span < 0:
            raise ValueError("max_span must be non-negative")
        if len(self.left) > self.max_span or len(self.right) > self.max_span:
            raise ValueError("context side longer than max_span")


@dataclass
class Corpus:
    documents: list[Document]
    samples: list[LemmaSample]

    def __post_init__(self):
        self.by_id = {d.id: d for d in self.documents}

    def document(self, doc_id: str) -> Document:
        return self.by_id[doc_id]

    def window(self, sample: LemmaSample, max_span: int = DEFAULT_MAX_SPAN) -> ContextWindow:
        return extract_context(self.by_id[sample.doc_id], sample, max_span)

    def pairs(self) -> list[tuple[str, str]]:
        return [(s.orthographic, s.lemma) for s in self.samples]


def parse_corpus(lines: Iterable[str]) -> tuple[list[Document], list[LemmaSample]]:
    docs: dict[str, Document] = {}
    samples: list[LemmaSample] = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.rstrip("\r\n")
        if not line.strip() or line.startswith("#"):
            continue
        fields = line.split("\t")
        tag = fields[0]
        if tag == "D":
            if len(fields) != 3:
                raise CorpusError(f"document record needs 3 fields, got {len(fields)}", lineno)
            doc_id, text = fields[1], fields[2]
            if not doc_id:
                raise CorpusError("empty document id", lineno)
            if doc_id in docs:
                raise CorpusError(f"duplicate document id {doc_id!r}", lineno)
            tokens = tuple(text.split(" "))
            try:
                docs[doc_id] = Document(doc_id, tokens)
            except ValueError as exc:
                raise CorpusError(str(exc), lineno) from None
        elif tag == "S":
            if len(fields) != 6:
                raise CorpusError(f"sample record needs 6 fields, got {len(fields)}", lineno)
            _, doc_id, start_s, end_s, ortho, lemma = fields
            doc = docs.get(doc_id)
            if doc is None:
                raise CorpusError(f"sample references unknown document {doc_id!r}", lineno)
            try:
                start, end = int(start_s), int(end_s)
            except ValueError:
                raise CorpusError(f"non-integer span {start_s!r},{end_s!r}", lineno) from None
            if not 0 <= start < end <= len(doc.tokens):
                raise CorpusError(
                    f"span [{start},{end}) out of bounds for {len(doc.tokens)}-token document {doc_id!r}",
                    lineno,
                )
            joined = " ".join(doc.tokens[start:end])
            if joined != ortho:
                raise CorpusError(f"orthographic mismatch: record {ortho!r}, span {joined!r}", lineno)
            samples.append(LemmaSample(doc_id, start, end, ortho, lemma))
        else:
            raise CorpusError(f"unknown record tag {tag!r}", lineno)
    return list(docs.values()), samples


def serialize_corpus(docs: Sequence[Document], samples: Sequence[LemmaSample]) -> str:
    """Inverse of :func:`parse_corpus`: each document followed by its samples."""
    by_doc: dict[str, list[LemmaSample]] = {}
    for s in samples:
        by_doc.setdefault(s.doc_id, []).append(s)
    out = []
    for doc in docs:
        out.append(f"D\t{doc.id}\t{' '.join(doc.tokens)}\n")
        for s in by_doc.get(doc.id, ()):
            out.append(f"S\t{s.doc_id}\t{s.start}\t{s.end}\t{s.orthographic}\t{s.lemma}\n")
    return "".join(out)


def read_corpus(path) -> Corpus:
    with open(path, encoding="utf-8") as fh:
        return Corpus(*parse_corpus(fh))


def write_corpus(path, docs: Sequence[Document], samples: Sequence[LemmaSample]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(serialize_corpus(docs, samples))


def extract_context(doc: Document, sample: LemmaSample, max_span: int) -> ContextWindow:
    """Up to ``max_span`` tokens either side of the sample span, truncated at document edges."""
    if max_span < 0:
        raise ValueError("max_span must be non-negative")
    if sample.doc_id != doc.id:
        raise ValueError(f"sample belongs to {sample.doc_id!r}, not {doc.id!r}")
    left = doc.tokens[max(0, sample.start - max_span):sample.start]
    right = doc.tokens[sample.end:sample.end + max_span]
    return ContextWindow(left, right, max_span)


def truncate_window(w: ContextWindow, k: int) -> ContextWindow:
    """Keep the ``k`` tokens nearest the phrase on each side."""
    if k < 0:
        raise ValueError("k must be non-negative")
    if k > w.max_span:
        raise ValueError(f"k={k} exceeds window max_span={w.max_span}")
    left = w.left[len(w.left) - k:] if k < len(w.left) else w.left
    return ContextWindow(left, w.right[:k], w.max_span)


def gold_lines(samples: Iterable[LemmaSample]) -> Iterable[str]:
    for s in samples:
        yield f"{s.sample_id}\t{s.lemma}\n"


def write_gold(fh: TextIO, samples: Iterable[LemmaSample]) -> None:
    fh.writelines(gold_lines(samples))
