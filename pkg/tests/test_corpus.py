import io

import pytest
from hypothesis import given
from hypothesis import strategies as st

from ctxlemma.corpus import (
    ContextWindow,
    CorpusError,
    Document,
    LemmaSample,
    extract_context,
    parse_corpus,
    serialize_corpus,
    truncate_window,
)


def parse(text):
    return parse_corpus(io.StringIO(text))


class TestParse:
    def test_minimal_record(self):
        docs, samples = parse("D\td1\tw ministerstwie kultury\nS\td1\t1\t3\tministerstwie kultury\tministerstwo kultury\n")
        assert docs == [Document("d1", ("w", "ministerstwie", "kultury"))]
        assert samples == [LemmaSample("d1", 1, 3, "ministerstwie kultury", "ministerstwo kultury")]

    def test_span_out_of_bounds(self):
        with pytest.raises(CorpusError, match="out of bounds") as exc:
            parse("D\td1\ta b c\nS\td1\t2\t5\tc\tc\n")
        assert exc.value.lineno == 2

    def test_orthographic_mismatch(self):
        text = "D\td1\tw ministerstwie kultury\nS\td1\t1\t3\tministerstwa kultury\tministerstwo kultury\n"
        with pytest.raises(CorpusError, match="mismatch"):
            parse(text)

    def test_duplicate_document(self):
        with pytest.raises(CorpusError, match="duplicate"):
            parse("D\td1\ta\nD\td1\tb\n")

    @pytest.mark.parametrize("line", [
        "D\td1\ta b\textra",
        "S\td1\t0\t1\ta",
        "X\td1\ta",
        "D\td1\ta  b",
        "S\td1\tzero\t1\ta\ta",
    ])
    def test_malformed_lines_report_line_number(self, line):
        with pytest.raises(CorpusError) as exc:
            parse("# header comment\nD\td1\ta b\n" + line + "\n")
        assert exc.value.lineno == 3

    def test_sample_before_document(self):
        with pytest.raises(CorpusError, match="unknown document"):
            parse("S\td1\t0\t1\ta\ta\nD\td1\ta\n")

    def test_empty_span_rejected(self):
        with pytest.raises(CorpusError):
            parse("D\td1\ta b\nS\td1\t1\t1\t\tx\n")

    def test_comments_and_blank_lines(self):
        docs, samples = parse("# c\n\nD\td\tx y\n# another\nS\td\t0\t2\tx y\tz\n")
        assert len(docs) == 1 and samples[0].sample_id == "d:0-2"


class TestExtractContext:
    doc = Document("d", tuple("t%d" % i for i in range(10)))

    def test_boundary_truncation(self):
        w = extract_context(self.doc, LemmaSample("d", 3, 5, "t3 t4", "x"), 64)
        assert w.left == ("t0", "t1", "t2")
        assert w.right == tuple(f"t{i}" for i in range(5, 10))

    def test_document_start(self):
        doc = Document("d", tuple("t%d" % i for i in range(20)))
        w = extract_context(doc, LemmaSample("d", 0, 2, "t0 t1", "x"), 8)
        assert w.left == ()
        assert w.right == tuple(f"t{i}" for i in range(2, 10))

    def test_zero_span(self):
        w = extract_context(self.doc, LemmaSample("d", 3, 5, "t3 t4", "x"), 0)
        assert w.left == () and w.right == ()

    def test_polish_multi_segment(self, polish_doc):
        doc, sample = polish_doc
        w = extract_context(doc, sample, 2)
        assert w.left == ("Pracował", "w")
        assert w.right == ("przez", "lata")

    def test_wrong_document(self):
        with pytest.raises(ValueError):
            extract_context(self.doc, LemmaSample("other", 0, 1, "t0", "x"), 4)


class TestTruncate:
    def test_nearest_tokens_kept(self):
        w = ContextWindow(("a", "b", "c"), ("d", "e"), 64)
        t = truncate_window(w, 2)
        assert t.left == ("b", "c") and t.right == ("d", "e")

    def test_zero(self):
        t = truncate_window(ContextWindow(("a",), ("b",), 4), 0)
        assert t.left == () and t.right == ()

    def test_idempotent_when_wide(self):
        w = ContextWindow(("a",), (), 64)
        assert truncate_window(w, 64) == w

    def test_k_above_max_span(self):
        with pytest.raises(ValueError):
            truncate_window(ContextWindow((), (), 8), 9)


tokens = st.text(alphabet="abcąęłóśźż", min_size=1, max_size=5)


@st.composite
def doc_and_sample(draw):
    toks = tuple(draw(st.lists(tokens, min_size=1, max_size=30)))
    start = draw(st.integers(0, len(toks) - 1))
    end = draw(st.integers(start + 1, len(toks)))
    doc = Document("d", toks)
    return doc, LemmaSample("d", start, end, " ".join(toks[start:end]), draw(tokens))


class TestProperties:
    @given(doc_and_sample(), st.integers(0, 40))
    def test_window_bounds_and_contiguity(self, ds, max_span):
        doc, s = ds
        w = extract_context(doc, s, max_span)
        assert len(w.left) <= max_span and len(w.right) <= max_span
        joined = w.left + doc.tokens[s.start:s.end] + w.right
        lo = s.start - len(w.left)
        assert doc.tokens[lo:lo + len(joined)] == joined

    @given(doc_and_sample(), st.integers(0, 40), st.integers(0, 40))
    def test_truncate_composes_as_min(self, ds, k1, k2):
        doc, s = ds
        w = extract_context(doc, s, 40)
        assert truncate_window(truncate_window(w, k1), k2) == truncate_window(w, min(k1, k2))

    @given(st.lists(doc_and_sample(), min_size=1, max_size=5))
    def test_round_trip_fixed_point(self, items):
        docs, samples = [], []
        for i, (doc, s) in enumerate(items):
            docs.append(Document(f"d{i}", doc.tokens))
            samples.append(LemmaSample(f"d{i}", s.start, s.end, s.orthographic, s.lemma))
        text = serialize_corpus(docs, samples)
        d2, s2 = parse(text)
        assert (d2, s2) == (docs, samples)
        assert serialize_corpus(d2, s2) == text
