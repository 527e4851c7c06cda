import os
import random
import stat

import pytest

from mathsearch.index import (
    CorruptIndex,
    DuplicateDocument,
    FormulaIndex,
    IoError,
    extract_embedded_formulas,
    tokenize,
)
from mathsearch.latex import to_latex
from mathsearch.tuples import SymbolPairTuple, TupleConfig

from helpers import random_tree, random_words


def test_tokenize_lowercases_and_splits():
    assert tokenize("Quadratic Formula, x=1!") == ["quadratic", "formula", "x", "1"]


def test_tokenize_drops_underscores():
    assert tokenize("a_b") == ["a", "b"]


def test_extract_embedded_formulas():
    prose, formulas = extract_embedded_formulas("roots of $x^2$ and $y$")
    assert formulas == ["x^2", "y"]
    assert tokenize(prose) == ["roots", "of", "and"]


def test_add_document_dedups_expressions():
    idx = FormulaIndex()
    r1 = idx.add_document("d1", "one", "", ["x^2", "x^{2}"])
    assert r1.new_expressions == 1
    assert r1.linked_expressions == 1
    r2 = idx.add_document("d2", "two", "", ["x^2"])
    assert r2.new_expressions == 0
    assert r2.linked_expressions == 1
    assert idx.expression_count == 1
    assert idx.docs_for_expression(0) == ["d1", "d2"]


def test_duplicate_doc_id_raises():
    idx = FormulaIndex()
    idx.add_document("d1", "one", "")
    with pytest.raises(DuplicateDocument):
        idx.add_document("d1", "again", "")


def test_parse_errors_reported_not_fatal():
    idx = FormulaIndex()
    report = idx.add_document("d1", "one", "", [r"\frac{x}", "y"])
    assert len(report.parse_errors) == 1
    assert report.new_expressions == 1


def test_lookup_wildcard_expanded_keys():
    idx = FormulaIndex(TupleConfig("v2", emit_wildcard_expansions=True))
    idx.add_document("d1", "one", "", ["x^2"])
    assert idx.lookup("x\t2\t1\t1") == [(0, 1)]
    assert idx.lookup("!?\t2\t1\t1") == [(0, 1)]
    assert idx.lookup("x\t!?\t1\t1") == [(0, 1)]
    assert idx.lookup("2\t!NONE\t0\t0") == [(0, 1)]
    assert idx.lookup("nosuch\tkey\t0\t0") == []


def _posting_sum(idx, expr_id):
    return sum(
        count
        for plist in idx._postings.values()
        for eid, count in plist.items()
        if eid == expr_id
    )


@pytest.mark.parametrize("expand", [False, True])
def test_posting_sum_invariant(expand):
    rng = random.Random(41)
    idx = FormulaIndex(TupleConfig("v2", emit_wildcard_expansions=expand))
    trees = [random_tree(rng) for _ in range(40)]
    idx.add_document("d1", "one", "", [to_latex(t) for t in trees])
    for e in idx.expressions:
        concrete_pairs = sum(
            n for tu, n in idx.expression_tuples(e.expr_id).items()
            if isinstance(tu, SymbolPairTuple)
            and not tu.is_leaf and tu.wildcard_count == 0
        )
        expected = e.total_tuples + (2 * concrete_pairs if expand else 0)
        assert _posting_sum(idx, e.expr_id) == expected


def test_idf_and_text_score():
    idx = FormulaIndex()
    idx.add_document("d1", "one", "quadratic roots")
    idx.add_document("d2", "two", "linear roots")
    assert idx.idf("missing") == 0.0
    assert idx.idf("roots") < idx.idf("quadratic")
    d1 = idx.documents["d1"]
    assert idx.text_score(d1, ["quadratic"]) > idx.text_score(d1, ["roots"]) > 0.0
    assert idx.text_score(d1, ["linear"]) == 0.0
    assert idx.text_score(d1, []) == 0.0


def test_save_load_round_trip(tmp_path):
    rng = random.Random(5)
    idx = FormulaIndex(TupleConfig("v2"), alpha_default=0.3)
    for i in range(10):
        idx.add_document(
            f"d{i}",
            f"doc {i}",
            " ".join(random_words(rng, 12)),
            [to_latex(random_tree(rng)) for _ in range(3)],
        )
    idx.save(tmp_path / "idx")
    loaded = FormulaIndex.load(tmp_path / "idx")

    assert loaded.config == idx.config
    assert loaded.alpha_default == 0.3
    assert loaded.doc_count == idx.doc_count
    assert [e.__dict__ for e in loaded.expressions] == [
        e.__dict__ for e in idx.expressions
    ]
    assert loaded._postings == idx._postings
    for doc_id, doc in idx.documents.items():
        other = loaded.documents[doc_id]
        assert (other.title, other.expr_ids, other.term_frequencies) == (
            doc.title, doc.expr_ids, doc.term_frequencies,
        )
    # tuples regenerate lazily from stored latex
    for e in idx.expressions:
        assert loaded.expression_tuples(e.expr_id) == idx.expression_tuples(e.expr_id)


def test_load_detects_tampering(tmp_path):
    idx = FormulaIndex()
    idx.add_document("d1", "one", "hello", ["x^2"])
    idx.save(tmp_path / "idx")
    target = tmp_path / "idx" / "postings.jsonl"
    target.write_text(target.read_text() + "\n", encoding="utf-8")
    with pytest.raises(CorruptIndex):
        FormulaIndex.load(tmp_path / "idx")


def test_load_rejects_future_format(tmp_path):
    idx = FormulaIndex()
    idx.add_document("d1", "one", "hello")
    idx.save(tmp_path / "idx")
    meta = tmp_path / "idx" / "meta.json"
    meta.write_text(meta.read_text().replace('"format_version": 1', '"format_version": 99'))
    with pytest.raises(CorruptIndex):
        FormulaIndex.load(tmp_path / "idx")


def test_load_missing_directory_is_io_error(tmp_path):
    with pytest.raises(IoError):
        FormulaIndex.load(tmp_path / "nope")


def test_save_into_readonly_dir_is_io_error(tmp_path):
    if os.geteuid() == 0:
        pytest.skip("root ignores directory permissions")
    ro = tmp_path / "ro"
    ro.mkdir()
    ro.chmod(stat.S_IRUSR | stat.S_IXUSR)
    idx = FormulaIndex()
    idx.add_document("d1", "one", "hello")
    try:
        with pytest.raises(IoError):
            idx.save(ro / "idx")
    finally:
        ro.chmod(stat.S_IRWXU)
