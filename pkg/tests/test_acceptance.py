"""End-to-end acceptance checks, one test per criterion.

A summary hook in conftest.py prints one PASS/FAIL line per test here.
"""
import random
import time
from collections import Counter

import pytest

from mathsearch.index import FormulaIndex
from mathsearch.latex import parse_latex, to_latex
from mathsearch.query import EmptyQueryTuples, score_tuples, search, search_formula
from mathsearch.slt import canonical_key
from mathsearch.tuples import (
    MatrixTuple,
    SymbolPairTuple,
    TupleConfig,
    generate_tuples,
)
from mathsearch.layout import PlacedSymbol, parse_layout

from helpers import random_tree, random_words

V1 = TupleConfig("v1")
V2 = TupleConfig("v2")


def pair(p, c, d, v):
    return SymbolPairTuple(p, c, d, v)


def leaf(label):
    return SymbolPairTuple(label, None, 0, 0)


def test_fraction_tuple_table():
    """14 tuples for \\frac{x^2+y}{\\sqrt{z}} under v2, exact multiset."""
    started = time.perf_counter()
    got = generate_tuples(parse_latex(r"\frac{x^2+y}{\sqrt{z}}"), V2)
    expected = Counter({
        pair("FRAC", "x", 1, 1): 1,
        pair("FRAC", "2", 2, 2): 1,
        pair("FRAC", "+", 2, 1): 1,
        pair("FRAC", "y", 3, 1): 1,
        pair("FRAC", "SQRT", 1, -1): 1,
        pair("FRAC", "z", 2, -1): 1,
        pair("x", "2", 1, 1): 1,
        pair("x", "+", 1, 0): 1,
        pair("x", "y", 2, 0): 1,
        pair("+", "y", 1, 0): 1,
        pair("SQRT", "z", 1, 0): 1,
        leaf("2"): 1,
        leaf("y"): 1,
        leaf("z"): 1,
    })
    assert sum(got.values()) == 14
    assert got == expected
    assert time.perf_counter() - started < 1.0


def test_matrix_tuple_table():
    """Dimension, cell, outer-pair, and leaf tuples for a 2x2 matrix."""
    started = time.perf_counter()
    got = generate_tuples(
        parse_latex(r"A\begin{bmatrix} x^2 & 0 \\ 0 & 1 \end{bmatrix}+1"), V2
    )
    expected = Counter({
        MatrixTuple("dimensions", 2, 2): 1,
        MatrixTuple("cell", 1, 1, "x^2"): 1,
        MatrixTuple("cell", 1, 2, "0"): 1,
        MatrixTuple("cell", 2, 1, "0"): 1,
        MatrixTuple("cell", 2, 2, "1"): 1,
        pair("A", "matrix2x2", 1, 0): 1,
        pair("A", "+", 2, 0): 1,
        pair("A", "1", 3, 0): 1,
        pair("matrix2x2", "+", 1, 0): 1,
        pair("matrix2x2", "1", 2, 0): 1,
        pair("+", "1", 1, 0): 1,
        pair("x", "2", 1, 1): 1,
        leaf("1"): 2,
        leaf("2"): 1,
        leaf("0"): 2,
    })
    assert got == expected
    assert time.perf_counter() - started < 1.0


def test_worked_fmeasure_scores():
    """v1: exact self-match 1.0; one-symbol variant of a 6-symbol line 10/15."""
    q = generate_tuples(parse_latex("g(z)=0"), V1)
    assert score_tuples(q, q).fscore == pytest.approx(1.0, abs=1e-9)
    c = generate_tuples(parse_latex("h(z)=0"), V1)
    assert score_tuples(q, c).fscore == pytest.approx(10.0 / 15.0, abs=1e-9)


def test_index_retrieval_equals_brute_force():
    """Posting-list retrieval and direct all-pairs scoring agree exactly."""
    started = time.perf_counter()
    rng = random.Random(101)
    trees = [random_tree(rng) for _ in range(200)]
    idx = FormulaIndex(V2)
    for i, t in enumerate(trees):
        idx.add_document(f"d{i}", f"doc {i}", "", [to_latex(t)])
    for t in trees:
        try:
            ranked = search_formula(idx, t, k=idx.expression_count)
        except EmptyQueryTuples:
            continue
        via_index = {eid: ms.fscore for eid, ms in ranked if ms.fscore > 0.0}
        q = generate_tuples(t, V2)
        brute = {}
        for e in idx.expressions:
            ms = score_tuples(q, generate_tuples(parse_latex(e.latex), V2))
            if ms.fscore > 0.0:
                brute[e.expr_id] = ms.fscore
        assert via_index == brute
    assert time.perf_counter() - started < 30.0


def test_chain_tuple_counts():
    """An n-symbol line yields n(n-1)/2 pairs (v1) plus one leaf under v2."""
    rng = random.Random(7)
    for _ in range(20):
        n = rng.randint(2, 10)
        src = " ".join(rng.choice("abcdexyz01+") for _ in range(n))
        t = parse_latex(src)
        assert sum(generate_tuples(t, V1).values()) == n * (n - 1) // 2
        v2 = generate_tuples(t, V2)
        assert sum(1 for tu in v2 if tu.is_leaf) == 1
        assert sum(v2.values()) == n * (n - 1) // 2 + 1


def test_round_trip_hundred_formulas():
    rng = random.Random(13)
    for _ in range(100):
        t = random_tree(rng)
        first = parse_latex(to_latex(t))
        again = parse_latex(to_latex(first))
        assert canonical_key(again) == canonical_key(first)


def test_layout_analysis():
    """Boxes for (a+b)^2 parse correctly; compound rewrites; invariance."""
    def boxes():
        return [
            PlacedSymbol("(", (0, 0, 2, 10)),
            PlacedSymbol("a", (3, 2, 7, 10)),
            PlacedSymbol("+", (8, 2, 12, 8)),
            PlacedSymbol("b", (13, 2, 17, 10)),
            PlacedSymbol(")", (18, 0, 20, 10)),
            PlacedSymbol("2", (21, -6, 24, 0)),
        ]

    key = canonical_key(parse_layout(boxes()))
    assert key == canonical_key(parse_latex("(a+b)^2"))

    stacked_dashes = [
        PlacedSymbol("-", (0, 6, 10, 7)),
        PlacedSymbol("-", (0, 2, 10, 3)),
    ]
    assert canonical_key(parse_layout(stacked_dashes)) == "="

    plus_over_dash = [
        PlacedSymbol("-", (0, 6, 10, 7)),
        PlacedSymbol("+", (3, 1, 7, 5)),
    ]
    assert canonical_key(parse_layout(plus_over_dash)) == "pm"

    scaled = [
        PlacedSymbol(s.label, tuple(v * 12.5 for v in s.bbox)) for s in boxes()
    ]
    moved = [
        PlacedSymbol(s.label, (s.xmin - 40, s.ymin + 9, s.xmax - 40, s.ymax + 9))
        for s in boxes()
    ]
    assert canonical_key(parse_layout(scaled)) == key
    assert canonical_key(parse_layout(moved)) == key


def test_self_retrieval_thousand_documents():
    """1,000 docs x 3 formulas: 100% top-1 exact match, mean query < 100 ms."""
    rng = random.Random(99)
    idx = FormulaIndex(V2)
    formulas = []
    for i in range(1000):
        fs = [to_latex(random_tree(rng)) for _ in range(3)]
        formulas.extend(fs)
        idx.add_document(
            f"doc{i}", f"Document {i}", " ".join(random_words(rng, 30)), fs
        )
    unique = sorted(set(formulas))
    started = time.perf_counter()
    for f in unique:
        hits = search(idx, f"${f}$", k=5)
        assert hits, f
        assert hits[0].formula_score == pytest.approx(1.0), f
        assert any(s == pytest.approx(1.0) for _, s in hits[0].matches), f
    mean_ms = 1000.0 * (time.perf_counter() - started) / len(unique)
    assert mean_ms < 100.0, f"mean query latency {mean_ms:.1f} ms"


def test_wildcard_query_semantics():
    """x^? matches x^2 exactly under v1; a double wildcard is unusable."""
    q = generate_tuples(parse_latex("x^?"), V1)
    c = generate_tuples(parse_latex("x^2"), V1)
    assert score_tuples(q, c).fscore == pytest.approx(1.0)

    idx = FormulaIndex(V1)
    idx.add_document("d0", "doc", "", ["x^2"])
    ranked = search_formula(idx, parse_latex("x^?"), k=5)
    assert ranked and ranked[0][1].fscore == pytest.approx(1.0)
    with pytest.raises(EmptyQueryTuples):
        search_formula(idx, parse_latex("? ?"), k=5)
