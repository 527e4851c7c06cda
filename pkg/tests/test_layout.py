import pytest

from mathsearch.latex import parse_latex
from mathsearch.layout import (
    AmbiguousGrid,
    LayoutParams,
    PlacedSymbol,
    detect_grid,
    extract_baseline,
    parse_layout,
    rewrite_compounds,
)
from mathsearch.slt import Relation, SymbolLayoutTree, SymbolNode, canonical_key


def sym(label, xmin, ymin, xmax, ymax):
    return PlacedSymbol(label, (xmin, ymin, xmax, ymax))


def boxes_a_plus_b_squared():
    """(a+b)^2: baseline glyphs share a line; the 2 is raised and shrunk."""
    return [
        sym("(", 0, 0, 2, 10),
        sym("a", 3, 2, 7, 10),
        sym("+", 8, 2, 12, 8),
        sym("b", 13, 2, 17, 10),
        sym(")", 18, 0, 20, 10),
        sym("2", 21, -6, 24, 0),
    ]


def scaled(symbols, factor):
    return [
        PlacedSymbol(s.label, tuple(v * factor for v in s.bbox)) for s in symbols
    ]


def translated(symbols, dx, dy):
    return [
        PlacedSymbol(s.label, (s.xmin + dx, s.ymin + dy, s.xmax + dx, s.ymax + dy))
        for s in symbols
    ]


def test_bbox_must_be_nondegenerate():
    with pytest.raises(ValueError):
        sym("x", 0, 0, 0, 1)


def test_layout_params_ranges():
    with pytest.raises(ValueError):
        LayoutParams(centroid_ratio=1.5)
    with pytest.raises(ValueError):
        LayoutParams(region_threshold=0.7)


def test_extract_baseline_skips_raised_symbol():
    baseline = extract_baseline(boxes_a_plus_b_squared())
    assert [s.label for s in baseline] == ["(", "a", "+", "b", ")"]


def test_extract_baseline_single_symbol():
    s = sym("x", 0, 0, 1, 1)
    assert extract_baseline([s]) == [s]


def test_extract_baseline_collinear_pair_with_descender():
    x = sym("x", 0, 0, 4, 6)
    y = sym("y", 6, 2, 10, 11)  # descender ink extends below the line
    assert [s.label for s in extract_baseline([x, y])] == ["x", "y"]


def test_parse_layout_a_plus_b_squared_matches_latex_tree():
    tree = parse_layout(boxes_a_plus_b_squared())
    assert canonical_key(tree) == canonical_key(parse_latex("(a+b)^2"))


def test_parse_layout_single_symbol():
    tree = parse_layout([sym("x", 0, 0, 1, 1)])
    assert canonical_key(tree) == "x"


def test_parse_layout_fraction_from_stacked_boxes():
    symbols = [
        sym("-", 0, 4, 10, 5),
        sym("1", 3, 0, 7, 3),
        sym("2", 3, 6, 7, 9),
    ]
    tree = parse_layout(symbols)
    assert tree.root.label == "FRAC"
    assert tree.root.children[Relation.ABOVE].label == "1"
    assert tree.root.children[Relation.BELOW].label == "2"


def test_parse_layout_sqrt_containment():
    symbols = [
        sym("sqrt", 0, 0, 10, 10),
        sym("z", 4, 3, 8, 9),
    ]
    tree = parse_layout(symbols)
    assert tree.root.label == "SQRT"
    assert tree.root.children[Relation.WITHIN].label == "z"


def test_stacked_dashes_rewrite_to_equals():
    symbols = [
        sym("-", 0, 6, 10, 7),
        sym("-", 0, 2, 10, 3),
    ]
    tree = parse_layout(symbols)
    assert canonical_key(tree) == "="


def test_dash_with_plus_above_rewrites_to_plus_minus():
    symbols = [
        sym("-", 0, 6, 10, 7),
        sym("+", 3, 1, 7, 5),
    ]
    tree = parse_layout(symbols)
    assert canonical_key(tree) == "pm"


def test_rewrite_compounds_fixpoint_on_clean_tree():
    t = SymbolLayoutTree(SymbolNode("x", {Relation.NEXT: SymbolNode("y")}))
    assert canonical_key(rewrite_compounds(t)) == canonical_key(t)


def test_rewrite_reduces_node_count_by_one_each():
    # x = y entered as x, two dashes, y: 4 symbols in, 3 nodes out.
    symbols = [
        sym("x", 0, 0, 4, 10),
        sym("-", 6, 4, 12, 5),
        sym("-", 6, 6, 12, 7),
        sym("y", 14, 2, 18, 12),
    ]
    tree = parse_layout(symbols)
    assert canonical_key(tree) == canonical_key(parse_latex("x=y"))


def test_layout_invariant_under_scaling_and_translation():
    base = boxes_a_plus_b_squared()
    key = canonical_key(parse_layout(base))
    assert canonical_key(parse_layout(scaled(base, 7.3))) == key
    assert canonical_key(parse_layout(translated(base, -120.0, 55.5))) == key
    assert canonical_key(parse_layout(translated(scaled(base, 0.01), 3.0, -9.0))) == key


def test_detect_grid_two_by_two():
    groups = [
        [sym("a", 0, 0, 4, 4)],
        [sym("b", 10, 0, 14, 4)],
        [sym("c", 0, 10, 4, 14)],
        [sym("d", 10, 10, 14, 14)],
    ]
    assert detect_grid(groups) == [(1, 1), (1, 2), (2, 1), (2, 2)]


def test_detect_grid_single_group():
    assert detect_grid([[sym("a", 0, 0, 4, 4)]]) == [(1, 1)]


def test_detect_grid_overlapping_groups_is_ambiguous():
    groups = [
        [sym("a", 0, 0, 4, 4)],
        [sym("b", 1, 1, 5, 5)],
    ]
    with pytest.raises(AmbiguousGrid):
        detect_grid(groups)
