"""Layout analysis: positioned symbols to a symbol layout tree.

Greedy main-baseline extraction, region assignment around baseline
symbols, compound-token rewriting, and projection-based grid detection.
All geometric tests are ratios of box measurements, so results are
invariant under uniform scaling and translation.
"""
from __future__ import annotations

import statistics
from dataclasses import dataclass, replace
from typing import Optional, Sequence

from .slt import Relation, SymbolLayoutTree, SymbolNode

#: Lowercase letters whose ink extends below the writing line.
DESCENDERS = {"g", "j", "p", "q", "y"}

#: Symbols that contain other symbols (radical signs).
CONTAINER_LABELS = {"sqrt", "SQRT"}

#: Input labels treated as a horizontal line / dash.
DASH_LABELS = {"-", "dash", "line", "horizontal-line"}


class AmbiguousGrid(Exception):
    """Raised when projection gaps cannot separate two cell groups."""


@dataclass(frozen=True)
class PlacedSymbol:
    label: str
    bbox: tuple[float, float, float, float]  # (xmin, ymin, xmax, ymax); y grows downward

    def __post_init__(self) -> None:
        xmin, ymin, xmax, ymax = self.bbox
        if not (xmin < xmax and ymin < ymax):
            raise ValueError(f"degenerate bbox {self.bbox}")

    @property
    def xmin(self) -> float:
        return self.bbox[0]

    @property
    def ymin(self) -> float:
        return self.bbox[1]

    @property
    def xmax(self) -> float:
        return self.bbox[2]

    @property
    def ymax(self) -> float:
        return self.bbox[3]

    @property
    def width(self) -> float:
        return self.xmax - self.xmin

    @property
    def height(self) -> float:
        return self.ymax - self.ymin


@dataclass(frozen=True)
class LayoutParams:
    centroid_ratio: float = 0.5     # vertical position of the reference centroid
    region_threshold: float = 0.25  # half-height of the same-baseline band
    grid_gap: float = 0.5           # min projection gap, as fraction of median height

    def __post_init__(self) -> None:
        if not (0.0 < self.centroid_ratio < 1.0):
            raise ValueError("centroid_ratio must be in (0, 1)")
        if not (0.0 < self.region_threshold < 0.5):
            raise ValueError("region_threshold must be in (0, 0.5)")
        if self.grid_gap <= 0.0:
            raise ValueError("grid_gap must be positive")


@dataclass(frozen=True)
class RewriteRule:
    """Replace ``base`` carrying a bare ``child`` via ``relation`` by ``replacement``."""

    base: str
    relation: Relation
    child: str
    replacement: str


DEFAULT_REWRITES = (
    RewriteRule("-", Relation.ABOVE, "-", "="),
    RewriteRule("-", Relation.BELOW, "-", "="),
    RewriteRule("-", Relation.ABOVE, "+", "pm"),
)


def centroid(s: PlacedSymbol, params: LayoutParams) -> tuple[float, float]:
    """Reference point for region tests; descenders use the upper half."""
    cx = (s.xmin + s.xmax) / 2.0
    height = s.height / 2.0 if s.label in DESCENDERS else s.height
    cy = s.ymin + params.centroid_ratio * height
    return cx, cy


def _h_overlap(a: PlacedSymbol, b: PlacedSymbol) -> float:
    return min(a.xmax, b.xmax) - max(a.xmin, b.xmin)


def _contains(outer: PlacedSymbol, inner: PlacedSymbol) -> bool:
    xt, yt = 0.05 * outer.width, 0.05 * outer.height
    return (
        inner.xmin >= outer.xmin - xt and inner.xmax <= outer.xmax + xt
        and inner.ymin >= outer.ymin - yt and inner.ymax <= outer.ymax + yt
    )


def extract_baseline(
    symbols: Sequence[PlacedSymbol], params: LayoutParams = LayoutParams()
) -> list[PlacedSymbol]:
    """Greedy left-to-right selection of the main writing line."""
    if not symbols:
        raise ValueError("no symbols")
    med_h = statistics.median(s.height for s in symbols)
    min_x = min(s.xmin for s in symbols)
    tol = 0.05 * med_h
    starters = [s for s in symbols if s.xmin <= min_x + tol]
    # Tallest first; among equals prefer the lower symbol (the writing line).
    start = max(starters, key=lambda s: (s.height, -s.xmin, centroid(s, params)[1]))

    containers = [s for s in symbols if s.label in CONTAINER_LABELS]
    baseline = [start]
    chosen = {id(start)}
    current = start
    while True:
        ccx, ccy = centroid(current, params)
        # Thin symbols (fraction lines) still anchor a normal-height band.
        band = params.region_threshold * max(current.height, med_h)
        candidates = []
        for s in symbols:
            if id(s) in chosen:
                continue
            if any(id(c) != id(s) and _contains(c, s) for c in containers):
                continue
            cx, cy = centroid(s, params)
            if cx <= ccx or s.xmin < current.xmin:
                continue
            if abs(cy - ccy) <= band:
                candidates.append((s, cx))
        if not candidates:
            break
        # Tie-break: the horizontally nearer symbol wins.
        nxt = min(candidates, key=lambda sc: (sc[0].xmin - current.xmax, sc[1]))[0]
        baseline.append(nxt)
        chosen.add(id(nxt))
        current = nxt
    return baseline


def _normalize_label(label: str) -> str:
    if label in DASH_LABELS:
        return "-"
    if label == "sqrt":
        return "SQRT"
    return label


def parse_layout(
    symbols: Sequence[PlacedSymbol], params: LayoutParams = LayoutParams()
) -> SymbolLayoutTree:
    """Full layout parse: baseline, region recursion, then rewrites."""
    if not symbols:
        raise ValueError("no symbols")
    root = _parse_region(list(symbols), params)
    tree = rewrite_compounds(SymbolLayoutTree(root))
    _relabel_fractions(tree.root)
    return tree


def _parse_region(symbols: list[PlacedSymbol], params: LayoutParams) -> SymbolNode:
    baseline = extract_baseline(symbols, params)
    baseline_ids = {id(s) for s in baseline}
    leftovers = [s for s in symbols if id(s) not in baseline_ids]

    med_h = statistics.median(s.height for s in symbols)
    groups: dict[tuple[int, Relation], list[PlacedSymbol]] = {}
    for s in leftovers:
        b_idx, rel = _assign(s, baseline, params, med_h)
        groups.setdefault((b_idx, rel), []).append(s)

    nodes = [SymbolNode(_normalize_label(s.label)) for s in baseline]
    for a, b in zip(nodes, nodes[1:]):
        a.children[Relation.NEXT] = b
    for (b_idx, rel), group in groups.items():
        child = _parse_region(group, params)
        nodes[b_idx].children[rel] = child
    return nodes[0]


def _assign(
    s: PlacedSymbol, baseline: list[PlacedSymbol], params: LayoutParams, med_h: float
) -> tuple[int, Relation]:
    """Pick the governing baseline symbol and spatial region for ``s``."""
    # Containment first: radicand symbols live inside their radical sign.
    for i, b in enumerate(baseline):
        if b.label in CONTAINER_LABELS and _contains(b, s):
            return i, Relation.WITHIN

    overlaps = [(_h_overlap(s, b), i) for i, b in enumerate(baseline)]
    best_overlap, best_i = max(overlaps)
    if best_overlap <= 0.0:
        cx, _ = centroid(s, params)
        preceding = [
            (centroid(b, params)[0], i)
            for i, b in enumerate(baseline)
            if centroid(b, params)[0] < cx
        ]
        if preceding:
            best_i = max(preceding)[1]
        else:
            best_i = 0
        best_overlap = 0.0

    b = baseline[best_i]
    _, cy = centroid(s, params)
    _, bcy = centroid(b, params)
    band = params.region_threshold * max(b.height, med_h)
    stacked = best_overlap / s.width >= 0.5
    if cy < bcy - band:
        return best_i, Relation.ABOVE if stacked else Relation.SUPER
    if cy > bcy + band:
        return best_i, Relation.BELOW if stacked else Relation.SUB
    return best_i, Relation.SUPER if cy < bcy else Relation.SUB


def rewrite_compounds(
    t: SymbolLayoutTree, rules: Sequence[RewriteRule] = DEFAULT_REWRITES
) -> SymbolLayoutTree:
    """Apply the compound-token rule table until fixpoint.

    Each application merges one bare child into its base symbol, reducing
    the node count by exactly one.
    """
    root = _copy(t.root)
    while _apply_once(root, rules):
        pass
    return SymbolLayoutTree(root)


def _copy(n: SymbolNode) -> SymbolNode:
    children = {rel: _copy(c) for rel, c in n.children.items()}
    matrix = None
    if n.matrix is not None:
        matrix = replace(
            n.matrix,
            cells=[
                [SymbolLayoutTree(_copy(c.root)) if c is not None else None for c in row]
                for row in n.matrix.cells
            ],
        )
    return SymbolNode(n.label, children, matrix)


def _apply_once(root: SymbolNode, rules: Sequence[RewriteRule]) -> bool:
    stack = [root]
    while stack:
        n = stack.pop()
        for rule in rules:
            child = n.children.get(rule.relation)
            if (
                n.label == rule.base
                and child is not None
                and child.label == rule.child
                and child.is_leaf
                and child.matrix is None
            ):
                n.label = rule.replacement
                del n.children[rule.relation]
                return True
        stack.extend(n.children.values())
        if n.matrix is not None:
            for row in n.matrix.cells:
                for cell in row:
                    if cell is not None:
                        stack.append(cell.root)
    return False


def _relabel_fractions(root: SymbolNode) -> None:
    """A dash with stacked content above and below is a fraction line."""
    for n in _all_nodes(root):
        if (
            n.label == "-"
            and Relation.ABOVE in n.children
            and Relation.BELOW in n.children
        ):
            n.label = "FRAC"


def _all_nodes(root: SymbolNode):
    stack = [root]
    while stack:
        n = stack.pop()
        yield n
        stack.extend(n.children.values())
        if n.matrix is not None:
            for row in n.matrix.cells:
                for cell in row:
                    if cell is not None:
                        stack.append(cell.root)


def detect_grid(
    cells: Sequence[Sequence[PlacedSymbol]], params: LayoutParams = LayoutParams()
) -> list[tuple[int, int]]:
    """Assign (row, col), 1-based, to each pre-grouped cell by projection gaps."""
    if not cells:
        raise ValueError("no cell groups")
    boxes = []
    for group in cells:
        if not group:
            raise ValueError("empty cell group")
        boxes.append((
            min(s.xmin for s in group),
            min(s.ymin for s in group),
            max(s.xmax for s in group),
            max(s.ymax for s in group),
        ))
    median_h = statistics.median(b[3] - b[1] for b in boxes)
    min_gap = params.grid_gap * median_h

    col_edges = _projection_splits([(b[0], b[2]) for b in boxes], min_gap)
    row_edges = _projection_splits([(b[1], b[3]) for b in boxes], min_gap)

    assignment = []
    seen: dict[tuple[int, int], int] = {}
    for i, b in enumerate(boxes):
        cx, cy = (b[0] + b[2]) / 2.0, (b[1] + b[3]) / 2.0
        col = sum(1 for e in col_edges if cx > e) + 1
        row = sum(1 for e in row_edges if cy > e) + 1
        if (row, col) in seen:
            raise AmbiguousGrid(
                f"cell groups {seen[(row, col)]} and {i} both map to ({row}, {col})"
            )
        seen[(row, col)] = i
        assignment.append((row, col))
    return assignment


def _projection_splits(intervals: list[tuple[float, float]], min_gap: float) -> list[float]:
    """Midpoints of maximal uncovered gaps wider than ``min_gap``."""
    merged: list[list[float]] = []
    for lo, hi in sorted(intervals):
        if merged and lo <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], hi)
        else:
            merged.append([lo, hi])
    splits = []
    for (_, hi), (lo, _) in zip(merged, merged[1:]):
        if lo - hi > min_gap:
            splits.append((hi + lo) / 2.0)
    return splits
