"""Symbol-pair tuple generation: the bag-of-words units for retrieval.

Every ancestor/descendant symbol pair within one expression level yields
a tuple (parent label, child label, path length, vertical displacement).
Grid cells are independent expressions: no pair crosses a matrix
boundary; the matrix participates in the outer tree as a single symbol.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterator, Optional, Union

from . import latex
from .slt import Relation, SymbolLayoutTree, SymbolNode, vert_weight

WILDCARD = "?"
NONE_SENTINEL = "!NONE"
WILDCARD_SENTINEL = "!?"
DIMENSIONS_SENTINEL = "!DIMS"
CELL_SENTINEL = "!CELL:"


@dataclass(frozen=True)
class SymbolPairTuple:
    parent: str
    child: Optional[str]  # None marks a leaf tuple
    dist: int
    vert: int

    def __post_init__(self) -> None:
        if self.child is None and (self.dist != 0 or self.vert != 0):
            raise ValueError("leaf tuples require dist = vert = 0")
        if self.child is not None and self.dist < 1:
            raise ValueError("pair tuples require dist >= 1")

    @property
    def is_leaf(self) -> bool:
        return self.child is None

    @property
    def wildcard_count(self) -> int:
        return (self.parent == WILDCARD) + (self.child == WILDCARD)

    def key(self) -> str:
        parent = WILDCARD_SENTINEL if self.parent == WILDCARD else self.parent
        if self.child is None:
            child = NONE_SENTINEL
        elif self.child == WILDCARD:
            child = WILDCARD_SENTINEL
        else:
            child = self.child
        return "\t".join((parent, child, str(self.dist), str(self.vert)))


@dataclass(frozen=True)
class MatrixTuple:
    kind: str  # "dimensions" | "cell"
    row: int
    col: int
    payload: Optional[str] = None  # cell LaTeX; None for the dimensions tuple

    def __post_init__(self) -> None:
        if self.kind not in ("dimensions", "cell"):
            raise ValueError(f"bad matrix tuple kind {self.kind!r}")
        if (self.kind == "cell") != (self.payload is not None):
            raise ValueError("cell tuples carry a payload; dimension tuples do not")

    def key(self) -> str:
        if self.kind == "dimensions":
            child = DIMENSIONS_SENTINEL
        else:
            child = CELL_SENTINEL + (self.payload or "")
        return "\t".join(("matrix", child, str(self.row), str(self.col)))


Tuple = Union[SymbolPairTuple, MatrixTuple]


@dataclass(frozen=True)
class TupleConfig:
    model_version: str = "v2"  # v1: pairs only; v2: adds leaf and matrix tuples
    emit_wildcard_expansions: bool = True

    def __post_init__(self) -> None:
        if self.model_version not in ("v1", "v2"):
            raise ValueError(f"unknown model version {self.model_version!r}")

    @property
    def v2(self) -> bool:
        return self.model_version == "v2"


def generate_tuples(t: SymbolLayoutTree, cfg: TupleConfig) -> Counter:
    """Multiset of tuples for ``t`` (pair tuples; leaf/matrix tuples under v2)."""
    out: Counter = Counter()
    _generate_level(t.root, cfg, out)
    return out


def _generate_level(root: SymbolNode, cfg: TupleConfig, out: Counter) -> None:
    for node in _walk(root):
        for desc, dist, vert in _descendants(node):
            out[SymbolPairTuple(node.label, desc.label, dist, vert)] += 1
        if cfg.v2 and node.is_leaf:
            out[SymbolPairTuple(node.label, None, 0, 0)] += 1
        if node.matrix is not None:
            m = node.matrix
            if cfg.v2:
                out[MatrixTuple("dimensions", m.rows, m.cols)] += 1
                for r, row in enumerate(m.cells, start=1):
                    for c, cell in enumerate(row, start=1):
                        if cell is not None:
                            payload = latex.to_latex(cell, compact=True)
                            out[MatrixTuple("cell", r, c, payload)] += 1
            # Cells are independent expressions.
            for row in m.cells:
                for cell in row:
                    if cell is not None:
                        _generate_level(cell.root, cfg, out)


def _walk(root: SymbolNode) -> Iterator[SymbolNode]:
    stack = [root]
    while stack:
        n = stack.pop()
        yield n
        stack.extend(n.children.values())


def _descendants(node: SymbolNode) -> Iterator[tuple[SymbolNode, int, int]]:
    """All proper descendants with path length and summed vertical weight."""
    stack = [(child, 1, vert_weight(rel)) for rel, child in node.children.items()]
    while stack:
        n, dist, vert = stack.pop()
        yield n, dist, vert
        for rel, child in n.children.items():
            stack.append((child, dist + 1, vert + vert_weight(rel)))


def expand_wildcard_keys(tu: SymbolPairTuple) -> set[str]:
    """Index keys for one tuple: itself plus single-wildcard generalizations.

    Double-wildcard relationships are never indexed; leaf tuples have no
    second symbol to generalize.
    """
    if tu.is_leaf:
        return {tu.key()}
    if tu.wildcard_count == 2:
        return set()
    if tu.wildcard_count == 1:
        return {tu.key()}
    return {
        tu.key(),
        SymbolPairTuple(WILDCARD, tu.child, tu.dist, tu.vert).key(),
        SymbolPairTuple(tu.parent, WILDCARD, tu.dist, tu.vert).key(),
    }


def index_keys(tu: Tuple, expand: bool) -> set[str]:
    """Keys under which ``tu`` is posted at index time."""
    if isinstance(tu, MatrixTuple):
        return {tu.key()}
    if tu.is_leaf or tu.wildcard_count == 1:
        return {tu.key()}
    if tu.wildcard_count == 2:
        return set()
    if expand:
        return expand_wildcard_keys(tu)
    return {tu.key()}


def query_keys(tu: Tuple) -> set[str]:
    """Keys probed for ``tu`` at query time (double wildcards are skipped)."""
    if isinstance(tu, MatrixTuple):
        return {tu.key()}
    if tu.is_leaf:
        # A bare wildcard symbol matches nothing on its own.
        return set() if tu.wildcard_count else {tu.key()}
    if tu.wildcard_count == 2:
        return set()
    return {tu.key()}


def wildcard_matches(q: SymbolPairTuple, c: SymbolPairTuple) -> bool:
    """Whether wildcard-bearing query tuple ``q`` matches candidate ``c``."""
    if q.is_leaf or c.is_leaf:
        return False
    return (
        q.dist == c.dist
        and q.vert == c.vert
        and q.parent in (WILDCARD, c.parent)
        and q.child in (WILDCARD, c.child)
    )
