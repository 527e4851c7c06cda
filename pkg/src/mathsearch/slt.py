"""Symbol layout trees: the shared data model for formula appearance.

A formula is represented by the spatial arrangement of its symbols on
writing lines.  Each node is a symbol; each edge carries the spatial
relation between a symbol and the symbol that follows it (on the same
line, raised, lowered, stacked, or contained).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, Optional


class Relation(Enum):
    """Spatial relation between a symbol and one of its children."""

    NEXT = "NEXT"        # horizontal adjacency on the same writing line
    SUPER = "SUPER"      # superscript
    SUB = "SUB"          # subscript
    ABOVE = "ABOVE"      # stacked above (numerator, accents, limits)
    BELOW = "BELOW"      # stacked below (denominator, limits)
    WITHIN = "WITHIN"    # containment (radicand)


#: Fixed order used by the canonical serialization.
RELATION_ORDER = (
    Relation.NEXT,
    Relation.SUPER,
    Relation.SUB,
    Relation.ABOVE,
    Relation.BELOW,
    Relation.WITHIN,
)

_VERT_WEIGHTS = {
    Relation.NEXT: 0,
    Relation.SUPER: 1,
    Relation.SUB: -1,
    Relation.ABOVE: 1,
    Relation.BELOW: -1,
    Relation.WITHIN: 0,
}


def vert_weight(rel: Relation) -> int:
    """Signed change in writing-line position when following ``rel``."""
    return _VERT_WEIGHTS[rel]


@dataclass
class MatrixNode:
    """Grid payload of a matrix symbol.

    Each cell is an independent layout tree (or ``None`` for an empty
    cell); the owning symbol stands in for the whole grid in the outer
    expression.
    """

    rows: int
    cols: int
    cells: list[list[Optional["SymbolLayoutTree"]]]

    def __post_init__(self) -> None:
        if self.rows < 1 or self.cols < 1:
            raise ValueError("matrix dimensions must be positive")
        if len(self.cells) != self.rows or any(len(r) != self.cols for r in self.cells):
            raise ValueError("cells grid does not match declared dimensions")

    @property
    def label(self) -> str:
        return f"matrix{self.rows}x{self.cols}"


@dataclass
class SymbolNode:
    """One symbol with at most one child per spatial relation."""

    label: str
    children: dict[Relation, "SymbolNode"] = field(default_factory=dict)
    matrix: Optional[MatrixNode] = None

    def __post_init__(self) -> None:
        if not self.label:
            raise ValueError("symbol label must be non-empty")
        if self.matrix is not None and self.label != self.matrix.label:
            raise ValueError(
                f"matrix symbol must be labeled {self.matrix.label!r}, got {self.label!r}"
            )

    def child(self, rel: Relation) -> Optional["SymbolNode"]:
        return self.children.get(rel)

    @property
    def is_leaf(self) -> bool:
        return not self.children


def matrix_symbol(matrix: MatrixNode) -> SymbolNode:
    """Build the symbol standing in for a grid in the outer expression."""
    return SymbolNode(matrix.label, matrix=matrix)


@dataclass
class SymbolLayoutTree:
    """A rooted symbol layout tree; immutable by convention after construction."""

    root: SymbolNode


def iter_nodes(node: SymbolNode) -> Iterator[SymbolNode]:
    """Walk all nodes reachable from ``node`` without entering matrix cells."""
    stack = [node]
    while stack:
        n = stack.pop()
        yield n
        for rel in reversed(RELATION_ORDER):
            c = n.children.get(rel)
            if c is not None:
                stack.append(c)


def canonical_key(t: SymbolLayoutTree) -> str:
    """Deterministic serialization; equal trees produce equal keys."""
    return _node_key(t.root)


def _node_key(n: SymbolNode) -> str:
    parts = [n.label]
    if n.matrix is not None:
        cells = []
        for row in n.matrix.cells:
            for cell in row:
                cells.append("" if cell is None else _node_key(cell.root))
        parts.append("(" + "|".join(cells) + ")")
    for rel in RELATION_ORDER:
        c = n.children.get(rel)
        if c is not None:
            parts.append(f"[{rel.value}:{_node_key(c)}]")
    return "".join(parts)


def symbol_count(t: SymbolLayoutTree) -> int:
    """Number of symbols; a matrix counts as one plus its cell contents."""
    total = 0
    for n in iter_nodes(t.root):
        total += 1
        if n.matrix is not None:
            for row in n.matrix.cells:
                for cell in row:
                    if cell is not None:
                        total += symbol_count(cell)
    return total
