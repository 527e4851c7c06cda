"""Appearance-based math formula search.

Formulae are indexed by the relative positions of symbol pairs in their
layout trees; matches are ranked by the harmonic mean of matched-pair
recall and precision, and document scores combine formula and keyword
evidence.
"""

from .slt import (  # noqa: F401
    MatrixNode,
    Relation,
    SymbolLayoutTree,
    SymbolNode,
    canonical_key,
    symbol_count,
    vert_weight,
)
from .latex import ParseError, parse_latex, to_latex  # noqa: F401
from .tuples import (  # noqa: F401
    MatrixTuple,
    SymbolPairTuple,
    TupleConfig,
    expand_wildcard_keys,
    generate_tuples,
)
from .index import FormulaIndex  # noqa: F401
from .query import (  # noqa: F401
    EmptyQueryTuples,
    MatchScore,
    Query,
    QueryParseError,
    SearchHit,
    search,
    search_formula,
)

__version__ = "0.1.0"
