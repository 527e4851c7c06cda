"""Query parsing, f-measure formula ranking, and combined document scoring.

A formula match score is the harmonic mean of matched-pair recall in the
query and precision in the candidate.  Document scores linearly combine
a normalized text score with a size-weighted formula score.
"""
from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Optional

from . import latex, slt, tuples
from .index import DocumentRecord, FormulaIndex, tokenize

_FRAGMENT_RE = re.compile(r"\$([^$]*)\$")


class EmptyQueryTuples(Exception):
    """The formula produced no indexable relationship keys."""


class QueryParseError(Exception):
    def __init__(self, fragments: list[tuple[str, str]]):
        self.fragments = fragments
        detail = "; ".join(f"{frag!r}: {msg}" for frag, msg in fragments)
        super().__init__(f"unparseable query fragments: {detail}")


@dataclass
class Query:
    keywords: list[str]
    formulas: list[slt.SymbolLayoutTree]
    alpha: float = 0.5

    def __post_init__(self) -> None:
        if not self.keywords and not self.formulas:
            raise ValueError("query needs at least one keyword or formula")
        if not (0.0 <= self.alpha <= 1.0):
            raise ValueError("alpha must be in [0, 1]")


@dataclass(frozen=True)
class MatchScore:
    matched: int
    query_total: int
    cand_total: int

    @property
    def recall(self) -> float:
        return self.matched / self.query_total if self.query_total else 0.0

    @property
    def precision(self) -> float:
        return self.matched / self.cand_total if self.cand_total else 0.0

    @property
    def fscore(self) -> float:
        if self.matched == 0:
            return 0.0
        p, r = self.precision, self.recall
        return 2.0 * p * r / (p + r)


@dataclass
class SearchHit:
    doc_id: str
    title: str
    combined_score: float
    text_score: float
    formula_score: float
    matches: list[tuple[str, float]] = field(default_factory=list)


def parse_query(raw: str, alpha: float = 0.5) -> Query:
    """Split free keywords from ``$...$`` formula fragments."""
    if raw.count("$") % 2 != 0:
        raise QueryParseError([(raw, "unbalanced '$' delimiter")])
    errors: list[tuple[str, str]] = []
    formulas: list[slt.SymbolLayoutTree] = []
    for frag in _FRAGMENT_RE.findall(raw):
        if not frag.strip():
            errors.append((frag, "empty formula"))
            continue
        try:
            formulas.append(latex.parse_latex(frag))
        except latex.ParseError as e:
            errors.append((frag, str(e)))
    if errors:
        raise QueryParseError(errors)
    keywords = tokenize(_FRAGMENT_RE.sub(" ", raw))
    if not keywords and not formulas:
        raise QueryParseError([(raw, "no keywords or formulas")])
    return Query(keywords=keywords, formulas=formulas, alpha=alpha)


def score_tuples(q: Counter, c: Counter) -> MatchScore:
    """Match query tuples against candidate tuples, each instance used once."""
    query_total = sum(q.values())
    cand_total = sum(c.values())

    c_by_key: dict[str, int] = {}
    c_pairs: dict[str, tuples.SymbolPairTuple] = {}
    for tu, count in c.items():
        k = tu.key()
        c_by_key[k] = c_by_key.get(k, 0) + count
        if isinstance(tu, tuples.SymbolPairTuple) and not tu.is_leaf:
            c_pairs[k] = tu

    matched = 0
    consumed: dict[str, int] = {}
    wildcard_queue: list[tuple[str, tuples.SymbolPairTuple, int]] = []
    for tu, count in q.items():
        if isinstance(tu, tuples.SymbolPairTuple) and tu.wildcard_count > 0:
            if not tu.is_leaf and tu.wildcard_count == 1:
                wildcard_queue.append((tu.key(), tu, count))
            continue  # double wildcards never match
        k = tu.key()
        take = min(count, c_by_key.get(k, 0))
        matched += take
        consumed[k] = consumed.get(k, 0) + take

    # Greedy second pass: wildcard-bearing query tuples against whatever
    # candidate pair instances remain, in deterministic key order.
    for _, q_tu, needed in sorted(wildcard_queue, key=lambda x: x[0]):
        for ck in sorted(c_pairs):
            if needed == 0:
                break
            c_tu = c_pairs[ck]
            if not (
                tuples.wildcard_matches(q_tu, c_tu) or q_tu.key() == ck
            ):
                continue
            avail = c_by_key[ck] - consumed.get(ck, 0)
            if avail <= 0:
                continue
            take = min(needed, avail)
            matched += take
            consumed[ck] = consumed.get(ck, 0) + take
            needed -= take

    return MatchScore(matched, query_total, cand_total)


def score_formula(
    index: FormulaIndex, query_tree: slt.SymbolLayoutTree, expr_id: int
) -> MatchScore:
    q = tuples.generate_tuples(query_tree, index.config)
    return score_tuples(q, index.expression_tuples(expr_id))


def search_formula(
    index: FormulaIndex, tree: slt.SymbolLayoutTree, k: int
) -> list[tuple[int, MatchScore]]:
    """Top-k expressions for one formula, ranked by f-measure."""
    if k < 1:
        raise ValueError("k must be >= 1")
    scored = _score_all_candidates(index, tree)
    ranked = sorted(scored.items(), key=lambda item: (-item[1].fscore, item[0]))
    return ranked[:k]


def _score_all_candidates(
    index: FormulaIndex, tree: slt.SymbolLayoutTree
) -> dict[int, MatchScore]:
    q = tuples.generate_tuples(tree, index.config)
    keys: set[str] = set()
    for tu in q:
        keys |= tuples.query_keys(tu)
    if not keys:
        raise EmptyQueryTuples(latex.to_latex(tree))
    candidates: set[int] = set()
    for key in keys:
        candidates.update(eid for eid, _ in index.lookup(key))
    return {eid: score_tuples(q, index.expression_tuples(eid)) for eid in candidates}


def score_document(
    index: FormulaIndex,
    doc: DocumentRecord,
    q: Query,
    text_norm: float = 1.0,
    formula_scores: Optional[list[dict[int, MatchScore]]] = None,
) -> SearchHit:
    """Score one document: size-weighted best formula matches plus text.

    ``text_norm`` is the maximum raw text score in the surrounding result
    set (scores are normalized to [0, 1] before linear combination).
    """
    weights = [slt.symbol_count(f) for f in q.formulas]
    total_w = sum(weights) or 1

    if formula_scores is None:
        formula_scores = []
        for f in q.formulas:
            q_tuples = tuples.generate_tuples(f, index.config)
            formula_scores.append({
                eid: score_tuples(q_tuples, index.expression_tuples(eid))
                for eid in doc.expr_ids
            })

    formula_score = 0.0
    matches: list[tuple[str, float]] = []
    for w, scores in zip(weights, formula_scores):
        best_f, best_eid = 0.0, None
        for eid in doc.expr_ids:
            ms = scores.get(eid)
            if ms is None:
                continue
            f = ms.fscore
            if f > best_f or (f == best_f and best_eid is not None and eid < best_eid):
                best_f, best_eid = f, eid
        formula_score += (w / total_w) * best_f
        if best_eid is not None and best_f > 0.0:
            matches.append((index.expressions[best_eid].latex, best_f))

    raw_text = index.text_score(doc, q.keywords)
    text_score = raw_text / text_norm if text_norm > 0 else 0.0
    combined = q.alpha * text_score + (1.0 - q.alpha) * formula_score
    return SearchHit(
        doc_id=doc.doc_id,
        title=doc.title,
        combined_score=combined,
        text_score=text_score,
        formula_score=formula_score,
        matches=matches,
    )


def search(
    index: FormulaIndex, raw: str, k: int = 20, alpha: Optional[float] = None
) -> list[SearchHit]:
    """Combined keyword + formula document search."""
    if alpha is None:
        alpha = index.alpha_default
    q = parse_query(raw, alpha)

    formula_scores = [_score_all_candidates(index, f) for f in q.formulas]

    doc_ids: set[str] = set()
    for scores in formula_scores:
        for eid, ms in scores.items():
            if ms.fscore > 0.0:
                doc_ids.update(index.docs_for_expression(eid))
    if q.keywords:
        terms = set(q.keywords)
        for doc_id, doc in index.documents.items():
            if terms & doc.term_frequencies.keys():
                doc_ids.add(doc_id)

    raw_text = {
        doc_id: index.text_score(index.documents[doc_id], q.keywords)
        for doc_id in doc_ids
    }
    text_norm = max(raw_text.values(), default=0.0)

    hits = [
        score_document(
            index, index.documents[doc_id], q,
            text_norm=text_norm, formula_scores=formula_scores,
        )
        for doc_id in doc_ids
    ]
    hits.sort(key=lambda h: (-h.combined_score, h.doc_id))
    return hits[:k]
