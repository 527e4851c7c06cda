"""Batch retrieval evaluation: specific-item ranks and precision-at-k."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from . import query as query_mod
from .index import FormulaIndex

RANK_CUTOFF = 1000


class UnknownSourceDoc(Exception):
    pass


@dataclass
class EvalQuery:
    query_id: str
    query: str
    source_doc_id: str


@dataclass
class QueryOutcome:
    query_id: str
    source_rank: Optional[int]  # None: not in the top RANK_CUTOFF
    exact_matches_top_k: int

    @property
    def reciprocal_rank(self) -> float:
        return 1.0 / self.source_rank if self.source_rank else 0.0


@dataclass
class EvalReport:
    k: int
    outcomes: list[QueryOutcome] = field(default_factory=list)

    @property
    def mean_reciprocal_rank(self) -> float:
        if not self.outcomes:
            return 0.0
        return sum(o.reciprocal_rank for o in self.outcomes) / len(self.outcomes)

    @property
    def top1_rate(self) -> float:
        if not self.outcomes:
            return 0.0
        return sum(1 for o in self.outcomes if o.source_rank == 1) / len(self.outcomes)

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "mean_reciprocal_rank": self.mean_reciprocal_rank,
            "top1_rate": self.top1_rate,
            "queries": [
                {
                    "query_id": o.query_id,
                    "source_rank": o.source_rank,
                    "reciprocal_rank": o.reciprocal_rank,
                    "exact_matches_top_k": o.exact_matches_top_k,
                }
                for o in self.outcomes
            ],
        }

    def to_tsv(self) -> str:
        lines = ["query_id\tsource_rank\treciprocal_rank\texact_matches_top_k"]
        for o in self.outcomes:
            rank = o.source_rank if o.source_rank is not None else ""
            lines.append(
                f"{o.query_id}\t{rank}\t{o.reciprocal_rank:.6f}\t{o.exact_matches_top_k}"
            )
        return "\n".join(lines) + "\n"


def specific_item_eval(
    index: FormulaIndex, queries: list[EvalQuery], k: int, cutoff: int = RANK_CUTOFF
) -> EvalReport:
    """Rank of each query's known source document, plus exact-match counts."""
    report = EvalReport(k=k)
    for eq in queries:
        if eq.source_doc_id not in index.documents:
            raise UnknownSourceDoc(eq.source_doc_id)
        hits = query_mod.search(index, eq.query, k=cutoff)
        source_rank = None
        for rank, hit in enumerate(hits, start=1):
            if hit.doc_id == eq.source_doc_id:
                source_rank = rank
                break
        exact = sum(
            1
            for hit in hits[:k]
            if any(f == 1.0 for _, f in hit.matches)
        )
        report.outcomes.append(QueryOutcome(eq.query_id, source_rank, exact))
    return report


def precision_at_k(
    run: dict[str, list[str]],
    qrels: dict[tuple[str, str], int],
    k: int,
) -> tuple[dict[str, float], float, int]:
    """Mean fraction of relevant hits in each top-k; unjudged counts as 0.

    Returns (per-query precision, mean precision, unjudged hit count).
    """
    per_query: dict[str, float] = {}
    missing = 0
    for qid, doc_ids in run.items():
        top = doc_ids[:k]
        relevant = 0
        for doc_id in top:
            judgment = qrels.get((qid, doc_id))
            if judgment is None:
                missing += 1
            elif judgment > 0:
                relevant += 1
        per_query[qid] = relevant / k if k else 0.0
    mean = sum(per_query.values()) / len(per_query) if per_query else 0.0
    return per_query, mean, missing


def load_queries(path: str | Path) -> list[EvalQuery]:
    queries = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        rec = json.loads(line)
        queries.append(
            EvalQuery(rec["query_id"], rec["query"], rec["source_doc_id"])
        )
    return queries


def load_qrels(path: str | Path) -> dict[tuple[str, str], int]:
    qrels = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        qid, doc_id, rel = line.split("\t")
        qrels[(qid, doc_id)] = int(rel)
    return qrels
