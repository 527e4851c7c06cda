"""Persistent inverted index over formula tuples plus a TF-IDF text index.

Expressions are stored once each (deduplicated by canonical key), with a
separate table recording which documents contain an expression.  The
on-disk layout is a directory of JSON-lines files: ``meta.json``,
``expressions.jsonl``, ``postings.jsonl``, ``documents.jsonl``.
"""
from __future__ import annotations

import hashlib
import json
import math
import os
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

from . import latex, slt, tuples

FORMAT_VERSION = 1

_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)
_FORMULA_RE = re.compile(r"\$([^$]+)\$")


class DuplicateDocument(Exception):
    pass


class CorruptIndex(Exception):
    pass


class IoError(Exception):
    pass


def tokenize(text: str) -> list[str]:
    """Lowercased Unicode-alphanumeric runs; no stemming."""
    return _TOKEN_RE.findall(text.lower())


def extract_embedded_formulas(text: str) -> tuple[str, list[str]]:
    """Split ``$...$`` fragments out of free text; returns (prose, formulas)."""
    formulas = _FORMULA_RE.findall(text)
    prose = _FORMULA_RE.sub(" ", text)
    return prose, formulas


@dataclass
class ExpressionRecord:
    expr_id: int
    latex: str
    key: str
    total_tuples: int
    symbol_count: int


@dataclass
class DocumentRecord:
    doc_id: str
    title: str
    expr_ids: list[int] = field(default_factory=list)
    term_frequencies: dict[str, int] = field(default_factory=dict)


@dataclass
class IngestReport:
    doc_id: str
    new_expressions: int = 0
    linked_expressions: int = 0
    parse_errors: list[tuple[str, str]] = field(default_factory=list)


class FormulaIndex:
    """In-memory index; single writer during build, immutable afterwards."""

    def __init__(
        self,
        config: tuples.TupleConfig = tuples.TupleConfig(),
        alpha_default: float = 0.5,
    ):
        self.config = config
        self.alpha_default = alpha_default
        self.expressions: list[ExpressionRecord] = []
        self.documents: dict[str, DocumentRecord] = {}
        self._key_to_expr: dict[str, int] = {}
        self._postings: dict[str, dict[int, int]] = {}
        self._expr_tuples: dict[int, Counter] = {}
        self._expr_docs: dict[int, list[str]] = {}
        self._df: Counter = Counter()

    # -- build ------------------------------------------------------------

    def add_document(
        self, doc_id: str, title: str, text: str, formulas: Iterable[str] = ()
    ) -> IngestReport:
        if doc_id in self.documents:
            raise DuplicateDocument(doc_id)
        report = IngestReport(doc_id)
        prose, embedded = extract_embedded_formulas(text)
        doc = DocumentRecord(doc_id, title)

        for src in list(formulas) + embedded:
            try:
                tree = latex.parse_latex(src)
            except latex.ParseError as e:
                report.parse_errors.append((src, str(e)))
                continue
            expr_id, created = self._intern_expression(tree)
            if created:
                report.new_expressions += 1
            if expr_id not in doc.expr_ids:
                doc.expr_ids.append(expr_id)
                report.linked_expressions += 1
                self._expr_docs.setdefault(expr_id, []).append(doc_id)

        doc.term_frequencies = dict(Counter(tokenize(prose)))
        for term in doc.term_frequencies:
            self._df[term] += 1
        self.documents[doc_id] = doc
        return report

    def _intern_expression(self, tree: slt.SymbolLayoutTree) -> tuple[int, bool]:
        key = slt.canonical_key(tree)
        if key in self._key_to_expr:
            return self._key_to_expr[key], False
        expr_id = len(self.expressions)
        counts = tuples.generate_tuples(tree, self.config)
        record = ExpressionRecord(
            expr_id=expr_id,
            latex=latex.to_latex(tree),
            key=key,
            total_tuples=sum(counts.values()),
            symbol_count=slt.symbol_count(tree),
        )
        self.expressions.append(record)
        self._key_to_expr[key] = expr_id
        self._expr_tuples[expr_id] = counts
        expand = self.config.emit_wildcard_expansions
        for tu, count in counts.items():
            for k in tuples.index_keys(tu, expand):
                self._postings.setdefault(k, {})[expr_id] = (
                    self._postings.get(k, {}).get(expr_id, 0) + count
                )
        return expr_id, True

    # -- read -------------------------------------------------------------

    def lookup(self, key: str) -> list[tuple[int, int]]:
        plist = self._postings.get(key)
        if not plist:
            return []
        return sorted(plist.items())

    def expression_tuples(self, expr_id: int) -> Counter:
        cached = self._expr_tuples.get(expr_id)
        if cached is None:
            tree = latex.parse_latex(self.expressions[expr_id].latex)
            cached = tuples.generate_tuples(tree, self.config)
            self._expr_tuples[expr_id] = cached
        return cached

    def docs_for_expression(self, expr_id: int) -> list[str]:
        return self._expr_docs.get(expr_id, [])

    @property
    def doc_count(self) -> int:
        return len(self.documents)

    @property
    def expression_count(self) -> int:
        return len(self.expressions)

    def idf(self, term: str) -> float:
        df = self._df.get(term, 0)
        if df == 0:
            return 0.0
        return math.log(1.0 + self.doc_count / df)

    def text_score(self, doc: DocumentRecord, query_terms: list[str]) -> float:
        """Cosine similarity between TF-IDF vectors of query and document."""
        if not query_terms or not doc.term_frequencies:
            return 0.0
        q_tf = Counter(query_terms)
        q_vec = {t: tf * self.idf(t) for t, tf in q_tf.items()}
        d_vec = {t: tf * self.idf(t) for t, tf in doc.term_frequencies.items()}
        dot = sum(w * d_vec[t] for t, w in q_vec.items() if t in d_vec)
        if dot == 0.0:
            return 0.0
        q_norm = math.sqrt(sum(w * w for w in q_vec.values()))
        d_norm = math.sqrt(sum(w * w for w in d_vec.values()))
        return dot / (q_norm * d_norm)

    # -- persistence ------------------------------------------------------

    def save(self, path: str | os.PathLike) -> None:
        out = Path(path)
        try:
            out.mkdir(parents=True, exist_ok=True)
            files = {
                "expressions.jsonl": "".join(
                    json.dumps(
                        {
                            "expr_id": e.expr_id,
                            "latex": e.latex,
                            "key": e.key,
                            "total_tuples": e.total_tuples,
                            "symbol_count": e.symbol_count,
                        },
                        ensure_ascii=False,
                    )
                    + "\n"
                    for e in self.expressions
                ),
                "postings.jsonl": "".join(
                    json.dumps(
                        {"key": k, "postings": sorted(p.items())}, ensure_ascii=False
                    )
                    + "\n"
                    for k, p in sorted(self._postings.items())
                ),
                "documents.jsonl": "".join(
                    json.dumps(
                        {
                            "doc_id": d.doc_id,
                            "title": d.title,
                            "expr_ids": d.expr_ids,
                            "term_frequencies": d.term_frequencies,
                        },
                        ensure_ascii=False,
                    )
                    + "\n"
                    for d in self.documents.values()
                ),
            }
            checksums = {}
            for name, content in files.items():
                (out / name).write_text(content, encoding="utf-8")
                checksums[name] = hashlib.sha256(content.encode("utf-8")).hexdigest()
            meta = {
                "format_version": FORMAT_VERSION,
                "model_version": self.config.model_version,
                "emit_wildcard_expansions": self.config.emit_wildcard_expansions,
                "alpha_default": self.alpha_default,
                "doc_count": self.doc_count,
                "expression_count": self.expression_count,
                "checksums": checksums,
            }
            (out / "meta.json").write_text(
                json.dumps(meta, indent=2, ensure_ascii=False), encoding="utf-8"
            )
        except OSError as e:
            raise IoError(str(e)) from e

    @classmethod
    def load(cls, path: str | os.PathLike) -> "FormulaIndex":
        root = Path(path)
        try:
            meta = json.loads((root / "meta.json").read_text(encoding="utf-8"))
        except OSError as e:
            raise IoError(str(e)) from e
        except json.JSONDecodeError as e:
            raise CorruptIndex(f"bad meta.json: {e}") from e
        if meta.get("format_version") != FORMAT_VERSION:
            raise CorruptIndex(
                f"format version {meta.get('format_version')!r} != {FORMAT_VERSION}"
            )
        contents = {}
        for name in ("expressions.jsonl", "postings.jsonl", "documents.jsonl"):
            try:
                contents[name] = (root / name).read_text(encoding="utf-8")
            except OSError as e:
                raise IoError(str(e)) from e
            digest = hashlib.sha256(contents[name].encode("utf-8")).hexdigest()
            if meta.get("checksums", {}).get(name) != digest:
                raise CorruptIndex(f"checksum mismatch for {name}")

        idx = cls(
            config=tuples.TupleConfig(
                model_version=meta["model_version"],
                emit_wildcard_expansions=meta["emit_wildcard_expansions"],
            ),
            alpha_default=meta.get("alpha_default", 0.5),
        )
        try:
            for line in contents["expressions.jsonl"].splitlines():
                rec = json.loads(line)
                e = ExpressionRecord(**rec)
                idx.expressions.append(e)
                idx._key_to_expr[e.key] = e.expr_id
            for line in contents["postings.jsonl"].splitlines():
                rec = json.loads(line)
                idx._postings[rec["key"]] = {
                    int(eid): int(c) for eid, c in rec["postings"]
                }
            for line in contents["documents.jsonl"].splitlines():
                rec = json.loads(line)
                d = DocumentRecord(
                    doc_id=rec["doc_id"],
                    title=rec["title"],
                    expr_ids=list(rec["expr_ids"]),
                    term_frequencies=dict(rec["term_frequencies"]),
                )
                idx.documents[d.doc_id] = d
                for eid in d.expr_ids:
                    idx._expr_docs.setdefault(eid, []).append(d.doc_id)
                for term in d.term_frequencies:
                    idx._df[term] += 1
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
            raise CorruptIndex(f"malformed index file: {e}") from e
        return idx
