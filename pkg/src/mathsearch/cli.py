"""Command-line entry points: index, query, serve, eval.

Exit codes: 0 success, 1 usage error, 2 data error.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional

from . import evaluate, query as query_mod
from .index import CorruptIndex, DuplicateDocument, FormulaIndex, IoError
from .latex import ParseError
from .tuples import TupleConfig

USAGE_ERROR = 1
DATA_ERROR = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse defaults to exit code 2
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(USAGE_ERROR)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mathsearch")
    sub = parser.add_subparsers(dest="command", required=True)

    p_index = sub.add_parser("index", help="build an index from a JSONL corpus")
    p_index.add_argument("--corpus", required=True)
    p_index.add_argument("--out", required=True)
    p_index.add_argument("--model", choices=("v1", "v2"), default="v2")
    p_index.add_argument("--wildcards", choices=("on", "off"), default="on")
    p_index.add_argument("--alpha", type=float, default=0.5)

    p_query = sub.add_parser("query", help="run one combined query")
    p_query.add_argument("--index", required=True)
    p_query.add_argument("--q", required=True)
    p_query.add_argument("-k", type=int, default=10)
    p_query.add_argument("--alpha", type=float, default=None)

    p_serve = sub.add_parser("serve", help="serve the HTTP API")
    p_serve.add_argument("--index", required=True)
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.add_argument("--static", default=None, help="directory of UI assets")

    p_eval = sub.add_parser("eval", help="specific-item evaluation")
    p_eval.add_argument("--index", required=True)
    p_eval.add_argument("--queries", required=True)
    p_eval.add_argument("--qrels", default=None)
    p_eval.add_argument("-k", type=int, default=10)
    p_eval.add_argument("--out", default=None, help="write JSON report here")
    return parser


def _cmd_index(args) -> int:
    idx = FormulaIndex(
        config=TupleConfig(
            model_version=args.model,
            emit_wildcard_expansions=args.wildcards == "on",
        ),
        alpha_default=args.alpha,
    )
    corpus = Path(args.corpus)
    if not corpus.is_file():
        print(f"error: corpus not found: {corpus}", file=sys.stderr)
        return DATA_ERROR
    skipped = 0
    for lineno, line in enumerate(corpus.read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
            report = idx.add_document(
                rec["doc_id"],
                rec.get("title", rec["doc_id"]),
                rec.get("text", ""),
                rec.get("formulas", []),
            )
        except (json.JSONDecodeError, KeyError) as e:
            print(f"error: bad corpus line {lineno}: {e}", file=sys.stderr)
            return DATA_ERROR
        except DuplicateDocument as e:
            print(f"error: duplicate doc_id at line {lineno}: {e}", file=sys.stderr)
            return DATA_ERROR
        for src, msg in report.parse_errors:
            skipped += 1
            print(f"warning: skipped formula {src!r}: {msg}", file=sys.stderr)
    try:
        idx.save(args.out)
    except IoError as e:
        print(f"error: {e}", file=sys.stderr)
        return DATA_ERROR
    print(
        f"indexed {idx.doc_count} documents, {idx.expression_count} expressions"
        + (f" ({skipped} formulas skipped)" if skipped else "")
    )
    return 0


def _load_index(path: str) -> FormulaIndex:
    try:
        return FormulaIndex.load(path)
    except (CorruptIndex, IoError) as e:
        print(f"error: cannot load index: {e}", file=sys.stderr)
        raise SystemExit(DATA_ERROR)


def _cmd_query(args) -> int:
    idx = _load_index(args.index)
    try:
        hits = query_mod.search(idx, args.q, k=args.k, alpha=args.alpha)
    except query_mod.QueryParseError as e:
        print(f"error: {e}", file=sys.stderr)
        return DATA_ERROR
    except query_mod.EmptyQueryTuples as e:
        print(f"error: formula has no indexable relationships: {e}", file=sys.stderr)
        return DATA_ERROR
    print(json.dumps(
        [
            {
                "doc_id": h.doc_id,
                "title": h.title,
                "score": h.combined_score,
                "text_score": h.text_score,
                "formula_score": h.formula_score,
                "matches": [{"latex": m, "score": s} for m, s in h.matches],
            }
            for h in hits
        ],
        ensure_ascii=False,
        indent=2,
    ))
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    idx = _load_index(args.index)
    app = create_app(idx, static_dir=args.static)
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def _cmd_eval(args) -> int:
    idx = _load_index(args.index)
    try:
        queries = evaluate.load_queries(args.queries)
    except (OSError, json.JSONDecodeError, KeyError) as e:
        print(f"error: bad queries file: {e}", file=sys.stderr)
        return DATA_ERROR
    try:
        report = evaluate.specific_item_eval(idx, queries, k=args.k)
    except evaluate.UnknownSourceDoc as e:
        print(f"error: unknown source document: {e}", file=sys.stderr)
        return DATA_ERROR
    result = report.to_dict()
    if args.qrels:
        try:
            qrels = evaluate.load_qrels(args.qrels)
        except (OSError, ValueError) as e:
            print(f"error: bad qrels file: {e}", file=sys.stderr)
            return DATA_ERROR
        run = {}
        for eq in queries:
            hits = query_mod.search(idx, eq.query, k=args.k)
            run[eq.query_id] = [h.doc_id for h in hits]
        per_query, mean, missing = evaluate.precision_at_k(run, qrels, args.k)
        result["precision_at_k"] = {
            "per_query": per_query, "mean": mean, "unjudged_hits": missing,
        }
    out = json.dumps(result, indent=2)
    if args.out:
        Path(args.out).write_text(out + "\n", encoding="utf-8")
    print(out)
    print(report.to_tsv(), end="", file=sys.stderr)
    return 0


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {
        "index": _cmd_index,
        "query": _cmd_query,
        "serve": _cmd_serve,
        "eval": _cmd_eval,
    }
    try:
        return handlers[args.command](args)
    except ParseError as e:
        print(f"error: {e}", file=sys.stderr)
        return DATA_ERROR


if __name__ == "__main__":
    raise SystemExit(main())
