"""HTTP/JSON API over a loaded index; optionally serves the web UI."""
from __future__ import annotations

import time
from pathlib import Path
from typing import Optional

from fastapi import FastAPI
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from . import latex, query as query_mod
from .index import FormulaIndex


def create_app(
    index: Optional[FormulaIndex], static_dir: Optional[str] = None
) -> FastAPI:
    """Build the API app; ``index`` may be swapped atomically via app.state."""
    app = FastAPI(title="mathsearch")
    app.state.index = index

    @app.get("/api/health")
    def health():
        idx: Optional[FormulaIndex] = app.state.index
        if idx is None:
            return JSONResponse({"status": "unavailable"}, status_code=503)
        return {
            "status": "ok",
            "documents": idx.doc_count,
            "expressions": idx.expression_count,
        }

    @app.get("/api/search")
    def api_search(q: str = "", k: int = 20, alpha: Optional[float] = None):
        idx: Optional[FormulaIndex] = app.state.index
        if idx is None:
            return JSONResponse({"error": "index unavailable"}, status_code=503)
        if not q.strip():
            return JSONResponse({"error": "empty query"}, status_code=400)
        started = time.perf_counter()
        try:
            parsed = query_mod.parse_query(q, alpha if alpha is not None else idx.alpha_default)
            hits = query_mod.search(idx, q, k=k, alpha=alpha)
        except (query_mod.QueryParseError, query_mod.EmptyQueryTuples, ValueError) as e:
            return JSONResponse({"error": str(e)}, status_code=400)
        elapsed_ms = (time.perf_counter() - started) * 1000.0
        return {
            "query": {
                "keywords": parsed.keywords,
                "formulas": [latex.to_latex(f) for f in parsed.formulas],
                "alpha": parsed.alpha,
            },
            "hits": [
                {
                    "doc_id": h.doc_id,
                    "title": h.title,
                    "score": h.combined_score,
                    "text_score": h.text_score,
                    "formula_score": h.formula_score,
                    "matches": [
                        {"latex": m_latex, "score": m_score}
                        for m_latex, m_score in h.matches
                    ],
                }
                for h in hits
            ],
            "elapsed_ms": elapsed_ms,
        }

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")
    return app
