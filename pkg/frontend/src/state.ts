import type { ApiSearchResponse } from './api.js';

/** Client-side query state; history is append-only within a session. */
export interface UiQueryState {
  queryText: string;
  k: number;
  alpha?: number;
  lastResponse: ApiSearchResponse | null;
  history: string[];
}

export function createState(k = 10, alpha?: number): UiQueryState {
  return { queryText: '', k, alpha, lastResponse: null, history: [] };
}

const FRAGMENT_RE = /\$[^$]*\$/g;

// Characters a query must contain (besides $) to plausibly be LaTeX rather
// than prose. Single bare tokens like "x^2" or "g(z)=0" are treated as
// formulas; anything with spaces or no math syntax goes through verbatim.
const MATHY_RE = /^[A-Za-z0-9\\{}()\[\]^_+\-*/=<>.,'|!?]+$/;

/**
 * Wrap bare formula input in $...$ so the combined query box accepts either
 * plain LaTeX or keyword+fragment mixes.
 */
export function normalizeQueryText(raw: string): string {
  const text = raw.trim();
  if (!text || text.includes('$') || text.includes(' ')) return text;
  if (MATHY_RE.test(text) && /[\\^_+\-*/=<>()?]/.test(text)) {
    return `$${text}$`;
  }
  return text;
}

/**
 * Replace the formula fragment(s) of a query with a hit's LaTeX, keeping
 * surrounding keywords. With no existing fragment the formula is appended.
 */
export function replaceFormulaFragment(text: string, latex: string): string {
  const fragment = `$${latex}$`;
  if (!FRAGMENT_RE.test(text)) {
    return text.trim() ? `${text.trim()} ${fragment}` : fragment;
  }
  let replaced = false;
  const out = text.replace(FRAGMENT_RE, () => {
    if (replaced) return '';
    replaced = true;
    return fragment;
  });
  return out.replace(/\s+/g, ' ').trim();
}

export function recordSubmission(
  state: UiQueryState,
  text: string,
  response: ApiSearchResponse,
): void {
  state.history.push(text);
  state.queryText = text;
  state.lastResponse = response;
}
