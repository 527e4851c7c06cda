import { ApiError, searchRequest } from './api.js';
import type { ApiHit } from './api.js';
import { escapeHtml, renderFormula } from './render.js';
import {
  UiQueryState,
  createState,
  normalizeQueryText,
  recordSubmission,
  replaceFormulaFragment,
} from './state.js';

export interface AppOptions {
  apiBase?: string;
  k?: number;
  alpha?: number;
}

export interface AppController {
  state: UiQueryState;
  /** Submit whatever is in the query box; resolves when results rendered. */
  submit(): Promise<void>;
  input: HTMLInputElement;
  results: HTMLElement;
  status: HTMLElement;
}

function hitHtml(hit: ApiHit, index: number): string {
  const matches = hit.matches
    .map(
      (m, mi) => `
      <div class="match">
        <span class="match-formula">${renderFormula(m.latex)}</span>
        <span class="match-score">${m.score.toFixed(3)}</span>
        <a href="#" data-action="search" data-hit="${index}" data-match="${mi}">Search for this</a>
        <a href="#" data-action="edit" data-hit="${index}" data-match="${mi}">Edit query</a>
      </div>`,
    )
    .join('');
  return `
    <div class="hit" data-doc="${escapeHtml(hit.doc_id)}">
      <h3>${escapeHtml(hit.title)}</h3>
      <p class="scores">
        score ${hit.score.toFixed(3)}
        &middot; text ${hit.text_score.toFixed(3)}
        &middot; formula ${hit.formula_score.toFixed(3)}
      </p>
      ${matches}
    </div>`;
}

/** Build the interface inside ``container`` and wire its behavior. */
export function initApp(container: HTMLElement, options: AppOptions = {}): AppController {
  const apiBase = options.apiBase ?? '';
  const state = createState(options.k ?? 10, options.alpha);

  container.innerHTML = `
    <form id="search-form">
      <input id="query-input" type="text" autocomplete="off"
             placeholder="keywords and $latex$ fragments, e.g. quadratic $x^2+1$" />
      <button id="search-button" type="submit" disabled>Search</button>
    </form>
    <p id="status"></p>
    <div id="results"></div>`;

  const form = container.querySelector('#search-form') as HTMLFormElement;
  const input = container.querySelector('#query-input') as HTMLInputElement;
  const button = container.querySelector('#search-button') as HTMLButtonElement;
  const status = container.querySelector('#status') as HTMLElement;
  const results = container.querySelector('#results') as HTMLElement;

  // One in-flight request; responses arriving out of order are dropped.
  let sequence = 0;

  function syncButton(): void {
    button.disabled = input.value.trim() === '';
  }
  input.addEventListener('input', syncButton);

  async function submit(): Promise<void> {
    const text = normalizeQueryText(input.value);
    if (!text) return;
    const mine = ++sequence;
    status.textContent = 'Searching…';
    try {
      const response = await searchRequest(apiBase, text, state.k, state.alpha);
      if (mine !== sequence) return; // a newer request superseded this one
      recordSubmission(state, text, response);
      input.value = text;
      syncButton();
      status.textContent = `${response.hits.length} hits in ${response.elapsed_ms.toFixed(1)} ms`;
      results.innerHTML = response.hits.map(hitHtml).join('') || '<p>No results.</p>';
    } catch (err) {
      if (mine !== sequence) return;
      // input stays untouched so the query can be corrected
      const message =
        err instanceof ApiError ? err.message : 'search service unreachable';
      status.textContent = `Error: ${message}`;
    }
  }

  form.addEventListener('submit', (event) => {
    event.preventDefault();
    void submit();
  });

  function matchLatex(target: HTMLElement): string | null {
    const hitIdx = Number(target.dataset.hit);
    const matchIdx = Number(target.dataset.match);
    const hit = state.lastResponse?.hits[hitIdx];
    return hit?.matches[matchIdx]?.latex ?? null;
  }

  results.addEventListener('click', (event) => {
    const target = event.target as HTMLElement;
    const action = target.dataset?.action;
    if (!action) return;
    event.preventDefault();
    const latex = matchLatex(target);
    if (latex === null) return;
    input.value = replaceFormulaFragment(input.value, latex);
    syncButton();
    if (action === 'search') {
      void submit();
    } else {
      // edit: place the cursor inside the fragment without submitting
      const start = input.value.indexOf('$');
      input.focus();
      if (start >= 0) {
        input.setSelectionRange(start + 1, start + 1);
      }
    }
  });

  return { state, submit, input, results, status };
}
