/**
 * Formula rendering with graceful degradation: use KaTeX when the page has
 * loaded it (dist/katex.min.js sets a global), otherwise show raw LaTeX.
 */

interface KatexLike {
  renderToString(latex: string, options?: Record<string, unknown>): string;
}

function katexGlobal(): KatexLike | null {
  const k = (globalThis as Record<string, unknown>).katex;
  if (k && typeof (k as KatexLike).renderToString === 'function') {
    return k as KatexLike;
  }
  return null;
}

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;');
}

/** HTML for one formula; falls back to escaped raw LaTeX on any failure. */
export function renderFormula(latex: string): string {
  const katex = katexGlobal();
  if (katex) {
    try {
      return katex.renderToString(latex, { throwOnError: false });
    } catch {
      // fall through to the raw form
    }
  }
  return `<code class="formula-raw">${escapeHtml(latex)}</code>`;
}
