/**
 * Thin client for the search service. Field names mirror api/schema.json
 * exactly; nothing here recomputes or reinterprets scores.
 */

export interface ApiMatch {
  latex: string;
  score: number;
}

export interface ApiHit {
  doc_id: string;
  title: string;
  score: number;
  text_score: number;
  formula_score: number;
  matches: ApiMatch[];
}

export interface ApiSearchResponse {
  query: { keywords: string[]; formulas: string[]; alpha: number };
  hits: ApiHit[];
  elapsed_ms: number;
}

export interface ApiHealth {
  status: string;
  documents?: number;
  expressions?: number;
}

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
    this.name = 'ApiError';
  }
}

async function errorMessage(response: Response): Promise<string> {
  try {
    const body = await response.json();
    if (body && typeof body.error === 'string') return body.error;
  } catch {
    // non-JSON error body; fall through
  }
  return `request failed with status ${response.status}`;
}

export async function searchRequest(
  base: string,
  q: string,
  k?: number,
  alpha?: number,
): Promise<ApiSearchResponse> {
  const params = new URLSearchParams({ q });
  if (k !== undefined) params.set('k', String(k));
  if (alpha !== undefined) params.set('alpha', String(alpha));
  const response = await fetch(`${base}/api/search?${params.toString()}`);
  if (!response.ok) {
    throw new ApiError(response.status, await errorMessage(response));
  }
  return (await response.json()) as ApiSearchResponse;
}

export async function healthRequest(base: string): Promise<ApiHealth> {
  const response = await fetch(`${base}/api/health`);
  if (!response.ok && response.status !== 503) {
    throw new ApiError(response.status, await errorMessage(response));
  }
  return (await response.json()) as ApiHealth;
}
