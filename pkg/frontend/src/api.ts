/**
 * Typed client for the rating service JSON API.
 *
 * The server is the single source of truth: this client never caches or
 * rewrites responses, it only validates shapes. All calls go through an
 * injectable fetch so tests can swap transports.
 */

export interface SuggestionView {
  idea_id: string;
  title: string;
  body: string;
  collaborator: string;
  current_rating: number | null;
}

export interface RaterProgress {
  rater_id: string;
  rated: number;
  assigned: number;
  cap: number;
  histogram: Record<string, number>;
}

export interface StatsResponse {
  total_ratings: number;
  total_ideas: number;
  total_raters: number;
  histogram: Record<string, number>;
  rater?: RaterProgress;
}

export interface RatingAck {
  ok: boolean;
  overwrote: number | null;
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(message: string, readonly status: number) {
    super(message);
  }
}

const SUGGESTION_KEYS = ["idea_id", "title", "body", "collaborator", "current_rating"];

export function isValidRating(value: unknown): value is 1 | 2 | 3 | 4 | 5 {
  return typeof value === "number" && Number.isInteger(value) && value >= 1 && value <= 5;
}

export class ApiClient {
  constructor(
    readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (...args) => fetch(...args),
  ) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
  }

  private async request(path: string, init?: RequestInit): Promise<unknown> {
    let response: Response;
    try {
      response = await this.fetchFn(this.baseUrl + path, init);
    } catch (err) {
      throw new ApiError(`network failure: ${String(err)}`, 0);
    }
    const text = await response.text();
    if (!response.ok) {
      let detail = text;
      try {
        detail = (JSON.parse(text) as { error?: string }).error ?? text;
      } catch {
        /* non-JSON error body */
      }
      throw new ApiError(detail || `HTTP ${response.status}`, response.status);
    }
    return JSON.parse(text);
  }

  /** Unrated suggestions for the rater, already blinded by the server. */
  async fetchQueue(raterId: string, limit = 48): Promise<SuggestionView[]> {
    const body = (await this.request(
      `/api/raters/${encodeURIComponent(raterId)}/suggestions?limit=${limit}`,
    )) as { suggestions: Record<string, unknown>[] };
    return body.suggestions.map((raw) => {
      // keep only the documented fields; anything else never reaches the DOM
      const view: Record<string, unknown> = {};
      for (const key of SUGGESTION_KEYS) view[key] = raw[key] ?? null;
      return view as unknown as SuggestionView;
    });
  }

  async submitRating(ideaId: string, raterId: string, rating: number): Promise<RatingAck> {
    if (!isValidRating(rating)) {
      throw new ApiError(`rating must be an integer 1..5, got ${rating}`, 0);
    }
    const body = (await this.request("/api/ratings", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ idea_id: ideaId, rater_id: raterId, rating }),
    })) as RatingAck;
    return { ok: body.ok, overwrote: body.overwrote ?? null };
  }

  async fetchStats(raterId?: string): Promise<StatsResponse> {
    const suffix = raterId ? `?rater_id=${encodeURIComponent(raterId)}` : "";
    return (await this.request(`/api/stats${suffix}`)) as StatsResponse;
  }
}
