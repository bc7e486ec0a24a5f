/**
 * Session state for one rating sitting: pure data plus pure updates.
 *
 * Nothing here is authoritative; reloading the page rebuilds the state
 * from the server. Optimistic ratings are tracked separately from
 * server-confirmed ones so rejections can roll the control back.
 */

import { SuggestionView, isValidRating } from "./api.js";

export type RatingStatus = "pending" | "confirmed" | "queued_offline";

export interface SessionState {
  suggestions: SuggestionView[];
  ratings: Record<string, number>;
  status: Record<string, RatingStatus>;
  errors: Record<string, string>;
}

export function initialState(suggestions: SuggestionView[]): SessionState {
  const ratings: Record<string, number> = {};
  const status: Record<string, RatingStatus> = {};
  for (const s of suggestions) {
    if (s.current_rating !== null && isValidRating(s.current_rating)) {
      ratings[s.idea_id] = s.current_rating;
      status[s.idea_id] = "confirmed";
    }
  }
  return { suggestions, ratings, status, errors: {} };
}

/** True when submitting (ideaId, rating) would be a new event. */
export function shouldSubmit(state: SessionState, ideaId: string, rating: number): boolean {
  if (!isValidRating(rating)) return false;
  if (!state.suggestions.some((s) => s.idea_id === ideaId)) return false;
  // a double click on the already-selected value is a no-op
  return !(state.ratings[ideaId] === rating && state.status[ideaId] !== undefined);
}

export function rateOptimistic(
  state: SessionState,
  ideaId: string,
  rating: number,
  status: RatingStatus = "pending",
): SessionState {
  if (!isValidRating(rating)) {
    throw new Error(`rating widget emitted ${rating}; only 1..5 exist`);
  }
  const errors = { ...state.errors };
  delete errors[ideaId];
  return {
    ...state,
    ratings: { ...state.ratings, [ideaId]: rating },
    status: { ...state.status, [ideaId]: status },
    errors,
  };
}

export function confirmRating(state: SessionState, ideaId: string): SessionState {
  if (state.ratings[ideaId] === undefined) return state;
  return { ...state, status: { ...state.status, [ideaId]: "confirmed" } };
}

/** Server rejected the rating: reset the control and surface the message. */
export function rejectRating(state: SessionState, ideaId: string, message: string): SessionState {
  const ratings = { ...state.ratings };
  const status = { ...state.status };
  delete ratings[ideaId];
  delete status[ideaId];
  return { ...state, ratings, status, errors: { ...state.errors, [ideaId]: message } };
}

export function markQueuedOffline(state: SessionState, ideaId: string): SessionState {
  if (state.ratings[ideaId] === undefined) return state;
  return { ...state, status: { ...state.status, [ideaId]: "queued_offline" } };
}

export function ratedCount(state: SessionState): number {
  return Object.keys(state.ratings).length;
}

export function pendingSuggestions(state: SessionState): SuggestionView[] {
  return state.suggestions.filter((s) => state.ratings[s.idea_id] === undefined);
}

export function isDone(state: SessionState): boolean {
  return state.suggestions.length > 0 && pendingSuggestions(state).length === 0;
}

export function histogram(state: SessionState): Record<string, number> {
  const out: Record<string, number> = { "1": 0, "2": 0, "3": 0, "4": 0, "5": 0 };
  for (const rating of Object.values(state.ratings)) {
    out[String(rating)] = (out[String(rating)] ?? 0) + 1;
  }
  return out;
}
