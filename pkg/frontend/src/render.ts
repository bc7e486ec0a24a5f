/**
 * Pure HTML rendering: state in, markup string out.
 *
 * Views show only what the server sent for rating: title, body, and the
 * collaborator's name. Generation mode and concept pair are never part
 * of the inputs, so they cannot appear in the DOM while rating.
 */

import { SuggestionView } from "./api.js";
import { SessionState, histogram, isDone, pendingSuggestions, ratedCount } from "./state.js";

export function escapeHtml(raw: string): string {
  return raw
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

export const RATING_VALUES = [1, 2, 3, 4, 5] as const;

export function renderRatingControl(ideaId: string, current?: number): string {
  const buttons = RATING_VALUES.map((value) => {
    const pressed = current === value ? ' aria-pressed="true" data-selected="1"' : "";
    return (
      `<button class="rate" data-idea="${escapeHtml(ideaId)}" ` +
      `data-rating="${value}"${pressed}>${value}</button>`
    );
  }).join("");
  return `<div class="rating" role="group" aria-label="interest from 1 to 5">${buttons}</div>`;
}

export function renderCard(s: SuggestionView, state: SessionState): string {
  const current = state.ratings[s.idea_id];
  const status = state.status[s.idea_id];
  const error = state.errors[s.idea_id];
  const note =
    status === "queued_offline"
      ? '<p class="note">saved offline, will send on reconnect</p>'
      : status === "confirmed"
        ? '<p class="note">rating recorded</p>'
        : "";
  return `<article class="card" data-card="${escapeHtml(s.idea_id)}">
  <h2>${escapeHtml(s.title)}</h2>
  <p class="collaborator">suggested collaboration with ${escapeHtml(s.collaborator)}</p>
  <p class="body">${escapeHtml(s.body)}</p>
  <p class="scale">1 = not interesting, 5 = very interesting</p>
  ${renderRatingControl(s.idea_id, current)}
  ${error ? `<p class="error">${escapeHtml(error)}</p>` : ""}
  ${note}
</article>`;
}

export function renderProgress(rated: number, assigned: number, hist: Record<string, number>): string {
  const bars = RATING_VALUES.map(
    (v) => `<span class="bar" data-value="${v}">${v}: ${hist[String(v)] ?? 0}</span>`,
  ).join(" ");
  return `<footer class="progress"><strong>${rated}/${assigned}</strong> rated ${bars}</footer>`;
}

export function renderDoneScreen(rated: number): string {
  return `<section class="done"><h2>All done</h2>
<p>You rated ${rated} suggestion${rated === 1 ? "" : "s"}. Thank you!</p></section>`;
}

export function renderRetryBanner(message: string): string {
  return `<div class="banner" role="alert">${escapeHtml(message)}
<button class="retry" data-action="retry">retry</button></div>`;
}

export function renderApp(state: SessionState, banner = "", assigned?: number): string {
  const total = assigned ?? state.suggestions.length;
  const pending = pendingSuggestions(state);
  const main = isDone(state)
    ? renderDoneScreen(ratedCount(state))
    : pending.map((s) => renderCard(s, state)).join("\n");
  return `${banner}
<main>
${main}
</main>
${renderProgress(ratedCount(state), total, histogram(state))}`;
}
