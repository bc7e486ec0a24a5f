import { describe, expect, it } from "vitest";

import { SuggestionView } from "../src/api.js";
import {
  confirmRating,
  histogram,
  initialState,
  isDone,
  markQueuedOffline,
  pendingSuggestions,
  rateOptimistic,
  ratedCount,
  rejectRating,
  shouldSubmit,
} from "../src/state.js";

function suggestion(id: string, current: number | null = null): SuggestionView {
  return {
    idea_id: id,
    title: `Title ${id}`,
    body: "Body.",
    collaborator: "Dr. B",
    current_rating: current,
  };
}

describe("session state", () => {
  it("starts with server-confirmed ratings only", () => {
    const state = initialState([suggestion("a"), suggestion("b", 4)]);
    expect(ratedCount(state)).toBe(1);
    expect(state.status["b"]).toBe("confirmed");
    expect(pendingSuggestions(state).map((s) => s.idea_id)).toEqual(["a"]);
  });

  it("accepts only the five discrete rating values", () => {
    const state = initialState([suggestion("a")]);
    for (const bad of [0, 6, 2.5, NaN, -1]) {
      expect(shouldSubmit(state, "a", bad)).toBe(false);
      expect(() => rateOptimistic(state, "a", bad)).toThrow();
    }
    for (const good of [1, 2, 3, 4, 5]) {
      expect(shouldSubmit(state, "a", good)).toBe(true);
    }
  });

  it("treats a double click as a single event", () => {
    let state = initialState([suggestion("a")]);
    expect(shouldSubmit(state, "a", 5)).toBe(true);
    state = rateOptimistic(state, "a", 5);
    // the second click on the same value must not produce another submit
    expect(shouldSubmit(state, "a", 5)).toBe(false);
    // changing the value is a real event (overwrite semantics)
    expect(shouldSubmit(state, "a", 3)).toBe(true);
  });

  it("ignores unknown ideas", () => {
    const state = initialState([suggestion("a")]);
    expect(shouldSubmit(state, "ghost", 3)).toBe(false);
  });

  it("confirms, queues offline, and rejects", () => {
    let state = initialState([suggestion("a"), suggestion("b")]);
    state = rateOptimistic(state, "a", 4);
    state = confirmRating(state, "a");
    expect(state.status["a"]).toBe("confirmed");

    state = rateOptimistic(state, "b", 2);
    state = markQueuedOffline(state, "b");
    expect(state.status["b"]).toBe("queued_offline");
    expect(isDone(state)).toBe(true);

    state = rejectRating(state, "b", "rating must be an integer 1..5");
    expect(state.ratings["b"]).toBeUndefined();
    expect(state.errors["b"]).toMatch(/1\.\.5/);
    expect(isDone(state)).toBe(false);
  });

  it("histogram sums to the rated count", () => {
    let state = initialState([suggestion("a"), suggestion("b"), suggestion("c")]);
    state = rateOptimistic(state, "a", 5);
    state = rateOptimistic(state, "b", 5);
    state = rateOptimistic(state, "c", 1);
    const hist = histogram(state);
    expect(hist["5"]).toBe(2);
    expect(hist["1"]).toBe(1);
    const total = Object.values(hist).reduce((a, b) => a + b, 0);
    expect(total).toBe(ratedCount(state));
  });
});
