/**
 * Round trip against a live rating service: fetch the queue, rate all
 * five suggestions, verify the export labels and the progress view, and
 * flush an offline-queued rating after "reconnecting".
 */

import { ChildProcess, spawn } from "node:child_process";
import { mkdtempSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient, ApiError } from "../src/api.js";
import { MemoryStorage, OfflineQueue } from "../src/queue.js";
import { confirmRating, initialState, isDone, rateOptimistic, shouldSubmit } from "../src/state.js";
import { renderApp, renderProgress } from "../src/render.js";

const PORT = 18000 + Math.floor(Math.random() * 20000);
const BASE = `http://127.0.0.1:${PORT}`;
let server: ChildProcess;

async function waitForServer(timeoutMs = 30000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (Date.now() < deadline) {
    try {
      const resp = await fetch(`${BASE}/api/stats`);
      if (resp.ok) return;
    } catch {
      /* not up yet */
    }
    await new Promise((r) => setTimeout(r, 200));
  }
  throw new Error("rating service did not come up");
}

beforeAll(async () => {
  const storeDir = mkdtempSync(join(tmpdir(), "muse-ui-"));
  server = spawn(
    "python3",
    [join(__dirname, "serve_fixture.py"), storeDir, String(PORT)],
    { stdio: "inherit" },
  );
  await waitForServer();
}, 40000);

afterAll(() => {
  server?.kill();
});

describe("live service round trip", () => {
  const client = new ApiClient(BASE);

  it("rates five pending ideas, exports five labeled rows, progress 5/5", async () => {
    const suggestions = await client.fetchQueue("r1");
    expect(suggestions).toHaveLength(5);
    for (const s of suggestions) {
      expect(Object.keys(s).sort()).toEqual(
        ["body", "collaborator", "current_rating", "idea_id", "title"].sort(),
      );
    }

    let state = initialState(suggestions);
    const ratings = [5, 4, 3, 2, 1];
    for (const [i, s] of suggestions.entries()) {
      const rating = ratings[i]!;
      expect(shouldSubmit(state, s.idea_id, rating)).toBe(true);
      state = rateOptimistic(state, s.idea_id, rating);
      const ack = await client.submitRating(s.idea_id, "r1", rating);
      expect(ack.ok).toBe(true);
      state = confirmRating(state, s.idea_id);
    }
    expect(isDone(state)).toBe(true);
    expect(renderApp(state)).toContain("All done");

    // server-side progress agrees with the client's view
    const stats = await client.fetchStats("r1");
    expect(stats.rater?.rated).toBe(5);
    expect(stats.rater?.assigned).toBe(5);
    const progress = renderProgress(
      stats.rater!.rated,
      stats.rater!.assigned,
      stats.rater!.histogram,
    );
    expect(progress).toContain("<strong>5/5</strong>");

    // reloading reproduces server truth: the queue is now empty
    expect(await client.fetchQueue("r1")).toHaveLength(0);

    // the training export carries one correctly labeled row per idea
    const csv = await (await fetch(`${BASE}/api/export/training.csv`)).text();
    const lines = csv.trim().split("\n");
    expect(lines).toHaveLength(6);
    const header = lines[0]!.split(",");
    const ratingCol = header.indexOf("rating");
    const labelCol = header.indexOf("label");
    const got = lines.slice(1).map((line) => {
      const cells = line.split(",");
      return [Number(cells[ratingCol]), Number(cells[labelCol])];
    });
    expect(got).toEqual([
      [5, 1],
      [4, 1],
      [3, 0],
      [2, 0],
      [1, 0],
    ]);
  });

  it("flushes an offline-queued rating on reconnect", async () => {
    const queue = new OfflineQueue(new MemoryStorage());
    const dead = new ApiClient(`http://127.0.0.1:1`); // nothing listens here

    // when offline, the rating lands in the queue instead of being lost
    queue.enqueue({ idea_id: "idea00", rater_id: "r1", rating: 2 });
    const failed = await queue.flush(
      async (item) => {
        await dead.submitRating(item.idea_id, item.rater_id, item.rating);
      },
      (err) => err instanceof ApiError && err.status > 0,
    );
    expect(failed).toEqual({ sent: 0, remaining: 1 });

    // reconnect: the same flush against the live server drains the queue
    const flushed = await queue.flush(
      async (item) => {
        await client.submitRating(item.idea_id, item.rater_id, item.rating);
      },
      (err) => err instanceof ApiError && err.status > 0,
    );
    expect(flushed).toEqual({ sent: 1, remaining: 0 });

    // server state matches: idea00 was overwritten from 5 to 2
    const stats = await client.fetchStats("r1");
    expect(stats.rater?.histogram).toEqual({ "1": 1, "2": 2, "3": 1, "4": 1, "5": 0 });
    const csv = await (await fetch(`${BASE}/api/export/training.csv`)).text();
    const first = csv.trim().split("\n")[1]!.split(",");
    expect(first[0]).toBe("idea00");
    expect(first[first.length - 1]).toBe("0"); // label flipped with the overwrite
  }, 20000);
});
