/**
 * Browser bootstrap: wire the API client, session state, offline queue,
 * and renderer together. Configuration comes from the URL:
 * ?api=<base-url>&token=<rater-token> (the bearer token is the rater id).
 */

import { ApiClient, ApiError } from "./api.js";
import { BrowserStorage, OfflineQueue } from "./queue.js";
import {
  SessionState,
  confirmRating,
  initialState,
  markQueuedOffline,
  rateOptimistic,
  rejectRating,
  shouldSubmit,
} from "./state.js";
import { renderApp, renderRetryBanner } from "./render.js";

interface AppConfig {
  apiBase: string;
  raterId: string;
}

function readConfig(): AppConfig {
  const params = new URLSearchParams(window.location.search);
  const apiBase = params.get("api") ?? window.location.origin;
  const raterId = params.get("token") ?? window.localStorage.getItem("muse_rater_token") ?? "";
  if (raterId) window.localStorage.setItem("muse_rater_token", raterId);
  return { apiBase, raterId };
}

export class RaterApp {
  private state: SessionState = initialState([]);
  private banner = "";
  private assigned = 0;

  constructor(
    private readonly client: ApiClient,
    private readonly raterId: string,
    private readonly queue: OfflineQueue,
    private readonly root: HTMLElement,
  ) {}

  async start(): Promise<void> {
    this.root.addEventListener("click", (event) => void this.onClick(event));
    window.addEventListener("online", () => void this.flushQueue());
    await this.reload();
    await this.flushQueue();
  }

  /** Server truth wins: rebuild the whole session from the API. */
  async reload(): Promise<void> {
    try {
      const [suggestions, stats] = await Promise.all([
        this.client.fetchQueue(this.raterId),
        this.client.fetchStats(this.raterId),
      ]);
      this.state = initialState(suggestions);
      this.assigned = stats.rater?.assigned ?? suggestions.length;
      this.banner = "";
    } catch (err) {
      this.banner = renderRetryBanner(
        err instanceof ApiError && err.status > 0
          ? `server error: ${err.message}`
          : "connection lost; your ratings will be kept locally",
      );
    }
    this.render();
  }

  private async onClick(event: Event): Promise<void> {
    const target = event.target as HTMLElement | null;
    if (!target) return;
    if (target.dataset.action === "retry") {
      await this.reload();
      await this.flushQueue();
      return;
    }
    const ideaId = target.dataset.idea;
    const rating = Number(target.dataset.rating);
    if (!ideaId || !rating) return;
    await this.rate(ideaId, rating);
  }

  async rate(ideaId: string, rating: number): Promise<void> {
    if (!shouldSubmit(this.state, ideaId, rating)) return;
    this.state = rateOptimistic(this.state, ideaId, rating);
    this.render();
    try {
      await this.client.submitRating(ideaId, this.raterId, rating);
      this.state = confirmRating(this.state, ideaId);
    } catch (err) {
      if (err instanceof ApiError && err.status > 0) {
        // the server understood and said no: reset the control
        this.state = rejectRating(this.state, ideaId, err.message);
      } else {
        // transport failure: keep the rating, queue it for reconnect
        this.queue.enqueue({ idea_id: ideaId, rater_id: this.raterId, rating });
        this.state = markQueuedOffline(this.state, ideaId);
      }
    }
    this.render();
  }

  async flushQueue(): Promise<void> {
    const report = await this.queue.flush(
      async (item) => {
        await this.client.submitRating(item.idea_id, item.rater_id, item.rating);
      },
      (err) => err instanceof ApiError && err.status > 0,
    );
    if (report.sent > 0) await this.reload();
  }

  private render(): void {
    this.root.innerHTML = renderApp(this.state, this.banner, this.assigned);
  }
}

export function mount(): void {
  const config = readConfig();
  const root = document.getElementById("app");
  if (!root) throw new Error("missing #app container");
  if (!config.raterId) {
    root.innerHTML = "<p>Open this page with ?token=&lt;your rater token&gt;.</p>";
    return;
  }
  const client = new ApiClient(config.apiBase);
  const app = new RaterApp(client, config.raterId, new OfflineQueue(new BrowserStorage()), root);
  void app.start();
}

if (typeof window !== "undefined" && typeof document !== "undefined") {
  if (document.readyState === "loading") {
    document.addEventListener("DOMContentLoaded", mount);
  } else {
    mount();
  }
}
