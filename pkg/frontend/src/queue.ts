/**
 * Offline rating queue.
 *
 * Ratings that cannot reach the server are persisted locally and
 * re-sent on reconnect. A delayed rating is recoverable; a lost one is
 * not, so enqueue never drops data and flush keeps whatever still
 * fails. One entry per (idea, rater): re-rating while offline replaces
 * the queued value.
 */

export interface PendingRating {
  idea_id: string;
  rater_id: string;
  rating: number;
  queued_at: string;
}

export interface QueueStorage {
  load(): PendingRating[];
  save(items: PendingRating[]): void;
}

export class MemoryStorage implements QueueStorage {
  private items: PendingRating[] = [];

  load(): PendingRating[] {
    return [...this.items];
  }

  save(items: PendingRating[]): void {
    this.items = [...items];
  }
}

export class BrowserStorage implements QueueStorage {
  constructor(private readonly key = "muse_rating_queue_v1") {}

  load(): PendingRating[] {
    try {
      return JSON.parse(window.localStorage.getItem(this.key) ?? "[]") as PendingRating[];
    } catch {
      return [];
    }
  }

  save(items: PendingRating[]): void {
    try {
      window.localStorage.setItem(this.key, JSON.stringify(items));
    } catch {
      /* storage full or unavailable; the in-page queue still works */
    }
  }
}

export interface FlushReport {
  sent: number;
  remaining: number;
}

export class OfflineQueue {
  constructor(private readonly storage: QueueStorage = new MemoryStorage()) {}

  size(): number {
    return this.storage.load().length;
  }

  peek(): PendingRating[] {
    return this.storage.load();
  }

  enqueue(item: Omit<PendingRating, "queued_at">): void {
    const items = this.storage
      .load()
      .filter((p) => !(p.idea_id === item.idea_id && p.rater_id === item.rater_id));
    items.push({ ...item, queued_at: new Date().toISOString() });
    this.storage.save(items);
  }

  /**
   * Try to send every queued rating, oldest first. Entries that fail
   * stay queued for the next flush; entries the server rejects outright
   * (4xx) are dropped, since retrying cannot fix them.
   */
  async flush(
    send: (item: PendingRating) => Promise<void>,
    isPermanentError: (err: unknown) => boolean = () => false,
  ): Promise<FlushReport> {
    const items = this.storage.load();
    const remaining: PendingRating[] = [];
    let sent = 0;
    for (const item of items) {
      try {
        await send(item);
        sent += 1;
      } catch (err) {
        if (!isPermanentError(err)) remaining.push(item);
      }
    }
    this.storage.save(remaining);
    return { sent, remaining: remaining.length };
  }
}
