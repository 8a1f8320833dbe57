// Event buffer and transport. Events are validated before buffering;
// network failures keep the buffer intact and a retry drains it once the
// endpoint is reachable again (appends stay in order).

import type { DatabaseSpec, InteractionEvent, InterfaceSpec } from './types.js';
import { validateEvent } from './predicates.js';

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export interface LoggerOptions {
  baseUrl?: string;
  fetchFn?: FetchLike;
  retryMs?: number;
  db?: DatabaseSpec | null;
  // test hook: scheduled retries default to setTimeout
  schedule?: (fn: () => void, ms: number) => void;
}

export class InteractionLogger {
  readonly buffer: InteractionEvent[] = [];
  linesAcked = 0;

  private spec: InterfaceSpec;
  private baseUrl: string;
  private fetchFn: FetchLike;
  private retryMs: number;
  private db: DatabaseSpec | null;
  private schedule: (fn: () => void, ms: number) => void;
  private draining = false;
  private retryScheduled = false;

  constructor(spec: InterfaceSpec, options: LoggerOptions = {}) {
    this.spec = spec;
    this.baseUrl = options.baseUrl ?? '';
    this.fetchFn = options.fetchFn ?? ((url, init) => fetch(url, init));
    this.retryMs = options.retryMs ?? 2000;
    this.db = options.db ?? null;
    this.schedule = options.schedule ?? ((fn, ms) => setTimeout(fn, ms));
  }

  /** Validate, buffer and start draining. Returns the buffered event. */
  log(event: InteractionEvent): InteractionEvent {
    validateEvent(this.spec, this.db, event);
    this.buffer.push(event);
    void this.drain();
    return event;
  }

  /** Push everything buffered to the server, stopping at the first
   * failure (the rest stays queued for the retry). */
  async drain(): Promise<void> {
    if (this.draining) return;
    this.draining = true;
    try {
      while (this.buffer.length > 0) {
        const event = this.buffer[0];
        const res = await this.fetchFn(`${this.baseUrl}/log`, {
          method: 'POST',
          headers: { 'Content-Type': 'application/json' },
          body: JSON.stringify(event),
        });
        if (!res.ok) throw new Error(`log endpoint returned ${res.status}`);
        const body = (await res.json()) as { lines: number };
        this.linesAcked = body.lines;
        this.buffer.shift();
      }
    } catch {
      if (!this.retryScheduled) {
        this.retryScheduled = true;
        this.schedule(() => {
          this.retryScheduled = false;
          void this.drain();
        }, this.retryMs);
      }
    } finally {
      this.draining = false;
    }
  }
}
