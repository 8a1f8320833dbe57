// Shared test scaffolding: the COVID fixtures from the benchmark repo and
// a fake in-memory server implementing /spec, /log and /query.

import { readFileSync } from 'node:fs';
import { resolve, dirname } from 'node:path';
import { fileURLToPath } from 'node:url';

import type { FetchLike } from '../src/logger.js';
import type { DatabaseSpec, Domains, InteractionEvent, InterfaceSpec } from '../src/types.js';

const here = dirname(fileURLToPath(import.meta.url));
export const REPO_ROOT = resolve(here, '..', '..');
const FIXTURES = resolve(REPO_ROOT, 'tests', 'fixtures');

export function covidDb(): DatabaseSpec {
  return JSON.parse(readFileSync(resolve(FIXTURES, 'covid', 'database.json'), 'utf-8'));
}

export function covidBrushInterface(): InterfaceSpec {
  return JSON.parse(readFileSync(resolve(FIXTURES, 'covid_brush', 'interface.json'), 'utf-8'));
}

export function covidDomains(): Domains {
  return JSON.parse(readFileSync(resolve(FIXTURES, 'covid', 'domains.json'), 'utf-8'));
}

export class FakeServer {
  spec: InterfaceSpec;
  logged: InteractionEvent[] = [];
  queried: InteractionEvent[] = [];
  failLogs = false; // simulate a network outage

  constructor(spec: InterfaceSpec) {
    this.spec = spec;
  }

  get fetchFn(): FetchLike {
    return async (url: string, init?: RequestInit): Promise<Response> => {
      if (url.endsWith('/spec')) {
        return new Response(JSON.stringify(this.spec), { status: 200 });
      }
      if (url.endsWith('/log')) {
        if (this.failLogs) throw new Error('network down');
        this.logged.push(JSON.parse(String(init?.body)) as InteractionEvent);
        return new Response(JSON.stringify({ lines: this.logged.length }), { status: 200 });
      }
      if (url.endsWith('/query')) {
        const event = JSON.parse(String(init?.body)) as InteractionEvent;
        this.queried.push(event);
        const rel = this.spec.relationships.find((r) => r.name === event.relationship);
        const queries = (rel?.targets ?? []).map((t) => ({
          node: t.name,
          sql: `SELECT 1 FROM covid`,
          detail_level: 0,
          columns: ['n'],
          rows: [[1]],
        }));
        return new Response(JSON.stringify({ timestamp: event.timestamp, queries }), { status: 200 });
      }
      return new Response('not found', { status: 404 });
    };
  }

  toJsonl(): string {
    return this.logged.map((e) => JSON.stringify(e)).join('\n') + '\n';
  }
}

export function fireChange(el: Element): void {
  el.dispatchEvent(new Event('change', { bubbles: true }));
}

export function fireInput(el: Element): void {
  el.dispatchEvent(new Event('input', { bubbles: true }));
}

export function mouse(el: Element, type: string, x: number, y: number): void {
  el.dispatchEvent(new MouseEvent(type, { clientX: x, clientY: y, bubbles: true }));
}

export async function settle(): Promise<void> {
  // let the logger's sequential async drain finish (one macrotask per turn
  // comfortably covers the per-event await chain)
  for (let i = 0; i < 20; i += 1) {
    await new Promise((resolve) => setTimeout(resolve, 0));
  }
}
