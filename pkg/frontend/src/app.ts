// Playground bootstrap: fetch the interface spec, render one control per
// widget and one data panel per visualization, log every interaction and
// refresh the affected panels from the /query endpoint.

import { InteractionLogger } from './logger.js';
import { renderWidget } from './widgets.js';
import type {
  DatabaseSpec,
  Domains,
  InteractionEvent,
  InterfaceSpec,
  Predicate,
  QueryResult,
  WidgetSpec,
} from './types.js';
import type { FetchLike } from './logger.js';

export interface PlaygroundOptions {
  baseUrl?: string;
  fetchFn?: FetchLike;
  domains?: Domains;
  db?: DatabaseSpec | null;
  debounceMs?: number; // 0 disables debouncing (worst-case load mode)
  now?: () => number;
}

export interface PlaygroundSession {
  sessionId: string;
  spec: InterfaceSpec;
  logger: InteractionLogger;
  events: InteractionEvent[]; // everything emitted this session, in order
  root: HTMLElement;
}

function sessionId(): string {
  return `s-${Date.now().toString(36)}-${Math.random().toString(36).slice(2, 10)}`;
}

function vizPanel(name: string): HTMLElement {
  const panel = document.createElement('div');
  panel.className = 'viz-panel';
  panel.dataset.viz = name;
  const h = document.createElement('h3');
  h.textContent = name;
  panel.appendChild(h);
  const table = document.createElement('table');
  panel.appendChild(table);
  return panel;
}

function fillTable(panel: HTMLElement, columns: string[], rows: unknown[][]): void {
  const table = panel.querySelector('table');
  if (!table) return;
  table.textContent = '';
  const head = table.insertRow();
  for (const c of columns) {
    const cell = document.createElement('th');
    cell.textContent = c;
    head.appendChild(cell);
  }
  for (const row of rows.slice(0, 50)) {
    const tr = table.insertRow();
    for (const v of row) {
      tr.insertCell().textContent = v === null ? '∅' : String(v);
    }
  }
}

export async function startPlayground(
  root: HTMLElement,
  options: PlaygroundOptions = {},
): Promise<PlaygroundSession> {
  const fetchFn: FetchLike = options.fetchFn ?? ((url, init) => fetch(url, init));
  const baseUrl = options.baseUrl ?? '';
  const res = await fetchFn(`${baseUrl}/spec`);
  if (!res.ok) throw new Error(`cannot fetch interface spec: ${res.status}`);
  const spec = (await res.json()) as InterfaceSpec;
  const domains = options.domains ?? {};
  const db = options.db ?? null;
  const now = options.now ?? ((): number => Date.now());
  const debounceMs = options.debounceMs ?? 100;

  const logger = new InteractionLogger(spec, { baseUrl, fetchFn, db });
  const events: InteractionEvent[] = [];

  root.textContent = '';
  const widgetBox = document.createElement('div');
  widgetBox.className = 'widgets';
  const vizBox = document.createElement('div');
  vizBox.className = 'visualizations';
  root.appendChild(widgetBox);
  root.appendChild(vizBox);

  const panels = new Map<string, HTMLElement>();
  for (const viz of spec.visualizations) {
    const panel = vizPanel(viz.name);
    panels.set(viz.name, panel);
    vizBox.appendChild(panel);
  }
  if (spec.widgets.length === 0) {
    const note = document.createElement('p');
    note.className = 'no-widgets-note';
    note.textContent = 'this interface declares no widgets; panels are static';
    widgetBox.appendChild(note);
  }

  let lastTs = 0;
  const emit = (relationship: string, parameters: Predicate): void => {
    // client-captured ms-since-epoch, clamped monotone so the log validates
    lastTs = Math.max(now(), lastTs);
    const event: InteractionEvent = { relationship, timestamp: lastTs, parameters };
    try {
      logger.log(event);
    } catch {
      return; // invalid predicate state (e.g. empty selection); skip
    }
    events.push(event);
    void fetchFn(`${baseUrl}/query`, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify(event),
    })
      .then(async (r) => (r.ok ? ((await r.json()) as QueryResult) : null))
      .then((result) => {
        if (!result) return;
        for (const q of result.queries) {
          if (q.detail_level !== 0) continue;
          const panel = panels.get(q.node);
          if (panel) fillTable(panel, q.columns, q.rows);
        }
      })
      .catch(() => undefined);
  };

  const sourced = (w: WidgetSpec) => spec.relationships.filter((r) => r.source === w.name);
  for (const widget of spec.widgets) {
    widgetBox.appendChild(
      renderWidget({
        widget,
        relationships: sourced(widget),
        domains,
        db,
        emit,
        debounceMs,
      }),
    );
  }

  return { sessionId: sessionId(), spec, logger, events, root };
}
