// Browser entry point. Debounce can be disabled with ?debounce=0 to
// reproduce the raw per-pixel event load; an optional static
// /domains.json populates widget options.

import { startPlayground } from './app.js';
import type { Domains } from './types.js';

async function boot(): Promise<void> {
  const root = document.getElementById('playground');
  if (!root) return;
  const params = new URLSearchParams(window.location.search);
  const debounceMs = params.has('debounce') ? Number(params.get('debounce')) : 100;
  let domains: Domains = {};
  try {
    const res = await fetch('/domains.json');
    if (res.ok) domains = (await res.json()) as Domains;
  } catch {
    // optional file; widgets fall back to free-form inputs
  }
  await startPlayground(root, { domains, debounceMs });
}

void boot();
