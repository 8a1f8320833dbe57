import { afterEach, beforeEach, describe, expect, it, vi } from 'vitest';

import { debounce } from '../src/debounce.js';

describe('debounce', () => {
  beforeEach(() => vi.useFakeTimers());
  afterEach(() => vi.useRealTimers());

  it('coalesces a burst into the trailing value', () => {
    const seen: number[] = [];
    const d = debounce<number>(100, (v) => seen.push(v));
    d.push(1);
    d.push(2);
    d.push(3);
    expect(seen).toEqual([]);
    vi.advanceTimersByTime(100);
    expect(seen).toEqual([3]);
  });

  it('fires once per interval under sustained input', () => {
    const seen: number[] = [];
    const d = debounce<number>(100, (v) => seen.push(v));
    for (let t = 0; t < 1000; t += 50) {
      d.push(t);
      vi.advanceTimersByTime(50);
    }
    expect(seen.length).toBeGreaterThanOrEqual(5);
    expect(seen.length).toBeLessThanOrEqual(10);
  });

  it('interval 0 passes every event through', () => {
    const seen: number[] = [];
    const d = debounce<number>(0, (v) => seen.push(v));
    for (let i = 0; i < 20; i += 1) d.push(i);
    expect(seen.length).toBe(20);
  });

  it('flush emits the pending value immediately', () => {
    const seen: number[] = [];
    const d = debounce<number>(100, (v) => seen.push(v));
    d.push(7);
    d.flush();
    expect(seen).toEqual([7]);
    vi.advanceTimersByTime(200);
    expect(seen).toEqual([7]);
  });
});
