// Trailing-edge debouncer for continuous widgets (slider, hover, pan,
// zoom). Interval 0 disables debouncing entirely: every raw event goes
// through, reproducing the worst-case "query per pixel" load.

export type Debounced<T> = {
  push: (value: T) => void;
  flush: () => void;
  cancel: () => void;
};

export function debounce<T>(intervalMs: number, sink: (value: T) => void): Debounced<T> {
  if (intervalMs <= 0) {
    return { push: sink, flush: () => undefined, cancel: () => undefined };
  }
  let pending: { value: T } | null = null;
  let timer: ReturnType<typeof setTimeout> | null = null;
  const fire = (): void => {
    timer = null;
    if (pending !== null) {
      const { value } = pending;
      pending = null;
      sink(value);
    }
  };
  return {
    push(value: T): void {
      pending = { value };
      if (timer === null) timer = setTimeout(fire, intervalMs);
    },
    flush(): void {
      if (timer !== null) clearTimeout(timer);
      fire();
    },
    cancel(): void {
      if (timer !== null) clearTimeout(timer);
      timer = null;
      pending = null;
    },
  };
}
