/** Collapses call bursts so downstream sees at most one call per
 * interval. Intermediate values are dropped in favor of the newest,
 * which is delivered on the trailing edge — a dragged slider lands on
 * its final position without a request storm. */

export type Sender<T> = (value: T) => void;

export function rateLimit<T>(fn: Sender<T>, minIntervalMs: number): Sender<T> {
  let lastSent = Number.NEGATIVE_INFINITY;
  let pending: { value: T } | null = null;
  let timer: ReturnType<typeof setTimeout> | null = null;

  const flush = () => {
    timer = null;
    if (pending !== null) {
      const { value } = pending;
      pending = null;
      lastSent = Date.now();
      fn(value);
    }
  };

  return (value: T) => {
    const now = Date.now();
    if (timer === null && now - lastSent >= minIntervalMs) {
      lastSent = now;
      fn(value);
      return;
    }
    pending = { value };
    if (timer === null) {
      timer = setTimeout(flush, Math.max(0, minIntervalMs - (now - lastSent)));
    }
  };
}
