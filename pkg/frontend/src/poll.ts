// 2-second polling with latest-wins staleness handling: responses from an
// older request never overwrite a newer one, and polling stops once the
// resource is terminal.

export interface PollHandle {
  stop(): void;
}

type Scheduler = (fn: () => void, ms: number) => unknown;

export function startPolling<T>(
  fetchOnce: () => Promise<T>,
  onUpdate: (value: T) => void,
  isDone: (value: T) => boolean,
  intervalMs = 2000,
  schedule: Scheduler = (fn, ms) => setTimeout(fn, ms),
): PollHandle {
  let stopped = false;
  let lastApplied = 0;
  let issued = 0;

  const tick = async () => {
    if (stopped) return;
    const seq = ++issued;
    let value: T;
    try {
      value = await fetchOnce();
    } catch {
      // transient failure: keep the cadence and retry
      if (!stopped) schedule(tick, intervalMs);
      return;
    }
    if (stopped || seq < lastApplied) return;
    lastApplied = seq;
    onUpdate(value);
    if (isDone(value)) {
      stopped = true;
      return;
    }
    schedule(tick, intervalMs);
  };

  void tick();
  return {
    stop() {
      stopped = true;
    },
  };
}

/** Latest-wins guard for ad-hoc requests outside the poll loop. */
export function latestWins<A extends unknown[], T>(
  fn: (...args: A) => Promise<T>,
  apply: (value: T) => void,
): (...args: A) => Promise<void> {
  let issued = 0;
  let applied = 0;
  return async (...args: A) => {
    const seq = ++issued;
    const value = await fn(...args);
    if (seq >= applied) {
      applied = seq;
      apply(value);
    }
  };
}
