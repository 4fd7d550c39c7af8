// 2-second polling with latest-wins staleness handling: responses from an
// older request never overwrite a newer one, and polling stops once the
// resource is terminal.
export function startPolling(fetchOnce, onUpdate, isDone, intervalMs = 2000, schedule = (fn, ms) => setTimeout(fn, ms)) {
    let stopped = false;
    let lastApplied = 0;
    let issued = 0;
    const tick = async () => {
        if (stopped)
            return;
        const seq = ++issued;
        let value;
        try {
            value = await fetchOnce();
        }
        catch {
            // transient failure: keep the cadence and retry
            if (!stopped)
                schedule(tick, intervalMs);
            return;
        }
        if (stopped || seq < lastApplied)
            return;
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
export function latestWins(fn, apply) {
    let issued = 0;
    let applied = 0;
    return async (...args) => {
        const seq = ++issued;
        const value = await fn(...args);
        if (seq >= applied) {
            applied = seq;
            apply(value);
        }
    };
}
