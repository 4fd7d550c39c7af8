// Client-side mirrors of the REST payloads. Rendered state always derives
// from the latest successful response; the client never mutates training
// state on its own.
export const TERMINAL_STATUSES = ["Succeeded", "Failed", "Cancelled"];
export function isTerminal(status) {
    return TERMINAL_STATUSES.includes(status);
}
