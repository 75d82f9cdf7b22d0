// Stream order bookkeeping: events must arrive with consecutive sequence
// numbers; anything else forces a full-state refetch rather than guessing.

import type { StreamEvent } from "./types.js";

export interface SeqTracker {
  last: number;
}

export type StreamDecision =
  | { kind: "apply"; event: StreamEvent }
  | { kind: "ignore" }
  | { kind: "refetch" };

export function newTracker(last = 0): SeqTracker {
  return { last };
}

export function processEvent(tracker: SeqTracker, event: StreamEvent): StreamDecision {
  if (event.seq <= tracker.last) {
    return { kind: "ignore" }; // stale or duplicate
  }
  if (event.seq === tracker.last + 1) {
    tracker.last = event.seq;
    return { kind: "apply", event };
  }
  // gap: resync to the newest seq and ask the caller to refetch state
  tracker.last = event.seq;
  return { kind: "refetch" };
}

export function resyncTo(tracker: SeqTracker, seq: number): void {
  tracker.last = Math.max(tracker.last, seq);
}
