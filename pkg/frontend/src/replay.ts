// Replay viewer: a scrubber over server-authoritative per-step states.
// The client never reconstructs rules; every board shown comes from the
// service's state_at endpoint (cached per step).

import type { Api } from "./api.js";
import { BoardView } from "./boardview.js";
import type { ReplayPayload, StateAtPayload } from "./types.js";

export class ReplayViewer {
  replay: ReplayPayload | null = null;
  step = 0;
  playing: ReturnType<typeof setInterval> | null = null;
  private cache = new Map<number, StateAtPayload>();
  view: BoardView;

  constructor(
    public api: Api,
    public replayId: string,
    public boardRoot: HTMLElement,
    public statusEl: HTMLElement,
  ) {
    this.view = new BoardView(boardRoot);
  }

  async load(): Promise<void> {
    try {
      this.replay = await this.api.replay(this.replayId);
    } catch (err) {
      this.statusEl.textContent = `Cannot load replay: ${String(err)}`;
      return;
    }
    await this.seek(0);
  }

  get lastStep(): number {
    return this.replay ? this.replay.steps.length : 0;
  }

  async stateAt(step: number): Promise<StateAtPayload> {
    const hit = this.cache.get(step);
    if (hit) return hit;
    const payload = await this.api.stateAt(this.replayId, step);
    this.cache.set(step, payload);
    return payload;
  }

  async seek(step: number): Promise<void> {
    if (!this.replay) return;
    this.step = Math.max(0, Math.min(step, this.lastStep));
    const payload = await this.stateAt(this.step);
    this.view.render(payload.state, {}, null, {});
    this.renderStatus(payload);
  }

  async stepForward(): Promise<void> {
    await this.seek(this.step + 1);
  }

  play(intervalMs = 400): void {
    this.pause();
    this.playing = setInterval(() => {
      if (this.step >= this.lastStep) {
        this.pause();
        return;
      }
      void this.stepForward();
    }, intervalMs);
  }

  pause(): void {
    if (this.playing !== null) {
      clearInterval(this.playing);
      this.playing = null;
    }
  }

  renderStatus(payload: StateAtPayload): void {
    if (!this.replay) return;
    const doc = this.statusEl.ownerDocument;
    this.statusEl.replaceChildren();
    const head = doc.createElement("div");
    head.className = "status-line";
    head.setAttribute("data-step", String(this.step));
    head.setAttribute("data-score", String(payload.state.score));
    head.textContent =
      `step ${this.step}/${this.lastStep}  phase ${payload.state.phase}` +
      `  cumulative score ${payload.state.score.toFixed(1)}`;
    this.statusEl.appendChild(head);

    if (this.step > 0) {
      const rec = this.replay.steps[this.step - 1];
      if (rec) {
        const line = doc.createElement("div");
        line.className = "step-detail";
        if (rec.type === "action") {
          const target = rec.action?.target ? ` -> ${rec.action.target.join(",")}` : "";
          line.textContent = `unit ${rec.unit_id}: ${rec.action?.kind}${target}`;
        } else {
          line.textContent = `phase ${rec.phase} ends`;
        }
        this.statusEl.appendChild(line);
        for (const ev of rec.events) {
          const evline = doc.createElement("div");
          evline.className = `score-event ${ev.kind}`;
          evline.textContent = `${ev.kind} ${ev.amount.toFixed(1)}`;
          this.statusEl.appendChild(evline);
        }
        if (rec.audit && rec.audit.predictions) {
          const audit = doc.createElement("div");
          audit.className = "audit";
          audit.setAttribute("data-chosen", String(rec.audit.chosen_behavior ?? ""));
          audit.textContent =
            `dispatch: ${rec.audit.chosen_behavior} ` +
            `[${rec.audit.predictions.map((p) => p.toFixed(1)).join(", ")}]`;
          this.statusEl.appendChild(audit);
        }
      }
    }
    if (this.step === this.lastStep) {
      const done = doc.createElement("div");
      done.className = "final-banner";
      done.setAttribute("data-final-score", String(this.replay.final_score));
      done.textContent = `Final score ${this.replay.final_score.toFixed(1)}`;
      this.statusEl.appendChild(done);
    }
  }
}
