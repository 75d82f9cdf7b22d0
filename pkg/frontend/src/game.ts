// Interactive game controller. The UI is a pure function of the last
// authoritative server payload plus in-flight request status: no client
// rules, no optimistic mutation.

import { Api, ApiError, SchemaMismatchError } from "./api.js";
import { BoardView } from "./boardview.js";
import { newTracker, processEvent, resyncTo, type SeqTracker } from "./seq.js";
import type { ActionPayload, StatePayload, StreamEvent } from "./types.js";

export interface SocketLike {
  // structurally compatible with the browser WebSocket
  onmessage: ((ev: { data: unknown }) => void) | null;
  onclose: ((ev?: unknown) => void) | null;
  close(): void;
}

export type SocketFactory = (url: string) => SocketLike;

export class GameController {
  payload: StatePayload | null = null;
  selectedUnit: number | null = null;
  banner = "";
  submitting = false;
  tracker: SeqTracker = newTracker();
  socket: SocketLike | null = null;
  submitCount = 0;
  pending: Promise<void> | null = null;

  constructor(
    public api: Api,
    public gameId: string,
    public boardRoot: HTMLElement,
    public statusEl: HTMLElement,
    public socketFactory: SocketFactory | null = null,
  ) {
    this.view = new BoardView(boardRoot);
  }

  view: BoardView;

  async start(): Promise<void> {
    await this.refetch();
    if (this.socketFactory) {
      this.connect();
    }
  }

  connect(): void {
    if (!this.socketFactory) return;
    const sock = this.socketFactory(this.api.streamUrl(this.gameId));
    sock.onmessage = (ev) => {
      const event = JSON.parse(String(ev.data)) as StreamEvent;
      const decision = processEvent(this.tracker, event);
      if (decision.kind === "apply") {
        void this.refetch(false); // authoritative view, no seq reset
      } else if (decision.kind === "refetch") {
        void this.refetch();
      }
    };
    sock.onclose = () => {
      this.socket = null;
      void this.refetch(); // resync before redialing
      if (this.socketFactory) setTimeout(() => this.connect(), 500);
    };
    this.socket = sock;
  }

  async refetch(resync = true): Promise<void> {
    try {
      const payload = await this.api.state(this.gameId);
      this.payload = payload;
      if (resync) resyncTo(this.tracker, payload.seq);
      this.banner = "";
    } catch (err) {
      if (err instanceof SchemaMismatchError) {
        this.banner = `Please upgrade: ${err.message}`;
      } else {
        this.banner = "Network trouble; retrying keeps the last good state.";
      }
    }
    this.renderAll();
  }

  selectUnit(unitId: number): void {
    this.selectedUnit = this.selectedUnit === unitId ? null : unitId;
    this.renderAll();
  }

  async submit(action: ActionPayload): Promise<void> {
    if (this.payload === null || this.selectedUnit === null || this.submitting) return;
    const unitId = this.selectedUnit;
    const offered = this.payload.legal_actions[String(unitId)] ?? [];
    // never submit anything the server did not list
    if (!offered.some((a) => JSON.stringify(a) === JSON.stringify(action))) return;
    this.submitting = true;
    this.submitCount += 1;
    try {
      const payload = await this.api.submitAction(this.gameId, unitId, action);
      this.payload = payload;
      resyncTo(this.tracker, payload.seq);
      this.selectedUnit = null;
      this.banner = "";
    } catch (err) {
      if (err instanceof ApiError && err.status >= 400 && err.status < 500) {
        this.banner = `Rejected: ${err.detail}`;
        await this.refetch();
        return;
      }
      this.banner = "Network trouble; action not applied.";
    } finally {
      this.submitting = false;
    }
    this.renderAll();
  }

  renderAll(): void {
    const doc = this.statusEl.ownerDocument;
    if (!this.payload) {
      this.statusEl.textContent = this.banner || "loading";
      return;
    }
    const { state, legal_actions, final_score } = this.payload;
    const terminal = final_score !== null;
    this.view.render(state, terminal ? {} : legal_actions, this.selectedUnit, {
      onSelectUnit: (id) => this.selectUnit(id),
      onAction: (action) => {
        this.pending = this.submit(action);
      },
    });
    this.statusEl.replaceChildren();
    const line = doc.createElement("div");
    line.className = "status-line";
    line.textContent =
      `phase ${Math.min(state.phase, state.max_phases)}/${state.max_phases}` +
      `  score ${state.score.toFixed(1)}  on move: ${state.on_move}`;
    this.statusEl.appendChild(line);
    // pass has no board target; offer it as a button for the selected unit
    if (!terminal && this.selectedUnit !== null) {
      const offered = legal_actions[String(this.selectedUnit)] ?? [];
      if (offered.some((a) => a.kind === "pass")) {
        const passBtn = doc.createElement("button");
        passBtn.id = "pass-btn";
        passBtn.textContent = `unit ${this.selectedUnit}: pass`;
        passBtn.addEventListener("click", () => {
          this.pending = this.submit({ kind: "pass" });
        });
        this.statusEl.appendChild(passBtn);
      }
    }
    if (terminal) {
      const done = doc.createElement("div");
      done.className = "final-banner";
      done.setAttribute("data-final-score", String(final_score));
      done.textContent = `Game over. Final score ${final_score!.toFixed(1)}`;
      this.statusEl.appendChild(done);
    }
    if (this.banner) {
      const warn = doc.createElement("div");
      warn.className = "banner";
      warn.textContent = this.banner;
      this.statusEl.appendChild(warn);
    }
  }
}
