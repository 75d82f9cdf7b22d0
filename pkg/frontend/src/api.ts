// Thin REST client. The server is authoritative for every rule; this layer
// only moves JSON and surfaces structured errors.

import type { ActionPayload, ReplayPayload, StateAtPayload, StatePayload } from "./types.js";
import { SCHEMA_VERSION } from "./types.js";

export class ApiError extends Error {
  constructor(public status: number, public detail: string) {
    super(`${status}: ${detail}`);
  }
}

export class SchemaMismatchError extends Error {
  constructor(public got: number) {
    super(`server speaks schema v${got}, client expects v${SCHEMA_VERSION}`);
  }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  const res = await fetch(url, init);
  const body = await res.json().catch(() => ({}));
  if (!res.ok) {
    throw new ApiError(res.status, (body as { detail?: string }).detail ?? res.statusText);
  }
  const v = (body as { v?: number }).v;
  if (v !== undefined && v !== SCHEMA_VERSION) {
    throw new SchemaMismatchError(v);
  }
  return body as T;
}

export class Api {
  constructor(public base: string = "") {}

  async createGame(
    params: Record<string, number>,
    aiOpponent: string,
    seed: number,
  ): Promise<string> {
    const body = await request<{ game_id: string }>(`${this.base}/games`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ scenario_params: params, ai_opponent: aiOpponent, seed }),
    });
    return body.game_id;
  }

  state(gameId: string): Promise<StatePayload> {
    return request(`${this.base}/games/${gameId}/state`);
  }

  submitAction(gameId: string, unitId: number, action: ActionPayload): Promise<StatePayload> {
    return request(`${this.base}/games/${gameId}/actions`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ unit_id: unitId, action }),
    });
  }

  gameReplay(gameId: string): Promise<ReplayPayload> {
    return request(`${this.base}/games/${gameId}/replay`);
  }

  async replays(): Promise<string[]> {
    const body = await request<{ replays: string[] }>(`${this.base}/replays`);
    return body.replays;
  }

  replay(id: string): Promise<ReplayPayload> {
    return request(`${this.base}/replays/${id}`);
  }

  stateAt(id: string, step: number): Promise<StateAtPayload> {
    return request(`${this.base}/replays/${id}/state_at/${step}`);
  }

  streamUrl(gameId: string): string {
    const base = this.base || (typeof location !== "undefined" ? location.origin : "");
    return `${base.replace(/^http/, "ws")}/games/${gameId}/stream`;
  }
}
