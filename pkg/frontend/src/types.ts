// Wire types for the versioned JSON schemas served by the game service.

export const SCHEMA_VERSION = 1;

export interface UnitPayload {
  id: number;
  faction: "blue" | "red";
  kind: "infantry" | "armor" | "artillery";
  strength: number;
  col: number;
  row: number;
  acted?: boolean;
}

export type TerrainName = "clear" | "rough" | "urban" | "water";

export interface StateDict {
  v: number;
  width: number;
  height: number;
  terrain: [number, TerrainName][];
  units: UnitPayload[];
  max_phases: number;
  seed: number;
  phase: number;
  on_move: "blue" | "red";
  cursor: number | null;
  score: number;
  terminal: boolean;
}

export interface ActionPayload {
  kind: "move" | "attack" | "pass";
  target?: [number, number];
}

export interface StatePayload {
  v: number;
  game_id: string;
  seq: number;
  state: StateDict;
  legal_actions: Record<string, ActionPayload[]>;
  final_score: number | null;
}

export interface StreamEvent {
  v: number;
  seq: number;
  type: string;
  state: StateDict;
  unit_id?: number;
  action?: ActionPayload;
  events?: ScoreEventPayload[];
  final_score?: number;
}

export interface ScoreEventPayload {
  phase: number;
  kind: "kill" | "loss" | "urban_hold";
  amount: number;
}

export interface ReplayStep {
  type: "action" | "phase_end";
  phase: number;
  unit_id?: number;
  action?: ActionPayload;
  events: ScoreEventPayload[];
  audit?: {
    chosen_index?: number;
    chosen_behavior?: string;
    predictions?: number[];
    [key: string]: unknown;
  };
}

export interface ReplayPayload {
  v: number;
  scenario: StateDict;
  steps: ReplayStep[];
  final_score: number;
  seeds: { scenario: number; blue_policy: number; red_policy: number };
  aborted?: { agent: string; step: number; error: string };
}

export interface StateAtPayload {
  v: number;
  step: number;
  state: StateDict;
}

// Terrain stored run-length encoded, row-major.
export function decodeTerrain(state: StateDict): TerrainName[] {
  const out: TerrainName[] = [];
  for (const [count, name] of state.terrain) {
    for (let i = 0; i < count; i++) out.push(name);
  }
  return out;
}
