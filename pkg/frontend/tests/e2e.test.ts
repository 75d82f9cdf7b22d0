// Acceptance: a scripted browser session plays a full human-vs-AI game by
// clicking rendered units and targets; the server replay re-simulates to
// the displayed score; clicking outside the offered targets submits nothing.

import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { Api } from "../src/api.js";
import { GameController } from "../src/game.js";
import { startServer, type TestServer } from "./server.js";

let server: TestServer;
let api: Api;

beforeAll(async () => {
  server = await startServer();
  api = new Api(server.base);
});

afterAll(() => {
  server?.stop();
});

function containers(): { board: HTMLElement; status: HTMLElement } {
  const board = document.createElement("div");
  const status = document.createElement("div");
  document.body.append(board, status);
  return { board, status };
}

async function clickThroughTurn(controller: GameController, board: HTMLElement, status: HTMLElement) {
  const unit = board.querySelector('g.unit[data-selectable="1"]');
  expect(unit).not.toBeNull();
  unit!.dispatchEvent(new MouseEvent("click"));
  // prefer a board target; fall back to the pass button
  const target = board.querySelector("circle.target");
  if (target) {
    target.dispatchEvent(new MouseEvent("click"));
  } else {
    const pass = status.querySelector<HTMLButtonElement>("#pass-btn");
    expect(pass).not.toBeNull();
    pass!.dispatchEvent(new MouseEvent("click"));
  }
  await controller.pending;
}

describe("human-vs-AI round trip", () => {
  it("plays legal moves to completion and the server replay matches the banner", async () => {
    const gameId = await api.createGame(
      { width: 6, height: 6, n_blue: 2, n_red: 2, n_cities: 1, max_phases: 6 },
      "baseline",
      42,
    );
    const { board, status } = containers();
    const controller = new GameController(api, gameId, board, status, null);
    await controller.start();

    let guard = 0;
    while (controller.payload?.final_score == null && guard < 300) {
      guard += 1;
      await clickThroughTurn(controller, board, status);
    }
    expect(controller.payload?.final_score).not.toBeNull();

    const banner = status.querySelector(".final-banner");
    expect(banner).not.toBeNull();
    const displayed = Number(banner!.getAttribute("data-final-score"));

    // the server re-simulates the replay on read; its score must match
    const replay = await api.gameReplay(gameId);
    expect(replay.final_score).toBe(displayed);
    const served = await api.replay(gameId); // served from disk + integrity checked
    expect(served.final_score).toBe(displayed);

    // terminal board disables input: nothing is selectable, nothing targeted
    expect(board.querySelector('g.unit[data-selectable="1"]')).toBeNull();
    expect(board.querySelector("circle.target")).toBeNull();
  });

  it("illegal clicks submit nothing", async () => {
    const gameId = await api.createGame(
      { width: 6, height: 6, n_blue: 2, n_red: 2, n_cities: 1, max_phases: 6 },
      "baseline",
      7,
    );
    const { board, status } = containers();
    const controller = new GameController(api, gameId, board, status, null);
    await controller.start();

    const unit = board.querySelector('g.unit[data-selectable="1"]');
    unit!.dispatchEvent(new MouseEvent("click"));
    const before = controller.submitCount;

    // clicking plain terrain (not a highlighted target) does nothing
    const hexes = board.querySelectorAll("polygon[data-terrain]");
    hexes.forEach((hex) => hex.dispatchEvent(new MouseEvent("click")));
    expect(controller.submitCount).toBe(before);

    // even a direct submit of an action the server never offered is refused
    await controller.submit({ kind: "move", target: [5, 5] });
    await controller.submit({ kind: "attack", target: [0, 0] });
    expect(controller.submitCount).toBe(before);

    // the server state is untouched: same seq, same phase
    const payload = await api.state(gameId);
    expect(payload.seq).toBe(controller.payload!.seq);
    expect(payload.state.phase).toBe(1);
  });
});
