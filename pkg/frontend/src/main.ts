// Entry point: #play starts a human-vs-AI game, #replays browses records.

import { Api } from "./api.js";
import { GameController, type SocketLike } from "./game.js";
import { ReplayViewer } from "./replay.js";

const api = new Api("");

function browserSocket(url: string): SocketLike {
  const ws = new WebSocket(url);
  const like: SocketLike = { onmessage: null, onclose: null, close: () => ws.close() };
  ws.onmessage = (ev) => like.onmessage?.({ data: ev.data });
  ws.onclose = () => like.onclose?.();
  return like;
}

function el(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node;
}

async function showPlay(): Promise<void> {
  const board = el("board");
  const status = el("status");
  status.textContent = "creating game...";
  const gameId = await api.createGame(
    { width: 10, height: 10, n_blue: 3, n_red: 3, n_cities: 1, max_phases: 30 },
    "baseline",
    Math.floor(Math.random() * 100000),
  );
  const controller = new GameController(api, gameId, board, status, browserSocket);
  await controller.start();
}

async function showReplays(): Promise<void> {
  const board = el("board");
  const status = el("status");
  const ids = await api.replays();
  if (ids.length === 0) {
    status.textContent = "no replays recorded yet";
    board.replaceChildren();
    return;
  }
  const list = document.createElement("div");
  list.className = "replay-list";
  for (const id of ids) {
    const btn = document.createElement("button");
    btn.textContent = id;
    btn.addEventListener("click", () => void showViewer(id));
    list.appendChild(btn);
  }
  status.replaceChildren(list);
  board.replaceChildren();
}

async function showViewer(id: string): Promise<void> {
  const viewer = new ReplayViewer(api, id, el("board"), el("status"));
  await viewer.load();
  const controls = document.createElement("div");
  controls.className = "controls";
  const back = document.createElement("button");
  back.textContent = "|<";
  back.addEventListener("click", () => void viewer.seek(0));
  const prev = document.createElement("button");
  prev.textContent = "<";
  prev.addEventListener("click", () => void viewer.seek(viewer.step - 1));
  const playBtn = document.createElement("button");
  playBtn.textContent = "play";
  playBtn.addEventListener("click", () => viewer.play());
  const pauseBtn = document.createElement("button");
  pauseBtn.textContent = "pause";
  pauseBtn.addEventListener("click", () => viewer.pause());
  const next = document.createElement("button");
  next.textContent = ">";
  next.addEventListener("click", () => void viewer.stepForward());
  const end = document.createElement("button");
  end.textContent = ">|";
  end.addEventListener("click", () => void viewer.seek(viewer.lastStep));
  const slider = document.createElement("input");
  slider.type = "range";
  slider.min = "0";
  slider.max = String(viewer.lastStep);
  slider.addEventListener("input", () => void viewer.seek(Number(slider.value)));
  controls.append(back, prev, playBtn, pauseBtn, next, end, slider);
  el("status").prepend(controls);
}

function route(): void {
  const hash = location.hash || "#play";
  if (hash.startsWith("#replay/")) {
    void showViewer(hash.slice("#replay/".length));
  } else if (hash === "#replays") {
    void showReplays();
  } else {
    void showPlay();
  }
}

window.addEventListener("hashchange", route);
window.addEventListener("DOMContentLoaded", route);
