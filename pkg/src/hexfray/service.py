"""HTTP/WebSocket service for interactive play and replay browsing.

The human always plays blue; the red faction runs any registered agent.
All game mutation goes through the engine's legal transitions, one lock per
game.  Every state change appends a sequence-numbered event that the
game's WebSocket stream replays in order, so clients can detect gaps and
refetch.  All payloads carry a schema version field "v".
"""

from __future__ import annotations

import asyncio
import json
import threading
import uuid
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, HTTPException, WebSocket, WebSocketDisconnect
from fastapi.staticfiles import StaticFiles

from .agents.base import BehaviorModel, checked_act
from .engine import (
    BLUE,
    EngineError,
    GameState,
    ScenarioParams,
    advance_phase,
    apply_action,
    canonical_dumps,
    generate_scenario,
    is_terminal,
    legal_actions,
    scenario_to_dict,
    state_to_dict,
)
from .registry import AgentSpecError, resolve_agent
from .runner import (
    Replay,
    ReplayIntegrityError,
    Seeds,
    action_from_dict,
    action_to_dict,
    export_replay,
    import_replay,
    replay_prefix_state,
)

SCHEMA_VERSION = 1


def _event_dicts(events):
    return [{"phase": e.phase, "kind": e.kind, "amount": e.amount} for e in events]


@dataclass
class GameSession:
    game_id: str
    state: GameState
    red: BehaviorModel
    seeds: Seeds
    scenario_snapshot: dict
    lock: threading.Lock = field(default_factory=threading.Lock)
    seq: int = 0
    events: list[dict] = field(default_factory=list)
    steps: list[dict] = field(default_factory=list)  # replay records

    def emit(self, kind: str, extra: dict | None = None) -> None:
        self.seq += 1
        event = {"v": SCHEMA_VERSION, "seq": self.seq, "type": kind}
        event["state"] = state_to_dict(self.state)
        if extra:
            event.update(extra)
        self.events.append(event)

    def replay(self) -> Replay:
        return Replay(
            scenario=self.scenario_snapshot,
            steps=self.steps,
            final_score=self.state.score,
            seeds=self.seeds,
        )


def create_app(static_dir: str | None = None, data_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="hexfray")
    games: dict[str, GameSession] = {}
    replays_dir = Path(data_dir or "data") / "replays"

    def get_game(game_id: str) -> GameSession:
        game = games.get(game_id)
        if game is None:
            raise HTTPException(status_code=404, detail=f"no game {game_id!r}")
        return game

    def run_ai_and_phases(game: GameSession) -> None:
        """Advance reds and phase boundaries until blue's turn or terminal."""
        s = game.state
        while not is_terminal(s):
            if s.cursor is None:
                phase = s.phase
                s, events = advance_phase(s)
                game.state = s
                if events:
                    game.steps.append(
                        {"type": "phase_end", "phase": phase, "events": _event_dicts(events)}
                    )
                game.emit("phase", {"events": _event_dicts(events)})
                continue
            if s.on_move == BLUE:
                break
            unit_id = s.cursor
            action = checked_act(game.red, s, unit_id)
            record = {
                "type": "action",
                "phase": s.phase,
                "unit_id": unit_id,
                "action": action_to_dict(action),
            }
            s, events = apply_action(s, unit_id, action)
            record["events"] = _event_dicts(events)
            game.state = s
            game.steps.append(record)
            game.emit("ai_action", {"unit_id": unit_id, "action": action_to_dict(action), "events": _event_dicts(events)})
        if is_terminal(game.state):
            replays_dir.mkdir(parents=True, exist_ok=True)
            export_replay(game.replay(), replays_dir / f"{game.game_id}.json")
            game.emit("game_over", {"final_score": game.state.score})

    def state_payload(game: GameSession) -> dict:
        s = game.state
        legal = {}
        if not is_terminal(s) and s.on_move == BLUE:
            for u in s.living(BLUE):
                if not u.acted:
                    legal[str(u.id)] = [action_to_dict(a) for a in legal_actions(s, u.id)]
        return {
            "v": SCHEMA_VERSION,
            "game_id": game.game_id,
            "seq": game.seq,
            "state": state_to_dict(s),
            "legal_actions": legal,
            "final_score": s.score if is_terminal(s) else None,
        }

    @app.post("/games")
    def create_game(body: dict):
        params = body.get("scenario_params", {})
        seed = int(body.get("seed", 0))
        spec = body.get("ai_opponent", "baseline")
        try:
            red = resolve_agent(spec)
        except AgentSpecError as err:
            raise HTTPException(status_code=422, detail=str(err))
        try:
            scenario = generate_scenario(ScenarioParams(**params), seed)
        except (TypeError, EngineError) as err:
            raise HTTPException(status_code=422, detail=str(err))
        game_id = uuid.uuid4().hex[:12]
        seeds = Seeds(scenario=seed, blue_policy=0, red_policy=seed + 1)
        red.begin_game(seeds.red_policy)
        game = GameSession(
            game_id=game_id,
            state=scenario,
            red=red,
            seeds=seeds,
            scenario_snapshot=scenario_to_dict(scenario),
        )
        games[game_id] = game
        with game.lock:
            game.emit("created")
            run_ai_and_phases(game)  # in case red opens (no blue units)
        return {"v": SCHEMA_VERSION, "game_id": game_id}

    @app.get("/games/{game_id}/state")
    def get_state(game_id: str):
        game = get_game(game_id)
        with game.lock:
            return state_payload(game)

    @app.post("/games/{game_id}/actions")
    def post_action(game_id: str, body: dict):
        game = get_game(game_id)
        with game.lock:
            s = game.state
            if is_terminal(s):
                raise HTTPException(status_code=409, detail="game is over")
            try:
                unit_id = int(body["unit_id"])
                action = action_from_dict(body["action"])
            except (KeyError, TypeError, ValueError) as err:
                raise HTTPException(status_code=422, detail=f"malformed action: {err}")
            if s.on_move != BLUE:
                raise HTTPException(status_code=409, detail="not the human's turn")
            record = {
                "type": "action",
                "phase": s.phase,
                "unit_id": unit_id,
                "action": action_to_dict(action),
            }
            try:
                next_s, events = apply_action(s, unit_id, action)
            except EngineError as err:
                raise HTTPException(status_code=409, detail=str(err))
            game.state = next_s
            record["events"] = _event_dicts(events)
            game.steps.append(record)
            game.emit(
                "human_action",
                {"unit_id": unit_id, "action": action_to_dict(action), "events": _event_dicts(events)},
            )
            run_ai_and_phases(game)
            return state_payload(game)

    @app.get("/games/{game_id}/replay")
    def get_game_replay(game_id: str):
        game = get_game(game_id)
        with game.lock:
            if not is_terminal(game.state):
                raise HTTPException(status_code=409, detail="game still in progress")
            return game.replay().to_dict()

    @app.get("/replays")
    def list_replays():
        if not replays_dir.is_dir():
            return {"v": SCHEMA_VERSION, "replays": []}
        return {
            "v": SCHEMA_VERSION,
            "replays": sorted(p.stem for p in replays_dir.glob("*.json")),
        }

    @app.get("/replays/{replay_id}")
    def get_replay(replay_id: str):
        path = replays_dir / f"{replay_id}.json"
        if not path.is_file():
            raise HTTPException(status_code=404, detail=f"no replay {replay_id!r}")
        try:
            replay = import_replay(path)
        except ReplayIntegrityError as err:
            raise HTTPException(status_code=500, detail=f"replay failed integrity: {err}")
        return replay.to_dict()

    @app.get("/replays/{replay_id}/state_at/{step}")
    def replay_state_at(replay_id: str, step: int):
        path = replays_dir / f"{replay_id}.json"
        if not path.is_file():
            raise HTTPException(status_code=404, detail=f"no replay {replay_id!r}")
        replay = Replay.from_dict(json.loads(path.read_text()))
        if not 0 <= step <= len(replay.steps):
            raise HTTPException(status_code=422, detail="step out of range")
        try:
            s = replay_prefix_state(replay, step)
        except ReplayIntegrityError as err:
            raise HTTPException(status_code=500, detail=str(err))
        return {"v": SCHEMA_VERSION, "step": step, "state": state_to_dict(s)}

    @app.websocket("/games/{game_id}/stream")
    async def stream(ws: WebSocket, game_id: str):
        game = games.get(game_id)
        await ws.accept()
        if game is None:
            await ws.close(code=4404)
            return
        sent = 0
        receiver = asyncio.ensure_future(ws.receive())
        try:
            while True:
                while sent < len(game.events):
                    await ws.send_text(canonical_dumps(game.events[sent]))
                    sent += 1
                done, _ = await asyncio.wait({receiver}, timeout=0.05)
                if receiver in done:
                    msg = receiver.result()
                    if msg.get("type") == "websocket.disconnect":
                        return
                    receiver = asyncio.ensure_future(ws.receive())
        except WebSocketDisconnect:
            return
        finally:
            receiver.cancel()

    if static_dir:
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="static")

    return app


def serve_api(port: int = 8000, host: str = "127.0.0.1", static_dir=None, data_dir=None):
    """Run the service under uvicorn (blocking)."""
    import uvicorn

    app = create_app(static_dir=static_dir, data_dir=data_dir)
    uvicorn.run(app, host=host, port=port, log_level="warning")
