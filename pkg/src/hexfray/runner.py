"""Headless match running, statistics, and replay serialization.

A replay is the complete causal record of one game: the scenario snapshot,
every action-selection step with its score events (plus any dispatch audit),
and the final score.  Replays serialize to canonical JSON (sorted keys,
compact separators) so identical games are byte-identical files, and import
always re-simulates to prove integrity.
"""

from __future__ import annotations

import hashlib
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from .agents.base import BehaviorModel, LegalityError, checked_act
from .engine import (
    BLUE,
    Action,
    GameState,
    ScenarioParams,
    advance_phase,
    apply_action,
    canonical_dumps,
    generate_scenario,
    is_terminal,
    scenario_from_dict,
    scenario_to_dict,
)
from .hexgrid import HexCoord

REPLAY_FORMAT_VERSION = 1

ScenarioSpec = ScenarioParams | Callable[[int], GameState]


class ReplayIntegrityError(ValueError):
    pass


class ReplayVersionError(ValueError):
    pass


@dataclass
class Seeds:
    scenario: int = 0
    blue_policy: int = 0
    red_policy: int = 0


@dataclass
class Replay:
    scenario: dict  # initial-state snapshot
    steps: list[dict]
    final_score: float
    seeds: Seeds
    format_version: int = REPLAY_FORMAT_VERSION
    aborted: dict | None = None  # {"agent", "step", "error"} when a game died

    def to_dict(self) -> dict:
        d = {
            "v": self.format_version,
            "scenario": self.scenario,
            "steps": self.steps,
            "final_score": self.final_score,
            "seeds": {
                "scenario": self.seeds.scenario,
                "blue_policy": self.seeds.blue_policy,
                "red_policy": self.seeds.red_policy,
            },
        }
        if self.aborted is not None:
            d["aborted"] = self.aborted
        return d

    @staticmethod
    def from_dict(d: dict) -> "Replay":
        if d.get("v") != REPLAY_FORMAT_VERSION:
            raise ReplayVersionError(f"unsupported replay version {d.get('v')!r}")
        return Replay(
            scenario=d["scenario"],
            steps=d["steps"],
            final_score=d["final_score"],
            seeds=Seeds(**d["seeds"]),
            aborted=d.get("aborted"),
        )


def action_to_dict(a: Action) -> dict:
    d = {"kind": a.kind}
    if a.target is not None:
        d["target"] = [a.target.col, a.target.row]
    return d


def action_from_dict(d: dict) -> Action:
    target = d.get("target")
    return Action(d["kind"], HexCoord(*target) if target is not None else None)


def _event_dicts(events) -> list[dict]:
    return [{"phase": e.phase, "kind": e.kind, "amount": e.amount} for e in events]


def play_game(
    blue: BehaviorModel, red: BehaviorModel, scenario: GameState, seeds: Seeds
) -> Replay:
    """Run one game to termination, recording every step.

    An illegal agent action aborts the game; the replay keeps everything up
    to the fault and attributes it to the offending agent.
    """
    blue.begin_game(seeds.blue_policy)
    red.begin_game(seeds.red_policy)
    steps: list[dict] = []
    s = scenario
    aborted = None
    while not is_terminal(s):
        if s.cursor is None:
            phase = s.phase
            s, events = advance_phase(s)
            if events:
                steps.append(
                    {"type": "phase_end", "phase": phase, "events": _event_dicts(events)}
                )
            continue
        agent = blue if s.on_move == BLUE else red
        unit_id = s.cursor
        try:
            if hasattr(agent, "act_with_audit"):
                action, audit = agent.act_with_audit(s, unit_id)
            else:
                action, audit = checked_act(agent, s, unit_id), None
        except LegalityError as err:
            aborted = {"agent": agent.name, "step": len(steps), "error": str(err)}
            break
        record = {
            "type": "action",
            "phase": s.phase,
            "unit_id": unit_id,
            "action": action_to_dict(action),
        }
        s, events = apply_action(s, unit_id, action)
        record["events"] = _event_dicts(events)
        if audit is not None:
            record["audit"] = audit
        steps.append(record)
    return Replay(
        scenario=scenario_to_dict(scenario),
        steps=steps,
        final_score=s.score,
        seeds=seeds,
        aborted=aborted,
    )


def replay_prefix_state(replay: Replay, n_steps: int) -> GameState:
    """State after the first n_steps records (replay-scrubber support); the
    walked prefix is still verified event by event."""
    prefix = Replay(
        scenario=replay.scenario,
        steps=replay.steps[:n_steps],
        final_score=replay.final_score,
        seeds=replay.seeds,
        aborted=replay.aborted,
    )
    return _walk(prefix)


def _walk(replay: Replay) -> GameState:
    s = scenario_from_dict(replay.scenario)
    i = 0
    steps = replay.steps
    while i < len(steps):
        rec = steps[i]
        if rec["type"] == "phase_end":
            if s.cursor is not None:
                raise ReplayIntegrityError(f"step {i}: phase_end while unit {s.cursor} pending")
            phase = s.phase
            s, events = advance_phase(s)
            if rec["phase"] != phase or _event_dicts(events) != rec["events"]:
                raise ReplayIntegrityError(f"step {i}: phase_end events diverge")
            i += 1
            continue
        while s.cursor is None and not is_terminal(s):
            s, events = advance_phase(s)
            if events:
                raise ReplayIntegrityError(f"step {i}: unrecorded score events at phase end")
        if is_terminal(s):
            raise ReplayIntegrityError(f"step {i}: game already terminal")
        if rec["phase"] != s.phase:
            raise ReplayIntegrityError(
                f"step {i}: recorded phase {rec['phase']} != engine phase {s.phase}"
            )
        try:
            s, events = apply_action(s, rec["unit_id"], action_from_dict(rec["action"]))
        except Exception as err:
            raise ReplayIntegrityError(f"step {i}: action rejected by engine: {err}") from err
        if _event_dicts(events) != rec["events"]:
            raise ReplayIntegrityError(f"step {i}: score events diverge")
        i += 1
    return s


def resimulate(replay: Replay) -> GameState:
    """Replay the recorded actions through the engine, verifying that every
    score event and the final score reproduce exactly."""
    s = _walk(replay)
    # drain trailing phase boundaries that emitted no events
    while not is_terminal(s) and s.cursor is None and replay.aborted is None:
        s, events = advance_phase(s)
        if events:
            raise ReplayIntegrityError("unrecorded score events after final step")
    if replay.aborted is None and not is_terminal(s):
        raise ReplayIntegrityError("replay ends before the game is terminal")
    if s.score != replay.final_score:
        raise ReplayIntegrityError(
            f"final score {s.score!r} != recorded {replay.final_score!r}"
        )
    return s


def export_replay(replay: Replay, path: str | Path) -> None:
    Path(path).write_text(canonical_dumps(replay.to_dict()) + "\n")


def import_replay(path: str | Path) -> Replay:
    try:
        d = json.loads(Path(path).read_text())
    except json.JSONDecodeError as err:
        raise ReplayIntegrityError(f"corrupt replay file: {err}") from err
    replay = Replay.from_dict(d)
    resimulate(replay)
    return replay


# --- Statistical evaluation ---------------------------------------------------


@dataclass
class EvalReport:
    n_games: int
    completed: int
    aborted: int
    mean_score: float
    std_dev: float
    scores: list[float]
    config_fingerprint: str

    def to_dict(self) -> dict:
        return {
            "n_games": self.n_games,
            "completed": self.completed,
            "aborted": self.aborted,
            "mean_score": self.mean_score,
            "std_dev": self.std_dev,
            "scores": self.scores,
            "config_fingerprint": self.config_fingerprint,
        }


def _make_scenario(spec: ScenarioSpec, seed: int) -> GameState:
    if isinstance(spec, ScenarioParams):
        return generate_scenario(spec, seed)
    return spec(seed)


def _eval_one(args) -> tuple[float | None, bool]:
    blue, red, spec, seeds = args
    scenario = _make_scenario(spec, seeds.scenario)
    replay = play_game(blue, red, scenario, seeds)
    if replay.aborted is not None:
        return None, True
    return replay.final_score, False


def evaluate(
    blue: BehaviorModel,
    red: BehaviorModel,
    scenario: ScenarioSpec,
    n_games: int,
    base_seed: int,
    mode: str = "random",
    workers: int = 1,
) -> EvalReport:
    """n_games of blue vs red with deterministic seed assignment.

    random mode varies the scenario seed per game (base_seed + i); fixed mode
    reuses base_seed for every scenario while policy seeds still vary.
    Workers > 1 fan out across processes; the reduction is order-independent
    so the report matches the sequential run exactly.
    """
    if n_games < 1:
        raise ValueError("n_games must be >= 1")
    if mode not in ("random", "fixed"):
        raise ValueError(f"unknown mode {mode!r}")
    tasks = []
    for i in range(n_games):
        scen_seed = base_seed if mode == "fixed" else base_seed + i
        tasks.append((blue, red, scenario, Seeds(scen_seed, base_seed + i, base_seed + n_games + i)))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_eval_one, tasks, chunksize=8))
    else:
        results = [_eval_one(t) for t in tasks]
    scores = [r[0] for r in results if not r[1]]
    aborted = sum(1 for r in results if r[1])
    scen_desc = (
        repr(scenario)
        if isinstance(scenario, ScenarioParams)
        else getattr(scenario, "__name__", "custom")
    )
    fingerprint = hashlib.sha256(
        canonical_dumps(
            {
                "blue": getattr(blue, "name", "?"),
                "red": getattr(red, "name", "?"),
                "scenario": scen_desc,
                "n_games": n_games,
                "base_seed": base_seed,
                "mode": mode,
            }
        ).encode()
    ).hexdigest()[:16]
    if scores:
        mean = float(np.mean(scores))
        std = float(np.std(scores))
    else:
        mean, std = float("nan"), float("nan")
    return EvalReport(
        n_games=n_games,
        completed=len(scores),
        aborted=aborted,
        mean_score=mean,
        std_dev=std,
        scores=[float(x) for x in scores],
        config_fingerprint=fingerprint,
    )
