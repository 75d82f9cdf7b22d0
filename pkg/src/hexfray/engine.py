"""Deterministic turn-based combat model and scenario generator.

The environment loop is: query ``legal_actions`` for the unit on move, apply
one with ``apply_action``, and call ``advance_phase`` once every unit has
acted.  Transitions are pure; a :class:`GameState` is never mutated, so a
single (scenario, action sequence) pair always replays to the identical
final state and score-event stream.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .hexgrid import (
    Board,
    HexCoord,
    Terrain,
    TERRAIN_BY_NAME,
    TERRAIN_NAMES,
    distance,
    neighbors,
)

BLUE = "blue"
RED = "red"
FACTIONS = (BLUE, RED)

INFANTRY = "infantry"
ARMOR = "armor"
ARTILLERY = "artillery"
UNIT_KINDS = (INFANTRY, ARMOR, ARTILLERY)

# Combat model constants.  The model is intentionally simple: damage is a
# product of attacker strength, a base rate, an attacker/defender type
# multiplier, and the defender's terrain cover.  No counterattack.
BASE_RATE = 0.3
TYPE_MULT = {(ARMOR, INFANTRY): 1.5, (INFANTRY, ARMOR): 0.75}
ARTILLERY_MULT = 1.25
TERRAIN_DEF = {Terrain.CLEAR: 1.0, Terrain.ROUGH: 0.75, Terrain.URBAN: 0.5}
ATTACK_RANGE = {INFANTRY: 1, ARMOR: 1, ARTILLERY: 2}
CITY_POINTS = 10.0
FULL_STRENGTH = 100.0

MOVE = "move"
ATTACK = "attack"
PASS = "pass"

KILL = "kill"
LOSS = "loss"
URBAN_HOLD = "urban_hold"


class EngineError(Exception):
    pass


class GenerationError(EngineError):
    """Scenario generation could not satisfy a placement constraint."""


class TurnOrderError(EngineError):
    """A unit was asked to act outside its turn."""


class RuleError(EngineError):
    """An action violates a game rule."""


class SequencingError(EngineError):
    """Phase bookkeeping called at the wrong time."""


@dataclass(frozen=True)
class Unit:
    id: int
    faction: str
    kind: str
    strength: float
    pos: HexCoord
    acted: bool = False  # has acted this phase


@dataclass(frozen=True)
class Action:
    kind: str  # move | attack | pass
    target: HexCoord | None = None


@dataclass(frozen=True)
class ScoreEvent:
    phase: int
    kind: str  # kill | loss | urban_hold
    amount: float


def signed_amount(e: ScoreEvent) -> float:
    """Blue-perspective contribution: kills and urban holds +, losses -."""
    return -e.amount if e.kind == LOSS else e.amount


@dataclass(frozen=True)
class GameState:
    board: Board
    units: tuple[Unit, ...]
    phase: int
    max_phases: int
    on_move: str
    cursor: int | None  # next unit id to act; None at a phase boundary
    score: float
    rng_seed: int
    # Factions the scenario started with; elimination only ends the game for
    # factions that were ever present (single-faction drill scenarios run to
    # the phase limit).
    factions_present: frozenset[str]

    def unit(self, unit_id: int) -> Unit:
        for u in self.units:
            if u.id == unit_id:
                return u
        raise RuleError(f"no living unit with id {unit_id}")

    def unit_at(self, pos: HexCoord) -> Unit | None:
        for u in self.units:
            if u.pos == pos:
                return u
        return None

    def living(self, faction: str) -> list[Unit]:
        return [u for u in self.units if u.faction == faction]


@dataclass(frozen=True)
class ScenarioParams:
    width: int = 10
    height: int = 10
    n_blue: int = 2  # typical range 2..4
    n_red: int = 2
    n_cities: int = 1
    max_phases: int = 30


def _next_cursor(units: tuple[Unit, ...], on_move: str) -> tuple[str, int | None]:
    """Lowest unacted living unit id of on_move, falling over to the other
    faction when exhausted; (on_move, None) marks the phase boundary."""
    for faction in (on_move, RED if on_move == BLUE else BLUE):
        pending = [u.id for u in units if u.faction == faction and not u.acted]
        if pending:
            return faction, min(pending)
    return on_move, None


def _initial_cursor(units: tuple[Unit, ...]) -> tuple[str, int | None]:
    on_move, cursor = _next_cursor(units, BLUE)
    return on_move, cursor


def generate_scenario(params: ScenarioParams, seed: int) -> GameState:
    """Seed-deterministic random scenario.

    Terrain is drawn per hex with relative weights 70 clear / 15 rough /
    10 water, then ``n_cities`` distinct hexes are overwritten as urban.
    Blue units start in the left third of the board, red in the right third,
    on distinct passable hexes at full strength.
    """
    p = params
    if p.width < 2 or p.height < 2:
        raise GenerationError("board must be at least 2x2")
    if min(p.n_blue, p.n_red) < 0 or p.n_blue + p.n_red < 1:
        raise GenerationError("need at least one unit")
    if p.n_cities < 0 or p.max_phases < 1:
        raise GenerationError("n_cities must be >= 0 and max_phases >= 1")
    if p.width * p.height < p.n_blue + p.n_red + p.n_cities:
        raise GenerationError("board too small for requested units and cities")

    rng = np.random.default_rng(seed)
    n = p.width * p.height
    weights = np.array([70.0, 15.0, 10.0])
    terrain = rng.choice(
        [Terrain.CLEAR, Terrain.ROUGH, Terrain.WATER], size=n, p=weights / weights.sum()
    ).astype(np.uint8)
    city_idx = rng.choice(n, size=p.n_cities, replace=False) if p.n_cities else []
    for i in city_idx:
        terrain[i] = Terrain.URBAN
    board = Board(p.width, p.height, bytes(terrain.tolist()))

    third = max(1, p.width // 3)
    zones = {BLUE: range(0, third), RED: range(p.width - third, p.width)}
    occupied: set[HexCoord] = set()
    units: list[Unit] = []
    uid = 0
    kind_probs = np.array([0.5, 0.25, 0.25])
    for faction, count in ((BLUE, p.n_blue), (RED, p.n_red)):
        cols = zones[faction]
        for _ in range(count):
            placed = False
            for _attempt in range(200):
                h = HexCoord(int(rng.choice(list(cols))), int(rng.integers(p.height)))
                if h not in occupied and board.passable(h):
                    occupied.add(h)
                    kind = UNIT_KINDS[int(rng.choice(3, p=kind_probs))]
                    units.append(Unit(uid, faction, kind, FULL_STRENGTH, h))
                    uid += 1
                    placed = True
                    break
            if not placed:
                raise GenerationError(
                    f"no free passable hex for a {faction} unit in columns "
                    f"{cols.start}..{cols.stop - 1} after 200 attempts"
                )

    units_t = tuple(units)
    on_move, cursor = _initial_cursor(units_t)
    return GameState(
        board=board,
        units=units_t,
        phase=1,
        max_phases=p.max_phases,
        on_move=on_move,
        cursor=cursor,
        score=0.0,
        rng_seed=seed,
        factions_present=frozenset(u.faction for u in units_t),
    )


def make_state(
    board: Board, units: list[Unit], max_phases: int, seed: int = 0
) -> GameState:
    """Assemble a phase-1 state from explicit parts (scenario builders, tests)."""
    seen: set[HexCoord] = set()
    for u in units:
        if not board.in_bounds(u.pos) or not board.passable(u.pos):
            raise GenerationError(f"unit {u.id} placed on impassable hex {u.pos}")
        if u.pos in seen:
            raise GenerationError(f"two units share hex {u.pos}")
        seen.add(u.pos)
    units_t = tuple(replace(u, acted=False) for u in units)
    on_move, cursor = _initial_cursor(units_t)
    return GameState(
        board=board,
        units=units_t,
        phase=1,
        max_phases=max_phases,
        on_move=on_move,
        cursor=cursor,
        score=0.0,
        rng_seed=seed,
        factions_present=frozenset(u.faction for u in units_t),
    )


def _check_may_act(s: GameState, unit_id: int) -> Unit:
    unit = None
    for u in s.units:
        if u.id == unit_id:
            unit = u
            break
    if unit is None:
        raise TurnOrderError(f"unit {unit_id} is not alive")
    if unit.faction != s.on_move:
        raise TurnOrderError(f"unit {unit_id} is {unit.faction}, {s.on_move} is on move")
    if unit.acted:
        raise TurnOrderError(f"unit {unit_id} already acted this phase")
    return unit


def legal_actions(s: GameState, unit_id: int) -> list[Action]:
    """Pass, then moves in neighbor order, then attacks by ascending target id."""
    unit = _check_may_act(s, unit_id)
    actions = [Action(PASS)]
    for n in neighbors(unit.pos, s.board):
        if s.board.passable(n) and s.unit_at(n) is None:
            actions.append(Action(MOVE, n))
    rng_ = ATTACK_RANGE[unit.kind]
    enemies = sorted(
        (u for u in s.units if u.faction != unit.faction and distance(unit.pos, u.pos) <= rng_),
        key=lambda u: u.id,
    )
    actions.extend(Action(ATTACK, e.pos) for e in enemies)
    return actions


def resolve_combat(attacker: Unit, defender: Unit, defender_terrain: Terrain) -> float:
    """Damage inflicted on the defender; deterministic, no counterattack."""
    if distance(attacker.pos, defender.pos) > ATTACK_RANGE[attacker.kind]:
        raise RuleError(
            f"{attacker.kind} at {attacker.pos} cannot reach {defender.pos}"
        )
    if attacker.kind == ARTILLERY:
        mult = ARTILLERY_MULT
    else:
        mult = TYPE_MULT.get((attacker.kind, defender.kind), 1.0)
    return attacker.strength * BASE_RATE * mult * TERRAIN_DEF[defender_terrain]


def apply_action(
    s: GameState, unit_id: int, a: Action
) -> tuple[GameState, list[ScoreEvent]]:
    """Pure transition: returns the successor state and any score events."""
    unit = _check_may_act(s, unit_id)
    events: list[ScoreEvent] = []
    units = list(s.units)
    idx = units.index(unit)

    if a.kind == PASS:
        units[idx] = replace(unit, acted=True)
    elif a.kind == MOVE:
        if a.target is None or a.target not in neighbors(unit.pos, s.board):
            raise RuleError(f"move target {a.target} is not adjacent to {unit.pos}")
        if not s.board.passable(a.target):
            raise RuleError(f"move target {a.target} is impassable")
        if s.unit_at(a.target) is not None:
            raise RuleError(f"move target {a.target} is occupied")
        units[idx] = replace(unit, pos=a.target, acted=True)
    elif a.kind == ATTACK:
        defender = s.unit_at(a.target) if a.target is not None else None
        if defender is None or defender.faction == unit.faction:
            raise RuleError(f"attack target {a.target} holds no enemy")
        if distance(unit.pos, defender.pos) > ATTACK_RANGE[unit.kind]:
            raise RuleError(f"attack target {a.target} is out of range")
        damage = resolve_combat(unit, defender, s.board.terrain_at(defender.pos))
        destroyed = min(damage, defender.strength)
        events.append(
            ScoreEvent(s.phase, KILL if unit.faction == BLUE else LOSS, destroyed)
        )
        didx = units.index(defender)
        remaining = defender.strength - damage
        if remaining <= 0:
            del units[didx]
            idx = units.index(unit)
        else:
            units[didx] = replace(defender, strength=remaining)
        units[idx] = replace(unit, acted=True)
    else:
        raise RuleError(f"unknown action kind {a.kind!r}")

    units_t = tuple(units)
    on_move, cursor = _next_cursor(units_t, s.on_move)
    score = s.score + sum(signed_amount(e) for e in events)
    next_s = replace(
        s, units=units_t, on_move=on_move, cursor=cursor, score=score
    )
    return next_s, events


def advance_phase(s: GameState) -> tuple[GameState, list[ScoreEvent]]:
    """Close the phase: award urban holds, reset acted flags, hand move to blue."""
    if s.cursor is not None:
        raise SequencingError(
            f"phase {s.phase} still has unit {s.cursor} to act"
        )
    events = [
        ScoreEvent(s.phase, URBAN_HOLD, CITY_POINTS)
        for u in s.units
        if u.faction == BLUE and s.board.terrain_at(u.pos) == Terrain.URBAN
    ]
    units_t = tuple(replace(u, acted=False) for u in s.units)
    on_move, cursor = _initial_cursor(units_t)
    next_s = replace(
        s,
        units=units_t,
        phase=s.phase + 1,
        on_move=on_move,
        cursor=cursor,
        score=s.score + sum(signed_amount(e) for e in events),
    )
    return next_s, events


def is_terminal(s: GameState) -> bool:
    if s.phase > s.max_phases:
        return True
    return any(not s.living(f) for f in s.factions_present)


# --- Scenario serialization -------------------------------------------------
#
# Scenario files describe the initial state only: terrain is run-length
# encoded row-major, units carry no acted flags, and the canonical JSON
# writer (sorted keys, compact separators) makes identical scenarios
# byte-identical.

SCENARIO_VERSION = 1


def _rle_encode(terrain: bytes) -> list[list]:
    runs: list[list] = []
    for b in terrain:
        name = TERRAIN_NAMES[Terrain(b)]
        if runs and runs[-1][1] == name:
            runs[-1][0] += 1
        else:
            runs.append([1, name])
    return runs


def _rle_decode(runs: list[list], expected_len: int) -> bytes:
    out = bytearray()
    for count, name in runs:
        out.extend(bytes([TERRAIN_BY_NAME[name]]) * count)
    if len(out) != expected_len:
        raise ValueError(f"terrain RLE decodes to {len(out)} hexes, expected {expected_len}")
    return bytes(out)


def scenario_to_dict(s: GameState) -> dict:
    return {
        "v": SCENARIO_VERSION,
        "width": s.board.width,
        "height": s.board.height,
        "terrain": _rle_encode(s.board.terrain),
        "units": [
            {
                "id": u.id,
                "faction": u.faction,
                "kind": u.kind,
                "strength": u.strength,
                "col": u.pos.col,
                "row": u.pos.row,
            }
            for u in s.units
        ],
        "max_phases": s.max_phases,
        "seed": s.rng_seed,
    }


def scenario_from_dict(d: dict) -> GameState:
    if d.get("v") != SCENARIO_VERSION:
        raise ValueError(f"unsupported scenario version {d.get('v')!r}")
    board = Board(d["width"], d["height"], _rle_decode(d["terrain"], d["width"] * d["height"]))
    units = [
        Unit(
            id=ud["id"],
            faction=ud["faction"],
            kind=ud["kind"],
            strength=float(ud["strength"]),
            pos=HexCoord(ud["col"], ud["row"]),
        )
        for ud in d["units"]
    ]
    return make_state(board, units, d["max_phases"], seed=d["seed"])


def canonical_dumps(obj) -> str:
    """Canonical JSON: sorted keys, compact separators, no NaN."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


def save_scenario(s: GameState, path: str | Path) -> None:
    Path(path).write_text(canonical_dumps(scenario_to_dict(s)) + "\n")


def load_scenario(path: str | Path) -> GameState:
    return scenario_from_dict(json.loads(Path(path).read_text()))


# --- Full-state serialization (service wire format) -------------------------


def state_to_dict(s: GameState) -> dict:
    d = scenario_to_dict(s)
    d["phase"] = s.phase
    d["on_move"] = s.on_move
    d["cursor"] = s.cursor
    d["score"] = s.score
    d["terminal"] = is_terminal(s)
    for u, ud in zip(s.units, d["units"]):
        ud["acted"] = u.acted
    return d
