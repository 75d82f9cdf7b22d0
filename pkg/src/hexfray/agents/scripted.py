"""Deterministic scripted policies.

Tie-breaking is uniform everywhere: candidate moves keep the fixed neighbor
order from ``legal_actions``, targets break ties by ascending unit id.
"""

from __future__ import annotations

from ..engine import ATTACK, MOVE, PASS, Action, GameState, Unit, legal_actions
from ..hexgrid import HexCoord, Terrain, distance
from .base import BehaviorModel


class PolicyLookupError(KeyError):
    pass


def _enemies(s: GameState, unit: Unit) -> list[Unit]:
    return [u for u in s.units if u.faction != unit.faction]


def _nearest_enemy(s: GameState, unit: Unit) -> Unit | None:
    enemies = _enemies(s, unit)
    if not enemies:
        return None
    return min(enemies, key=lambda u: (distance(unit.pos, u.pos), u.id))


def _attack_weakest(s: GameState, unit: Unit, max_range: int | None = None) -> Action | None:
    attacks = [a for a in legal_actions(s, unit.id) if a.kind == ATTACK]
    if max_range is not None:
        attacks = [a for a in attacks if distance(unit.pos, a.target) <= max_range]
    if not attacks:
        return None
    def key(a):
        target = s.unit_at(a.target)
        return (target.strength, target.id)
    return min(attacks, key=key)


def _move_toward(s: GameState, unit: Unit, goal: HexCoord) -> Action | None:
    """First legal move that strictly reduces distance to goal, preferring
    the largest reduction; None when no move improves."""
    best = None
    best_d = distance(unit.pos, goal)
    for a in legal_actions(s, unit.id):
        if a.kind != MOVE:
            continue
        d = distance(a.target, goal)
        if d < best_d:
            best, best_d = a, d
    return best


def _move_away(s: GameState, unit: Unit, threat: HexCoord) -> Action | None:
    best = None
    best_d = distance(unit.pos, threat)
    for a in legal_actions(s, unit.id):
        if a.kind != MOVE:
            continue
        d = distance(a.target, threat)
        if d > best_d:
            best, best_d = a, d
    return best


def greedy_attack(s: GameState, unit_id: int) -> Action:
    """Attack the weakest enemy in range, else close on the nearest enemy."""
    unit = s.unit(unit_id)
    attack = _attack_weakest(s, unit)
    if attack is not None:
        return attack
    enemy = _nearest_enemy(s, unit)
    if enemy is not None:
        move = _move_toward(s, unit, enemy.pos)
        if move is not None:
            return move
    return Action(PASS)


def hold_city(s: GameState, unit_id: int) -> Action:
    """Occupy the nearest urban hex; fight only what stands adjacent."""
    unit = s.unit(unit_id)
    attack = _attack_weakest(s, unit, max_range=1)
    if attack is not None:
        return attack
    if s.board.terrain_at(unit.pos) == Terrain.URBAN:
        return Action(PASS)
    cities = s.board.urban_hexes()
    if cities:
        goal = min(cities, key=lambda h: (distance(unit.pos, h), h.row, h.col))
        move = _move_toward(s, unit, goal)
        if move is not None:
            return move
    return Action(PASS)


def withdraw(s: GameState, unit_id: int) -> Action:
    unit = s.unit(unit_id)
    enemy = _nearest_enemy(s, unit)
    if enemy is not None:
        move = _move_away(s, unit, enemy.pos)
        if move is not None:
            return move
    return Action(PASS)


def pass_only(s: GameState, unit_id: int) -> Action:
    return Action(PASS)


def baseline(s: GameState, unit_id: int) -> Action:
    """Reference scripted agent: secure any unheld city, then fight."""
    own = {u.pos for u in s.living(s.unit(unit_id).faction)}
    unheld = [h for h in s.board.urban_hexes() if h not in own]
    if unheld:
        return hold_city(s, unit_id)
    return greedy_attack(s, unit_id)


SCRIPTED_POLICIES = {
    "greedy_attack": greedy_attack,
    "hold_city": hold_city,
    "withdraw": withdraw,
    "pass_only": pass_only,
    "baseline": baseline,
}


def scripted_act(policy_name: str, s: GameState, unit_id: int) -> Action:
    try:
        fn = SCRIPTED_POLICIES[policy_name]
    except KeyError:
        raise PolicyLookupError(
            f"unknown scripted policy {policy_name!r}; "
            f"available: {sorted(SCRIPTED_POLICIES)}"
        ) from None
    return fn(s, unit_id)


class ScriptedPolicy(BehaviorModel):
    kind = "scripted"

    def __init__(self, name: str):
        if name not in SCRIPTED_POLICIES:
            raise PolicyLookupError(f"unknown scripted policy {name!r}")
        self.name = name
        self._fn = SCRIPTED_POLICIES[name]

    def act(self, s: GameState, unit_id: int) -> Action:
        return self._fn(s, unit_id)
