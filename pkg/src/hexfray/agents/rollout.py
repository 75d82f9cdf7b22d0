"""Game loops shared by trainers: the blue-decision-step environment and a
lightweight score-only playout."""

from __future__ import annotations

from typing import Callable

from ..engine import (
    BLUE,
    Action,
    GameState,
    advance_phase,
    apply_action,
    is_terminal,
    signed_amount,
)
from .base import BehaviorModel, checked_act

ScenarioFactory = Callable[[int], GameState]


class BlueStepEnv:
    """Semi-MDP view for the blue learner.

    Each ``step`` applies one blue action, then rolls the red opponent and
    any phase boundary forward to the next blue decision point.  The reward
    is the signed sum of every score event emitted in that window, in raw
    score units (callers scale as they see fit).
    """

    def __init__(self, scenario_factory: ScenarioFactory, red_opponent: BehaviorModel):
        self.factory = scenario_factory
        self.red = red_opponent
        self.state: GameState | None = None
        self.acting_unit: int | None = None

    def _roll_to_blue(self) -> float:
        """Advance reds and phase boundaries; returns accumulated reward."""
        s = self.state
        reward = 0.0
        while not is_terminal(s):
            if s.cursor is None:
                s, events = advance_phase(s)
            elif s.on_move != BLUE:
                action = checked_act(self.red, s, s.cursor)
                s, events = apply_action(s, s.cursor, action)
            else:
                break
            reward += sum(signed_amount(e) for e in events)
        self.state = s
        self.acting_unit = s.cursor if not is_terminal(s) and s.on_move == BLUE else None
        return reward

    def reset(self, episode_seed: int) -> tuple[GameState, int | None]:
        self.state = self.factory(episode_seed)
        self.red.begin_game(episode_seed)
        self._roll_to_blue()
        return self.state, self.acting_unit

    def step(self, action: Action) -> tuple[GameState, int | None, float, bool]:
        if self.acting_unit is None:
            raise RuntimeError("no blue unit to act; reset or check done flag")
        s, events = apply_action(self.state, self.acting_unit, action)
        reward = sum(signed_amount(e) for e in events)
        self.state = s
        reward += self._roll_to_blue()
        done = is_terminal(self.state)
        return self.state, self.acting_unit, reward, done


def play_score(
    blue: BehaviorModel, red: BehaviorModel, scenario: GameState, policy_seed: int = 0
) -> float:
    """Run one full game and return the final blue score (no replay record)."""
    blue.begin_game(policy_seed)
    red.begin_game(policy_seed + 1)
    s = scenario
    while not is_terminal(s):
        if s.cursor is None:
            s, _ = advance_phase(s)
            continue
        agent = blue if s.on_move == BLUE else red
        s, _ = apply_action(s, s.cursor, checked_act(agent, s, s.cursor))
    return s.score
