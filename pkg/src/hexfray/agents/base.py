"""Behavior-model protocol and the uniform-random baseline."""

from __future__ import annotations

import numpy as np

from ..engine import Action, GameState, legal_actions


class LegalityError(RuntimeError):
    """A behavior model produced an action outside the legal set."""


class BehaviorModel:
    """A policy mapping (state, acting unit) to an action.

    Subclasses set ``name`` and ``kind`` ("scripted" or "learned") and
    implement ``act``.  Stateful or stochastic models reset per game via
    ``begin_game``.
    """

    name = "behavior"
    kind = "scripted"

    def act(self, s: GameState, unit_id: int) -> Action:
        raise NotImplementedError

    def begin_game(self, seed: int) -> None:
        """Called once before each game; seed is the per-game policy seed."""

    def __repr__(self):
        return f"<{type(self).__name__} {self.name}>"


def checked_act(model: BehaviorModel, s: GameState, unit_id: int) -> Action:
    """Dispatch with the legality contract enforced."""
    action = model.act(s, unit_id)
    if action not in legal_actions(s, unit_id):
        raise LegalityError(
            f"behavior {model.name!r} returned illegal action {action} "
            f"for unit {unit_id}"
        )
    return action


class RandomPolicy(BehaviorModel):
    """Uniform choice over the legal action list."""

    name = "random"
    kind = "scripted"

    def __init__(self, seed: int = 0):
        self._seed = seed
        self._rng = np.random.default_rng(seed)

    def begin_game(self, seed: int) -> None:
        self._rng = np.random.default_rng(seed)

    def act(self, s: GameState, unit_id: int) -> Action:
        acts = legal_actions(s, unit_id)
        return acts[int(self._rng.integers(len(acts)))]
