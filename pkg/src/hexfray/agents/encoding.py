"""Fixed 13-slot action encoding.

Slot 0 is pass, slots 1-6 are moves by neighbor direction, slots 7-12 are
attacks by the target's bearing direction.  The encoding never depends on
board size, which is what lets one Q-network transfer across boards.
Artillery targets at range 2 fold into the bearing slot nearest their planar
direction; when several targets share a slot the nearest (then lowest id)
is the one the slot decodes to.
"""

from __future__ import annotations

import math

import numpy as np

from ..engine import MOVE, PASS, Action, GameState, legal_actions
from ..hexgrid import SQRT3, planar_center, step

N_SLOTS = 13
ACTION_ENCODING_VERSION = 1

# unit-length planar bearings of the six neighbor directions (y grows down)
_DIR_BEARINGS = np.array(
    [
        (0.0, -1.0),                        # N
        (1.5, -SQRT3 / 2),                  # NE
        (1.5, SQRT3 / 2),                   # SE
        (0.0, 1.0),                         # S
        (-1.5, SQRT3 / 2),                  # SW
        (-1.5, -SQRT3 / 2),                 # NW
    ]
)
_DIR_BEARINGS /= np.linalg.norm(_DIR_BEARINGS, axis=1, keepdims=True)


def bearing_direction(origin, target) -> int:
    """Index of the neighbor direction nearest the planar bearing to target."""
    ox, oy = planar_center(origin)
    tx, ty = planar_center(target)
    v = np.array([tx - ox, ty - oy])
    v /= math.hypot(*v)
    return int(np.argmax(_DIR_BEARINGS @ v))


def slot_table(s: GameState, unit_id: int) -> tuple[np.ndarray, list[Action | None]]:
    """(legal mask over 13 slots, slot -> action decode table)."""
    unit = s.unit(unit_id)
    mask = np.zeros(N_SLOTS, dtype=bool)
    table: list[Action | None] = [None] * N_SLOTS
    move_targets = {step(unit.pos, d): d for d in range(6)}
    attack_best: dict[int, tuple] = {}
    from ..hexgrid import distance  # local import to keep module load light

    for a in legal_actions(s, unit_id):
        if a.kind == PASS:
            mask[0] = True
            table[0] = a
        elif a.kind == MOVE:
            slot = 1 + move_targets[a.target]
            mask[slot] = True
            table[slot] = a
        else:  # attack
            target = s.unit_at(a.target)
            slot = 7 + bearing_direction(unit.pos, a.target)
            key = (distance(unit.pos, a.target), target.id)
            if slot not in attack_best or key < attack_best[slot]:
                attack_best[slot] = key
                mask[slot] = True
                table[slot] = a
    return mask, table


def masked_argmax(q: np.ndarray, mask: np.ndarray) -> int:
    """Greedy slot: argmax over legal slots, ties to the lowest index."""
    masked = np.where(mask, q, -np.inf)
    return int(np.argmax(masked))
