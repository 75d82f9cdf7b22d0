"""Hand-built scenario families used by experiments, demos, and tests.

These sit beside ``generate_scenario`` for setups the random generator does
not express: single-unit navigation drills and the two-regime suite used to
exercise multi-model dispatch.
"""

from __future__ import annotations

import numpy as np

from .engine import ARMOR, BLUE, INFANTRY, RED, GameState, Unit, make_state
from .hexgrid import Board, HexCoord, Terrain


def _clear_board_with_city(width: int, height: int, city: HexCoord | None) -> Board:
    t = bytearray([Terrain.CLEAR] * (width * height))
    if city is not None:
        t[city.row * width + city.col] = Terrain.URBAN
    return Board(width, height, bytes(t))


def reach_city(seed: int, width: int = 5, height: int = 5, max_phases: int = 12) -> GameState:
    """Single blue infantry on a clear board with one city and no opponents.

    The only reward source is holding the city, so the optimal policy is the
    shortest path there; useful as a desk-scale learning sanity drill.
    """
    rng = np.random.default_rng(seed)
    n = width * height
    unit_i, city_i = rng.choice(n, size=2, replace=False)
    unit_pos = HexCoord(int(unit_i % width), int(unit_i // width))
    city = HexCoord(int(city_i % width), int(city_i // width))
    board = _clear_board_with_city(width, height, city)
    units = [Unit(0, BLUE, INFANTRY, 100.0, unit_pos)]
    return make_state(board, units, max_phases, seed=seed)


def regime_secure(seed: int) -> GameState:
    """Regime A: a city sits next to the blue spawn and the lone red unit is
    weak and far away.  Holding the city dominates chasing kills."""
    rng = np.random.default_rng(seed)
    rows = rng.permutation(np.arange(2, 8))
    city = HexCoord(2, int(rows[0]))
    board = _clear_board_with_city(10, 10, city)
    units = [
        Unit(0, BLUE, INFANTRY, 100.0, HexCoord(1, int(rows[1]))),
        Unit(1, BLUE, INFANTRY, 100.0, HexCoord(1, int(rows[2]))),
        Unit(2, RED, INFANTRY, 20.0, HexCoord(9, int(rows[3]))),
    ]
    return make_state(board, units, 30, seed=seed)


def regime_hunt(seed: int) -> GameState:
    """Regime B: no city, full-strength red units on the loose.  Kills are
    the only points available, so pursuit dominates sitting."""
    rng = np.random.default_rng(seed)
    rows = rng.permutation(np.arange(1, 9))
    board = _clear_board_with_city(10, 10, None)
    units = [
        Unit(0, BLUE, ARMOR, 100.0, HexCoord(1, int(rows[0]))),
        Unit(1, BLUE, ARMOR, 100.0, HexCoord(1, int(rows[1]))),
        Unit(2, RED, INFANTRY, 100.0, HexCoord(6, int(rows[2]))),
        Unit(3, RED, INFANTRY, 100.0, HexCoord(7, int(rows[3]))),
    ]
    return make_state(board, units, 30, seed=seed)


def two_regime_suite(seed: int) -> GameState:
    """Alternating scenario suite: even seeds secure, odd seeds hunt."""
    return regime_secure(seed) if seed % 2 == 0 else regime_hunt(seed)
