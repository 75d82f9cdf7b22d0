"""Hex-grid geometry on odd-q offset coordinates.

Hexes are addressed as (col, row) with odd columns shifted down half a hex
(flat-top layout).  All distance math is routed through cube coordinates so
the step metric is exact; offset coordinates exist only at the API surface
and in serialized form.
"""

from __future__ import annotations

import math
from enum import IntEnum
from typing import Iterator, NamedTuple


class CoordinateError(ValueError):
    """A coordinate is out of bounds or otherwise outside an operation's domain."""


class Terrain(IntEnum):
    CLEAR = 0
    ROUGH = 1
    URBAN = 2
    WATER = 3


TERRAIN_NAMES = {t: t.name.lower() for t in Terrain}
TERRAIN_BY_NAME = {t.name.lower(): t for t in Terrain}


class HexCoord(NamedTuple):
    col: int
    row: int


# Direction order is load-bearing: move-action encodings index into it.
DIRECTIONS = ("N", "NE", "SE", "S", "SW", "NW")

# (dcol, drow) per direction; odd columns sit half a hex lower, so the
# diagonal steps differ by column parity.
_EVEN_COL_STEPS = ((0, -1), (1, -1), (1, 0), (0, 1), (-1, 0), (-1, -1))
_ODD_COL_STEPS = ((0, -1), (1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0))

# Cube-coordinate deltas in the same N, NE, SE, S, SW, NW order.
_CUBE_DIRS = ((0, 1, -1), (1, 0, -1), (1, -1, 0), (0, -1, 1), (-1, 0, 1), (-1, 1, 0))

SQRT3 = math.sqrt(3.0)


class Board:
    """Rectangular hex board with per-hex terrain.

    Terrain is stored row-major, one byte per hex.  Boards are immutable and
    hashable so geometry caches can key on them.
    """

    __slots__ = ("width", "height", "terrain", "_hash")

    def __init__(self, width: int, height: int, terrain: bytes):
        if width < 2 or height < 2:
            raise ValueError(f"board must be at least 2x2, got {width}x{height}")
        terrain = bytes(terrain)
        if len(terrain) != width * height:
            raise ValueError(
                f"terrain length {len(terrain)} != width*height {width * height}"
            )
        if any(b > Terrain.WATER for b in terrain):
            raise ValueError("terrain byte out of range")
        object.__setattr__(self, "width", width)
        object.__setattr__(self, "height", height)
        object.__setattr__(self, "terrain", terrain)
        object.__setattr__(self, "_hash", hash((width, height, terrain)))

    def __setattr__(self, name, value):
        raise AttributeError("Board is immutable")

    def __eq__(self, other):
        return (
            isinstance(other, Board)
            and self.width == other.width
            and self.height == other.height
            and self.terrain == other.terrain
        )

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"Board({self.width}x{self.height})"

    def in_bounds(self, h: HexCoord) -> bool:
        return 0 <= h.col < self.width and 0 <= h.row < self.height

    def terrain_at(self, h: HexCoord) -> Terrain:
        if not self.in_bounds(h):
            raise CoordinateError(f"{h} out of bounds on {self!r}")
        return Terrain(self.terrain[h.row * self.width + h.col])

    def passable(self, h: HexCoord) -> bool:
        return self.terrain_at(h) != Terrain.WATER

    def all_hexes(self) -> Iterator[HexCoord]:
        """All board hexes in row-major order (row 0 col 0, row 0 col 1, ...)."""
        for row in range(self.height):
            for col in range(self.width):
                yield HexCoord(col, row)

    def urban_hexes(self) -> list[HexCoord]:
        return [h for h in self.all_hexes() if self.terrain_at(h) == Terrain.URBAN]


def uniform_board(width: int, height: int, terrain: Terrain = Terrain.CLEAR) -> Board:
    return Board(width, height, bytes([terrain]) * (width * height))


def offset_to_cube(h: HexCoord) -> tuple[int, int, int]:
    x = h.col
    z = h.row - (h.col - (h.col & 1)) // 2
    return (x, -x - z, z)


def cube_to_offset(x: int, z: int) -> HexCoord:
    return HexCoord(x, z + (x - (x & 1)) // 2)


def step(h: HexCoord, direction: int) -> HexCoord:
    """Neighbor of h in the given direction index, ignoring bounds."""
    steps = _ODD_COL_STEPS if h.col & 1 else _EVEN_COL_STEPS
    dcol, drow = steps[direction]
    return HexCoord(h.col + dcol, h.row + drow)


def neighbors(h: HexCoord, b: Board) -> list[HexCoord]:
    """In-bounds neighbors of h in fixed N, NE, SE, S, SW, NW order."""
    if not b.in_bounds(h):
        raise CoordinateError(f"{h} out of bounds on {b!r}")
    return [n for n in (step(h, d) for d in range(6)) if b.in_bounds(n)]


def distance(a: HexCoord, b: HexCoord) -> int:
    """Minimal number of hex steps between a and b (terrain-blind)."""
    ax, ay, az = offset_to_cube(a)
    bx, by, bz = offset_to_cube(b)
    return max(abs(ax - bx), abs(ay - by), abs(az - bz))


def ring(center: HexCoord, radius: int, b: Board) -> list[HexCoord]:
    """All in-bounds hexes at exactly `radius` steps from center.

    Walks the cube-coordinate ring clockwise starting due north, so the
    result order is deterministic and radius-1 matches neighbor order.
    """
    if not b.in_bounds(center):
        raise CoordinateError(f"{center} out of bounds on {b!r}")
    if radius < 0:
        raise ValueError("radius must be >= 0")
    if radius == 0:
        return [center]
    cx, cy, cz = offset_to_cube(center)
    nx, ny, nz = _CUBE_DIRS[0]
    x, y, z = cx + nx * radius, cy + ny * radius, cz + nz * radius
    out = []
    for side in (2, 3, 4, 5, 0, 1):  # SE, S, SW, NW, N, NE walk
        dx, dy, dz = _CUBE_DIRS[side]
        for _ in range(radius):
            h = cube_to_offset(x, z)
            if b.in_bounds(h):
                out.append(h)
            x, y, z = x + dx, y + dy, z + dz
    return out


def planar_center(h: HexCoord) -> tuple[float, float]:
    """Planar center of a unit-size flat-top hex; y grows downward with row."""
    return (1.5 * h.col, SQRT3 * (h.row + 0.5 * (h.col & 1)))


def border_sector(center: HexCoord, h: HexCoord, window_radius: int) -> tuple[int, int]:
    """Border cell of a (2R+1)^2 window hit first along the planar bearing to h.

    The offset vector from center to h is scaled until its Chebyshev length
    reaches R, then each axis is rounded to the nearest cell, half-way cases
    toward the smaller index (ties break to smaller wrow, then smaller wcol).
    Returns (wrow, wcol) with wrow 0 at the top.
    """
    if h == center:
        raise CoordinateError("border_sector is undefined for h == center")
    if window_radius < 1:
        raise ValueError("window_radius must be >= 1")
    cx, cy = planar_center(center)
    hx, hy = planar_center(h)
    dx, dy = hx - cx, hy - cy
    t = window_radius / max(abs(dx), abs(dy))
    wcol = window_radius + math.ceil(t * dx - 0.5)
    wrow = window_radius + math.ceil(t * dy - 0.5)
    return (wrow, wcol)
