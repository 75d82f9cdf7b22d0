"""State encodings: the 17-channel tensor and its dimension-invariant views.

Three encodings are produced from a :class:`~hexfray.engine.GameState`:

- ``encode_full``: 17 x H x W, one channel grid per feature (masks, per-kind
  strengths, occupancy, terrain one-hot, broadcast summaries).
- ``coarse_abstract``: block pooling to a fixed K x K grid; sums conserve
  channel totals, broadcast channels are mean-pooled so values stay
  board-size independent.
- ``local_egocentric``: fixed 7 x 7 window centered on the acting unit.
  The 5 x 5 interior copies the full tensor one-to-one (off-board cells read
  as water); every hex outside that box is weighted by a piecewise-linear
  decay in hex distance and accumulated into the border ring cell that its
  planar bearing points at, so the output shape never depends on board size.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np

from .engine import ARMOR, ARTILLERY, BLUE, INFANTRY, GameState
from .hexgrid import Board, HexCoord, Terrain

N_CHANNELS = 17
CH_ON_MOVE = 0
CH_BLUE_KIND = {INFANTRY: 1, ARMOR: 2, ARTILLERY: 3}
CH_RED_KIND = {INFANTRY: 4, ARMOR: 5, ARTILLERY: 6}
CH_BLUE_OCC = 7
CH_RED_OCC = 8
CH_TERRAIN = {Terrain.CLEAR: 9, Terrain.ROUGH: 10, Terrain.URBAN: 11, Terrain.WATER: 12}
CH_BLUE_TOTAL = 13
CH_RED_TOTAL = 14
CH_PHASE_LEFT = 15
CH_ON_MOVE_FACTION = 16
BROADCAST_CHANNELS = (13, 14, 15, 16)

WINDOW_RADIUS = 3  # 7x7 local window
WINDOW = 2 * WINDOW_RADIUS + 1
INTERIOR_RADIUS = 2  # 5x5 copied box


class StateError(ValueError):
    """Observation requested for a state it cannot encode (e.g. dead unit)."""


class ShapeError(ValueError):
    pass


class FormatError(ValueError):
    pass


@dataclass(frozen=True)
class DecaySpec:
    """Piecewise-linear far-field weights: 1 out to inner_radius, then linear
    to 0 at zero_distance."""

    inner_radius: int = 3
    zero_distance: int = 20

    def __post_init__(self):
        if self.zero_distance <= self.inner_radius:
            raise ValueError("zero_distance must exceed inner_radius")


def default_decay(board: Board) -> DecaySpec:
    # width + height bounds the hex distance between any two board hexes
    return DecaySpec(inner_radius=3, zero_distance=board.width + board.height)


def decay_weight(d, spec: DecaySpec):
    """Weight in [0, 1] for hex distance d; accepts scalars or arrays."""
    d = np.asarray(d, dtype=np.float64)
    w = (spec.zero_distance - d) / (spec.zero_distance - spec.inner_radius)
    w = np.clip(w, 0.0, 1.0)
    out = np.where(d <= spec.inner_radius, 1.0, w)
    return float(out) if out.ndim == 0 else out


@lru_cache(maxsize=32)
def _geom(board: Board):
    """Per-board geometry arrays, row-major flat index = row * W + col."""
    w, h = board.width, board.height
    cols = np.tile(np.arange(w), h)
    rows = np.repeat(np.arange(h), w)
    x = cols
    z = rows - (cols - (cols & 1)) // 2
    cube = np.stack([x, -x - z, z], axis=1)
    px = 1.5 * cols
    py = np.sqrt(3.0) * (rows + 0.5 * (cols & 1))
    terrain = np.frombuffer(board.terrain, dtype=np.uint8).reshape(h, w)
    terrain_onehot = np.zeros((4, h, w), dtype=np.float64)
    for t, ch in CH_TERRAIN.items():
        terrain_onehot[ch - 9] = terrain == int(t)
    return {"cube": cube, "px": px, "py": py, "terrain_onehot": terrain_onehot}


def encode_full(s: GameState, acting_unit_id: int | None) -> np.ndarray:
    """17 x H x W tensor of the state from the acting unit's turn.

    acting_unit_id may be None (no unit on move); the mask channel is then
    all zero.  A dead acting unit raises StateError.
    """
    h, w = s.board.height, s.board.width
    out = np.zeros((N_CHANNELS, h, w), dtype=np.float64)
    out[9:13] = _geom(s.board)["terrain_onehot"]

    acting = None
    if acting_unit_id is not None:
        acting = next((u for u in s.units if u.id == acting_unit_id), None)
        if acting is None:
            raise StateError(f"acting unit {acting_unit_id} is not alive")

    blue_total = 0.0
    red_total = 0.0
    for u in s.units:
        kind_ch = CH_BLUE_KIND[u.kind] if u.faction == BLUE else CH_RED_KIND[u.kind]
        occ_ch = CH_BLUE_OCC if u.faction == BLUE else CH_RED_OCC
        out[kind_ch, u.pos.row, u.pos.col] = u.strength / 100.0
        out[occ_ch, u.pos.row, u.pos.col] = 1.0
        if u.faction == BLUE:
            blue_total += u.strength
        else:
            red_total += u.strength
    if acting is not None:
        out[CH_ON_MOVE, acting.pos.row, acting.pos.col] = 1.0

    out[CH_BLUE_TOTAL] = blue_total / 100.0
    out[CH_RED_TOTAL] = red_total / 100.0
    out[CH_PHASE_LEFT] = max(0.0, (s.max_phases - s.phase + 1) / s.max_phases)
    out[CH_ON_MOVE_FACTION] = 1.0 if s.on_move == BLUE else 0.0
    return out


def coarse_abstract(t: np.ndarray, k: int = 5) -> np.ndarray:
    """Pool a C x H x W tensor to C x K x K blocks of size ceil(H/K) x ceil(W/K).

    Non-broadcast channels are sum-pooled (channel totals conserved exactly);
    broadcast channels are mean-pooled so their constants survive unscaled.
    Trailing blocks are ragged and may be empty on some H, K combinations;
    empty blocks read 0 for sums and the channel constant for means.
    """
    if t.ndim != 3:
        raise ShapeError(f"expected C x H x W tensor, got shape {t.shape}")
    c, h, w = t.shape
    if k > min(h, w):
        raise ShapeError(f"K={k} exceeds min board dimension {min(h, w)}")
    bh = -(-h // k)
    bw = -(-w // k)
    padded = np.zeros((c, k * bh, k * bw), dtype=np.float64)
    padded[:, :h, :w] = t
    sums = padded.reshape(c, k, bh, k, bw).sum(axis=(2, 4))

    broadcast = [ch for ch in BROADCAST_CHANNELS if ch < c]
    if broadcast:
        row_counts = np.bincount(np.arange(h) // bh, minlength=k)
        col_counts = np.bincount(np.arange(w) // bw, minlength=k)
        counts = np.outer(row_counts, col_counts).astype(np.float64)
        for ch in broadcast:
            mean = np.divide(
                sums[ch], counts, out=np.zeros((k, k)), where=counts > 0
            )
            fill = t[ch].mean()  # constant by contract; fills empty blocks
            sums[ch] = np.where(counts > 0, mean, fill)
    return sums


def coarse_cell_of(board: Board, h: HexCoord, k: int = 5) -> int:
    """Flat K x K cell index (row-major) that a board hex pools into."""
    bh = -(-board.height // k)
    bw = -(-board.width // k)
    return (h.row // bh) * k + (h.col // bw)


def coarse_cell_hexes(board: Board, cell: int, k: int = 5) -> list[HexCoord]:
    """Board hexes inside one coarse cell's block (may be empty for ragged K)."""
    bh = -(-board.height // k)
    bw = -(-board.width // k)
    cr, cc = divmod(cell, k)
    out = []
    for row in range(cr * bh, min((cr + 1) * bh, board.height)):
        for col in range(cc * bw, min((cc + 1) * bw, board.width)):
            out.append(HexCoord(col, row))
    return out


def local_egocentric(
    s: GameState, acting_unit_id: int, spec: DecaySpec | None = None
) -> np.ndarray:
    """17 x 7 x 7 egocentric window; shape is independent of board size."""
    acting = next((u for u in s.units if u.id == acting_unit_id), None)
    if acting is None:
        raise StateError(f"acting unit {acting_unit_id} is not alive")
    if spec is None:
        spec = default_decay(s.board)

    full = encode_full(s, acting_unit_id)
    board = s.board
    h, w = board.height, board.width
    out = np.zeros((N_CHANNELS, WINDOW, WINDOW), dtype=np.float64)
    out[13:] = full[13:, 0:1, 0:1]

    # interior 5x5: one-to-one offset copy; off-board cells read as water
    r0, c0 = acting.pos.row, acting.pos.col
    for dr in range(-INTERIOR_RADIUS, INTERIOR_RADIUS + 1):
        for dc in range(-INTERIOR_RADIUS, INTERIOR_RADIUS + 1):
            wr, wc = WINDOW_RADIUS + dr, WINDOW_RADIUS + dc
            row, col = r0 + dr, c0 + dc
            if 0 <= row < h and 0 <= col < w:
                out[0:13, wr, wc] = full[0:13, row, col]
            else:
                out[CH_TERRAIN[Terrain.WATER], wr, wc] = 1.0

    # far field: every on-board hex outside the interior box, decay-weighted
    # and accumulated into the border cell its planar bearing selects
    geom = _geom(board)
    center_idx = r0 * w + c0
    dcube = np.abs(geom["cube"] - geom["cube"][center_idx]).max(axis=1)
    rows = np.arange(h * w) // w
    cols = np.arange(h * w) % w
    far = (np.abs(rows - r0) > INTERIOR_RADIUS) | (np.abs(cols - c0) > INTERIOR_RADIUS)
    if far.any():
        weights = decay_weight(dcube[far], spec)
        dx = geom["px"][far] - geom["px"][center_idx]
        dy = geom["py"][far] - geom["py"][center_idx]
        scale = WINDOW_RADIUS / np.maximum(np.abs(dx), np.abs(dy))
        wcol = WINDOW_RADIUS + np.ceil(scale * dx - 0.5).astype(np.int64)
        wrow = WINDOW_RADIUS + np.ceil(scale * dy - 0.5).astype(np.int64)
        cells = wrow * WINDOW + wcol
        flat = full.reshape(N_CHANNELS, -1)[:, far]
        for ch in range(13):
            vals = flat[ch] * weights
            if vals.any():
                out[ch] += np.bincount(cells, weights=vals, minlength=WINDOW * WINDOW).reshape(
                    WINDOW, WINDOW
                )
    return out


# --- Tensor dump ------------------------------------------------------------
# Flat binary: 8-byte header of four little-endian uint16 (C, H, W, version),
# then float32 values in C-major, row-major order.

TENSOR_DUMP_VERSION = 1


def dump_tensor(t: np.ndarray, path: str | Path) -> None:
    if t.ndim != 3:
        raise ShapeError(f"expected C x H x W tensor, got shape {t.shape}")
    c, h, w = t.shape
    header = struct.pack("<4H", c, h, w, TENSOR_DUMP_VERSION)
    body = np.ascontiguousarray(t, dtype="<f4").tobytes()
    Path(path).write_bytes(header + body)


def load_tensor(path: str | Path) -> np.ndarray:
    raw = Path(path).read_bytes()
    if len(raw) < 8:
        raise FormatError("tensor file truncated: missing header")
    c, h, w, version = struct.unpack("<4H", raw[:8])
    if version != TENSOR_DUMP_VERSION:
        raise FormatError(f"unsupported tensor dump version {version}")
    expected = 8 + 4 * c * h * w
    if len(raw) != expected:
        raise FormatError(f"tensor file has {len(raw)} bytes, expected {expected}")
    return np.frombuffer(raw[8:], dtype="<f4").reshape(c, h, w).astype(np.float64)
