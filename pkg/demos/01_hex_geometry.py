# Hex-grid geometry walkthrough: offset coordinates, distance, rings,
# and the bearing sectors that feed the egocentric observation border.

import numpy as np

from hexfray.hexgrid import HexCoord, border_sector, distance, neighbors, ring, uniform_board

board = uniform_board(10, 10)

# Neighbors come back in a fixed N, NE, SE, S, SW, NW order; odd columns
# sit half a hex lower, so the diagonal neighbors differ by column parity.
for h in [HexCoord(4, 4), HexCoord(5, 4), HexCoord(0, 0)]:
    print(f"neighbors of {tuple(h)}: {[tuple(n) for n in neighbors(h, board)]}")

# Distance is the exact minimal step count (cube-coordinate metric).
a, b = HexCoord(1, 1), HexCoord(8, 6)
print(f"\ndistance {tuple(a)} -> {tuple(b)} = {distance(a, b)} steps")

# Rings partition the board around any center.
center = HexCoord(5, 5)
for r in range(4):
    print(f"ring radius {r}: {len(ring(center, r, board))} hexes")

# border_sector maps any far hex onto the 24-cell border of a 7x7 window
# by planar bearing; due north always lands on the top-middle cell.
print("\nborder cells hit walking a column due north:")
for d in (3, 5, 8):
    h = HexCoord(5, 5 - d) if 5 - d >= 0 else HexCoord(5, 0)
    print(f"  {tuple(h)} (d={distance(center, h)}) -> {border_sector(center, h, 3)}")

# every non-center hex maps to exactly one border cell
cells = {border_sector(center, h, 3) for h in board.all_hexes() if h != center}
print(f"\ndistinct border cells used from {tuple(center)}: {len(cells)} of 24")
