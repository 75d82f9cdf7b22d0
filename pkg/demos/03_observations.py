# The three state encodings and why the abstractions are dimension
# invariant: the same agent inputs come out of any board size.

import numpy as np

from hexfray.engine import ScenarioParams, generate_scenario
from hexfray.observation import (
    DecaySpec,
    coarse_abstract,
    decay_weight,
    encode_full,
    local_egocentric,
)

for size in (10, 20, 30):
    s = generate_scenario(
        ScenarioParams(width=size, height=size, n_blue=3, n_red=3, n_cities=1), seed=4
    )
    full = encode_full(s, s.cursor)
    coarse = coarse_abstract(full, 5)
    local = local_egocentric(s, s.cursor)
    print(f"{size:>2}x{size:<2} full {full.shape}  coarse {coarse.shape}  local {local.shape}")

# sum pooling conserves channel totals exactly
s = generate_scenario(ScenarioParams(width=20, height=20, n_blue=4, n_red=4), seed=1)
full = encode_full(s, s.cursor)
coarse = coarse_abstract(full, 5)
print("\nblue strength mass: full", full[1:4].sum(), " coarse", coarse[1:4].sum())

# the far field fades linearly with hex distance between two breakpoints
spec = DecaySpec(inner_radius=3, zero_distance=13)
print("\ndecay weights by distance:")
print("  d:", list(range(0, 15)))
print("  w:", [round(float(decay_weight(d, spec)), 2) for d in range(0, 15)])

# a distant enemy shows up only in the border ring cell its bearing selects
local = local_egocentric(s, s.cursor, spec)
border = np.ones((7, 7), dtype=bool)
border[1:6, 1:6] = False
red_occ = local[8]
print("\nred-occupancy border mass by cell (7x7, interior masked):")
print(np.where(border, red_occ, 0).round(2))
