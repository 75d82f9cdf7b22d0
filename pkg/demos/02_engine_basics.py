# The turn-based combat loop: scenario generation, legal actions, combat
# resolution, phase scoring, and determinism.

import numpy as np

from hexfray.engine import (
    ScenarioParams,
    advance_phase,
    apply_action,
    canonical_dumps,
    generate_scenario,
    is_terminal,
    legal_actions,
    scenario_to_dict,
)

params = ScenarioParams(width=10, height=10, n_blue=3, n_red=3, n_cities=1, max_phases=30)
state = generate_scenario(params, seed=7)

print(f"board {state.board.width}x{state.board.height}, city at "
      f"{[tuple(h) for h in state.board.urban_hexes()]}")
for u in state.units:
    print(f"  unit {u.id}: {u.faction} {u.kind} str={u.strength:.0f} at {tuple(u.pos)}")

# the unit on move sees pass + moves + attacks, in a deterministic order
acts = legal_actions(state, state.cursor)
print(f"\nunit {state.cursor} has {len(acts)} legal actions; first three: {acts[:3]}")

# drive one full game with uniform-random choices
rng = np.random.default_rng(0)
s = state
while not is_terminal(s):
    if s.cursor is None:
        s, events = advance_phase(s)
        for e in events:
            print(f"  phase {e.phase}: {e.kind} +{e.amount:.0f}")
        continue
    options = legal_actions(s, s.cursor)
    s, events = apply_action(s, s.cursor, options[rng.integers(len(options))])
    for e in events:
        print(f"  phase {e.phase}: unit {s.cursor} {e.kind} {e.amount:.1f}")

print(f"\nfinal score (blue perspective): {s.score:.1f} after {s.phase - 1} phases")

# same params + seed regenerate the identical scenario, byte for byte
again = generate_scenario(params, seed=7)
print("scenario regeneration byte-identical:",
      canonical_dumps(scenario_to_dict(again)) == canonical_dumps(scenario_to_dict(state)))
