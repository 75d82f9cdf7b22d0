# The commander/manager/operator stack: subgoals flow down, tasks fan out,
# and one level trains while the others stay frozen.

from hexfray import scenarios
from hexfray.agents import ScriptedPolicy, play_score
from hexfray.engine import ScenarioParams, generate_scenario
from hexfray.hierarchy import (
    HierarchyAgent,
    HierarchyTrainConfig,
    bundle_hashes,
    commander_decide,
    manager_decide,
    mid_view,
    save_bundle,
    train_level,
)
from hexfray.observation import coarse_abstract, encode_full

s = generate_scenario(ScenarioParams(width=10, height=10, n_blue=3, n_red=3, n_cities=1), 5)

# commander: coarse 5x5 view -> posture + target cell + termination
coarse = coarse_abstract(encode_full(s, None), 5)
subgoal = commander_decide(coarse, objective="max_score")
print(f"subgoal: {subgoal.posture}, cell {subgoal.target_cell}, "
      f"terminates after {subgoal.termination.phases} phases")

# manager: 7x7 pooled view + subgoal -> one task per unit
tasks = manager_decide(mid_view(s), subgoal, s.living("blue"), s.board)
for t in tasks:
    print(f"  unit {t.unit_id}: {t.task} {tuple(t.objective_hex)}")

# the full scripted stack plays end to end
agent = HierarchyAgent(operator=None, commander_period=5)
score = play_score(agent, ScriptedPolicy("greedy_attack"), s)
print(f"\nscripted stack final score: {score:.1f}")

# train only the operator on the reach-the-city drill; commander and
# manager hashes must not move
cfg = HierarchyTrainConfig(
    scenario_factory=scenarios.reach_city,
    red_opponent=ScriptedPolicy("pass_only"),
    learning_rate=2e-2,
    target_sync=250,
    seed=0,
)
trained = train_level(agent, "operator", 8_000, cfg)

import tempfile
from pathlib import Path

with tempfile.TemporaryDirectory() as tmp:
    save_bundle(agent, Path(tmp) / "before")
    save_bundle(trained, Path(tmp) / "after")
    before, after = bundle_hashes(Path(tmp) / "before"), bundle_hashes(Path(tmp) / "after")
    for level in ("commander", "manager", "operator"):
        changed = "changed" if before[level] != after[level] else "frozen"
        print(f"  {level}: {changed}")
