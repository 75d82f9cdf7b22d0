# Multi-model dispatch: per-behavior score predictors + argmax selection
# beat every single specialist on a mixed scenario suite.

import numpy as np

from hexfray import scenarios
from hexfray.agents import ScriptedPolicy
from hexfray.multimodel import (
    MultiModel,
    MultiModelAgent,
    generate_score_dataset,
    multimodel_act,
    train_predictor,
)
from hexfray.nnet import SgdConfig
from hexfray.runner import evaluate

# Two specialists: hold_city banks urban points, greedy_attack hunts kills.
# The suite alternates a city-rich regime with a no-city hunt regime, so
# neither specialist wins everywhere.
red = ScriptedPolicy("withdraw")
members = []
for name in ("hold_city", "greedy_attack"):
    ds = generate_score_dataset(
        ScriptedPolicy(name), red, 60, scenarios.two_regime_suite, seed=10_000
    )
    predictor = train_predictor(ds, name, SgdConfig(learning_rate=5e-3, seed=0), epochs=30)
    members.append((ScriptedPolicy(name), predictor))
    print(f"trained predictor for {name} on {len(ds)} action-selection records")

mm = MultiModelAgent(MultiModel(members))

# watch one dispatch: every predictor scores the observation, argmax wins
s = scenarios.regime_secure(123)
action, chosen, preds = multimodel_act(mm.mm, s, s.cursor)
print(f"\nsecure regime: predictions {np.round(preds, 1)} -> {mm.mm.behavior_names[chosen]}")
s = scenarios.regime_hunt(124)
action, chosen, preds = multimodel_act(mm.mm, s, s.cursor)
print(f"hunt regime:   predictions {np.round(preds, 1)} -> {mm.mm.behavior_names[chosen]}")

print("\nmean score over 300 mixed games:")
for label, agent in [("multimodel", mm),
                     ("hold_city only", ScriptedPolicy("hold_city")),
                     ("greedy_attack only", ScriptedPolicy("greedy_attack"))]:
    rep = evaluate(agent, red, scenarios.two_regime_suite, 300, 20_000, mode="random")
    print(f"  {label:18s} {rep.mean_score:8.2f} (std {rep.std_dev:.1f})")
