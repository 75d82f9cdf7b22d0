# Desk-scale Q-learning sanity drill: a single unit learns to walk to the
# city from the egocentric observation. Takes a couple of minutes on a CPU.

import collections

import numpy as np

from hexfray import scenarios
from hexfray.agents import DqnConfig, ScriptedPolicy, dqn_act, dqn_train
from hexfray.engine import advance_phase, apply_action, is_terminal
from hexfray.hexgrid import neighbors

cfg = DqnConfig(
    obs_mode="local7",
    train_steps=40_000,
    learning_rate=2e-2,
    target_sync=250,
    epsilon_end=0.05,
    eval_interval=10_000,
    eval_episodes=5,
    seed=0,
)
policy = dqn_train(scenarios.reach_city, cfg, ScriptedPolicy("pass_only"))

print("learning curve (step, mean eval score, std):")
for row in policy.learning_curve:
    print(f"  {row[0]:>6} {row[1]:8.2f} {row[2]:6.2f}")

# evaluate: how often does the greedy policy reach the city near-optimally?
wins = 0
for i in range(100):
    s = scenarios.reach_city(500_000 + i)
    city = s.board.urban_hexes()[0]
    start = s.unit(0).pos
    dist = {start: 0}
    queue = collections.deque([start])
    while queue:
        h = queue.popleft()
        for n in neighbors(h, s.board):
            if s.board.passable(n) and n not in dist:
                dist[n] = dist[h] + 1
                queue.append(n)
    optimal = dist[city]
    steps = 0
    while not is_terminal(s):
        if s.cursor is None:
            s, _ = advance_phase(s)
            continue
        s, _ = apply_action(s, s.cursor, dqn_act(policy, s, s.cursor))
        steps += 1
        if s.units and s.unit(0).pos == city:
            break
    if s.units and s.unit(0).pos == city and steps <= optimal + 2:
        wins += 1
print(f"\nreached the city within optimal+2 in {wins}/100 fresh episodes")
