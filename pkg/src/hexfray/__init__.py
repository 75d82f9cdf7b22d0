"""hexfray: deterministic hex-grid combat simulation and learning agents.

Core layers:

- ``hexgrid``: odd-q offset hex geometry (distance, rings, bearing sectors).
- ``engine``: deterministic turn-based combat model and scenario generator.
- ``observation``: channel-tensor state encoding plus the dimension-invariant
  coarse and local egocentric abstractions.
- ``nnet``: small self-contained MLP with SGD/momentum and gradient checks.
- ``agents``: scripted policies and an in-repo DQN trainer.
- ``multimodel``: per-behavior score predictors dispatched by argmax.
- ``hierarchy``: three-level subgoal/task agent skeleton.
- ``runner``: headless matches, statistics, replays.
- ``service``: HTTP/WebSocket front door for the browser UI (imported lazily).
"""

__version__ = "0.1.0"
