# Replays are byte-stable, tamper-evident records; evaluation reports are
# deterministic and parallelize without changing a digit.

import tempfile
from pathlib import Path

from hexfray.agents import ScriptedPolicy
from hexfray.engine import ScenarioParams, generate_scenario
from hexfray.runner import Seeds, evaluate, export_replay, import_replay, play_game, resimulate

scenario = generate_scenario(ScenarioParams(width=8, height=8, n_blue=3, n_red=3), 11)
replay = play_game(
    ScriptedPolicy("baseline"), ScriptedPolicy("greedy_attack"), scenario, Seeds(11, 0, 1)
)
print(f"recorded {len(replay.steps)} steps, final score {replay.final_score:.1f}")

with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "game.json"
    export_replay(replay, path)
    print(f"exported {path.stat().st_size} bytes of canonical JSON")

    # import re-simulates every recorded step through the engine
    back = import_replay(path)
    final = resimulate(back)
    print(f"re-simulation reproduces the final score exactly: {final.score == replay.final_score}")

    # second export of the imported replay is byte-identical
    path2 = Path(tmp) / "game2.json"
    export_replay(back, path2)
    print(f"export -> import -> export byte-identical: {path.read_bytes() == path2.read_bytes()}")

# statistics: same seeds, same report, any worker count
params = ScenarioParams(width=8, height=8, n_blue=3, n_red=3, max_phases=12)
seq = evaluate(ScriptedPolicy("baseline"), ScriptedPolicy("greedy_attack"), params, 30, 0, workers=1)
par = evaluate(ScriptedPolicy("baseline"), ScriptedPolicy("greedy_attack"), params, 30, 0, workers=4)
print(f"\nmean {seq.mean_score:.3f} std {seq.std_dev:.3f} over {seq.n_games} games")
print(f"parallel run identical: {seq.scores == par.scores}")
