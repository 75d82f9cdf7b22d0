import json

import pytest

from hexfray.cli import main
from hexfray.engine import load_scenario
from hexfray.registry import AgentSpecError, resolve_agent
from hexfray.runner import import_replay


class TestRegistry:
    def test_scripted_and_random(self):
        assert resolve_agent("baseline").name == "baseline"
        assert resolve_agent("random").name == "random"
        assert resolve_agent("random:7").name == "random"

    def test_unknown_spec(self):
        with pytest.raises(AgentSpecError):
            resolve_agent("skynet")


class TestCli:
    def test_gen_scenario(self, tmp_path, capsys):
        out = tmp_path / "scn.json"
        assert main(["gen-scenario", "--width", "8", "--height", "8", "--seed", "3", "--out", str(out)]) == 0
        s = load_scenario(out)
        assert s.board.width == 8
        assert "wrote scenario" in capsys.readouterr().out

    def test_play_writes_valid_replay(self, tmp_path, capsys):
        out = tmp_path / "r.json"
        rc = main([
            "play", "--width", "7", "--height", "7", "--phases", "6",
            "--blue-agent", "baseline", "--red-agent", "withdraw",
            "--seed", "2", "--out", str(out),
        ])
        assert rc == 0
        replay = import_replay(out)  # re-simulates
        assert replay.aborted is None

    def test_play_from_scenario_file(self, tmp_path):
        scn = tmp_path / "scn.json"
        main(["gen-scenario", "--width", "7", "--height", "7", "--phases", "5", "--seed", "1", "--out", str(scn)])
        out = tmp_path / "r.json"
        assert main(["play", "--scenario", str(scn), "--out", str(out)]) == 0
        import_replay(out)

    def test_evaluate_json_report(self, tmp_path, capsys):
        report_path = tmp_path / "report.json"
        rc = main([
            "evaluate", "--width", "7", "--height", "7", "--phases", "5",
            "--blue-agent", "baseline", "--red-agent", "pass_only",
            "--games", "4", "--base-seed", "0", "--json", str(report_path),
        ])
        assert rc == 0
        report = json.loads(report_path.read_text())
        assert report["n_games"] == 4 and len(report["scores"]) == 4
        assert "mean" in capsys.readouterr().out

    def test_train_dqn_and_reuse(self, tmp_path):
        model_dir = tmp_path / "model"
        rc = main([
            "train-dqn", "--width", "6", "--height", "6", "--phases", "4",
            "--obs-mode", "coarse5", "--steps", "150", "--mode", "fixed",
            "--red-agent", "pass_only", "--out", str(model_dir),
        ])
        assert rc == 0
        out = tmp_path / "r.json"
        rc = main([
            "play", "--width", "6", "--height", "6", "--phases", "4",
            "--blue-agent", f"dqn:{model_dir}", "--red-agent", "pass_only",
            "--out", str(out),
        ])
        assert rc == 0
        import_replay(out)

    def test_replay_export_roundtrip(self, tmp_path):
        out = tmp_path / "r.json"
        main(["play", "--width", "7", "--height", "7", "--phases", "4", "--out", str(out)])
        canon = tmp_path / "canon.json"
        assert main(["replay-export", "--infile", str(out), "--out", str(canon)]) == 0
        assert canon.read_bytes() == out.read_bytes()  # play already writes canonically

    def test_config_file_defaults(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"width": 9, "height": 9, "phases": 4}))
        out = tmp_path / "scn.json"
        assert main(["--config", str(cfg), "gen-scenario", "--out", str(out), "--height", "7"]) == 0
        s = load_scenario(out)
        assert s.board.width == 9  # from config
        assert s.board.height == 7  # flag wins
        assert s.max_phases == 4

    def test_train_predictor_cli(self, tmp_path):
        stem = tmp_path / "pred"
        rc = main([
            "train-predictor", "--width", "6", "--height", "6", "--phases", "4",
            "--behavior", "hold_city", "--red-agent", "pass_only",
            "--games", "3", "--epochs", "3", "--out", str(stem),
        ])
        assert rc == 0
        assert stem.with_suffix(".hfnn").is_file()
        assert json.loads(stem.with_suffix(".json").read_text())["behavior_name"] == "hold_city"
