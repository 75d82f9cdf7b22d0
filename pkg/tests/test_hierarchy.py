import numpy as np
import pytest

from hexfray import engine, nnet, scenarios
from hexfray.agents import RandomPolicy, ScriptedPolicy, play_score
from hexfray.engine import (
    BLUE,
    RED,
    ScenarioParams,
    Unit,
    advance_phase,
    apply_action,
    generate_scenario,
    is_terminal,
    legal_actions,
    make_state,
)
from hexfray.hexgrid import HexCoord, distance, uniform_board
from hexfray.hierarchy import (
    DqnOperator,
    HierarchyAgent,
    HierarchyConfigError,
    HierarchyTrainConfig,
    Subgoal,
    TaskError,
    Termination,
    UnitTask,
    bundle_hashes,
    commander_decide,
    load_bundle,
    manager_decide,
    operator_act,
    save_bundle,
    train_level,
)
from hexfray.observation import coarse_abstract, coarse_cell_hexes, encode_full


def coarse_of(s):
    return coarse_abstract(encode_full(s, None), 5)


def mid_of(s):
    return coarse_abstract(encode_full(s, None), 7)


class TestCommander:
    def test_no_urban_ties_to_cell_zero(self):
        s = make_state(
            uniform_board(10, 10),
            [Unit(0, BLUE, engine.INFANTRY, 100.0, HexCoord(1, 1)),
             Unit(1, RED, engine.INFANTRY, 100.0, HexCoord(8, 8))],
            10,
        )
        sg = commander_decide(coarse_of(s), "max_score")
        assert sg.target_cell == 0
        assert sg.posture == "offensive"  # equal strengths

    def test_urban_mass_cell_12_offensive(self):
        # city block in the middle cell; blue outweighs red
        city = HexCoord(5, 5)  # 10x10, K=5: block (2,2) -> cell 12
        board = scenarios._clear_board_with_city(10, 10, city)
        s = make_state(
            board,
            [Unit(0, BLUE, engine.INFANTRY, 100.0, HexCoord(1, 1)),
             Unit(1, RED, engine.INFANTRY, 50.0, HexCoord(8, 8))],
            10,
        )
        sg = commander_decide(coarse_of(s), "max_score")
        assert sg.posture == "offensive"
        assert sg.target_cell == 12
        assert sg.termination == Termination("max_phases", 5)

    def test_weaker_blue_is_defensive(self):
        s = make_state(
            uniform_board(10, 10),
            [Unit(0, BLUE, engine.INFANTRY, 40.0, HexCoord(1, 1)),
             Unit(1, RED, engine.INFANTRY, 100.0, HexCoord(8, 8))],
            10,
        )
        assert commander_decide(coarse_of(s), "max_score").posture == "defensive"

    def test_learned_slot_decode(self):
        # constant logits favoring slot 37 -> (37 // 25, 37 % 25) = (defensive, 12)
        net = nnet.Mlp([425, 50], seed=0)
        net.weights[0][:] = 0.0
        net.biases[0][:] = 0.0
        net.biases[0][37] = 5.0
        s = generate_scenario(ScenarioParams(), 1)
        sg = commander_decide(coarse_of(s), "max_score", policy=net)
        assert sg.posture == "defensive" and sg.target_cell == 12

    def test_objective_channels(self):
        s = make_state(
            uniform_board(10, 10),
            [Unit(0, BLUE, engine.INFANTRY, 100.0, HexCoord(1, 1)),
             Unit(1, RED, engine.INFANTRY, 100.0, HexCoord(8, 8))],
            10,
        )
        sg = commander_decide(coarse_of(s), "destroy_red")
        red_cell = 5 * (8 // 2) + (8 // 2)
        assert sg.target_cell == red_cell
        sg = commander_decide(coarse_of(s), "preserve_blue")
        assert sg.posture == "defensive"
        assert sg.target_cell == 0  # blue mass in cell 0

    def test_shape_and_objective_validation(self):
        with pytest.raises(HierarchyConfigError):
            commander_decide(np.zeros((17, 7, 7)))
        s = generate_scenario(ScenarioParams(), 0)
        with pytest.raises(HierarchyConfigError):
            commander_decide(coarse_of(s), "conquer_everything")


class TestManager:
    def test_offensive_single_unit_seize_in_block(self):
        s = make_state(
            uniform_board(10, 10),
            [Unit(0, BLUE, engine.INFANTRY, 100.0, HexCoord(1, 1)),
             Unit(1, RED, engine.INFANTRY, 100.0, HexCoord(8, 8))],
            10,
        )
        sg = Subgoal("offensive", 12, Termination("max_phases", 5))
        tasks = manager_decide(mid_of(s), sg, s.living(BLUE), s.board)
        assert len(tasks) == 1
        assert tasks[0].task == "seize"
        assert tasks[0].objective_hex in coarse_cell_hexes(s.board, 12, 5)

    def test_defensive_one_hold_on_city(self):
        city = HexCoord(4, 4)
        board = scenarios._clear_board_with_city(10, 10, city)
        s = make_state(
            board,
            [Unit(0, BLUE, engine.INFANTRY, 100.0, HexCoord(2, 4)),
             Unit(1, BLUE, engine.INFANTRY, 100.0, HexCoord(1, 8)),
             Unit(2, RED, engine.INFANTRY, 100.0, HexCoord(9, 4))],
            10,
        )
        sg = Subgoal("defensive", 12, Termination("max_phases", 5))
        tasks = manager_decide(mid_of(s), sg, s.living(BLUE), s.board)
        holds = [t for t in tasks if t.task == "hold"]
        screens = [t for t in tasks if t.task == "screen"]
        assert len(holds) == 1 and holds[0].objective_hex == city
        assert holds[0].unit_id == 0  # nearest unit
        assert len(screens) == 1

    def test_tasks_bijective_over_living_blue(self):
        s = generate_scenario(ScenarioParams(n_blue=4, n_red=2), 3)
        sg = Subgoal("offensive", 7, Termination("max_phases", 5))
        tasks = manager_decide(mid_of(s), sg, s.living(BLUE), s.board)
        assert sorted(t.unit_id for t in tasks) == sorted(u.id for u in s.living(BLUE))

    def test_learned_manager_decode(self):
        net = nnet.Mlp([17 * 49 + 27 + 2, 147], seed=0)
        net.weights[0][:] = 0.0
        net.biases[0][:] = 0.0
        net.biases[0][25 * 3 + 1] = 9.0  # cell 25, task index 1 = hold
        s = generate_scenario(ScenarioParams(), 4)
        sg = Subgoal("offensive", 0, Termination("max_phases", 5))
        tasks = manager_decide(mid_of(s), sg, s.living(BLUE), s.board, policy=net)
        assert all(t.task == "hold" for t in tasks)
        for t in tasks:
            assert t.objective_hex in coarse_cell_hexes(s.board, 25, 7)

    def test_empty_units_rejected(self):
        s = generate_scenario(ScenarioParams(), 0)
        sg = Subgoal("offensive", 0, Termination("max_phases", 5))
        with pytest.raises(HierarchyConfigError):
            manager_decide(mid_of(s), sg, [], s.board)


class TestOperator:
    def test_hold_on_objective_passes(self):
        s = make_state(
            uniform_board(8, 8),
            [Unit(0, BLUE, engine.INFANTRY, 100.0, HexCoord(3, 3)),
             Unit(1, RED, engine.INFANTRY, 100.0, HexCoord(7, 7))],
            10,
        )
        task = UnitTask(0, HexCoord(3, 3), "hold")
        assert operator_act(s, 0, task) == engine.Action(engine.PASS)

    def test_seize_strictly_decreases_distance_on_clear_path(self):
        s = make_state(
            uniform_board(10, 10),
            [Unit(0, BLUE, engine.INFANTRY, 100.0, HexCoord(1, 5))],
            20,
        )
        goal = HexCoord(8, 5)
        dists = [distance(HexCoord(1, 5), goal)]
        while not is_terminal(s) and dists[-1] > 0:
            if s.cursor is None:
                s, _ = advance_phase(s)
                continue
            a = operator_act(s, 0, UnitTask(0, goal, "seize"))
            s, _ = apply_action(s, 0, a)
            d = distance(s.unit(0).pos, goal)
            assert d < dists[-1]
            dists.append(d)
        assert dists[-1] == 0

    def test_screen_keeps_distance(self):
        s = make_state(
            uniform_board(10, 10),
            [Unit(0, BLUE, engine.INFANTRY, 100.0, HexCoord(4, 4)),
             Unit(1, RED, engine.INFANTRY, 100.0, HexCoord(4, 5))],
            10,
        )
        a = operator_act(s, 0, UnitTask(0, HexCoord(3, 3), "screen"))
        assert a.kind == engine.MOVE
        assert distance(a.target, HexCoord(4, 5)) >= 2

    def test_task_unit_mismatch(self):
        s = generate_scenario(ScenarioParams(), 0)
        with pytest.raises(TaskError):
            operator_act(s, s.cursor, UnitTask(s.cursor + 99, HexCoord(0, 0), "hold"))

    def test_legality_fuzz(self):
        rng = np.random.default_rng(0)
        checked = 0
        for seed in range(12):
            s = generate_scenario(ScenarioParams(width=8, height=8, n_blue=3, n_red=3), seed)
            guard = 0
            while not is_terminal(s) and guard < 300:
                guard += 1
                if s.cursor is None:
                    s, _ = advance_phase(s)
                    continue
                uid = s.cursor
                passables = [h for h in s.board.all_hexes() if s.board.passable(h)]
                goal = passables[int(rng.integers(len(passables)))]
                task = UnitTask(uid, goal, list(("seize", "hold", "screen"))[int(rng.integers(3))])
                a = operator_act(s, uid, task)
                assert a in legal_actions(s, uid)
                checked += 1
                s, _ = apply_action(s, uid, a)
        assert checked >= 2000


def reach_city_factory(seed):
    return scenarios.reach_city(seed)


class TestHierarchyAgent:
    def test_full_stack_plays_legal_games(self):
        agent = HierarchyAgent(operator=None)
        red = ScriptedPolicy("greedy_attack")
        for seed in range(3):
            scenario = generate_scenario(ScenarioParams(width=8, height=8), seed)
            score = play_score(agent, red, scenario, policy_seed=seed)
            assert np.isfinite(score)

    def test_cadence_from_audits(self):
        agent = HierarchyAgent(operator=None, commander_period=5)
        scenario = generate_scenario(ScenarioParams(width=8, height=8, max_phases=12), 7)
        agent.begin_game(0)
        red = ScriptedPolicy("pass_only")
        red.begin_game(1)
        s = scenario
        audits = []
        while not is_terminal(s):
            if s.cursor is None:
                s, _ = advance_phase(s)
                continue
            if s.on_move == BLUE:
                action, audit = agent.act_with_audit(s, s.cursor)
                audits.append(audit)
            else:
                action = red.act(s, s.cursor)
            s, _ = apply_action(s, s.cursor, action)
        fired_phases = sorted({a["phase"] for a in audits if a["commander_fired"]})
        # default termination = commander_period, so re-issue every 5 phases
        assert fired_phases == [1, 6, 11]
        issued = sorted({a["subgoal"]["issued_phase"] for a in audits})
        assert issued == [1, 6, 11]
        # manager planned once per phase: every audit of a phase shares tasks
        by_phase = {}
        for a in audits:
            by_phase.setdefault(a["phase"], set()).add(a["task"]["unit_id"])
        for phase, units in by_phase.items():
            assert len(units) >= 1

    def test_one_level_hierarchy_equals_bare_operator(self):
        operator = ScriptedPolicy("baseline")
        agent = HierarchyAgent(commander_policy=None, manager_policy=None, operator=operator)
        red = ScriptedPolicy("greedy_attack")
        for seed in range(4):
            scenario = generate_scenario(ScenarioParams(width=8, height=8), seed)
            a = play_score(agent, red, scenario, policy_seed=seed)
            b = play_score(ScriptedPolicy("baseline"), red, scenario, policy_seed=seed)
            assert a == b

    def test_passthrough_needs_operator(self):
        agent = HierarchyAgent(commander_policy=None, manager_policy=None, operator=None)
        s = generate_scenario(ScenarioParams(), 0)
        with pytest.raises(HierarchyConfigError):
            agent.act(s, s.cursor)

    def test_predicate_termination_reissues_commander(self):
        from hexfray.observation import coarse_cell_of

        agent = HierarchyAgent(operator=None, commander_period=50)
        s = make_state(
            uniform_board(10, 10),
            [Unit(0, BLUE, engine.INFANTRY, 100.0, HexCoord(1, 1)),
             Unit(1, RED, engine.INFANTRY, 100.0, HexCoord(8, 8))],
            20,
        )
        agent.begin_game(0)
        agent.act(s, 0)  # initial subgoal issued at phase 1
        first_issue = agent._subgoal_phase
        # swap in a subgoal that expires once any blue unit stands in the
        # cell the unit already occupies
        occupied_cell = coarse_cell_of(s.board, HexCoord(1, 1), 5)
        agent._subgoal = Subgoal("offensive", occupied_cell, Termination("target_cell_occupied"))
        assert agent._termination_fires(s)
        # ...and one that waits on a far-away empty cell does not
        agent._subgoal = Subgoal("offensive", 24, Termination("target_cell_occupied"))
        assert not agent._termination_fires(s)
        # drive to the next phase: the occupied-cell termination forces a
        # fresh commander decision despite the long period
        agent._subgoal = Subgoal("offensive", occupied_cell, Termination("target_cell_occupied"))
        while s.cursor is not None:
            s, _ = apply_action(s, s.cursor, engine.Action(engine.PASS))
        s, _ = advance_phase(s)
        _, audit = agent.act_with_audit(s, 0)
        assert audit["commander_fired"]
        assert agent._subgoal_phase == s.phase > first_issue


class TestTrainLevel:
    def cfg(self, factory=None, **kw):
        return HierarchyTrainConfig(
            scenario_factory=factory or reach_city_factory,
            red_opponent=ScriptedPolicy("pass_only"),
            seed=0,
            **kw,
        )

    def test_budget_zero_unchanged(self, tmp_path):
        h = HierarchyAgent(operator=None)
        out = train_level(h, "operator", 0, self.cfg())
        save_bundle(h, tmp_path / "before")
        save_bundle(out, tmp_path / "after")
        assert bundle_hashes(tmp_path / "before") == bundle_hashes(tmp_path / "after")

    def test_unknown_level_and_double_trainable(self):
        h = HierarchyAgent(operator=None)
        with pytest.raises(HierarchyConfigError):
            train_level(h, "general", 10, self.cfg())
        h.trainable = "manager"
        with pytest.raises(HierarchyConfigError):
            train_level(h, "commander", 10, self.cfg())

    def test_freeze_contract_commander(self, tmp_path):
        h = HierarchyAgent(
            commander_policy="scripted",
            manager_policy="scripted",
            operator=ScriptedPolicy("baseline"),
        )
        factory = lambda seed: generate_scenario(
            ScenarioParams(width=6, height=6, max_phases=4), seed
        )
        out = train_level(h, "commander", 400, self.cfg(factory, min_replay=50))
        save_bundle(h, tmp_path / "before")
        save_bundle(out, tmp_path / "after")
        before = bundle_hashes(tmp_path / "before")
        after = bundle_hashes(tmp_path / "after")
        assert before["manager"] == after["manager"]
        assert before["operator"] == after["operator"]
        assert before["commander"] != after["commander"]
        assert isinstance(out.commander_policy, nnet.Mlp)

    def test_freeze_contract_manager(self, tmp_path):
        h = HierarchyAgent(operator=ScriptedPolicy("baseline"))
        factory = lambda seed: generate_scenario(
            ScenarioParams(width=6, height=6, max_phases=4), seed
        )
        out = train_level(h, "manager", 300, self.cfg(factory, min_replay=50))
        save_bundle(h, tmp_path / "before")
        save_bundle(out, tmp_path / "after")
        before = bundle_hashes(tmp_path / "before")
        after = bundle_hashes(tmp_path / "after")
        assert before["commander"] == after["commander"]
        assert before["operator"] == after["operator"]
        assert before["manager"] != after["manager"]

    def test_trained_operator_beats_random_on_reach_city(self):
        h = HierarchyAgent(operator=None)
        cfg = self.cfg(
            learning_rate=2e-2, target_sync=250, min_replay=400,
        )
        out = train_level(h, "operator", 12_000, cfg)
        assert isinstance(out.operator, DqnOperator)

        def mean_score(agent):
            scores = []
            for i in range(40):
                scenario = scenarios.reach_city(900_000 + i)
                scores.append(play_score(agent, ScriptedPolicy("pass_only"), scenario, policy_seed=i))
            return float(np.mean(scores))

        trained = mean_score(out)
        rand = mean_score(RandomPolicy(0))
        assert trained > rand

    def test_reward_shaper_hook_invoked_only_when_set(self):
        calls = []

        def shaper(level, r):
            calls.append(level)
            return r

        h = HierarchyAgent(operator=None)
        train_level(h, "operator", 50, self.cfg(min_replay=10, reward_shaper=shaper))
        assert set(calls) == {"operator"}
        calls.clear()
        train_level(h, "operator", 50, self.cfg(min_replay=10))
        assert calls == []


class TestBundle:
    def test_roundtrip_scripted(self, tmp_path):
        h = HierarchyAgent(operator=ScriptedPolicy("baseline"), commander_period=7, objective="hold_urban")
        save_bundle(h, tmp_path / "b")
        back = load_bundle(tmp_path / "b")
        assert back.commander_period == 7 and back.objective == "hold_urban"
        assert back.operator.name == "baseline"
        red = ScriptedPolicy("greedy_attack")
        scenario = generate_scenario(ScenarioParams(width=7, height=7), 5)
        assert play_score(back, red, scenario) == play_score(h, red, scenario)

    def test_roundtrip_learned_levels(self, tmp_path):
        h = HierarchyAgent(
            commander_policy=nnet.Mlp([425, 8, 50], seed=1),
            manager_policy="scripted",
            operator=DqnOperator(nnet.Mlp([DqnOperator.obs_dim(), 8, 13], seed=2)),
        )
        save_bundle(h, tmp_path / "b")
        back = load_bundle(tmp_path / "b")
        assert isinstance(back.commander_policy, nnet.Mlp)
        assert isinstance(back.operator, DqnOperator)
        save_bundle(back, tmp_path / "b2")
        assert bundle_hashes(tmp_path / "b") == bundle_hashes(tmp_path / "b2")
