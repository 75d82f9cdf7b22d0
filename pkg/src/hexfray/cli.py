"""Command-line front door.

Subcommands mirror the library operations; a JSON config file can prefill
any flag (flags win), and HEXFRAY_DATA names the default data directory.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .engine import ScenarioParams, canonical_dumps, generate_scenario, load_scenario, save_scenario
from .registry import resolve_agent


def data_dir() -> Path:
    return Path(os.environ.get("HEXFRAY_DATA", "data"))


def add_scenario_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--width", type=int, default=10)
    p.add_argument("--height", type=int, default=10)
    p.add_argument("--blue", dest="n_blue", type=int, default=2)
    p.add_argument("--red", dest="n_red", type=int, default=2)
    p.add_argument("--cities", type=int, default=1)
    p.add_argument("--phases", type=int, default=30)


def params_from(args) -> ScenarioParams:
    return ScenarioParams(
        width=args.width,
        height=args.height,
        n_blue=args.n_blue,
        n_red=args.n_red,
        n_cities=args.cities,
        max_phases=args.phases,
    )


def cmd_gen_scenario(args) -> int:
    s = generate_scenario(params_from(args), args.seed)
    save_scenario(s, args.out)
    print(f"wrote scenario {args.out} ({args.width}x{args.height}, seed {args.seed})")
    return 0


def cmd_play(args) -> int:
    from .runner import Seeds, export_replay, play_game

    if args.scenario:
        scenario = load_scenario(args.scenario)
    else:
        scenario = generate_scenario(params_from(args), args.seed)
    blue = resolve_agent(args.blue_agent)
    red = resolve_agent(args.red_agent)
    seeds = Seeds(scenario=args.seed, blue_policy=args.blue_seed, red_policy=args.red_seed)
    replay = play_game(blue, red, scenario, seeds)
    export_replay(replay, args.out)
    status = "aborted" if replay.aborted else "finished"
    print(f"{status}: final score {replay.final_score:.3f} -> {args.out}")
    return 0


def cmd_train_dqn(args) -> int:
    from .agents.dqn import DqnConfig, dqn_train, save_policy, scenario_factory

    cfg = DqnConfig(
        obs_mode=args.obs_mode,
        train_steps=args.steps,
        seed=args.seed,
        learning_rate=args.lr,
        target_sync=args.target_sync,
        eval_interval=args.eval_interval,
        eval_episodes=args.eval_episodes,
    )
    factory = scenario_factory(params_from(args), args.seed, args.mode)
    policy = dqn_train(factory, cfg, resolve_agent(args.red_agent), curve_path=args.curve)
    save_policy(policy, args.out)
    print(f"trained {args.obs_mode} policy for {args.steps} steps -> {args.out}")
    return 0


def cmd_train_predictor(args) -> int:
    from .agents.dqn import scenario_factory
    from .multimodel import generate_score_dataset, save_dataset, save_predictor, train_predictor
    from .nnet import SgdConfig

    behavior = resolve_agent(args.behavior)
    red = resolve_agent(args.red_agent)
    factory = scenario_factory(params_from(args), args.seed, args.mode)
    ds = generate_score_dataset(behavior, red, args.games, factory, args.seed)
    if args.dataset:
        save_dataset(ds, args.dataset)
    predictor = train_predictor(
        ds, behavior.name, SgdConfig(learning_rate=args.lr, seed=args.seed), epochs=args.epochs
    )
    save_predictor(predictor, args.out)
    print(f"trained predictor for {behavior.name} on {len(ds)} records -> {args.out}.(hfnn|json)")
    return 0


def cmd_train_td_predictor(args) -> int:
    from .agents.dqn import scenario_factory
    from .multimodel import save_predictor, train_predictor_td
    from .nnet import SgdConfig

    behavior = resolve_agent(args.behavior)
    red = resolve_agent(args.red_agent)
    factory = scenario_factory(params_from(args), args.seed, args.mode)
    predictor = train_predictor_td(
        behavior, red, factory, args.steps,
        SgdConfig(learning_rate=args.lr, momentum=0.0, seed=args.seed),
    )
    save_predictor(predictor, args.out)
    print(f"trained TD predictor for {behavior.name} ({args.steps} steps) -> {args.out}.(hfnn|json)")
    return 0


def cmd_train_level(args) -> int:
    from .agents.dqn import scenario_factory
    from .hierarchy import HierarchyTrainConfig, load_bundle, save_bundle, train_level

    agent = load_bundle(args.bundle)
    cfg = HierarchyTrainConfig(
        scenario_factory=scenario_factory(params_from(args), args.seed, args.mode),
        red_opponent=resolve_agent(args.red_agent),
        seed=args.seed,
        learning_rate=args.lr,
    )
    trained = train_level(agent, args.level, args.budget, cfg)
    save_bundle(trained, args.out)
    print(f"trained {args.level} for {args.budget} steps -> {args.out}")
    return 0


def cmd_evaluate(args) -> int:
    from .runner import evaluate

    report = evaluate(
        resolve_agent(args.blue_agent),
        resolve_agent(args.red_agent),
        params_from(args),
        args.games,
        args.base_seed,
        mode=args.mode,
        workers=args.workers,
    )
    print(f"mean {report.mean_score:.3f}  std {report.std_dev:.3f}  "
          f"({report.completed}/{report.n_games} completed, {report.aborted} aborted)")
    if args.json:
        Path(args.json).write_text(canonical_dumps(report.to_dict()) + "\n")
        print(f"report -> {args.json}")
    return 0


def cmd_replay_export(args) -> int:
    from .runner import export_replay, import_replay

    replay = import_replay(args.infile)  # validates by re-simulation
    export_replay(replay, args.out)
    print(f"validated and canonicalized -> {args.out}")
    return 0


def cmd_serve(args) -> int:
    from .service import serve_api

    serve_api(port=args.port, host=args.host, static_dir=args.static_dir,
              data_dir=args.data_dir or str(data_dir()))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hexfray")
    parser.add_argument("--config", help="JSON file of flag defaults")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-scenario", help="write a seed-deterministic scenario file")
    add_scenario_flags(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_gen_scenario)

    p = sub.add_parser("play", help="run one AI-vs-AI game and export its replay")
    add_scenario_flags(p)
    p.add_argument("--scenario", help="scenario file (overrides generation flags)")
    p.add_argument("--blue-agent", default="baseline")
    p.add_argument("--red-agent", default="greedy_attack")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--blue-seed", type=int, default=0)
    p.add_argument("--red-seed", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_play)

    p = sub.add_parser("train-dqn", help="train a Q-policy")
    add_scenario_flags(p)
    p.add_argument("--obs-mode", default="local7", choices=["global_full", "coarse5", "local7"])
    p.add_argument("--steps", type=int, default=50_000)
    p.add_argument("--mode", default="random", choices=["fixed", "random"])
    p.add_argument("--red-agent", default="baseline")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--lr", type=float, default=1e-2)
    p.add_argument("--target-sync", type=int, default=500)
    p.add_argument("--eval-interval", type=int, default=None)
    p.add_argument("--eval-episodes", type=int, default=5)
    p.add_argument("--curve", help="learning-curve CSV path")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_train_dqn)

    p = sub.add_parser("train-predictor", help="supervised score predictor for one behavior")
    add_scenario_flags(p)
    p.add_argument("--behavior", required=True)
    p.add_argument("--red-agent", default="baseline")
    p.add_argument("--games", type=int, default=100)
    p.add_argument("--mode", default="random", choices=["fixed", "random"])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--lr", type=float, default=5e-3)
    p.add_argument("--epochs", type=int, default=40)
    p.add_argument("--dataset", help="also dump the dataset file here")
    p.add_argument("--out", required=True, help="predictor stem (writes .hfnn and .json)")
    p.set_defaults(fn=cmd_train_predictor)

    p = sub.add_parser("train-td-predictor", help="TD-trained score predictor")
    add_scenario_flags(p)
    p.add_argument("--behavior", required=True)
    p.add_argument("--red-agent", default="baseline")
    p.add_argument("--steps", type=int, default=20_000)
    p.add_argument("--mode", default="random", choices=["fixed", "random"])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--lr", type=float, default=2e-3)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_train_td_predictor)

    p = sub.add_parser("train-level", help="train one hierarchy level, others frozen")
    add_scenario_flags(p)
    p.add_argument("--bundle", required=True, help="hierarchy bundle directory")
    p.add_argument("--level", required=True, choices=["commander", "manager", "operator"])
    p.add_argument("--budget", type=int, default=20_000)
    p.add_argument("--mode", default="random", choices=["fixed", "random"])
    p.add_argument("--red-agent", default="baseline")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--lr", type=float, default=1e-2)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_train_level)

    p = sub.add_parser("evaluate", help="mean/std over many games")
    add_scenario_flags(p)
    p.add_argument("--blue-agent", default="baseline")
    p.add_argument("--red-agent", default="greedy_attack")
    p.add_argument("--games", type=int, default=100)
    p.add_argument("--base-seed", type=int, default=0)
    p.add_argument("--mode", default="random", choices=["fixed", "random"])
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--json", help="write the full report here")
    p.set_defaults(fn=cmd_evaluate)

    p = sub.add_parser("replay-export", help="validate a replay and rewrite canonically")
    p.add_argument("--infile", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_replay_export)

    p = sub.add_parser("serve", help="run the HTTP/WebSocket service")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--static-dir", help="directory of built web assets")
    p.add_argument("--data-dir", help="replays and models root (default $HEXFRAY_DATA or ./data)")
    p.set_defaults(fn=cmd_serve)

    return parser


def apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> argparse.Namespace:
    # pull --config first so its values become defaults that flags override
    probe = argparse.ArgumentParser(add_help=False)
    probe.add_argument("--config")
    known, _ = probe.parse_known_args(argv)
    args = parser.parse_args(argv)
    if known.config:
        overrides = json.loads(Path(known.config).read_text())
        given = {a.split("=")[0].lstrip("-").replace("-", "_") for a in argv if a.startswith("--")}
        for key, value in overrides.items():
            attr = key.replace("-", "_")
            if hasattr(args, attr) and attr not in given:
                setattr(args, attr, value)
    return args


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = apply_config(parser, list(sys.argv[1:] if argv is None else argv))
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
