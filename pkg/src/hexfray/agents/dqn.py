"""DQN over any of the three observation encodings.

Vanilla deep Q-learning: epsilon-greedy exploration, a ring-buffer
experience replay, and a periodically synced target network.  Rewards are
the engine's signed score events scaled by 1/100 so Q-targets stay near
unit scale for the MLP.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .. import nnet
from ..engine import Action, GameState, ScenarioParams, generate_scenario
from ..observation import coarse_abstract, encode_full, local_egocentric
from .base import BehaviorModel
from .encoding import ACTION_ENCODING_VERSION, N_SLOTS, masked_argmax, slot_table
from .rollout import BlueStepEnv, ScenarioFactory, play_score

REWARD_SCALE = 0.01

OBS_MODES = ("global_full", "coarse5", "local7")


class ConfigError(ValueError):
    pass


class CompatibilityError(ValueError):
    """Observation produced for this state does not fit the model."""


def encode_obs(mode: str, s: GameState, unit_id: int) -> np.ndarray:
    if mode == "global_full":
        return encode_full(s, unit_id).reshape(-1)
    if mode == "coarse5":
        return coarse_abstract(encode_full(s, unit_id), 5).reshape(-1)
    if mode == "local7":
        return local_egocentric(s, unit_id).reshape(-1)
    raise ConfigError(f"unknown obs_mode {mode!r}")


@dataclass
class DqnConfig:
    obs_mode: str = "local7"
    epsilon_start: float = 1.0
    epsilon_end: float = 0.05
    epsilon_decay_steps: int | None = None  # default: 60% of the budget
    replay_capacity: int = 10_000
    target_sync: int = 1_000
    gamma: float = 0.99
    train_steps: int = 50_000
    seed: int = 0
    hidden: tuple[int, ...] = (128,)
    learning_rate: float = 1e-2
    momentum: float = 0.9
    batch_size: int = 32
    min_replay: int = 500
    train_every: int = 1
    eval_interval: int | None = None
    eval_episodes: int = 5

    def __post_init__(self):
        if self.train_steps < 1:
            raise ConfigError("train_steps budget must be >= 1")
        if self.obs_mode not in OBS_MODES:
            raise ConfigError(f"obs_mode must be one of {OBS_MODES}")
        if not 0 < self.gamma <= 1:
            raise ConfigError("gamma must be in (0, 1]")


class DqnPolicy(BehaviorModel):
    kind = "learned"

    def __init__(self, net: nnet.Mlp, obs_mode: str, name: str = "dqn"):
        self.net = net
        self.obs_mode = obs_mode
        self.name = name
        self.learning_curve: list[tuple[int, float, float]] = []

    def q_values(self, s: GameState, unit_id: int) -> np.ndarray:
        obs = encode_obs(self.obs_mode, s, unit_id)
        if obs.shape[0] != self.net.in_dim:
            raise CompatibilityError(
                f"{self.obs_mode} observation has {obs.shape[0]} features, "
                f"model expects {self.net.in_dim}"
            )
        return nnet.forward(self.net, obs)

    def act(self, s: GameState, unit_id: int) -> Action:
        return dqn_act(self, s, unit_id, greedy=True)


def dqn_act(
    model: DqnPolicy,
    s: GameState,
    unit_id: int,
    greedy: bool = True,
    epsilon: float = 0.0,
    rng: np.random.Generator | None = None,
) -> Action:
    """Greedy (or epsilon-greedy) action under the 13-slot legality mask."""
    mask, table = slot_table(s, unit_id)
    if not greedy and rng is not None and rng.random() < epsilon:
        slot = int(rng.choice(np.flatnonzero(mask)))
    else:
        slot = masked_argmax(model.q_values(s, unit_id), mask)
    return table[slot]


class ReplayBuffer:
    """Ring buffer of transitions with per-slot next-state legality masks."""

    def __init__(self, capacity: int, obs_dim: int, n_slots: int = N_SLOTS):
        self.capacity = capacity
        self.obs = np.zeros((capacity, obs_dim), dtype=np.float32)
        self.next_obs = np.zeros((capacity, obs_dim), dtype=np.float32)
        self.next_mask = np.zeros((capacity, n_slots), dtype=bool)
        self.slots = np.zeros(capacity, dtype=np.int64)
        self.rewards = np.zeros(capacity, dtype=np.float64)
        self.done = np.zeros(capacity, dtype=bool)
        self.size = 0
        self.pos = 0

    def push(self, obs, slot, reward, next_obs, next_mask, done):
        i = self.pos
        self.obs[i] = obs
        self.slots[i] = slot
        self.rewards[i] = reward
        if next_obs is not None:
            self.next_obs[i] = next_obs
            self.next_mask[i] = next_mask
        self.done[i] = done
        self.pos = (i + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def sample(self, n: int, rng: np.random.Generator):
        idx = rng.integers(self.size, size=n)
        return idx


def scenario_factory(params: ScenarioParams, base_seed: int, mode: str) -> ScenarioFactory:
    """fixed: one scenario for every episode; random: fresh scenario per seed."""
    if mode == "fixed":
        scenario = generate_scenario(params, base_seed)
        return lambda episode_seed: scenario
    if mode == "random":
        return lambda episode_seed: generate_scenario(params, episode_seed)
    raise ConfigError(f"unknown scenario mode {mode!r}")


def dqn_train(
    env_params: ScenarioFactory,
    cfg: DqnConfig,
    red_opponent: BehaviorModel,
    curve_path: str | Path | None = None,
    eval_factory: ScenarioFactory | None = None,
) -> DqnPolicy:
    """Train a Q-network with experience replay and a synced target net.

    ``env_params`` is a scenario factory (episode seed -> initial state); see
    ``scenario_factory`` for the fixed/random helpers.  Returns the greedy
    policy; its ``learning_curve`` holds (step, mean eval score, std) rows
    whenever cfg.eval_interval is set.
    """
    rng = np.random.default_rng(cfg.seed)
    env = BlueStepEnv(env_params, red_opponent)
    episode = 0
    state, unit = env.reset(_episode_seed(cfg.seed, episode))
    while unit is None:  # degenerate scenario ended before a blue decision
        episode += 1
        state, unit = env.reset(_episode_seed(cfg.seed, episode))

    obs_dim = encode_obs(cfg.obs_mode, state, unit).shape[0]
    net = nnet.Mlp([obs_dim, *cfg.hidden, N_SLOTS], seed=cfg.seed)
    target = net.copy()
    policy = DqnPolicy(net, cfg.obs_mode)
    replay = ReplayBuffer(cfg.replay_capacity, obs_dim)
    sgd = nnet.SgdConfig(cfg.learning_rate, cfg.momentum, cfg.batch_size, cfg.seed)
    decay_steps = cfg.epsilon_decay_steps or max(1, int(cfg.train_steps * 0.6))

    obs = encode_obs(cfg.obs_mode, state, unit)
    mask, table = slot_table(state, unit)
    for step_i in range(cfg.train_steps):
        frac = min(1.0, step_i / decay_steps)
        epsilon = cfg.epsilon_start + frac * (cfg.epsilon_end - cfg.epsilon_start)
        if rng.random() < epsilon:
            slot = int(rng.choice(np.flatnonzero(mask)))
        else:
            slot = masked_argmax(nnet.forward(net, obs), mask)

        next_state, next_unit, reward, done = env.step(table[slot])
        reward *= REWARD_SCALE
        if done or next_unit is None:
            replay.push(obs, slot, reward, None, None, True)
            episode += 1
            state, unit = env.reset(_episode_seed(cfg.seed, episode))
            while unit is None:
                episode += 1
                state, unit = env.reset(_episode_seed(cfg.seed, episode))
        else:
            state, unit = next_state, next_unit
        next_obs = encode_obs(cfg.obs_mode, state, unit)
        next_mask, next_table = slot_table(state, unit)
        if not done and next_unit is not None:
            replay.push(obs, slot, reward, next_obs, next_mask, False)
        obs, mask, table = next_obs, next_mask, next_table

        if replay.size >= cfg.min_replay and step_i % cfg.train_every == 0:
            idx = replay.sample(cfg.batch_size, rng)
            batch_obs = replay.obs[idx].astype(np.float64)
            q_next = nnet.forward(target, replay.next_obs[idx].astype(np.float64))
            q_next = np.where(replay.next_mask[idx], q_next, -np.inf)
            best_next = np.max(q_next, axis=1)
            best_next = np.where(np.isfinite(best_next), best_next, 0.0)
            targets = replay.rewards[idx] + cfg.gamma * np.where(
                replay.done[idx], 0.0, best_next
            )
            y = nnet.forward(net, batch_obs)
            y[np.arange(len(idx)), replay.slots[idx]] = targets
            nnet.train_step(net, (batch_obs, y), sgd)

        if (step_i + 1) % cfg.target_sync == 0:
            target = net.copy()

        if cfg.eval_interval and (step_i + 1) % cfg.eval_interval == 0:
            scores = _evaluate_policy(
                policy, red_opponent, eval_factory or env_params, cfg
            )
            policy.learning_curve.append(
                (step_i + 1, float(np.mean(scores)), float(np.std(scores)))
            )

    if curve_path is not None:
        save_curve(policy.learning_curve, curve_path)
    return policy


def _episode_seed(seed: int, episode: int) -> int:
    return seed * 1_000_003 + episode


def _evaluate_policy(policy, red_opponent, factory, cfg) -> list[float]:
    scores = []
    for i in range(cfg.eval_episodes):
        scenario = factory(_episode_seed(cfg.seed + 7_777, i))
        scores.append(play_score(policy, red_opponent, scenario, policy_seed=i))
    return scores


def save_curve(curve: list[tuple[int, float, float]], path: str | Path) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["step", "mean_eval_score", "std"])
        writer.writerows(curve)


def save_policy(policy: DqnPolicy, out_dir: str | Path) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    nnet.save_weights(policy.net, out / "net.hfnn")
    meta = {
        "obs_mode": policy.obs_mode,
        "action_encoding_version": ACTION_ENCODING_VERSION,
        "name": policy.name,
        "layer_sizes": policy.net.layer_sizes,
    }
    (out / "meta.json").write_text(json.dumps(meta, sort_keys=True, indent=1))


def load_policy(out_dir: str | Path) -> DqnPolicy:
    out = Path(out_dir)
    meta = json.loads((out / "meta.json").read_text())
    if meta["action_encoding_version"] != ACTION_ENCODING_VERSION:
        raise CompatibilityError(
            f"model uses action encoding v{meta['action_encoding_version']}, "
            f"this build speaks v{ACTION_ENCODING_VERSION}"
        )
    net = nnet.load_weights(out / "net.hfnn")
    return DqnPolicy(net, meta["obs_mode"], name=meta.get("name", "dqn"))
