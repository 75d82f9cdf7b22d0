"""Multi-model dispatch: per-behavior score predictors and argmax selection.

Each member behavior carries a regressor trained to predict the game's
final blue score assuming that behavior keeps playing against a fixed red
adversary.  At every action-selection step all predictors score the current
coarse observation, and the single best behavior is dispatched on the raw
state.  Predictions are differentiated, never pooled.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import nnet
from .agents.base import BehaviorModel, checked_act
from .agents.dqn import encode_obs
from .agents.rollout import BlueStepEnv, ScenarioFactory
from .engine import Action, GameState

PREDICTOR_OBS_MODE = "coarse5"
PREDICTOR_OBS_DIM = 17 * 5 * 5

DATASET_MAGIC = b"HFDS"
DATASET_VERSION = 1

REWARD_SCALE = 0.01  # predictor nets learn score / 100


class EvaluationError(ValueError):
    pass


class AssemblyError(ValueError):
    pass


@dataclass
class ScorePredictor:
    """Regressor from a coarse observation to predicted final blue score."""

    behavior_name: str
    net: nnet.Mlp
    label_mean: float
    label_std: float
    mode: str = "supervised"  # supervised | td
    training_meta: dict = field(default_factory=dict)

    def predict(self, obs: np.ndarray) -> float | np.ndarray:
        out = nnet.forward(self.net, obs)
        scores = out[..., 0] * self.label_std + self.label_mean
        return float(scores) if np.ndim(scores) == 0 else scores


@dataclass
class ScoreDataset:
    obs: np.ndarray  # (N, D) float32
    labels: np.ndarray  # (N,) float64
    obs_shape: tuple[int, int, int] = (17, 5, 5)

    def __len__(self):
        return len(self.labels)


def generate_score_dataset(
    behavior: BehaviorModel,
    red_opponent: BehaviorModel,
    n_games: int,
    scenario_factory: ScenarioFactory,
    seed: int,
) -> ScoreDataset:
    """Play n_games of behavior-vs-red; every blue action-selection step is
    one record (coarse observation, that game's final blue score)."""
    if n_games < 1:
        raise ValueError("n_games must be >= 1")
    all_obs: list[np.ndarray] = []
    labels: list[float] = []
    env = BlueStepEnv(scenario_factory, red_opponent)
    for g in range(n_games):
        game_seed = seed + g
        behavior.begin_game(game_seed)
        state, unit = env.reset(game_seed)
        game_obs: list[np.ndarray] = []
        done = unit is None
        while not done and unit is not None:
            game_obs.append(encode_obs(PREDICTOR_OBS_MODE, state, unit).astype(np.float32))
            action = checked_act(behavior, state, unit)
            state, unit, _, done = env.step(action)
        final = env.state.score
        all_obs.extend(game_obs)
        labels.extend([final] * len(game_obs))
    return ScoreDataset(np.array(all_obs, dtype=np.float32), np.array(labels))


def save_dataset(ds: ScoreDataset, path: str | Path) -> None:
    c, h, w = ds.obs_shape
    header = DATASET_MAGIC + struct.pack("<IQ3I", DATASET_VERSION, len(ds), c, h, w)
    parts = [header]
    for obs, label in zip(ds.obs, ds.labels):
        parts.append(obs.astype("<f4").tobytes())
        parts.append(struct.pack("<d", label))
    Path(path).write_bytes(b"".join(parts))


def load_dataset(path: str | Path) -> ScoreDataset:
    raw = Path(path).read_bytes()
    if len(raw) < 28 or raw[:4] != DATASET_MAGIC:
        raise ValueError("not a score dataset file")
    version, n, c, h, w = struct.unpack("<IQ3I", raw[4:28])
    if version != DATASET_VERSION:
        raise ValueError(f"unsupported dataset version {version}")
    dim = c * h * w
    rec = 4 * dim + 8
    if len(raw) != 28 + n * rec:
        raise ValueError("dataset file truncated")
    obs = np.zeros((n, dim), dtype=np.float32)
    labels = np.zeros(n, dtype=np.float64)
    pos = 28
    for i in range(n):
        obs[i] = np.frombuffer(raw[pos : pos + 4 * dim], dtype="<f4")
        (labels[i],) = struct.unpack("<d", raw[pos + 4 * dim : pos + rec])
        pos += rec
    return ScoreDataset(obs, labels, (c, h, w))


def train_predictor(
    dataset: ScoreDataset,
    behavior_name: str,
    cfg: nnet.SgdConfig,
    hidden: Sequence[int] = (64,),
    epochs: int = 40,
) -> ScorePredictor:
    """Supervised MSE regression on z-scored labels."""
    if len(dataset) == 0:
        raise ValueError("empty dataset")
    mean = float(dataset.labels.mean())
    std = float(dataset.labels.std())
    if std == 0.0:
        std = 1.0
    targets = (dataset.labels - mean) / std
    net = nnet.Mlp([dataset.obs.shape[1], *hidden, 1], seed=cfg.seed)
    rng = np.random.default_rng(cfg.seed)
    n = len(dataset)
    epoch_losses = []
    for _ in range(epochs):
        order = rng.permutation(n)
        batch_losses = []
        for start in range(0, n, cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            x = dataset.obs[idx].astype(np.float64)
            y = targets[idx][:, None]
            _, loss = nnet.train_step(net, (x, y), cfg)
            batch_losses.append(loss)
        epoch_losses.append(float(np.mean(batch_losses)))
    return ScorePredictor(
        behavior_name,
        net,
        mean,
        std,
        mode="supervised",
        training_meta={
            "records": int(n),
            "seed": cfg.seed,
            "epochs": epochs,
            "epoch_losses": epoch_losses,
        },
    )


def td_fit(net: nnet.Mlp, transitions, cfg: nnet.SgdConfig) -> nnet.Mlp:
    """TD(0) value updates, gamma = 1: target = r + v(s') (0 at terminal).

    ``transitions`` yields (obs, reward, next_obs, done); rewards must
    already be scaled to the net's output units.
    """
    for obs, reward, next_obs, done in transitions:
        bootstrap = 0.0 if done else float(nnet.forward(net, next_obs)[0])
        target = np.array([reward + bootstrap])
        nnet.train_step(net, (np.atleast_2d(obs), np.atleast_2d(target)), cfg)
    return net


def train_predictor_td(
    behavior: BehaviorModel,
    red_opponent: BehaviorModel,
    scenario_factory: ScenarioFactory,
    steps: int,
    cfg: nnet.SgdConfig,
    hidden: Sequence[int] = (64,),
) -> ScorePredictor:
    """On-policy TD(0) value of playing `behavior` against the adversary.

    With gamma = 1 and score-event rewards the fixed point is the expected
    undiscounted score still to come, which from a game's first step equals
    the expected final score.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    net = nnet.Mlp([PREDICTOR_OBS_DIM, *hidden, 1], seed=cfg.seed)
    env = BlueStepEnv(scenario_factory, red_opponent)

    def transitions():
        count = 0
        episode = 0
        while count < steps:
            game_seed = cfg.seed * 100_003 + episode
            episode += 1
            behavior.begin_game(game_seed)
            state, unit = env.reset(game_seed)
            if unit is None:
                continue
            obs = encode_obs(PREDICTOR_OBS_MODE, state, unit)
            done = False
            while not done and count < steps:
                action = checked_act(behavior, state, unit)
                state, unit, reward, done = env.step(action)
                if done or unit is None:
                    yield obs, reward * REWARD_SCALE, None, True
                    count += 1
                    break
                next_obs = encode_obs(PREDICTOR_OBS_MODE, state, unit)
                yield obs, reward * REWARD_SCALE, next_obs, False
                obs = next_obs
                count += 1

    td_fit(net, transitions(), cfg)
    return ScorePredictor(
        behavior.name,
        net,
        0.0,
        1.0 / REWARD_SCALE,
        mode="td",
        training_meta={"steps": steps, "seed": cfg.seed},
    )


def select_model(predictions: Sequence[float]) -> int:
    """Argmax index; ties break to the lowest index."""
    arr = np.asarray(predictions, dtype=np.float64)
    if arr.size == 0:
        raise EvaluationError("empty prediction vector")
    if np.isnan(arr).any():
        raise EvaluationError(f"NaN prediction in {arr}")
    return int(np.argmax(arr))


class MultiModel:
    """Ordered (behavior, predictor) members; order is the tie-break identity."""

    def __init__(self, members: Sequence[tuple[BehaviorModel, ScorePredictor]]):
        if not members:
            raise AssemblyError("multimodel needs at least one member")
        names = [b.name for b, _ in members]
        if len(set(names)) != len(names):
            raise AssemblyError(f"duplicate behavior names {names}")
        for b, p in members:
            if b.name != p.behavior_name:
                raise AssemblyError(
                    f"predictor for {p.behavior_name!r} paired with behavior {b.name!r}"
                )
        self.members = list(members)

    @property
    def behavior_names(self) -> list[str]:
        return [b.name for b, _ in self.members]


def multimodel_act(
    mm: MultiModel, s: GameState, unit_id: int
) -> tuple[Action, int, np.ndarray]:
    """One dispatch: score every member once, run the argmax behavior."""
    obs = encode_obs(PREDICTOR_OBS_MODE, s, unit_id)
    predictions = np.array([p.predict(obs) for _, p in mm.members])
    chosen = select_model(predictions)
    behavior = mm.members[chosen][0]
    action = checked_act(behavior, s, unit_id)
    return action, chosen, predictions


class MultiModelAgent(BehaviorModel):
    """BehaviorModel face of a MultiModel; records an audit per step."""

    kind = "learned"

    def __init__(self, mm: MultiModel, name: str = "multimodel"):
        self.mm = mm
        self.name = name

    def begin_game(self, seed: int) -> None:
        for b, _ in self.mm.members:
            b.begin_game(seed)

    def act(self, s: GameState, unit_id: int) -> Action:
        action, _, _ = multimodel_act(self.mm, s, unit_id)
        return action

    def act_with_audit(self, s: GameState, unit_id: int) -> tuple[Action, dict]:
        action, chosen, predictions = multimodel_act(self.mm, s, unit_id)
        audit = {
            "chosen_index": chosen,
            "chosen_behavior": self.mm.members[chosen][0].name,
            "predictions": [float(p) for p in predictions],
        }
        return action, audit


# --- Persistence ------------------------------------------------------------

MULTIMODEL_VERSION = 1


def save_predictor(p: ScorePredictor, stem: str | Path) -> None:
    stem = Path(stem)
    nnet.save_weights(p.net, stem.with_suffix(".hfnn"))
    meta = {
        "behavior_name": p.behavior_name,
        "label_mean": p.label_mean,
        "label_std": p.label_std,
        "mode": p.mode,
        "training_meta": p.training_meta,
    }
    stem.with_suffix(".json").write_text(json.dumps(meta, sort_keys=True, indent=1))


def load_predictor(stem: str | Path) -> ScorePredictor:
    stem = Path(stem)
    meta = json.loads(stem.with_suffix(".json").read_text())
    net = nnet.load_weights(stem.with_suffix(".hfnn"))
    return ScorePredictor(
        meta["behavior_name"],
        net,
        meta["label_mean"],
        meta["label_std"],
        meta.get("mode", "supervised"),
        meta.get("training_meta", {}),
    )


def save_multimodel(agent: MultiModelAgent, out_dir: str | Path) -> None:
    """Members must be scripted policies (by name) or saved separately."""
    from .agents.scripted import SCRIPTED_POLICIES

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    index = {"v": MULTIMODEL_VERSION, "name": agent.name, "members": []}
    for i, (behavior, predictor) in enumerate(agent.mm.members):
        if behavior.name not in SCRIPTED_POLICIES:
            raise AssemblyError(
                f"only scripted members can be bundled, got {behavior.name!r}"
            )
        stem = out / f"{i:02d}_{behavior.name}"
        save_predictor(predictor, stem)
        index["members"].append({"behavior": behavior.name, "stem": stem.name})
    (out / "index.json").write_text(json.dumps(index, sort_keys=True, indent=1))


def load_multimodel(out_dir: str | Path) -> MultiModelAgent:
    from .agents.scripted import ScriptedPolicy

    out = Path(out_dir)
    index = json.loads((out / "index.json").read_text())
    if index.get("v") != MULTIMODEL_VERSION:
        raise ValueError(f"unsupported multimodel version {index.get('v')!r}")
    members = []
    for entry in index["members"]:
        predictor = load_predictor(out / entry["stem"])
        members.append((ScriptedPolicy(entry["behavior"]), predictor))
    return MultiModelAgent(MultiModel(members), name=index.get("name", "multimodel"))
