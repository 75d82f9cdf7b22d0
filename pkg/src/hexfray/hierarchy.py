"""Three-level agent skeleton: commander -> manager -> operator.

The commander reads a coarse 5x5 view and issues a subgoal (posture plus a
coarse target cell) with a termination condition.  Each phase the manager
turns the active subgoal into per-unit tasks against a 7x7 pooled view.
Operators resolve their task into a primitive action from the local
egocentric window.  Levels are trained one at a time; the other levels stay
frozen (bit-identical parameters).
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import nnet
from .agents.base import BehaviorModel, checked_act
from .agents.dqn import DqnPolicy, ReplayBuffer
from .agents.encoding import N_SLOTS, masked_argmax, slot_table
from .agents.rollout import BlueStepEnv, ScenarioFactory
from .engine import (
    ATTACK,
    BLUE,
    MOVE,
    PASS,
    Action,
    GameState,
    Unit,
    legal_actions,
)
from .hexgrid import Board, HexCoord, distance, planar_center
from .multimodel import MultiModelAgent
from .observation import coarse_abstract, coarse_cell_hexes, encode_full, local_egocentric

POSTURES = ("offensive", "defensive")
TASKS = ("seize", "hold", "screen")
OBJECTIVES = ("max_score", "destroy_red", "preserve_blue", "hold_urban")

COMMANDER_CELLS = 25  # 5x5 coarse grid
COMMANDER_SLOTS = 2 * COMMANDER_CELLS  # posture x cell
MANAGER_CELLS = 49  # 7x7 mid grid
MANAGER_SLOTS = MANAGER_CELLS * len(TASKS)
SUBGOAL_ENC_DIM = 2 + COMMANDER_CELLS
# task one-hot + normalized bearing (dx, dy) + normalized distance
TASK_ENC_DIM = len(TASKS) + 3

BUNDLE_VERSION = 1


class HierarchyConfigError(ValueError):
    pass


class TaskError(ValueError):
    pass


@dataclass(frozen=True)
class Termination:
    kind: str  # "max_phases" | "target_cell_occupied"
    phases: int | None = None

    def __post_init__(self):
        if self.kind == "max_phases":
            if self.phases is None or self.phases < 1:
                raise HierarchyConfigError("max_phases termination needs phases >= 1")
        elif self.kind != "target_cell_occupied":
            raise HierarchyConfigError(f"unknown termination {self.kind!r}")


@dataclass(frozen=True)
class Subgoal:
    posture: str
    target_cell: int
    termination: Termination

    def __post_init__(self):
        if self.posture not in POSTURES:
            raise HierarchyConfigError(f"unknown posture {self.posture!r}")
        if not 0 <= self.target_cell < COMMANDER_CELLS:
            raise HierarchyConfigError(f"target_cell {self.target_cell} out of range")


@dataclass(frozen=True)
class UnitTask:
    unit_id: int
    objective_hex: HexCoord
    task: str

    def __post_init__(self):
        if self.task not in TASKS:
            raise TaskError(f"unknown task {self.task!r}")


def _mass_channel(objective: str) -> int:
    # which channel's mass the scripted commander aims at
    if objective == "destroy_red":
        return 8  # red occupancy
    if objective == "preserve_blue":
        return 7  # blue occupancy
    return 11  # urban terrain (max_score, hold_urban)


def commander_decide(
    coarse_obs: np.ndarray,
    objective: str = "max_score",
    policy: nnet.Mlp | None = None,
    period: int = 5,
) -> Subgoal:
    """Subgoal from the 17x5x5 view.

    Scripted: offensive iff blue total strength >= red total (channels 13 vs
    14), target cell = argmax of the objective's mass channel (ties to the
    lowest index); preserve_blue always digs in.  Learned: 50-way argmax
    decoded as (slot // 25 -> posture, slot % 25 -> cell).
    """
    if coarse_obs.shape != (17, 5, 5):
        raise HierarchyConfigError(f"expected 17x5x5 coarse obs, got {coarse_obs.shape}")
    if objective not in OBJECTIVES:
        raise HierarchyConfigError(f"unknown objective {objective!r}")
    termination = Termination("max_phases", period)
    if policy is not None:
        logits = nnet.forward(policy, coarse_obs.reshape(-1))
        if logits.shape[0] != COMMANDER_SLOTS:
            raise HierarchyConfigError(
                f"commander net emits {logits.shape[0]} slots, expected {COMMANDER_SLOTS}"
            )
        slot = int(np.argmax(logits))
        return Subgoal(POSTURES[slot // COMMANDER_CELLS], slot % COMMANDER_CELLS, termination)
    offensive = coarse_obs[13, 0, 0] >= coarse_obs[14, 0, 0]
    if objective == "preserve_blue":
        offensive = False
    cell = int(np.argmax(coarse_obs[_mass_channel(objective)].reshape(-1)))
    return Subgoal(POSTURES[0] if offensive else POSTURES[1], cell, termination)


def _block_center_hex(board: Board, cell: int, k: int) -> HexCoord:
    hexes = coarse_cell_hexes(board, cell, k)
    if not hexes:  # ragged partition left this block empty
        return HexCoord(min(board.width - 1, (cell % k)), min(board.height - 1, cell // k))
    rows = [h.row for h in hexes]
    cols = [h.col for h in hexes]
    return HexCoord((min(cols) + max(cols)) // 2, (min(rows) + max(rows)) // 2)


def _nearest_passable(board: Board, target: HexCoord, candidates=None) -> HexCoord:
    pool = candidates if candidates else list(board.all_hexes())
    passable = [h for h in pool if board.passable(h)]
    if not passable:
        passable = [h for h in board.all_hexes() if board.passable(h)]
    return min(passable, key=lambda h: (distance(h, target), h.row, h.col))


def _blue_centroid(blue_units: Sequence[Unit]) -> tuple[float, float]:
    xs, ys = zip(*(planar_center(u.pos) for u in blue_units))
    return (sum(xs) / len(xs), sum(ys) / len(ys))


def _hex_nearest_planar(board: Board, x: float, y: float) -> HexCoord:
    best, best_d = None, None
    for h in board.all_hexes():
        hx, hy = planar_center(h)
        d = (hx - x) ** 2 + (hy - y) ** 2
        if best_d is None or d < best_d:
            best, best_d = h, d
    return best


def encode_subgoal(subgoal: Subgoal) -> np.ndarray:
    out = np.zeros(SUBGOAL_ENC_DIM)
    out[POSTURES.index(subgoal.posture)] = 1.0
    out[2 + subgoal.target_cell] = 1.0
    return out


def mid_view(s: GameState) -> np.ndarray:
    """17x7x7 manager view: K=7 pooling, with boards smaller than 7 padded
    out to 7 (pad cells read as water, matching the off-board convention)."""
    t = encode_full(s, None)
    c, h, w = t.shape
    if min(h, w) < 7:
        ph, pw = max(7, h), max(7, w)
        padded = np.zeros((c, ph, pw))
        padded[:, :h, :w] = t
        padded[12, h:, :] = 1.0
        padded[12, :, w:] = 1.0
        padded[13:] = t[13:, 0:1, 0:1]
        t = padded
    return coarse_abstract(t, 7)


def manager_decide(
    mid_obs: np.ndarray,
    subgoal: Subgoal,
    blue_units: Sequence[Unit],
    board: Board,
    policy: nnet.Mlp | None = None,
) -> list[UnitTask]:
    """Per-unit tasks from the 7x7 pooled view and the active subgoal.

    Scripted: offensive sends every unit to seize the nearest passable hex
    inside the target cell's block; defensive posts the closest unit on the
    city and screens the rest at the midpoint between the blue centroid and
    the nearest red mass.  Learned: per-unit 147-way argmax decoded as
    (slot // 3 -> mid cell, slot % 3 -> task).
    """
    if mid_obs.shape != (17, 7, 7):
        raise HierarchyConfigError(f"expected 17x7x7 mid obs, got {mid_obs.shape}")
    if not blue_units:
        raise HierarchyConfigError("manager needs at least one blue unit")

    if policy is not None:
        base = mid_obs.reshape(-1)
        sg = encode_subgoal(subgoal)
        tasks = []
        for u in sorted(blue_units, key=lambda u: u.id):
            feats = np.concatenate(
                [base, sg, [u.pos.col / board.width, u.pos.row / board.height]]
            )
            logits = nnet.forward(policy, feats)
            slot = int(np.argmax(logits))
            cell, task_i = slot // len(TASKS), slot % len(TASKS)
            objective = _nearest_passable(
                board, _block_center_hex(board, cell, 7), coarse_cell_hexes(board, cell, 7)
            )
            tasks.append(UnitTask(u.id, objective, TASKS[task_i]))
        return tasks

    units = sorted(blue_units, key=lambda u: u.id)
    if subgoal.posture == "offensive":
        block = coarse_cell_hexes(board, subgoal.target_cell, 5)
        center = _block_center_hex(board, subgoal.target_cell, 5)
        return [
            UnitTask(u.id, _nearest_passable(board, u.pos, block or None) if block
                     else _nearest_passable(board, center), "seize")
            for u in units
        ]

    cities = board.urban_hexes()
    if not cities:
        return [UnitTask(u.id, u.pos, "hold") for u in units]
    cx, cy = _blue_centroid(units)
    centroid_hex = _hex_nearest_planar(board, cx, cy)
    city = min(cities, key=lambda h: (distance(centroid_hex, h), h.row, h.col))
    holder = min(units, key=lambda u: (distance(u.pos, city), u.id))
    tasks = [UnitTask(holder.id, city, "hold")]
    red_cells = np.argwhere(mid_obs[8] > 0)
    if len(red_cells):
        cells = [int(r * 7 + c) for r, c in red_cells]
        nearest_cell = min(
            cells,
            key=lambda cell: distance(centroid_hex, _block_center_hex(board, cell, 7)),
        )
        ex, ey = planar_center(_block_center_hex(board, nearest_cell, 7))
        screen_spot = _nearest_passable(
            board, _hex_nearest_planar(board, (cx + ex) / 2, (cy + ey) / 2)
        )
    else:
        screen_spot = city
    tasks.extend(UnitTask(u.id, screen_spot, "screen") for u in units if u.id != holder.id)
    tasks.sort(key=lambda t: t.unit_id)
    return tasks


def encode_task(s: GameState, unit: Unit, task: UnitTask) -> np.ndarray:
    out = np.zeros(TASK_ENC_DIM)
    out[TASKS.index(task.task)] = 1.0
    ux, uy = planar_center(unit.pos)
    ox, oy = planar_center(task.objective_hex)
    span = max(1.0, 1.5 * s.board.width + np.sqrt(3.0) * s.board.height)
    out[3] = (ox - ux) / span
    out[4] = (oy - uy) / span
    out[5] = distance(unit.pos, task.objective_hex) / (s.board.width + s.board.height)
    return out


def _scripted_operator(s: GameState, unit: Unit, task: UnitTask) -> Action:
    acts = legal_actions(s, unit.id)
    enemies = [u for u in s.units if u.faction != unit.faction]

    def attack_weakest_adjacent():
        adjacent = [
            a for a in acts
            if a.kind == ATTACK and distance(unit.pos, a.target) <= 1
        ]
        if not adjacent:
            return None
        return min(adjacent, key=lambda a: (s.unit_at(a.target).strength, s.unit_at(a.target).id))

    def move_toward(goal):
        best, best_d = None, distance(unit.pos, goal)
        for a in acts:
            if a.kind == MOVE and distance(a.target, goal) < best_d:
                best, best_d = a, distance(a.target, goal)
        return best

    if task.task in ("seize", "hold"):
        if unit.pos == task.objective_hex:
            return attack_weakest_adjacent() or Action(PASS)
        return move_toward(task.objective_hex) or attack_weakest_adjacent() or Action(PASS)

    # screen: stand off at >= 2 from the nearest enemy, within 3 of the objective
    threat = min(
        (u for u in enemies), key=lambda u: (distance(unit.pos, u.pos), u.id), default=None
    )
    if threat is not None and distance(unit.pos, threat.pos) < 2:
        moves = [a for a in acts if a.kind == MOVE]
        if moves:
            within = [a for a in moves if distance(a.target, task.objective_hex) <= 3]
            pool = within or moves
            return max(pool, key=lambda a: distance(a.target, threat.pos))
    if distance(unit.pos, task.objective_hex) > 3:
        return move_toward(task.objective_hex) or Action(PASS)
    return Action(PASS)


class DqnOperator(BehaviorModel):
    """Task-conditioned Q-policy: local window features plus task encoding."""

    kind = "learned"

    def __init__(self, net: nnet.Mlp, name: str = "dqn_operator"):
        self.net = net
        self.name = name

    @staticmethod
    def obs_dim() -> int:
        return 17 * 7 * 7 + TASK_ENC_DIM

    def features(self, s: GameState, unit_id: int, task: UnitTask) -> np.ndarray:
        local = local_egocentric(s, unit_id).reshape(-1)
        return np.concatenate([local, encode_task(s, s.unit(unit_id), task)])

    def act_on_task(self, s: GameState, unit_id: int, task: UnitTask) -> Action:
        mask, table = slot_table(s, unit_id)
        q = nnet.forward(self.net, self.features(s, unit_id, task))
        return table[masked_argmax(q, mask)]

    def act(self, s: GameState, unit_id: int) -> Action:  # constant-task fallback
        unit = s.unit(unit_id)
        return self.act_on_task(s, unit_id, UnitTask(unit_id, unit.pos, "hold"))


def operator_act(
    s: GameState,
    unit_id: int,
    task: UnitTask,
    operator: BehaviorModel | None = None,
) -> Action:
    """Resolve one task into a primitive action (scripted fallback when no
    learned or multi-model operator is supplied)."""
    unit = s.unit(unit_id)
    if task.unit_id != unit_id:
        raise TaskError(f"task for unit {task.unit_id} given to unit {unit_id}")
    if operator is None:
        return _scripted_operator(s, unit, task)
    if isinstance(operator, DqnOperator):
        return operator.act_on_task(s, unit_id, task)
    return checked_act(operator, s, unit_id)


class HierarchyAgent(BehaviorModel):
    """BehaviorModel face of the full stack, with per-game plan state.

    ``commander_policy`` / ``manager_policy`` are "scripted", an Mlp, or None
    (level absent).  With both upper levels absent the agent is a pure
    pass-through to the operator, which makes a 1-level hierarchy replay-
    identical to the bare operator.
    """

    kind = "learned"

    def __init__(
        self,
        commander_policy="scripted",
        manager_policy="scripted",
        operator: BehaviorModel | None = None,
        commander_period: int = 5,
        objective: str = "max_score",
        name: str = "hierarchy",
    ):
        if commander_period < 1:
            raise HierarchyConfigError("commander_period must be >= 1")
        self.commander_policy = commander_policy
        self.manager_policy = manager_policy
        self.operator = operator
        self.commander_period = commander_period
        self.objective = objective
        self.name = name
        self.trainable: str | None = None
        self.begin_game(0)

    def begin_game(self, seed: int) -> None:
        self._subgoal: Subgoal | None = None
        self._subgoal_phase = 0
        self._tasks: dict[int, UnitTask] = {}
        self._planned_phase = 0
        if isinstance(self.operator, BehaviorModel):
            self.operator.begin_game(seed)

    @property
    def passthrough(self) -> bool:
        return self.commander_policy is None and self.manager_policy is None

    def _termination_fires(self, s: GameState) -> bool:
        term = self._subgoal.termination
        if term.kind == "max_phases":
            return s.phase - self._subgoal_phase >= term.phases
        block = set(coarse_cell_hexes(s.board, self._subgoal.target_cell, 5))
        return any(u.pos in block for u in s.living(BLUE))

    def _plan(self, s: GameState) -> dict:
        """Run commander/manager cadence at the first act call of a phase."""
        audit = {"commander_fired": False}
        if s.phase != self._planned_phase:
            self._planned_phase = s.phase
            fire = self._subgoal is None or self._termination_fires(s) or (
                s.phase - self._subgoal_phase >= self.commander_period
            )
            if fire:
                coarse = coarse_abstract(encode_full(s, None), 5)
                policy = self.commander_policy if isinstance(self.commander_policy, nnet.Mlp) else None
                self._subgoal = commander_decide(
                    coarse, self.objective, policy, self.commander_period
                )
                self._subgoal_phase = s.phase
                audit["commander_fired"] = True
            mid = mid_view(s)
            policy = self.manager_policy if isinstance(self.manager_policy, nnet.Mlp) else None
            tasks = manager_decide(mid, self._subgoal, s.living(BLUE), s.board, policy)
            self._tasks = {t.unit_id: t for t in tasks}
        return audit

    def task_for(self, s: GameState, unit_id: int) -> UnitTask:
        task = self._tasks.get(unit_id)
        if task is None:  # unit appeared outside the plan; hold in place
            task = UnitTask(unit_id, s.unit(unit_id).pos, "hold")
        return task

    def act(self, s: GameState, unit_id: int) -> Action:
        return self.act_with_audit(s, unit_id)[0]

    def act_with_audit(self, s: GameState, unit_id: int) -> tuple[Action, dict]:
        if self.passthrough:
            if self.operator is None:
                raise HierarchyConfigError("pass-through hierarchy needs an operator")
            if isinstance(self.operator, MultiModelAgent):
                action, audit = self.operator.act_with_audit(s, unit_id)
                return action, {"levels": 1, **audit}
            return checked_act(self.operator, s, unit_id), {"levels": 1}
        audit = self._plan(s)
        task = self.task_for(s, unit_id)
        action = operator_act(s, unit_id, task, self.operator)
        audit.update(
            {
                "phase": s.phase,
                "subgoal": {
                    "posture": self._subgoal.posture,
                    "target_cell": self._subgoal.target_cell,
                    "issued_phase": self._subgoal_phase,
                },
                "task": {
                    "unit_id": task.unit_id,
                    "objective": [task.objective_hex.col, task.objective_hex.row],
                    "task": task.task,
                },
            }
        )
        return action, audit


# --- Level training ----------------------------------------------------------


@dataclass
class HierarchyTrainConfig:
    scenario_factory: ScenarioFactory
    red_opponent: BehaviorModel
    seed: int = 0
    learning_rate: float = 1e-2
    momentum: float = 0.9
    batch_size: int = 32
    hidden: tuple[int, ...] = (128,)
    gamma: float = 0.99
    epsilon_start: float = 1.0
    epsilon_end: float = 0.05
    replay_capacity: int = 10_000
    min_replay: int = 400
    target_sync: int = 250
    # reward-shaping hook (the intrinsic-reward attachment point); identity
    # semantics when None, in which case it is never invoked
    reward_shaper: Callable[[str, float], float] | None = None


def _shaped(cfg: HierarchyTrainConfig, level: str, reward: float) -> float:
    if cfg.reward_shaper is None:
        return reward
    return cfg.reward_shaper(level, reward)


def _clone_agent(h: HierarchyAgent) -> HierarchyAgent:
    clone = HierarchyAgent(
        commander_policy=h.commander_policy,
        manager_policy=h.manager_policy,
        operator=h.operator,
        commander_period=h.commander_period,
        objective=h.objective,
        name=h.name,
    )
    return clone


def train_level(
    h: HierarchyAgent, level: str, budget: int, cfg: HierarchyTrainConfig
) -> HierarchyAgent:
    """DQN-style training of exactly one level; the others stay bit-identical.

    budget counts blue action-selection steps rolled through the environment.
    """
    if level not in ("commander", "manager", "operator"):
        raise HierarchyConfigError(f"unknown level {level!r}")
    if h.trainable is not None and h.trainable != level:
        raise HierarchyConfigError(
            f"agent already marks {h.trainable!r} trainable; refusing to train {level!r}"
        )
    if budget < 0:
        raise HierarchyConfigError("budget must be >= 0")
    out = _clone_agent(h)
    if budget == 0:
        return out
    if level == "operator":
        out.operator = _train_operator(out, budget, cfg)
    elif level == "commander":
        out.commander_policy = _train_commander(out, budget, cfg)
    else:
        out.manager_policy = _train_manager(out, budget, cfg)
    return out


def _epsilon(cfg: HierarchyTrainConfig, step: int, budget: int) -> float:
    frac = min(1.0, step / max(1, int(budget * 0.6)))
    return cfg.epsilon_start + frac * (cfg.epsilon_end - cfg.epsilon_start)


def _train_operator(h: HierarchyAgent, budget: int, cfg: HierarchyTrainConfig) -> DqnOperator:
    rng = np.random.default_rng(cfg.seed)
    if isinstance(h.operator, DqnOperator):
        net = h.operator.net.copy()
    else:
        net = nnet.Mlp([DqnOperator.obs_dim(), *cfg.hidden, N_SLOTS], seed=cfg.seed)
    target = net.copy()
    operator = DqnOperator(net)
    driver = _clone_agent(h)
    driver.operator = operator
    replay = ReplayBuffer(cfg.replay_capacity, DqnOperator.obs_dim())
    sgd = nnet.SgdConfig(cfg.learning_rate, cfg.momentum, cfg.batch_size, cfg.seed)
    env = BlueStepEnv(cfg.scenario_factory, cfg.red_opponent)

    episode = 0
    state, unit = env.reset(cfg.seed * 1_000_003 + episode)
    driver.begin_game(episode)

    def features(s, uid):
        if driver.passthrough:
            task = UnitTask(uid, s.unit(uid).pos, "hold")
        else:
            driver._plan(s)
            task = driver.task_for(s, uid)
        return operator.features(s, uid, task)

    obs = features(state, unit)
    mask, table = slot_table(state, unit)
    for step_i in range(budget):
        eps = _epsilon(cfg, step_i, budget)
        if rng.random() < eps:
            slot = int(rng.choice(np.flatnonzero(mask)))
        else:
            slot = masked_argmax(nnet.forward(net, obs), mask)
        state, unit, reward, done = env.step(table[slot])
        reward = _shaped(cfg, "operator", reward) * 0.01
        if done or unit is None:
            replay.push(obs, slot, reward, None, None, True)
            episode += 1
            state, unit = env.reset(cfg.seed * 1_000_003 + episode)
            driver.begin_game(episode)
            while unit is None:
                episode += 1
                state, unit = env.reset(cfg.seed * 1_000_003 + episode)
                driver.begin_game(episode)
            obs = features(state, unit)
            mask, table = slot_table(state, unit)
            continue
        next_obs = features(state, unit)
        next_mask, next_table = slot_table(state, unit)
        replay.push(obs, slot, reward, next_obs, next_mask, False)
        obs, mask, table = next_obs, next_mask, next_table

        if replay.size >= cfg.min_replay:
            idx = replay.sample(cfg.batch_size, rng)
            batch = replay.obs[idx].astype(np.float64)
            q_next = nnet.forward(target, replay.next_obs[idx].astype(np.float64))
            q_next = np.where(replay.next_mask[idx], q_next, -np.inf)
            best = np.max(q_next, axis=1)
            best = np.where(np.isfinite(best), best, 0.0)
            targets = replay.rewards[idx] + cfg.gamma * np.where(replay.done[idx], 0.0, best)
            y = nnet.forward(net, batch)
            y[np.arange(len(idx)), replay.slots[idx]] = targets
            nnet.train_step(net, (batch, y), sgd)
        if (step_i + 1) % cfg.target_sync == 0:
            target = net.copy()
    return operator


def _train_commander(h: HierarchyAgent, budget: int, cfg: HierarchyTrainConfig):
    """Q-learning over subgoal decisions at the commander cadence."""
    rng = np.random.default_rng(cfg.seed)
    if isinstance(h.commander_policy, nnet.Mlp):
        net = h.commander_policy.copy()
    else:
        net = nnet.Mlp([17 * 25, *cfg.hidden, COMMANDER_SLOTS], seed=cfg.seed)
    target = net.copy()
    sgd = nnet.SgdConfig(cfg.learning_rate, cfg.momentum, cfg.batch_size, cfg.seed)
    replay = ReplayBuffer(cfg.replay_capacity, 17 * 25, n_slots=COMMANDER_SLOTS)
    all_slots = np.ones(COMMANDER_SLOTS, dtype=bool)
    env = BlueStepEnv(cfg.scenario_factory, cfg.red_opponent)
    driver = _clone_agent(h)

    steps_used = 0
    episode = 0
    while steps_used < budget:
        seed = cfg.seed * 999_983 + episode
        episode += 1
        driver.begin_game(seed)
        state, unit = env.reset(seed)
        if unit is None:
            continue
        pending = None  # (obs, slot, accumulated reward)
        done = False
        while not done and unit is not None and steps_used < budget:
            if state.phase != driver._planned_phase:
                fire = driver._subgoal is None or driver._termination_fires(state) or (
                    state.phase - driver._subgoal_phase >= driver.commander_period
                )
                if fire:
                    coarse = coarse_abstract(encode_full(state, None), 5).reshape(-1)
                    if pending is not None:
                        replay.push(pending[0], pending[1], pending[2], coarse, all_slots, False)
                    eps = _epsilon(cfg, steps_used, budget)
                    if rng.random() < eps:
                        slot = int(rng.integers(COMMANDER_SLOTS))
                    else:
                        slot = int(np.argmax(nnet.forward(net, coarse)))
                    driver._subgoal = Subgoal(
                        POSTURES[slot // COMMANDER_CELLS],
                        slot % COMMANDER_CELLS,
                        Termination("max_phases", driver.commander_period),
                    )
                    driver._subgoal_phase = state.phase
                    pending = [coarse, slot, 0.0]
                driver._planned_phase = state.phase
                mid = mid_view(state)
                tasks = manager_decide(
                    mid,
                    driver._subgoal,
                    state.living(BLUE),
                    state.board,
                    driver.manager_policy if isinstance(driver.manager_policy, nnet.Mlp) else None,
                )
                driver._tasks = {t.unit_id: t for t in tasks}
            task = driver.task_for(state, unit)
            action = operator_act(state, unit, task, driver.operator)
            state, unit, reward, done = env.step(action)
            steps_used += 1
            if pending is not None:
                pending[2] += _shaped(cfg, "commander", reward) * 0.01
            if replay.size >= cfg.min_replay and steps_used % 4 == 0:
                idx = replay.sample(cfg.batch_size, rng)
                batch = replay.obs[idx].astype(np.float64)
                q_next = nnet.forward(target, replay.next_obs[idx].astype(np.float64))
                best = q_next.max(axis=1)
                targets = replay.rewards[idx] + cfg.gamma * np.where(
                    replay.done[idx], 0.0, best
                )
                y = nnet.forward(net, batch)
                y[np.arange(len(idx)), replay.slots[idx]] = targets
                nnet.train_step(net, (batch, y), sgd)
            if steps_used % cfg.target_sync == 0:
                target = net.copy()
        if pending is not None:
            replay.push(pending[0], pending[1], pending[2], None, None, True)
    return net


def _train_manager(h: HierarchyAgent, budget: int, cfg: HierarchyTrainConfig):
    """One-step (bandit-style) Q-learning over per-unit task assignments."""
    rng = np.random.default_rng(cfg.seed)
    in_dim = 17 * 49 + SUBGOAL_ENC_DIM + 2
    if isinstance(h.manager_policy, nnet.Mlp):
        net = h.manager_policy.copy()
    else:
        net = nnet.Mlp([in_dim, *cfg.hidden, MANAGER_SLOTS], seed=cfg.seed)
    sgd = nnet.SgdConfig(cfg.learning_rate, cfg.momentum, cfg.batch_size, cfg.seed)
    replay = ReplayBuffer(cfg.replay_capacity, in_dim)
    env = BlueStepEnv(cfg.scenario_factory, cfg.red_opponent)
    driver = _clone_agent(h)

    steps_used = 0
    episode = 0
    while steps_used < budget:
        seed = cfg.seed * 888_887 + episode
        episode += 1
        driver.begin_game(seed)
        state, unit = env.reset(seed)
        if unit is None:
            continue
        done = False
        phase_decisions: list[tuple[np.ndarray, int]] = []
        phase_reward = 0.0
        current_phase = state.phase
        while not done and unit is not None and steps_used < budget:
            if state.phase != current_phase:
                for f, slot in phase_decisions:
                    replay.push(f, slot, phase_reward, None, None, True)
                phase_decisions, phase_reward = [], 0.0
                current_phase = state.phase
            if state.phase != driver._planned_phase:
                driver._planned_phase = state.phase
                fire = driver._subgoal is None or driver._termination_fires(state) or (
                    state.phase - driver._subgoal_phase >= driver.commander_period
                )
                if fire:
                    coarse = coarse_abstract(encode_full(state, None), 5)
                    cpol = driver.commander_policy if isinstance(driver.commander_policy, nnet.Mlp) else None
                    driver._subgoal = commander_decide(
                        coarse, driver.objective, cpol, driver.commander_period
                    )
                    driver._subgoal_phase = state.phase
                mid = mid_view(state).reshape(-1)
                sg = encode_subgoal(driver._subgoal)
                eps = _epsilon(cfg, steps_used, budget)
                tasks = {}
                for u in sorted(state.living(BLUE), key=lambda u: u.id):
                    feats = np.concatenate(
                        [mid, sg, [u.pos.col / state.board.width, u.pos.row / state.board.height]]
                    )
                    if rng.random() < eps:
                        slot = int(rng.integers(MANAGER_SLOTS))
                    else:
                        slot = int(np.argmax(nnet.forward(net, feats)))
                    cell, task_i = slot // len(TASKS), slot % len(TASKS)
                    objective = _nearest_passable(
                        state.board,
                        _block_center_hex(state.board, cell, 7),
                        coarse_cell_hexes(state.board, cell, 7),
                    )
                    tasks[u.id] = UnitTask(u.id, objective, TASKS[task_i])
                    phase_decisions.append((feats, slot))
                driver._tasks = tasks
            task = driver.task_for(state, unit)
            action = operator_act(state, unit, task, driver.operator)
            state, unit, reward, done = env.step(action)
            steps_used += 1
            phase_reward += _shaped(cfg, "manager", reward) * 0.01
            if replay.size >= cfg.min_replay and steps_used % 4 == 0:
                idx = replay.sample(cfg.batch_size, rng)
                batch = replay.obs[idx].astype(np.float64)
                targets = replay.rewards[idx]
                y = nnet.forward(net, batch)
                y[np.arange(len(idx)), replay.slots[idx]] = targets
                nnet.train_step(net, (batch, y), sgd)
        for f, slot in phase_decisions:
            replay.push(f, slot, phase_reward, None, None, True)
    return net


# --- Bundles ------------------------------------------------------------------


def _level_artifact(policy, out: Path, stem: str) -> dict:
    if policy is None:
        return {"type": "none"}
    if isinstance(policy, nnet.Mlp):
        nnet.save_weights(policy, out / f"{stem}.hfnn")
        return {"type": "mlp", "file": f"{stem}.hfnn"}
    return {"type": "scripted"}


def save_bundle(h: HierarchyAgent, out_dir: str | Path) -> None:
    from .agents.dqn import save_policy
    from .agents.scripted import SCRIPTED_POLICIES
    from .multimodel import save_multimodel

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest = {
        "v": BUNDLE_VERSION,
        "commander_period": h.commander_period,
        "objective": h.objective,
        "name": h.name,
        "commander": _level_artifact(h.commander_policy, out, "commander"),
        "manager": _level_artifact(h.manager_policy, out, "manager"),
    }
    op = h.operator
    if op is None:
        manifest["operator"] = {"type": "none"}
    elif isinstance(op, DqnOperator):
        nnet.save_weights(op.net, out / "operator.hfnn")
        manifest["operator"] = {"type": "dqn_operator", "file": "operator.hfnn"}
    elif isinstance(op, MultiModelAgent):
        save_multimodel(op, out / "operator_mm")
        manifest["operator"] = {"type": "multimodel", "dir": "operator_mm"}
    elif isinstance(op, DqnPolicy):
        save_policy(op, out / "operator_dqn")
        manifest["operator"] = {"type": "dqn", "dir": "operator_dqn"}
    elif op.name in SCRIPTED_POLICIES:
        manifest["operator"] = {"type": "scripted", "name": op.name}
    else:
        raise HierarchyConfigError(f"cannot bundle operator {op!r}")
    (out / "manifest.json").write_text(json.dumps(manifest, sort_keys=True, indent=1))


def load_bundle(out_dir: str | Path) -> HierarchyAgent:
    from .agents.dqn import load_policy
    from .agents.scripted import ScriptedPolicy
    from .multimodel import load_multimodel

    out = Path(out_dir)
    manifest = json.loads((out / "manifest.json").read_text())
    if manifest.get("v") != BUNDLE_VERSION:
        raise HierarchyConfigError(f"unsupported bundle version {manifest.get('v')!r}")

    def load_level(entry, stem):
        if entry["type"] == "none":
            return None
        if entry["type"] == "mlp":
            return nnet.load_weights(out / entry["file"])
        return "scripted"

    opd = manifest["operator"]
    if opd["type"] == "none":
        operator = None
    elif opd["type"] == "dqn_operator":
        operator = DqnOperator(nnet.load_weights(out / opd["file"]))
    elif opd["type"] == "multimodel":
        operator = load_multimodel(out / opd["dir"])
    elif opd["type"] == "dqn":
        operator = load_policy(out / opd["dir"])
    else:
        operator = ScriptedPolicy(opd["name"])
    agent = HierarchyAgent(
        commander_policy=load_level(manifest["commander"], "commander"),
        manager_policy=load_level(manifest["manager"], "manager"),
        operator=operator,
        commander_period=manifest["commander_period"],
        objective=manifest["objective"],
        name=manifest.get("name", "hierarchy"),
    )
    return agent


def bundle_hashes(out_dir: str | Path) -> dict[str, str]:
    """Per-level content hashes of a saved bundle (freeze-contract checks)."""
    out = Path(out_dir)
    manifest = json.loads((out / "manifest.json").read_text())

    def digest(entry, extra_file=None):
        h = hashlib.sha256(json.dumps(entry, sort_keys=True).encode())
        if entry.get("file"):
            h.update((out / entry["file"]).read_bytes())
        if entry.get("dir"):
            for f in sorted((out / entry["dir"]).rglob("*")):
                if f.is_file():
                    h.update(f.name.encode())
                    h.update(f.read_bytes())
        return h.hexdigest()

    return {level: digest(manifest[level]) for level in ("commander", "manager", "operator")}
