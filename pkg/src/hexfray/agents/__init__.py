from .base import BehaviorModel, LegalityError, RandomPolicy, checked_act
from .dqn import (
    CompatibilityError,
    ConfigError,
    DqnConfig,
    DqnPolicy,
    dqn_act,
    dqn_train,
    encode_obs,
    load_policy,
    save_curve,
    save_policy,
    scenario_factory,
)
from .encoding import ACTION_ENCODING_VERSION, N_SLOTS, masked_argmax, slot_table
from .rollout import BlueStepEnv, play_score
from .scripted import SCRIPTED_POLICIES, PolicyLookupError, ScriptedPolicy, scripted_act

__all__ = [
    "ACTION_ENCODING_VERSION",
    "BehaviorModel",
    "BlueStepEnv",
    "CompatibilityError",
    "ConfigError",
    "DqnConfig",
    "DqnPolicy",
    "LegalityError",
    "N_SLOTS",
    "PolicyLookupError",
    "RandomPolicy",
    "SCRIPTED_POLICIES",
    "ScriptedPolicy",
    "checked_act",
    "dqn_act",
    "dqn_train",
    "encode_obs",
    "load_policy",
    "masked_argmax",
    "play_score",
    "save_curve",
    "save_policy",
    "scenario_factory",
    "scripted_act",
    "slot_table",
]
