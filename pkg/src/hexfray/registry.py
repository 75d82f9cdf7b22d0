"""Agent specs: one string names any playable agent.

Forms: a scripted policy name ("baseline", "greedy_attack", ...), "random"
or "random:<seed>", and directory-backed learned agents "dqn:<dir>",
"multimodel:<dir>", "hierarchy:<dir>".
"""

from __future__ import annotations

from .agents.base import BehaviorModel, RandomPolicy
from .agents.scripted import SCRIPTED_POLICIES, ScriptedPolicy


class AgentSpecError(ValueError):
    pass


def resolve_agent(spec: str) -> BehaviorModel:
    if spec in SCRIPTED_POLICIES:
        return ScriptedPolicy(spec)
    if spec == "random":
        return RandomPolicy(0)
    if spec.startswith("random:"):
        return RandomPolicy(int(spec.split(":", 1)[1]))
    if spec.startswith("dqn:"):
        from .agents.dqn import load_policy

        return load_policy(spec.split(":", 1)[1])
    if spec.startswith("multimodel:"):
        from .multimodel import load_multimodel

        return load_multimodel(spec.split(":", 1)[1])
    if spec.startswith("hierarchy:"):
        from .hierarchy import load_bundle

        return load_bundle(spec.split(":", 1)[1])
    raise AgentSpecError(
        f"unknown agent spec {spec!r}; expected a scripted name "
        f"({', '.join(sorted(SCRIPTED_POLICIES))}), random[:seed], "
        f"dqn:<dir>, multimodel:<dir>, or hierarchy:<dir>"
    )
