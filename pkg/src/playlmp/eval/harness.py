"""Goal-reaching evaluation: rollouts, success tables, robustness sweeps.

Protocol per rollout: reset the environment to a held-out demo's initial
state (optionally perturbing the agent position), hand the policy that
demo's final state as the goal, run the policy's act loop for the task
horizon, and score success if the predicate holds at any visited state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..collectors import random_action
from ..data import PlayDataset
from ..exceptions import DataFormatError
from ..playground import EnvConfig, perturb_initial, step
from ..tasks import TaskSpec, register_tasks

ROBUSTNESS_RADII = (0.0, 0.05, 0.1, 0.2, 0.4)


def wilson_interval(successes: int, n: int, z: float = 1.959964) -> tuple[float, float]:
    """95% Wilson score interval for a binomial proportion."""
    if n == 0:
        return (0.0, 1.0)
    p = successes / n
    denom = 1.0 + z * z / n
    center = (p + z * z / (2 * n)) / denom
    half = (z / denom) * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n))
    return (max(0.0, center - half), min(1.0, center + half))


@dataclass
class RolloutTrace:
    task_id: str
    success: bool
    ticks: int
    progress: list = field(default_factory=list)


@dataclass
class TaskResult:
    task_id: str
    n: int
    successes: int

    @property
    def rate(self) -> float:
        return self.successes / self.n if self.n else 0.0

    @property
    def ci(self) -> tuple[float, float]:
        return wilson_interval(self.successes, self.n)


@dataclass
class EvalReport:
    results: list  # list[TaskResult]
    n_rollouts: int
    radius: float
    seed: int
    manifest_hash: str = ""
    ci_method: str = "wilson-95"

    @property
    def aggregate(self) -> TaskResult:
        return TaskResult("aggregate", sum(r.n for r in self.results),
                          sum(r.successes for r in self.results))


class RandomPolicy:
    """Uniform actions over the action-space bounds (chance baseline)."""

    def __init__(self, config: EnvConfig):
        self.config = config

    def begin_episode(self, goal_state, rng, task_id=None):
        return rng

    def act_env(self, state, rng):
        return random_action(self.config, rng), rng


class ExpertPolicy:
    """The task's scripted controller wrapped in the policy protocol."""

    def __init__(self, config: EnvConfig, task: TaskSpec):
        self.config = config
        self.task = task

    def begin_episode(self, goal_state, rng, task_id=None):
        return {"script": None, "rng": rng}

    def act_env(self, state, ctx):
        if ctx["script"] is None:
            ctx["script"] = self.task.make_expert(self.config, state, ctx["rng"])
        action = ctx["script"].act(state)
        if action is None:
            from ..playground import Action

            action = Action(0.0, 0.0, 1.0)
        return action, ctx


def split_demos(dataset: PlayDataset, n_val: int = 10, n_test: int = 10) -> dict:
    """Per-task train/validation/test episode split, in generation order."""
    by_task: dict[str, list] = {}
    for ep in dataset.episodes:
        if ep.collector != "demo":
            raise DataFormatError("demo split requires a demo dataset")
        by_task.setdefault(ep.task_id, []).append(ep)
    splits = {}
    for task_id, eps in by_task.items():
        if len(eps) <= n_val + n_test:
            raise DataFormatError(
                f"task '{task_id}' has {len(eps)} demos, need > {n_val + n_test} "
                f"for the train/val/test split")
        splits[task_id] = {
            "train": eps[: len(eps) - n_val - n_test],
            "val": eps[len(eps) - n_val - n_test : len(eps) - n_test],
            "test": eps[len(eps) - n_test :],
        }
    return splits


def run_rollout(config: EnvConfig, task: TaskSpec, policy, demo_episode,
                radius: float, seed, record_progress: bool = False) -> RolloutTrace:
    initial = demo_episode.states[0]
    if radius > 0:
        initial = perturb_initial(config, initial, radius, seed=[*_as_list(seed), 1])
    goal_state = demo_episode.states[-1]
    rng = np.random.default_rng([*_as_list(seed), 2])
    ctx = policy.begin_episode(goal_state, rng, task_id=task.task_id)
    state = initial
    progress = []
    for t in range(task.max_ticks):
        action, ctx = policy.act_env(state, ctx)
        state = step(config, state, action)
        if record_progress:
            progress.append(task.progress(config, initial, state))
        if task.predicate(config, initial, state):
            return RolloutTrace(task.task_id, True, t + 1, progress)
    return RolloutTrace(task.task_id, False, task.max_ticks, progress)


def _as_list(seed) -> list:
    return list(seed) if isinstance(seed, (list, tuple)) else [seed]


def _policy_for(policy, task_id: str):
    if isinstance(policy, dict):
        if task_id not in policy:
            raise DataFormatError(f"no policy provided for task '{task_id}'")
        return policy[task_id]
    return policy


def evaluate(policy, config: EnvConfig, demo_dataset: PlayDataset,
             task_ids=None, n_rollouts: int = 20, radius: float = 0.0,
             seed: int = 0, split: str = "test", n_val: int = 10,
             n_test: int = 10, manifest_hash: str = "",
             record_progress: bool = False):
    """Success table over tasks; `policy` is one estimator or a per-task dict."""
    registry = register_tasks()
    task_ids = list(task_ids) if task_ids else list(registry)
    splits = split_demos(demo_dataset, n_val=n_val, n_test=n_test)
    results = []
    traces = []
    for task_index, task_id in enumerate(task_ids):
        if task_id not in registry:
            raise DataFormatError(f"unknown task '{task_id}'")
        task = registry[task_id]
        goals = splits[task_id][split]
        bound_policy = _policy_for(policy, task_id)
        successes = 0
        for i in range(n_rollouts):
            trace = run_rollout(config, task, bound_policy, goals[i % len(goals)],
                                radius, seed=[seed, task_index, i],
                                record_progress=record_progress)
            successes += trace.success
            traces.append(trace)
        results.append(TaskResult(task_id, n_rollouts, successes))
    report = EvalReport(results=results, n_rollouts=n_rollouts, radius=radius,
                        seed=seed, manifest_hash=manifest_hash)
    if record_progress:
        return report, traces
    return report


@dataclass
class RobustnessTable:
    radii: tuple
    rates: dict  # (model_name, radius) -> aggregate success rate
    per_task: dict  # (model_name, radius) -> {task_id: rate}

    def slope(self, model_name: str) -> float:
        """Least-squares slope of aggregate success vs radius."""
        xs = np.asarray(self.radii)
        ys = np.asarray([self.rates[(model_name, r)] for r in self.radii])
        return float(np.polyfit(xs, ys, 1)[0])


def robustness_sweep(policies: dict, config: EnvConfig, demo_dataset: PlayDataset,
                     radii=ROBUSTNESS_RADII, n_rollouts: int = 10, seed: int = 0,
                     task_ids=None, n_val: int = 10, n_test: int = 10) -> RobustnessTable:
    """Success per (model, perturbation radius) over the same seeds."""
    rates = {}
    per_task = {}
    for name, policy in policies.items():
        for radius in radii:
            report = evaluate(policy, config, demo_dataset, task_ids=task_ids,
                              n_rollouts=n_rollouts, radius=radius, seed=seed,
                              n_val=n_val, n_test=n_test)
            rates[(name, radius)] = report.aggregate.rate
            per_task[(name, radius)] = {r.task_id: r.rate for r in report.results}
    return RobustnessTable(radii=tuple(radii), rates=rates, per_task=per_task)


def had_retry(progress: list, success: bool, threshold: float = 0.5) -> bool:
    """True when progress crossed `threshold` upward, fell back below it,
    and the episode still ended in success (a near miss before the win)."""
    if not success:
        return False
    rose = False
    for p in progress:
        if p >= threshold:
            rose = True
        elif rose:
            return True
    return False


def retry_statistic(traces: list) -> int:
    """Number of episodes that succeeded only after a near-miss."""
    return sum(had_retry(t.progress, t.success) for t in traces)
