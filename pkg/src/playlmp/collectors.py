"""Data collection: scripted play operator, expert demos, random actions.

The play operator is the human stand-in: it keeps sampling affordance
goals uniformly (door, drawer, one of the buttons, relocating the
block, spinning it, or wandering), executes each with a proportional
controller plus Gaussian action noise, and picks one of at least two
approach styles per goal so the same outcome is reached along genuinely
different paths.
"""

from __future__ import annotations

import math

import numpy as np

from .control import (
    GRIP_OPEN,
    CarryTo,
    GraspBlock,
    PressButton,
    Reach,
    Release,
    Script,
    SlideTrack,
    Spin,
)
from .data import Episode, PlayDataset
from .exceptions import DataFormatError
from .playground import Action, EnvConfig, EnvState, clamp_action, reset, step
from .tasks import TaskSpec, register_tasks

GOAL_CATEGORIES = (
    "toggle-door", "toggle-drawer", "press-button",
    "relocate-block", "rotate-block", "wander",
)
GOAL_TIMEOUT = 300
PLAY_SPEED = 0.8
NOISE_SCALE = 0.2  # action noise sigma as a fraction of a_max


def _handle_pos(track, fraction):
    (x0, y0), (x1, y1) = track
    return (x0 + (x1 - x0) * fraction, y0 + (y1 - y0) * fraction)


class PlayOperator:
    """Curiosity-style scripted operator over the affordance repertoire."""

    def __init__(self, config: EnvConfig, rng, speed: float = PLAY_SPEED,
                 noise: float = NOISE_SCALE, goal_timeout: int = GOAL_TIMEOUT):
        self.config = config
        self.rng = rng
        self.speed = speed
        self.noise = noise
        self.goal_timeout = goal_timeout
        self.history: list[str] = []
        self._script: Script | None = None
        self._age = 0

    def act(self, state: EnvState) -> Action:
        action = None
        if self._script is not None and self._age < self.goal_timeout:
            action = self._script.act(state)
            self._age += 1
        if action is None:
            # goal finished or timed out; a fresh goal always yields an action
            for _ in range(8):
                self._script = self._new_goal(state)
                self._age = 1
                action = self._script.act(state)
                if action is not None:
                    break
            else:
                action = Action(0.0, 0.0, GRIP_OPEN)
        sigma = self.noise * self.config.a_max
        return Action(
            dx=action.dx + float(self.rng.normal(0.0, sigma)),
            dy=action.dy + float(self.rng.normal(0.0, sigma)),
            grip=action.grip,
        )

    def _new_goal(self, state: EnvState) -> Script:
        cfg = self.config
        rng = self.rng
        category = GOAL_CATEGORIES[int(rng.integers(len(GOAL_CATEGORIES)))]
        self.history.append(category)
        side = 1.0 if rng.integers(2) else -1.0
        if category == "toggle-door":
            target = 1.0 if state.door_open < 0.5 else 0.0
            hx, hy = _handle_pos(cfg.door_track, state.door_open)
            waypoint = (hx + side * 0.07, hy - 0.07)
            return Script([Reach(cfg, waypoint, tol=0.03, speed=self.speed),
                           SlideTrack(cfg, "door", target, speed=self.speed)])
        if category == "toggle-drawer":
            target = 1.0 if state.drawer_open < 0.5 else 0.0
            hx, hy = _handle_pos(cfg.drawer_track, state.drawer_open)
            waypoint = (hx - 0.07, hy + side * 0.07)
            return Script([Reach(cfg, waypoint, tol=0.03, speed=self.speed),
                           SlideTrack(cfg, "drawer", target, speed=self.speed)])
        if category == "press-button":
            index = int(rng.integers(3))
            offset = (0.0, 0.0) if rng.integers(2) else (0.08, side * 0.08)
            return Script([PressButton(cfg, index, approach_offset=offset,
                                       speed=self.speed)])
        if category == "relocate-block":
            bx0, by0, bx1, by1 = cfg.block_region
            dest = (float(rng.uniform(bx0, bx1)), float(rng.uniform(by0, by1)))
            close = float(rng.uniform(0.3, 0.85))
            return Script([GraspBlock(cfg, approach_offset=(side * 0.08, 0.0),
                                      speed=self.speed, close_frac=close),
                           CarryTo(cfg, dest, speed=self.speed),
                           Release()])
        if category == "rotate-block":
            angle = float(rng.uniform(0.6, 2.2))
            close = float(rng.uniform(0.3, 0.85))
            return Script([GraspBlock(cfg, approach_offset=(0.0, side * 0.08),
                                      speed=self.speed, close_frac=close),
                           Spin(cfg, angle),
                           Release()])
        ax0, ay0, ax1, ay1 = cfg.agent_region
        waypoint = (float(rng.uniform(ax0, ax1)), float(rng.uniform(ay0, ay1)))
        grip = GRIP_OPEN if rng.integers(2) else 0.3
        return Script([Reach(cfg, waypoint, grip=grip, tol=0.04, speed=self.speed)])


def random_action(config: EnvConfig, rng) -> Action:
    """Uniform over the bounds of the action space."""
    return Action(dx=float(rng.uniform(-config.a_max, config.a_max)),
                  dy=float(rng.uniform(-config.a_max, config.a_max)),
                  grip=float(rng.uniform(0.0, 1.0)))


def _rollout(config, state, policy, ticks, seed) -> Episode:
    states = [state]
    actions = []
    for _ in range(ticks):
        action = clamp_action(config, policy(state))
        state = step(config, state, action)
        actions.append(action)
        states.append(state)
    return Episode(states=states, actions=actions, collector=policy.collector,
                   seed=seed)


def collect_play(config: EnvConfig, minutes: float, seed: int,
                 episode_minutes: float = 1.0) -> PlayDataset:
    """A play corpus of `minutes` simulated minutes in fixed-length episodes."""
    return _collect_continuous(config, minutes, seed, episode_minutes, "play")


def collect_random(config: EnvConfig, minutes: float, seed: int,
                   episode_minutes: float = 1.0) -> PlayDataset:
    return _collect_continuous(config, minutes, seed, episode_minutes, "random")


def _collect_continuous(config, minutes, seed, episode_minutes, kind) -> PlayDataset:
    episode_ticks = int(round(episode_minutes * 60 * config.tick_rate))
    n_episodes = max(1, int(round(minutes / episode_minutes)))
    episodes = []
    for i in range(n_episodes):
        state = reset(config, seed=[seed, i, 0])
        rng = np.random.default_rng([seed, i, 1])
        if kind == "play":
            operator = PlayOperator(config, rng)
            policy = lambda s: operator.act(s)  # noqa: E731
        else:
            policy = lambda s: random_action(config, rng)  # noqa: E731
        policy.collector = kind
        episodes.append(_rollout(config, state, policy, episode_ticks, seed=[seed, i]))
    return PlayDataset.from_episodes(episodes, config, kind)


def collect_two_mode(config: EnvConfig, n_episodes: int, seed: int,
                     noise: float = 0.1, episode_ticks: int = 40) -> PlayDataset:
    """Diagnostic corpus with exactly two behavior modes.

    Every episode starts from one fixed state and ends with the agent at
    one fixed goal point, but travels via a waypoint either above or
    below the direct line (alternating).  The (current, goal) pair is
    identical across modes, so the action distribution conditioned on it
    is genuinely bimodal.
    """
    base = EnvState(agent_x=0.18, agent_y=0.5, gripper=1.0, holding=False,
                    block_x=0.8, block_y=0.85, block_theta=0.0,
                    door_open=0.0, drawer_open=0.0,
                    pressed_r=0.0, pressed_g=0.0, pressed_b=0.0,
                    light_r=0, light_g=0, light_b=0, tick=0)
    goal_point = (0.82, 0.5)
    episodes = []
    for i in range(n_episodes):
        rng = np.random.default_rng([seed, i])
        upper = i % 2 == 0
        waypoint = (0.5, 0.78) if upper else (0.5, 0.22)
        # tol=0 on the last leg: the agent station-keeps at the goal against
        # the injected noise, so every episode ends in (nearly) the same state
        script = Script([Reach(config, waypoint, tol=0.03, speed=0.8),
                         Reach(config, goal_point, tol=0.0, speed=0.8)])
        sigma = noise * config.a_max
        states = [base]
        actions = []
        state = base
        for _ in range(episode_ticks):
            planned = script.act(state) or Action(0.0, 0.0, GRIP_OPEN)
            action = clamp_action(config, Action(
                dx=planned.dx + float(rng.normal(0.0, sigma)),
                dy=planned.dy + float(rng.normal(0.0, sigma)),
                grip=planned.grip))
            state = step(config, state, action)
            actions.append(action)
            states.append(state)
        episodes.append(Episode(states=states, actions=actions, collector="play",
                                seed=[seed, i], task_id=None))
    return PlayDataset.from_episodes(episodes, config, "play")


def generate_demo(config: EnvConfig, task: TaskSpec, seed) -> Episode | None:
    """One noise-free expert execution; None if the controller fails."""
    rng = np.random.default_rng(seed)
    initial = task.reset(config, rng)
    expert = task.make_expert(config, initial, rng)
    states = [initial]
    actions = []
    state = initial
    for _ in range(task.max_ticks):
        action = expert.act(state)
        if action is None:
            return None  # script exhausted without reaching success
        state = step(config, state, action)
        actions.append(action)
        states.append(state)
        if task.predicate(config, initial, state):
            return Episode(states=states, actions=actions, collector="demo",
                           seed=seed, task_id=task.task_id)
    return None


def collect_demos(config: EnvConfig, per_task: int, seed: int,
                  task_ids=None) -> PlayDataset:
    """per_task successful demos for each registered task, in registry order.

    Failed controller runs (bad reset draws) are discarded and resampled.
    """
    registry = register_tasks()
    if task_ids is not None:
        registry = {tid: registry[tid] for tid in task_ids}
    episodes = []
    for task_index, (task_id, task) in enumerate(registry.items()):
        produced = 0
        attempt = 0
        while produced < per_task:
            if attempt >= 20 * per_task:
                raise DataFormatError(
                    f"expert for task '{task_id}' keeps failing; "
                    f"{produced}/{per_task} demos after {attempt} attempts")
            demo = generate_demo(config, task, seed=[seed, task_index, attempt])
            attempt += 1
            if demo is not None:
                episodes.append(demo)
                produced += 1
    return PlayDataset.from_episodes(episodes, config, "demo")
