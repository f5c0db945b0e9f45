"""Evaluation task registry: resets, success predicates, expert scripts.

Each task owns a narrow reset distribution (agent starting near the
middle of the desk, scene dims at tidy baselines except the one the
task manipulates), a success predicate over (initial state, current
state), a scalar progress metric used by the retry statistic, and a
deterministic expert controller used both to generate demonstrations
and as an evaluation oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .control import CarryTo, GraspBlock, PressButton, Release, Script, SlideTrack, Spin
from .playground import EnvConfig, EnvState, wrap_angle

# success thresholds
DOOR_OPEN_MIN = 0.9
DOOR_CLOSED_MAX = 0.1
BLOCK_MOVE_MIN = 0.15
ROTATE_MIN = math.radians(80.0)

EXPERT_SPEED = 0.5  # fraction of a_max; demos move deliberately, not at the cap


@dataclass
class TaskSpec:
    task_id: str
    reset: Callable  # (config, rng) -> EnvState
    make_expert: Callable  # (config, initial_state, rng) -> Script
    predicate: Callable  # (config, initial_state, state) -> bool
    progress: Callable  # (config, initial_state, state) -> float in [0, 1]
    max_ticks: int = 300


BLOCK_JITTER = 0.07  # demos start from a tidy rig: block near a canonical pose
THETA_JITTER = 0.3


def _base_reset(config: EnvConfig, rng, door=0.0, drawer=0.0,
                block_center_x=None) -> EnvState:
    hx0, hy0, hx1, hy1 = config.home_region
    bx0, by0, bx1, by1 = config.block_region
    cx = 0.5 * (bx0 + bx1) if block_center_x is None else block_center_x
    cy = 0.5 * (by0 + by1)
    return EnvState(
        agent_x=float(rng.uniform(hx0, hx1)),
        agent_y=float(rng.uniform(hy0, hy1)),
        gripper=1.0, holding=False,
        block_x=float(rng.uniform(max(bx0, cx - BLOCK_JITTER),
                                  min(bx1, cx + BLOCK_JITTER))),
        block_y=float(rng.uniform(max(by0, cy - BLOCK_JITTER),
                                  min(by1, cy + BLOCK_JITTER))),
        block_theta=float(rng.uniform(-THETA_JITTER, THETA_JITTER)),
        door_open=door, drawer_open=drawer,
        pressed_r=0.0, pressed_g=0.0, pressed_b=0.0,
        light_r=0, light_g=0, light_b=0,
        tick=0,
    )


def _ccw(initial: EnvState, state: EnvState) -> float:
    d = wrap_angle(state.block_theta - initial.block_theta)
    return d + 2.0 * math.pi if d < 0 else d


def _block_disp(initial: EnvState, state: EnvState) -> float:
    return math.hypot(state.block_x - initial.block_x, state.block_y - initial.block_y)


def _clip01(x: float) -> float:
    return 0.0 if x < 0.0 else 1.0 if x > 1.0 else x


def _shelf_center(config: EnvConfig):
    x0, y0, x1, y1 = config.shelf
    return (0.5 * (x0 + x1), 0.5 * (y0 + y1))


def _in_shelf(config: EnvConfig, state: EnvState) -> bool:
    x0, y0, x1, y1 = config.shelf
    return x0 <= state.block_x <= x1 and y0 <= state.block_y <= y1


def _track_tasks() -> list[TaskSpec]:
    specs = []
    for which, opening, task_id in (
        ("door", True, "open-door"), ("door", False, "close-door"),
        ("drawer", True, "open-drawer"), ("drawer", False, "close-drawer"),
    ):
        def reset(config, rng, which=which, opening=opening):
            lo, hi = (0.0, 0.3) if opening else (0.7, 1.0)
            value = float(rng.uniform(lo, hi))
            if which == "door":
                return _base_reset(config, rng, door=value)
            return _base_reset(config, rng, drawer=value)

        def make_expert(config, initial, rng, which=which, opening=opening):
            return Script([SlideTrack(config, which, 1.0 if opening else 0.0,
                                      speed=EXPERT_SPEED)])

        def predicate(config, initial, state, which=which, opening=opening):
            value = state.door_open if which == "door" else state.drawer_open
            return value > DOOR_OPEN_MIN if opening else value < DOOR_CLOSED_MAX

        def progress(config, initial, state, which=which, opening=opening):
            value = state.door_open if which == "door" else state.drawer_open
            return _clip01(value / DOOR_OPEN_MIN if opening
                           else (1.0 - value) / DOOR_OPEN_MIN)

        specs.append(TaskSpec(task_id, reset, make_expert, predicate, progress))
    return specs


def _button_tasks() -> list[TaskSpec]:
    specs = []
    for index, task_id in enumerate(("press-red", "press-green", "press-blue")):
        def reset(config, rng):
            return _base_reset(config, rng)

        def make_expert(config, initial, rng, index=index):
            return Script([PressButton(config, index, speed=EXPERT_SPEED)])

        def predicate(config, initial, state, index=index):
            return (state.light_r, state.light_g, state.light_b)[index] == 1

        def progress(config, initial, state, index=index):
            if (state.light_r, state.light_g, state.light_b)[index] == 1:
                return 1.0
            pressed = (state.pressed_r, state.pressed_g, state.pressed_b)[index]
            return _clip01(pressed / 0.9)

        specs.append(TaskSpec(task_id, reset, make_expert, predicate, progress))
    return specs


def _grasp_lift() -> TaskSpec:
    def reset(config, rng):
        return _base_reset(config, rng)

    def make_expert(config, initial, rng):
        bx0, by0, bx1, by1 = config.block_region
        while True:
            dest = (float(rng.uniform(bx0, bx1)), float(rng.uniform(by0, by1)))
            if math.hypot(dest[0] - initial.block_x, dest[1] - initial.block_y) >= 0.25:
                break
        return Script([GraspBlock(config, speed=EXPERT_SPEED),
                       CarryTo(config, dest, speed=EXPERT_SPEED)])

    def predicate(config, initial, state):
        return state.holding and _block_disp(initial, state) >= BLOCK_MOVE_MIN

    def progress(config, initial, state):
        if not state.holding:
            return 0.0
        return _clip01(_block_disp(initial, state) / BLOCK_MOVE_MIN)

    return TaskSpec("grasp-lift", reset, make_expert, predicate, progress)


def _sweep(direction: float, task_id: str) -> TaskSpec:
    def reset(config, rng):
        bx0, _, bx1, _ = config.block_region
        # canonical start offset so the 0.2 carry stays inside the region
        center = 0.5 * (bx0 + bx1) - direction * 0.12
        return _base_reset(config, rng, block_center_x=center)

    def make_expert(config, initial, rng):
        dest = (initial.block_x + direction * 0.2, initial.block_y)
        return Script([GraspBlock(config, speed=EXPERT_SPEED),
                       CarryTo(config, dest, speed=EXPERT_SPEED)])

    def predicate(config, initial, state):
        return direction * (state.block_x - initial.block_x) >= BLOCK_MOVE_MIN

    def progress(config, initial, state):
        return _clip01(direction * (state.block_x - initial.block_x) / BLOCK_MOVE_MIN)

    return TaskSpec(task_id, reset, make_expert, predicate, progress)


def _put_in_shelf() -> TaskSpec:
    def reset(config, rng):
        return _base_reset(config, rng)

    def make_expert(config, initial, rng):
        return Script([GraspBlock(config, speed=EXPERT_SPEED),
                       CarryTo(config, _shelf_center(config), speed=EXPERT_SPEED),
                       Release()])

    def predicate(config, initial, state):
        return _in_shelf(config, state) and not state.holding

    def progress(config, initial, state):
        if _in_shelf(config, state) and not state.holding:
            return 1.0
        cx, cy = _shelf_center(config)
        d0 = math.hypot(initial.block_x - cx, initial.block_y - cy)
        d = math.hypot(state.block_x - cx, state.block_y - cy)
        if d0 <= 1e-9:
            return 1.0
        return _clip01(1.0 - d / d0)

    return TaskSpec("put-in-shelf", reset, make_expert, predicate, progress)


def _rotate_left() -> TaskSpec:
    def reset(config, rng):
        return _base_reset(config, rng)

    def make_expert(config, initial, rng):
        return Script([GraspBlock(config, speed=EXPERT_SPEED),
                       Spin(config, ROTATE_MIN + math.radians(20.0))])

    def predicate(config, initial, state):
        return _ccw(initial, state) >= ROTATE_MIN and _ccw(initial, state) < math.pi

    def progress(config, initial, state):
        turned = _ccw(initial, state)
        if turned >= math.pi:
            return 0.0
        return _clip01(turned / ROTATE_MIN)

    return TaskSpec("rotate-left", reset, make_expert, predicate, progress)


def register_tasks() -> dict[str, TaskSpec]:
    """The 12-task registry, covering every interaction family."""
    specs = []
    specs.extend(_track_tasks())
    specs.extend(_button_tasks())
    specs.append(_grasp_lift())
    specs.append(_sweep(-1.0, "sweep-left"))
    specs.append(_sweep(+1.0, "sweep-right"))
    specs.append(_put_in_shelf())
    specs.append(_rotate_left())
    return {spec.task_id: spec for spec in specs}


TASK_IDS = tuple(register_tasks().keys())
