"""Deterministic 2-D desk playground.

One point agent with a gripper moves on a desk holding a graspable
block, a sliding door, a pull-out drawer, and three light buttons.
``step`` is a pure function on value-typed states: same (state, action)
always yields the same successor, bit for bit, which is what makes
logged episodes exactly replayable.

Interaction rules:

* translation: (dx, dy) clamped to ±a_max, then position clamped to the
  world; gripper aperture tracks the commanded value directly.
* grasp: closing the gripper (aperture crossing 0.5 downward) within
  eps_grasp of the block center grabs it; opening past 0.5 releases.
  A held block tracks the agent position.
* rotation: a held block spins by (1 - 2*grip) * omega_max per tick, so
  a fully closed gripper turns it counter-clockwise and grip = 0.5
  carries it without spin.
* door/drawer: while the agent is within the handle threshold, its
  displacement projected on the track moves the open fraction.
* buttons: while the gripper is closed, pressed = 1 - dist/eps_button;
  otherwise pressed decays by button_decay per tick.  A light toggles
  when its pressed value crosses 0.9 upward.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from ..exceptions import NonFiniteError
from .config import EnvConfig

# fixed observation layout; normalization statistics are stored in this order
OBS_FIELDS = (
    "agent_x", "agent_y", "gripper", "holding",
    "block_x", "block_y", "block_theta",
    "door_open", "drawer_open",
    "pressed_r", "pressed_g", "pressed_b",
    "light_r", "light_g", "light_b",
)
OBS_DIM = len(OBS_FIELDS)


@dataclass(frozen=True)
class EnvState:
    agent_x: float
    agent_y: float
    gripper: float
    holding: bool
    block_x: float
    block_y: float
    block_theta: float
    door_open: float
    drawer_open: float
    pressed_r: float
    pressed_g: float
    pressed_b: float
    light_r: int
    light_g: int
    light_b: int
    tick: int = 0


@dataclass(frozen=True)
class Action:
    dx: float
    dy: float
    grip: float


def wrap_angle(theta: float) -> float:
    """Wrap to [-pi, pi]."""
    return math.atan2(math.sin(theta), math.cos(theta))


def state_to_vector(state: EnvState) -> list[float]:
    """Raw (unnormalized) observation fields in OBS_FIELDS order."""
    return [
        state.agent_x, state.agent_y, state.gripper, float(state.holding),
        state.block_x, state.block_y, state.block_theta,
        state.door_open, state.drawer_open,
        state.pressed_r, state.pressed_g, state.pressed_b,
        float(state.light_r), float(state.light_g), float(state.light_b),
    ]


def vector_to_state(vec, tick: int = 0) -> EnvState:
    """Inverse of state_to_vector (holding/lights snap back to flags)."""
    v = [float(x) for x in vec]
    return EnvState(
        agent_x=v[0], agent_y=v[1], gripper=v[2], holding=v[3] > 0.5,
        block_x=v[4], block_y=v[5], block_theta=v[6],
        door_open=v[7], drawer_open=v[8],
        pressed_r=v[9], pressed_g=v[10], pressed_b=v[11],
        light_r=int(v[12] > 0.5), light_g=int(v[13] > 0.5), light_b=int(v[14] > 0.5),
        tick=tick,
    )


def _clamp(x: float, lo: float, hi: float) -> float:
    return lo if x < lo else hi if x > hi else x


def _handle_pos(track, fraction: float) -> tuple[float, float]:
    (x0, y0), (x1, y1) = track
    return (x0 + (x1 - x0) * fraction, y0 + (y1 - y0) * fraction)


def _track_slide(track, fraction: float, hx: float, hy: float,
                 ax: float, ay: float, dx: float, dy: float, eps: float) -> float:
    """New open fraction after an agent displacement near the handle."""
    if math.hypot(ax - hx, ay - hy) > eps:
        return fraction
    (x0, y0), (x1, y1) = track
    tx, ty = x1 - x0, y1 - y0
    length = math.hypot(tx, ty)
    proj = (dx * tx + dy * ty) / (length * length)
    return _clamp(fraction + proj, 0.0, 1.0)


def reset(config: EnvConfig, seed) -> EnvState:
    """Seeded random free state: agent and block placed uniformly, door,
    drawer and buttons at uniform positions, lights consistent with the
    button pressed amounts."""
    rng = np.random.default_rng(seed)
    ax0, ay0, ax1, ay1 = config.agent_region
    bx0, by0, bx1, by1 = config.block_region
    agent_x = float(rng.uniform(ax0, ax1))
    agent_y = float(rng.uniform(ay0, ay1))
    block_x = float(rng.uniform(bx0, bx1))
    block_y = float(rng.uniform(by0, by1))
    theta = float(rng.uniform(-math.pi, math.pi))
    door = float(rng.uniform(0.0, 1.0))
    drawer = float(rng.uniform(0.0, 1.0))
    pressed = [float(rng.uniform(0.0, 1.0)) for _ in range(3)]
    return EnvState(
        agent_x=agent_x, agent_y=agent_y, gripper=1.0, holding=False,
        block_x=block_x, block_y=block_y, block_theta=theta,
        door_open=door, drawer_open=drawer,
        pressed_r=pressed[0], pressed_g=pressed[1], pressed_b=pressed[2],
        light_r=int(pressed[0] >= 0.9), light_g=int(pressed[1] >= 0.9),
        light_b=int(pressed[2] >= 0.9),
        tick=0,
    )


def step(config: EnvConfig, state: EnvState, action: Action) -> EnvState:
    """Advance one tick.  Pure function; raises on non-finite action."""
    if not (math.isfinite(action.dx) and math.isfinite(action.dy)
            and math.isfinite(action.grip)):
        raise NonFiniteError(f"non-finite action {action}")
    x0, y0, x1, y1 = config.world
    dx = _clamp(action.dx, -config.a_max, config.a_max)
    dy = _clamp(action.dy, -config.a_max, config.a_max)
    grip = _clamp(action.grip, 0.0, 1.0)

    old_x, old_y = state.agent_x, state.agent_y
    new_x = _clamp(old_x + dx, x0, x1)
    new_y = _clamp(old_y + dy, y0, y1)
    moved_x, moved_y = new_x - old_x, new_y - old_y

    # door / drawer respond to the realized displacement while the agent
    # starts the tick within reach of the handle
    hx, hy = _handle_pos(config.door_track, state.door_open)
    door = _track_slide(config.door_track, state.door_open, hx, hy,
                        old_x, old_y, moved_x, moved_y, config.eps_door)
    hx, hy = _handle_pos(config.drawer_track, state.drawer_open)
    drawer = _track_slide(config.drawer_track, state.drawer_open, hx, hy,
                          old_x, old_y, moved_x, moved_y, config.eps_drawer)

    # grasp state machine on the gripper aperture crossing 0.5
    holding = state.holding
    near_block = math.hypot(new_x - state.block_x, new_y - state.block_y) <= config.eps_grasp
    if state.gripper > 0.5 and grip <= 0.5 and near_block:
        holding = True
    elif state.gripper <= 0.5 and grip > 0.5:
        holding = False

    if holding:
        block_x, block_y = new_x, new_y
        theta = wrap_angle(state.block_theta + (1.0 - 2.0 * grip) * config.omega_max)
    else:
        block_x, block_y, theta = state.block_x, state.block_y, state.block_theta

    pressed = [state.pressed_r, state.pressed_g, state.pressed_b]
    lights = [state.light_r, state.light_g, state.light_b]
    for i, (cx, cy) in enumerate(config.button_centers):
        old = pressed[i]
        if grip < 0.5:
            dist = math.hypot(new_x - cx, new_y - cy)
            new = 1.0 - _clamp(dist / config.eps_button, 0.0, 1.0)
        else:
            new = max(0.0, old - config.button_decay)
        if old < 0.9 <= new:
            lights[i] = 1 - lights[i]
        pressed[i] = new

    return EnvState(
        agent_x=new_x, agent_y=new_y, gripper=grip, holding=holding,
        block_x=block_x, block_y=block_y, block_theta=theta,
        door_open=door, drawer_open=drawer,
        pressed_r=pressed[0], pressed_g=pressed[1], pressed_b=pressed[2],
        light_r=lights[0], light_g=lights[1], light_b=lights[2],
        tick=state.tick + 1,
    )


def clamp_action(config: EnvConfig, action: Action) -> Action:
    """Clamp components to their bounds (what the dynamics would do anyway);
    collectors log clamped actions so datasets stay within quantization range."""
    return Action(dx=_clamp(action.dx, -config.a_max, config.a_max),
                  dy=_clamp(action.dy, -config.a_max, config.a_max),
                  grip=_clamp(action.grip, 0.0, 1.0))


def perturb_initial(config: EnvConfig, state: EnvState, radius: float, seed) -> EnvState:
    """Displace the agent by a seeded uniform-in-disk vector of norm <= radius."""
    if radius < 0:
        raise ValueError("radius must be >= 0")
    if radius == 0:
        return state
    rng = np.random.default_rng(seed)
    angle = float(rng.uniform(0.0, 2.0 * math.pi))
    r = radius * math.sqrt(float(rng.uniform(0.0, 1.0)))
    x0, y0, x1, y1 = config.world
    return replace(
        state,
        agent_x=_clamp(state.agent_x + r * math.cos(angle), x0, x1),
        agent_y=_clamp(state.agent_y + r * math.sin(angle), y0, y1),
    )
