"""Scripted waypoint controllers.

A Behavior is a small phase machine: ``act(state)`` returns the next
Action, or None once the behavior has finished.  A Script chains
behaviors.  The same primitives drive both the noise-free task experts
and the noisy scripted play operator, so demonstration data and play
data share one motion vocabulary.

The proportional rule is saturation with unit gain: move the full
per-axis delta, clipped to ``speed * a_max``.  That travels at constant
speed when far and lands exactly on the target when close, which is
what lets button presses reach the tight pressed >= 0.9 zone.
"""

from __future__ import annotations

import math

from .playground import Action, EnvConfig, EnvState, wrap_angle

GRIP_OPEN = 1.0
# Carry grip sits strictly below the 0.5 release threshold with margin:
# action values round-trip through 256-bin quantization (bin centers at
# (i+0.5)/256), so a carried command must stay <= 0.5 after requantization.
# The residual (1 - 2*0.45) of the rotation coupling is a slow CCW drift.
GRIP_HOLD = 0.45
GRIP_CLOSE = 0.4   # the grasp gesture: crossing 0.5 downward next to the block
GRIP_SPIN = 0.0    # full counter-clockwise rotation while holding
GRIP_PRESS = 0.3   # closed enough to press buttons, no block nearby


def _clamp(x, lo, hi):
    return lo if x < lo else hi if x > hi else x


def move_toward(config: EnvConfig, x: float, y: float, tx: float, ty: float,
                speed: float, grip: float, gain: float = 0.4) -> Action:
    """Saturated proportional step toward a target.

    gain < 1 turns the approach into an exponential brake: action
    magnitude is linear in the remaining distance, so a cloning policy
    can read its speed off the observation instead of having to resolve
    a one-tick stop trigger."""
    limit = speed * config.a_max
    return Action(dx=_clamp(gain * (tx - x), -limit, limit),
                  dy=_clamp(gain * (ty - y), -limit, limit), grip=grip)


def _handle_pos(track, fraction):
    (x0, y0), (x1, y1) = track
    return (x0 + (x1 - x0) * fraction, y0 + (y1 - y0) * fraction)


class Behavior:
    def act(self, state: EnvState) -> Action | None:
        raise NotImplementedError


class Reach(Behavior):
    """Move to a point and hold a gripper value until within tol."""

    def __init__(self, config, target, grip=GRIP_OPEN, tol=0.02, speed=0.5):
        self.config = config
        self.target = target
        self.grip = grip
        self.tol = tol
        self.speed = speed

    def act(self, state):
        dist = math.hypot(state.agent_x - self.target[0], state.agent_y - self.target[1])
        if dist <= self.tol:
            return None
        return move_toward(self.config, state.agent_x, state.agent_y,
                           self.target[0], self.target[1], self.speed, self.grip)


class SlideTrack(Behavior):
    """Approach a door/drawer handle, then drag it to a target fraction."""

    def __init__(self, config, which: str, target: float, speed=0.5, done_tol=0.02):
        self.config = config
        self.which = which
        self.target = target
        self.speed = speed
        self.done_tol = done_tol

    def _track(self):
        return self.config.door_track if self.which == "door" else self.config.drawer_track

    def _fraction(self, state):
        return state.door_open if self.which == "door" else state.drawer_open

    def _eps(self):
        return self.config.eps_door if self.which == "door" else self.config.eps_drawer

    def act(self, state):
        frac = self._fraction(state)
        if abs(frac - self.target) <= self.done_tol:
            return None
        track = self._track()
        hx, hy = _handle_pos(track, frac)
        dist = math.hypot(state.agent_x - hx, state.agent_y - hy)
        if dist > 0.5 * self._eps():
            return move_toward(self.config, state.agent_x, state.agent_y,
                               hx, hy, self.speed, GRIP_OPEN)
        # on the handle: slide along the track, correcting perpendicular drift
        (x0, y0), (x1, y1) = track
        length = math.hypot(x1 - x0, y1 - y0)
        ux, uy = (x1 - x0) / length, (y1 - y0) / length
        remaining = (self.target - frac) * length
        along = _clamp(remaining, -self.speed * self.config.a_max,
                       self.speed * self.config.a_max)
        return Action(dx=along * ux + (hx - state.agent_x),
                      dy=along * uy + (hy - state.agent_y), grip=GRIP_OPEN)


class GraspBlock(Behavior):
    """Approach the block (optionally via a side waypoint), settle, close.

    The settle pause (standing still at the block with the gripper open
    for a couple of ticks) gives the grasp gesture a macroscopic,
    learnable signature instead of a sub-threshold distance trigger."""

    def __init__(self, config, approach_offset=(0.0, 0.0), speed=0.5,
                 close_frac=0.6, settle_ticks=2):
        self.config = config
        self.offset = approach_offset
        self.speed = speed
        self.close_frac = close_frac
        self.settle_ticks = settle_ticks
        self.settled = 0
        self.phase = 0 if (approach_offset[0] or approach_offset[1]) else 1

    def act(self, state):
        if state.holding:
            return None
        cfg = self.config
        if self.phase == 0:
            wx = _clamp(state.block_x + self.offset[0], *_region_x(cfg))
            wy = _clamp(state.block_y + self.offset[1], *_region_y(cfg))
            if math.hypot(state.agent_x - wx, state.agent_y - wy) <= 0.03:
                self.phase = 1
            else:
                return move_toward(cfg, state.agent_x, state.agent_y, wx, wy,
                                   self.speed, GRIP_OPEN)
        near = math.hypot(state.agent_x - state.block_x,
                          state.agent_y - state.block_y) <= self.close_frac * cfg.eps_grasp
        if near and state.gripper > 0.5:
            if self.settled < self.settle_ticks:
                self.settled += 1
                return Action(dx=0.0, dy=0.0, grip=GRIP_OPEN)
            return Action(dx=0.0, dy=0.0, grip=GRIP_CLOSE)
        self.settled = 0
        if near and state.gripper <= 0.5:
            # closed but no grasp registered (noise kick): reopen and retry
            return Action(dx=0.0, dy=0.0, grip=GRIP_OPEN)
        return move_toward(cfg, state.agent_x, state.agent_y,
                           state.block_x, state.block_y, self.speed, GRIP_OPEN)


class CarryTo(Behavior):
    """Move a held block to a destination (grip at the no-spin hold point),
    then settle there so a following release has a stationary signature."""

    def __init__(self, config, dest, tol=0.015, speed=0.5, grip=GRIP_HOLD,
                 settle_ticks=2):
        self.config = config
        self.dest = dest
        self.tol = tol
        self.speed = speed
        self.grip = grip
        self.settle_ticks = settle_ticks
        self.settled = 0

    def act(self, state):
        if not state.holding:
            return None  # lost the block; let the script move on / retry
        if math.hypot(state.agent_x - self.dest[0], state.agent_y - self.dest[1]) <= self.tol:
            if self.settled < self.settle_ticks:
                self.settled += 1
                return Action(dx=0.0, dy=0.0, grip=self.grip)
            return None
        self.settled = 0
        return move_toward(self.config, state.agent_x, state.agent_y,
                           self.dest[0], self.dest[1], self.speed, self.grip)


class Spin(Behavior):
    """Rotate a held block counter-clockwise by a target angle."""

    def __init__(self, config, ccw_radians: float):
        self.config = config
        self.target = ccw_radians
        self.start_theta = None

    def act(self, state):
        if not state.holding:
            return None
        if self.start_theta is None:
            self.start_theta = state.block_theta
        turned = wrap_angle(state.block_theta - self.start_theta)
        if turned < 0:
            turned += 2.0 * math.pi  # monotone CCW progress, no aliasing below ~2pi
        if turned >= self.target:
            return None
        return Action(dx=0.0, dy=0.0, grip=GRIP_SPIN)


class Release(Behavior):
    """Open the gripper (drops a held block in place)."""

    def __init__(self):
        self.done = False

    def act(self, state):
        if self.done or not state.holding:
            return None
        self.done = True
        return Action(dx=0.0, dy=0.0, grip=GRIP_OPEN)


class PressButton(Behavior):
    """Home onto a button with the gripper closed until its light toggles."""

    def __init__(self, config, index: int, approach_offset=(0.0, 0.0), speed=0.5):
        self.config = config
        self.index = index
        self.offset = approach_offset
        self.speed = speed
        self.initial_light = None
        self.phase = 0 if (approach_offset[0] or approach_offset[1]) else 1

    def act(self, state):
        lights = (state.light_r, state.light_g, state.light_b)
        if self.initial_light is None:
            self.initial_light = lights[self.index]
        if lights[self.index] != self.initial_light:
            return None
        cx, cy = self.config.button_centers[self.index]
        if self.phase == 0:
            wx = _clamp(cx + self.offset[0], *_region_x(self.config))
            wy = _clamp(cy + self.offset[1], *_region_y(self.config))
            if math.hypot(state.agent_x - wx, state.agent_y - wy) <= 0.04:
                self.phase = 1
            else:
                return move_toward(self.config, state.agent_x, state.agent_y,
                                   wx, wy, self.speed, GRIP_OPEN)
        grip = GRIP_PRESS if math.hypot(state.agent_x - cx, state.agent_y - cy) <= 0.06 \
            else GRIP_OPEN
        return move_toward(self.config, state.agent_x, state.agent_y, cx, cy,
                           self.speed, grip)


class Script(Behavior):
    """Run behaviors in order; done when the last one finishes."""

    def __init__(self, behaviors: list):
        self.behaviors = list(behaviors)
        self.index = 0

    def act(self, state):
        while self.index < len(self.behaviors):
            action = self.behaviors[self.index].act(state)
            if action is not None:
                return action
            self.index += 1
        return None


def _region_x(config):
    return config.agent_region[0], config.agent_region[2]


def _region_y(config):
    return config.agent_region[1], config.agent_region[3]
