"""Environment configuration: geometry, interaction thresholds, rates.

Configs serialize to a human-readable ``key = value`` text format whose
canonical form is hashed; every dataset and checkpoint records that hash
so artifacts from different worlds cannot be mixed silently.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, fields
from pathlib import Path

from ..exceptions import DataFormatError


@dataclass(frozen=True)
class EnvConfig:
    # world bounds (x0, y0, x1, y1)
    world: tuple = (0.0, 0.0, 1.0, 1.0)
    # max per-tick translation, units/tick, and control rate
    a_max: float = 0.04
    tick_rate: int = 30
    # interaction thresholds (world units)
    eps_grasp: float = 0.03
    eps_door: float = 0.04
    eps_drawer: float = 0.04
    eps_button: float = 0.03
    block_half: float = 0.03
    # rotation rate while holding, radians/tick at full command deflection
    omega_max: float = 0.08
    # button release decay per tick while the gripper is open
    button_decay: float = 0.1
    # door handle travels from track[0] (closed) to track[1] (open)
    door_track: tuple = ((0.30, 0.95), (0.70, 0.95))
    # drawer handle travels downward as the drawer opens
    drawer_track: tuple = ((0.95, 0.60), (0.95, 0.30))
    button_centers: tuple = ((0.08, 0.80), (0.08, 0.68), (0.08, 0.56))
    # shelf region (x0, y0, x1, y1) where the block can be stowed
    shelf: tuple = (0.04, 0.04, 0.26, 0.26)
    # block spawn region, clear of shelf/buttons/track ends
    block_region: tuple = (0.32, 0.18, 0.85, 0.78)
    # agent spawn region for unconstrained (play) resets
    agent_region: tuple = (0.05, 0.05, 0.95, 0.95)
    # agent spawn region for task resets (narrow, like a tidy demo rig)
    home_region: tuple = (0.40, 0.40, 0.60, 0.60)

    def validate(self) -> None:
        x0, y0, x1, y1 = self.world
        if not (x0 < x1 and y0 < y1):
            raise DataFormatError(f"degenerate world bounds {self.world}")
        for eps in (self.eps_grasp, self.eps_door, self.eps_drawer, self.eps_button):
            if eps <= 0:
                raise DataFormatError("interaction thresholds must be positive")
        if self.a_max <= 0:
            raise DataFormatError("a_max must be positive")
        for rect in (self.shelf, self.block_region, self.agent_region, self.home_region):
            rx0, ry0, rx1, ry1 = rect
            if not (x0 <= rx0 < rx1 <= x1 and y0 <= ry0 < ry1 <= y1):
                raise DataFormatError(f"region {rect} outside world bounds")
        for track in (self.door_track, self.drawer_track):
            for px, py in track:
                if not (x0 <= px <= x1 and y0 <= py <= y1):
                    raise DataFormatError(f"track point {(px, py)} outside world")
        for cx, cy in self.button_centers:
            if not (x0 <= cx <= x1 and y0 <= cy <= y1):
                raise DataFormatError(f"button at {(cx, cy)} outside world")

    # -- serialization ----------------------------------------------------

    def to_text(self) -> str:
        lines = []
        for f in fields(self):
            value = getattr(self, f.name)
            lines.append(f"{f.name} = {_format_value(value)}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "EnvConfig":
        known = {f.name: f for f in fields(cls)}
        values = {}
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise DataFormatError(f"config line {lineno}: expected 'key = value'")
            key, _, raw = line.partition("=")
            key = key.strip()
            if key not in known:
                raise DataFormatError(f"config line {lineno}: unknown key '{key}'")
            values[key] = _parse_value(raw.strip(), getattr(cls, key))
        config = cls(**values)
        config.validate()
        return config

    def save(self, path) -> None:
        Path(path).write_text(self.to_text())

    @classmethod
    def load(cls, path) -> "EnvConfig":
        return cls.from_text(Path(path).read_text())

    def hash(self) -> str:
        return hashlib.sha256(self.to_text().encode("utf-8")).hexdigest()


def _format_value(value):
    if isinstance(value, tuple):
        return " ".join(_format_value(v) for v in value)
    return repr(value)


def _parse_value(raw: str, default):
    tokens = raw.split()
    flat = [float(t) for t in tokens]
    if isinstance(default, tuple):
        return _reshape_like(flat, default)
    if isinstance(default, int):
        return int(flat[0])
    return flat[0]


def _reshape_like(flat: list, template: tuple):
    if template and isinstance(template[0], tuple):
        width = len(template[0])
        if len(flat) != width * len(template):
            raise DataFormatError("config tuple has wrong arity")
        return tuple(tuple(flat[i * width : (i + 1) * width]) for i in range(len(template)))
    if len(flat) != len(template):
        raise DataFormatError("config tuple has wrong arity")
    return tuple(flat)
