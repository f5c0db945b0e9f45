"""Interaction-space coverage: unique quantized object-state bins visited.

The eight interaction dimensions are the block pose (x, y, theta), the
door and drawer open fractions, and the three button pressed amounts.
Each is quantized into a fixed number of bins; replaying a dataset in
time order accumulates the set of visited 8-tuples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..data import PlayDataset
from ..exceptions import ConfigMismatchError

# (obs-vector index, low, high) for each interaction dimension
INTERACTION_DIMS = (
    ("block_x", 4, 0.0, 1.0),
    ("block_y", 5, 0.0, 1.0),
    ("block_theta", 6, -math.pi, math.pi),
    ("door_open", 7, 0.0, 1.0),
    ("drawer_open", 8, 0.0, 1.0),
    ("pressed_r", 9, 0.0, 1.0),
    ("pressed_g", 10, 0.0, 1.0),
    ("pressed_b", 11, 0.0, 1.0),
)


@dataclass
class CoverageCurve:
    dataset_name: str
    points: list  # ordered (cumulative ticks, unique bin count)

    @property
    def final_count(self) -> int:
        return self.points[-1][1] if self.points else 0

    @property
    def total_ticks(self) -> int:
        return self.points[-1][0] if self.points else 0

    def count_at(self, ticks: int) -> int:
        """Unique bins after at most `ticks` of replay."""
        best = 0
        for t, count in self.points:
            if t <= ticks:
                best = count
            else:
                break
        return best


def _quantize_states(states: np.ndarray, bins_per_dim: int) -> np.ndarray:
    """Map (N, OBS_DIM) raw state rows to (N,) single-integer bin ids."""
    ids = np.zeros(states.shape[0], dtype=np.int64)
    for _, index, low, high in INTERACTION_DIMS:
        q = np.floor((states[:, index] - low) / (high - low) * bins_per_dim)
        q = np.clip(q, 0, bins_per_dim - 1).astype(np.int64)
        ids = ids * bins_per_dim + q
    return ids


def coverage_curve(dataset: PlayDataset, bins_per_dim: int = 10,
                   checkpoint_every: int = 300, name: str = "") -> CoverageCurve:
    """Replay episodes in order, checkpointing the unique-bin count."""
    visited: set[int] = set()
    points = []
    ticks = 0
    next_checkpoint = checkpoint_every
    if not dataset.episodes:
        return CoverageCurve(dataset_name=name, points=[(0, 0)])
    for ep in dataset.episodes:
        arr = ep.state_array()
        ids = _quantize_states(arr, bins_per_dim)
        visited.add(int(ids[0]))  # initial state costs no ticks
        for value in ids[1:]:
            visited.add(int(value))
            ticks += 1
            if ticks >= next_checkpoint:
                points.append((ticks, len(visited)))
                next_checkpoint += checkpoint_every
    if not points or points[-1][0] != ticks:
        points.append((ticks, len(visited)))
    return CoverageCurve(dataset_name=name, points=points)


def coverage_analysis(datasets: dict, bins_per_dim: int = 10,
                      checkpoint_every: int = 300) -> dict:
    """Curves per named dataset; all datasets must share one config."""
    hashes = {d.config_hash for d in datasets.values()}
    if len(hashes) > 1:
        raise ConfigMismatchError("coverage comparison across different configs")
    return {name: coverage_curve(ds, bins_per_dim, checkpoint_every, name=name)
            for name, ds in datasets.items()}


def final_counts_at_common_duration(curves: dict) -> dict:
    """Unique-bin counts at the largest duration all datasets reach."""
    common = min(c.total_ticks for c in curves.values())
    return {name: c.count_at(common) for name, c in curves.items()}
