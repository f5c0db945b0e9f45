"""Episode logs, frozen datasets, persistence, and window sampling.

A dataset file is newline-delimited JSON: one header record, then per
episode a metadata record followed by one record per timestep and a
terminal-state record.  Floats serialize via repr, so a loaded episode
replays through the dynamics bit-exactly.  Each episode's payload is
checksummed; tampering is an explicit load error, never a silent skip.
"""

from __future__ import annotations

import gzip
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .exceptions import ConfigMismatchError, CorruptRecordError, DataFormatError
from .normalize import ObservationNormalizer
from .playground import (
    Action,
    EnvConfig,
    EnvState,
    state_to_vector,
    step,
    vector_to_state,
)

FORMAT_TAG = "playlog/1"


@dataclass
class Episode:
    """T (state, action) pairs plus the terminal state (T+1 states total)."""

    states: list  # list[EnvState], length T+1
    actions: list  # list[Action], length T
    collector: str  # play | demo | random | teleop
    seed: object  # whatever seeds the collector used (int or list)
    task_id: str | None = None
    _state_array: np.ndarray | None = field(default=None, repr=False, compare=False)
    _action_array: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if len(self.states) != len(self.actions) + 1:
            raise DataFormatError(
                f"episode needs T+1 states for T actions, got "
                f"{len(self.states)} states / {len(self.actions)} actions")
        if not self.actions:
            raise DataFormatError("empty episode")
        if self.collector == "demo" and not self.task_id:
            raise DataFormatError("demo episodes must carry a task_id")

    @property
    def length(self) -> int:
        return len(self.actions)

    def state_array(self) -> np.ndarray:
        if self._state_array is None:
            self._state_array = np.asarray(
                [state_to_vector(s) for s in self.states], dtype=np.float64)
        return self._state_array

    def action_array(self) -> np.ndarray:
        if self._action_array is None:
            self._action_array = np.asarray(
                [[a.dx, a.dy, a.grip] for a in self.actions], dtype=np.float64)
        return self._action_array


@dataclass
class Window:
    """A contiguous slice of one episode; the last observation is the goal."""

    observations: np.ndarray  # (kappa+1, OBS_DIM), raw
    actions: np.ndarray  # (kappa, 3)

    @property
    def kappa(self) -> int:
        return self.actions.shape[0]

    @property
    def goal(self) -> np.ndarray:
        return self.observations[-1]


@dataclass
class WindowBatch:
    observations: np.ndarray  # (B, kappa+1, OBS_DIM), raw
    actions: np.ndarray  # (B, kappa, 3)
    episode_indices: np.ndarray | None = None  # which episode each window came from

    @property
    def kappa(self) -> int:
        return self.actions.shape[1]

    def __len__(self) -> int:
        return self.observations.shape[0]


class PlayDataset:
    """Immutable collection of episodes with frozen normalization stats."""

    def __init__(self, episodes: list, config_hash: str, tick_rate: int,
                 collector: str, normalizer: ObservationNormalizer | None = None):
        self.episodes = list(episodes)
        self.config_hash = config_hash
        self.tick_rate = tick_rate
        self.collector = collector
        if normalizer is None and self.episodes:
            normalizer = ObservationNormalizer().fit(
                np.concatenate([ep.state_array() for ep in self.episodes], axis=0))
        self.normalizer = normalizer

    @classmethod
    def from_episodes(cls, episodes, config: EnvConfig, collector: str) -> "PlayDataset":
        return cls(episodes, config.hash(), config.tick_rate, collector)

    @property
    def total_ticks(self) -> int:
        return sum(ep.length for ep in self.episodes)

    def subset(self, task_id: str | None = None, indices=None) -> "PlayDataset":
        """New frozen dataset over a slice of episodes (stats recomputed)."""
        episodes = self.episodes
        if task_id is not None:
            episodes = [ep for ep in episodes if ep.task_id == task_id]
        if indices is not None:
            episodes = [episodes[i] for i in indices]
        return PlayDataset(episodes, self.config_hash, self.tick_rate, self.collector)

    def merge(self, other: "PlayDataset") -> "PlayDataset":
        if other.config_hash != self.config_hash:
            raise ConfigMismatchError("cannot merge datasets from different configs")
        return PlayDataset(self.episodes + other.episodes, self.config_hash,
                           self.tick_rate, "merged")

    def content_hash(self) -> str:
        """Stable identity over config, stats, and every episode payload."""
        digest = hashlib.sha256()
        digest.update(self.config_hash.encode())
        if self.normalizer is not None:
            digest.update(json.dumps(self.normalizer.to_dict()).encode())
        for ep in self.episodes:
            digest.update(_episode_checksum(ep).encode())
        return digest.hexdigest()


# ---------------------------------------------------------------------------
# window sampling


def eligible_episodes(dataset: PlayDataset, kappa: int) -> list[int]:
    return [i for i, ep in enumerate(dataset.episodes) if ep.length >= kappa]


def sample_window(dataset: PlayDataset, kappa_low: int, kappa_high: int,
                  rng) -> Window:
    batch = sample_window_batch(dataset, 1, kappa_low, kappa_high, rng)
    return Window(observations=batch.observations[0], actions=batch.actions[0])


def sample_window_batch(dataset: PlayDataset, batch_size: int, kappa_low: int,
                        kappa_high: int, rng) -> WindowBatch:
    """One shared length kappa ~ U{low..high} per batch; episodes weighted by
    their number of valid starts (length - kappa + 1); start uniform."""
    if kappa_low < 2:
        raise DataFormatError("kappa_low must be >= 2")
    if not dataset.episodes:
        raise DataFormatError("cannot sample windows from an empty dataset")
    longest = max(ep.length for ep in dataset.episodes)
    if longest < kappa_low:
        raise DataFormatError(
            f"all episodes shorter than kappa_low={kappa_low} (longest {longest})")
    kappa = int(rng.integers(kappa_low, min(kappa_high, longest) + 1))
    idx = eligible_episodes(dataset, kappa)
    weights = np.asarray([dataset.episodes[i].length - kappa + 1 for i in idx],
                         dtype=np.float64)
    weights /= weights.sum()
    obs = np.empty((batch_size, kappa + 1, dataset.episodes[0].state_array().shape[1]))
    act = np.empty((batch_size, kappa, 3))
    chosen = rng.choice(len(idx), size=batch_size, p=weights)
    episode_indices = np.empty(batch_size, dtype=np.int64)
    for b, j in enumerate(chosen):
        ep = dataset.episodes[idx[j]]
        start = int(rng.integers(0, ep.length - kappa + 1))
        obs[b] = ep.state_array()[start : start + kappa + 1]
        act[b] = ep.action_array()[start : start + kappa]
        episode_indices[b] = idx[j]
    return WindowBatch(observations=obs, actions=act, episode_indices=episode_indices)


# ---------------------------------------------------------------------------
# persistence


def _episode_payload_lines(ep: Episode) -> list[str]:
    lines = []
    for state, action in zip(ep.states[:-1], ep.actions):
        lines.append(json.dumps({"s": state_to_vector(state),
                                 "a": [action.dx, action.dy, action.grip]}))
    lines.append(json.dumps({"terminal": state_to_vector(ep.states[-1])}))
    return lines


def _episode_checksum(ep: Episode) -> str:
    digest = hashlib.sha256()
    for line in _episode_payload_lines(ep):
        digest.update(line.encode("utf-8"))
        digest.update(b"\n")
    return digest.hexdigest()


def _open(path, mode):
    path = Path(path)
    if path.suffix == ".gz":
        return gzip.open(path, mode + "t", encoding="utf-8")
    return open(path, mode, encoding="utf-8")


def save_dataset(dataset: PlayDataset, path) -> None:
    header = {
        "format": FORMAT_TAG,
        "config_hash": dataset.config_hash,
        "tick_rate": dataset.tick_rate,
        "collector": dataset.collector,
        "episodes": len(dataset.episodes),
        "stats": dataset.normalizer.to_dict() if dataset.normalizer else None,
    }
    with _open(path, "w") as fh:
        fh.write(json.dumps(header) + "\n")
        for index, ep in enumerate(dataset.episodes):
            payload = _episode_payload_lines(ep)
            meta = {
                "kind": "episode",
                "index": index,
                "collector": ep.collector,
                "task_id": ep.task_id,
                "seed": ep.seed,
                "length": ep.length,
                "sha256": _episode_checksum(ep),
            }
            fh.write(json.dumps(meta) + "\n")
            for line in payload:
                fh.write(line + "\n")


def load_dataset(path, config: EnvConfig | None = None) -> PlayDataset:
    with _open(path, "r") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise DataFormatError(f"empty dataset file: {path}")
    header = _parse_record(lines[0], 1, path)
    if header.get("format") != FORMAT_TAG:
        raise DataFormatError(f"unsupported dataset format {header.get('format')!r}")
    if config is not None and header["config_hash"] != config.hash():
        raise ConfigMismatchError(
            f"dataset was collected under config {header['config_hash'][:12]}..., "
            f"not the provided one")
    episodes = []
    pos = 1
    for _ in range(header["episodes"]):
        if pos >= len(lines):
            raise CorruptRecordError(f"{path}: truncated file (missing episode)")
        meta = _parse_record(lines[pos], pos + 1, path)
        if meta.get("kind") != "episode":
            raise CorruptRecordError(f"{path}:{pos + 1}: expected episode record")
        pos += 1
        count = meta["length"] + 1  # steps plus terminal record
        payload = lines[pos : pos + count]
        if len(payload) < count:
            raise CorruptRecordError(f"{path}: truncated episode {meta['index']}")
        digest = hashlib.sha256()
        for line in payload:
            digest.update(line.encode("utf-8"))
            digest.update(b"\n")
        if digest.hexdigest() != meta["sha256"]:
            raise CorruptRecordError(
                f"{path}: checksum mismatch in episode {meta['index']}")
        states, actions = [], []
        for offset, line in enumerate(payload):
            record = _parse_record(line, pos + offset + 1, path)
            if offset < meta["length"]:
                if "s" not in record or "a" not in record:
                    raise CorruptRecordError(f"{path}:{pos + offset + 1}: bad step record")
                states.append(vector_to_state(record["s"], tick=offset))
                actions.append(Action(*[float(v) for v in record["a"]]))
            else:
                if "terminal" not in record:
                    raise CorruptRecordError(f"{path}:{pos + offset + 1}: bad terminal record")
                states.append(vector_to_state(record["terminal"], tick=offset))
        pos += count
        episodes.append(Episode(states=states, actions=actions,
                                collector=meta["collector"], seed=meta["seed"],
                                task_id=meta["task_id"]))
    if pos != len(lines):
        raise CorruptRecordError(f"{path}: {len(lines) - pos} trailing records")
    stats = header.get("stats")
    normalizer = ObservationNormalizer.from_dict(stats) if stats else None
    return PlayDataset(episodes, header["config_hash"], header["tick_rate"],
                       header["collector"], normalizer=normalizer)


def _parse_record(line: str, lineno: int, path) -> dict:
    try:
        record = json.loads(line)
    except json.JSONDecodeError as err:
        raise CorruptRecordError(f"{path}:{lineno}: invalid record") from err
    if not isinstance(record, dict):
        raise CorruptRecordError(f"{path}:{lineno}: invalid record")
    return record


# ---------------------------------------------------------------------------
# integrity


def verify_replayable(config: EnvConfig, episode: Episode) -> None:
    """Check that re-running the dynamics reproduces every logged state."""
    for t, action in enumerate(episode.actions):
        expected = episode.states[t + 1]
        actual = step(config, episode.states[t], action)
        if actual != expected:
            raise CorruptRecordError(
                f"episode not replayable at step {t}: {actual} != {expected}")
