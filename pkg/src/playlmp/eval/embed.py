"""Latent-plan embedding export and the linear-probe check.

Embeds windows with the trained plan-recognition encoder: 512 windows
sampled from play (labeled "play") plus every validation demo window
(labeled with its task).  The table is written as delimited text for
external projection (t-SNE etc.); a linear probe over the demo rows
quantifies how functionally organized the plan space is.
"""

from __future__ import annotations

import numpy as np

from ..data import PlayDataset, sample_window_batch
from ..models.policies import action_features
from .harness import split_demos

PLAY_LABEL = "play"


def _embed_batch(lmp, obs: np.ndarray, actions: np.ndarray) -> np.ndarray:
    """mu_phi rows for same-length windows: obs (B, k+1, D), actions (B, k, 3)."""
    batch, kappa = actions.shape[0], actions.shape[1]
    flat = obs[:, :kappa].reshape(batch * kappa, -1)
    sobs = lmp.normalizer_.transform(flat).reshape(batch, kappa, -1)
    feats = action_features(actions, lmp.quantizer_)
    posterior = lmp.nets_.recognize(np.concatenate([sobs, feats], axis=2))
    return posterior.mu.data.copy()


def demo_windows(demo_dataset: PlayDataset, kappa: int = 32, stride: int = 16,
                 split: str = "val", n_val: int = 10, n_test: int = 10):
    """(task_id, obs, actions) windows cut from held-out demos.

    Demos shorter than kappa contribute one whole-episode window."""
    splits = split_demos(demo_dataset, n_val=n_val, n_test=n_test)
    windows = []
    for task_id in sorted(splits):
        for ep in splits[task_id][split]:
            if ep.length < kappa:
                windows.append((task_id, ep.state_array(), ep.action_array()))
                continue
            for start in range(0, ep.length - kappa + 1, stride):
                windows.append((task_id,
                                ep.state_array()[start : start + kappa + 1],
                                ep.action_array()[start : start + kappa]))
    return windows


def export_plan_embeddings(lmp, play_dataset: PlayDataset,
                           demo_dataset: PlayDataset, n_play: int = 512,
                           kappa: int = 32, seed: int = 0, split: str = "val",
                           n_val: int = 10, n_test: int = 10) -> list:
    """Rows of (label, embedding) with n_play play windows first."""
    rng = np.random.default_rng([seed, 31])
    rows = []
    batch = sample_window_batch(play_dataset, n_play, kappa, kappa, rng)
    for mu in _embed_batch(lmp, batch.observations, batch.actions):
        rows.append((PLAY_LABEL, mu))
    for task_id, obs, actions in demo_windows(demo_dataset, kappa=kappa,
                                              split=split, n_val=n_val,
                                              n_test=n_test):
        mu = _embed_batch(lmp, obs[None], actions[None])[0]
        rows.append((task_id, mu))
    return rows


def write_embedding_table(rows, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        dim = len(rows[0][1]) if rows else 0
        header = "label\t" + "\t".join(f"z{i}" for i in range(dim))
        fh.write(header + "\n")
        for label, mu in rows:
            fh.write(label + "\t" + "\t".join(repr(float(v)) for v in mu) + "\n")


def linear_probe_accuracy(rows, seed: int = 0) -> tuple[float, float]:
    """Train/test a linear probe on the labeled demo rows (50/50 stratified
    split).  Returns (probe accuracy, majority-class accuracy)."""
    from sklearn.linear_model import LogisticRegression
    from sklearn.model_selection import train_test_split

    demo_rows = [(label, mu) for label, mu in rows if label != PLAY_LABEL]
    labels = np.asarray([label for label, _ in demo_rows])
    X = np.stack([mu for _, mu in demo_rows])
    X_train, X_test, y_train, y_test = train_test_split(
        X, labels, test_size=0.5, random_state=seed, stratify=labels)
    probe = LogisticRegression(max_iter=2000, random_state=seed)
    probe.fit(X_train, y_train)
    accuracy = float(probe.score(X_test, y_test))
    _, counts = np.unique(y_test, return_counts=True)
    majority = float(counts.max() / counts.sum())
    return accuracy, majority
