"""Plan-embedding export shape and probe plumbing."""

import numpy as np
import pytest

from playlmp.collectors import collect_demos, collect_two_mode
from playlmp.eval import (
    demo_windows,
    export_plan_embeddings,
    linear_probe_accuracy,
    write_embedding_table,
)
from playlmp.models import PlayLMP
from playlmp.playground import EnvConfig

CONFIG = EnvConfig()


@pytest.fixture(scope="module")
def small_lmp_and_data():
    play = collect_two_mode(CONFIG, n_episodes=40, seed=11)
    demos = collect_demos(CONFIG, per_task=10, seed=12)
    est = PlayLMP(train_steps=10, latent_dim=6, hidden_size=16, rnn_layers=1,
                  kappa_low=8, kappa_high=16, batch_size=4, seed=0)
    est.fit(play, CONFIG)
    return est, play, demos


def test_export_row_count_and_dim(small_lmp_and_data):
    est, play, demos = small_lmp_and_data
    rows = export_plan_embeddings(est, play, demos, n_play=32, kappa=16,
                                  seed=0, n_val=3, n_test=3)
    expected_demo = len(demo_windows(demos, kappa=16, n_val=3, n_test=3))
    assert len(rows) == 32 + expected_demo
    assert sum(label == "play" for label, _ in rows) == 32
    for label, mu in rows:
        assert mu.shape == (6,)


def test_export_deterministic(small_lmp_and_data, tmp_path):
    est, play, demos = small_lmp_and_data
    a = export_plan_embeddings(est, play, demos, n_play=16, kappa=16, seed=3,
                               n_val=3, n_test=3)
    b = export_plan_embeddings(est, play, demos, n_play=16, kappa=16, seed=3,
                               n_val=3, n_test=3)
    for (la, mua), (lb, mub) in zip(a, b):
        assert la == lb
        np.testing.assert_array_equal(mua, mub)
    write_embedding_table(a, tmp_path / "a.tsv")
    write_embedding_table(b, tmp_path / "b.tsv")
    assert (tmp_path / "a.tsv").read_bytes() == (tmp_path / "b.tsv").read_bytes()


def test_embedding_table_format(small_lmp_and_data, tmp_path):
    est, play, demos = small_lmp_and_data
    rows = export_plan_embeddings(est, play, demos, n_play=8, kappa=16, seed=0,
                                  n_val=3, n_test=3)
    path = tmp_path / "emb.tsv"
    write_embedding_table(rows, path)
    lines = path.read_text().splitlines()
    assert lines[0].split("\t") == ["label"] + [f"z{i}" for i in range(6)]
    assert len(lines) == len(rows) + 1
    first = lines[1].split("\t")
    assert first[0] == "play"
    assert len(first) == 7


def test_linear_probe_runs_and_reports_majority(small_lmp_and_data):
    est, play, demos = small_lmp_and_data
    rows = export_plan_embeddings(est, play, demos, n_play=8, kappa=16, seed=0,
                                  n_val=3, n_test=3)
    accuracy, majority = linear_probe_accuracy(rows, seed=0)
    assert 0.0 <= accuracy <= 1.0
    assert 0.0 < majority < 0.5
