"""End-to-end CLI surface on tiny configurations."""

import json
from pathlib import Path

import pytest

from playlmp.cli import main

SMOKE_TRAIN = [
    "--set", "train_steps=12", "--set", "hidden_size=16", "--set", "rnn_layers=1",
    "--set", "kappa_low=4", "--set", "kappa_high=8", "--set", "batch_size=4",
]


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    assert main(["collect", "--kind", "play", "--minutes", "0.4", "--seed", "1",
                 "--out", str(root / "play.ndjson")]) == 0
    assert main(["collect", "--kind", "demos", "--per-task", "10", "--seed", "2",
                 "--out", str(root / "demos.ndjson")]) == 0
    assert main(["collect", "--kind", "random", "--minutes", "0.4", "--seed", "3",
                 "--out", str(root / "random.ndjson")]) == 0
    assert main(["train", "--model", "lmp", "--data", str(root / "play.ndjson"),
                 "--seed", "0", "--out", str(root / "lmp"),
                 *SMOKE_TRAIN, "--set", "latent_dim=4"]) == 0
    return root


def test_collect_outputs_exist(workdir):
    for name in ("play.ndjson", "demos.ndjson", "random.ndjson"):
        assert (workdir / name).exists()


def test_collect_same_seed_identical_bytes(workdir, tmp_path):
    out = tmp_path / "again.ndjson"
    assert main(["collect", "--kind", "play", "--minutes", "0.4", "--seed", "1",
                 "--out", str(out)]) == 0
    assert out.read_bytes() == (workdir / "play.ndjson").read_bytes()


def test_train_writes_checkpoint_manifest_curve(workdir):
    model = workdir / "lmp"
    assert (model / "params.ckpt").exists()
    assert (model / "curve.csv").exists()
    manifest = json.loads((model / "manifest.json").read_text())
    assert manifest["kind"] == "lmp"
    assert manifest["hyper"]["train_steps"] == 12
    curve = (model / "curve.csv").read_text().splitlines()
    assert curve[0] == "step,action_nll,kl,total"
    assert len(curve) == 13


def test_train_rejects_unknown_override(workdir):
    code = main(["train", "--model", "lmp", "--data", str(workdir / "play.ndjson"),
                 "--out", str(workdir / "bad"), "--set", "nonsense=1"])
    assert code == 1


def test_train_rejects_kind_mismatch(workdir):
    code = main(["train", "--model", "lmp", "--data", str(workdir / "demos.ndjson"),
                 "--out", str(workdir / "bad2"), *SMOKE_TRAIN])
    assert code == 2


def test_train_unknown_model(workdir):
    assert main(["train", "--model", "zebra", "--data", str(workdir / "play.ndjson"),
                 "--out", str(workdir / "bad3")]) == 1


def test_missing_dataset_is_data_error(workdir):
    assert main(["train", "--model", "lmp", "--data", str(workdir / "nope.ndjson"),
                 "--out", str(workdir / "bad4"), *SMOKE_TRAIN]) == 2


def test_eval_writes_report(workdir):
    out = workdir / "reports"
    assert main(["eval", "--model", str(workdir / "lmp"),
                 "--demos", str(workdir / "demos.ndjson"),
                 "--tasks", "open-door,press-red", "--rollouts", "2",
                 "--seed", "0", "--out", str(out)]) == 2  # val/test split too big
    # with a small split the run works: use underlying API knobs via robustness
    # of the CLI default (10+10) being larger than 10 demos per task
    assert main(["eval", "--model", str(workdir / "lmp"),
                 "--demos", str(workdir / "demos.ndjson"), "--rollouts", "2",
                 "--seed", "0", "--out", str(out)]) == 2


def test_cli_eval_with_enough_demos(tmp_path):
    # a separate corpus with enough demos for the standard 10+10 split
    demos = tmp_path / "demos.ndjson"
    assert main(["collect", "--kind", "demos", "--per-task", "22", "--seed", "5",
                 "--out", str(demos)]) == 0
    play = tmp_path / "play.ndjson"
    assert main(["collect", "--kind", "play", "--minutes", "0.4", "--seed", "6",
                 "--out", str(play)]) == 0
    model = tmp_path / "gcbc"
    assert main(["train", "--model", "gcbc", "--data", str(play), "--seed", "0",
                 "--out", str(model), *SMOKE_TRAIN]) == 0
    out = tmp_path / "reports"
    assert main(["eval", "--model", str(model), "--demos", str(demos),
                 "--tasks", "open-door", "--rollouts", "2", "--seed", "0",
                 "--out", str(out)]) == 0
    reports = list(out.glob("eval_*.csv"))
    assert len(reports) == 1
    rows = reports[0].read_text().splitlines()
    assert rows[0] == "task,n,successes,rate,ci_low,ci_high"
    assert len(rows) == 3  # one task + aggregate

    # determinism: the same invocation reproduces identical bytes
    before = reports[0].read_bytes()
    assert main(["eval", "--model", str(model), "--demos", str(demos),
                 "--tasks", "open-door", "--rollouts", "2", "--seed", "0",
                 "--out", str(out)]) == 0
    assert reports[0].read_bytes() == before


def test_coverage_command(workdir):
    out = workdir / "reports"
    assert main(["coverage", "--data", f"play={workdir / 'play.ndjson'}",
                 "--data", f"random={workdir / 'random.ndjson'}",
                 "--out", str(out)]) == 0
    files = list(out.glob("coverage_*.csv"))
    assert files
    text = files[0].read_text()
    assert text.startswith("dataset,ticks,unique_bins")


def test_embed_command(workdir):
    out = workdir / "reports"
    assert main(["embed", "--model", str(workdir / "lmp"),
                 "--play", str(workdir / "play.ndjson"),
                 "--demos", str(workdir / "demos.ndjson"),
                 "--windows", "8", "--seed", "0", "--out", str(out)]) == 2
    # (demo corpus too small for the standard split: explicit data error)


def test_usage_error_exit_code():
    assert main(["collect", "--kind", "nonsense", "--out", "/tmp/x"]) == 1


def test_bc_training_writes_per_task_suite(tmp_path):
    demos = tmp_path / "demos.ndjson"
    assert main(["collect", "--kind", "demos", "--per-task", "8", "--seed", "7",
                 "--out", str(demos)]) == 0
    out = tmp_path / "bc"
    assert main(["train", "--model", "bc", "--data", str(demos), "--task",
                 "open-door", "--seed", "0", "--out", str(out), *SMOKE_TRAIN]) == 0
    assert (out / "open-door" / "manifest.json").exists()
