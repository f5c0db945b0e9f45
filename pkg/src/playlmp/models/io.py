"""Model checkpoint directories.

A saved model is a directory holding:
  params.ckpt    binary named-parameter file (plus optimizer moments)
  manifest.json  kind, hyperparameters, config text, stats, dataset hash
  curve.csv      per-step loss records

The manifest hash names report files downstream, so everything in the
manifest is serialized canonically (sorted keys).
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

from ..autodiff import Adam, load_arrays, save_arrays
from ..exceptions import DataFormatError
from ..normalize import ObservationNormalizer
from ..playground import EnvConfig
from .estimators import ESTIMATOR_KINDS
from .training import CURVE_HEADER, TrainRecord

MANIFEST_TAG = "playlmp-model/1"


def save_model(out_dir, est) -> str:
    """Write checkpoint + manifest + loss curve; returns the manifest hash."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    arrays = dict(est.nets_.store.arrays())
    if getattr(est, "_adam", None) is not None:
        arrays.update(est._adam.state_arrays())
    save_arrays(out / "params.ckpt", arrays, seed=est.seed)
    manifest = {
        "format": MANIFEST_TAG,
        "kind": est.KIND,
        "hyper": est.get_params(),
        "config_text": est.config_.to_text(),
        "stats": est.normalizer_.to_dict(),
        "dataset_hash": est.dataset_hash_,
        "trained_steps": est.trained_steps_,
        "seed": est.seed,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, sort_keys=True, indent=1))
    rows = [CURVE_HEADER] + [r.as_row() for r in est.loss_curve_]
    (out / "curve.csv").write_text("\n".join(rows) + "\n")
    return manifest_hash(out)


def manifest_hash(model_dir) -> str:
    data = (Path(model_dir) / "manifest.json").read_bytes()
    return hashlib.sha256(data).hexdigest()


def load_manifest(model_dir) -> dict:
    path = Path(model_dir) / "manifest.json"
    if not path.exists():
        raise DataFormatError(f"no manifest in {model_dir}")
    manifest = json.loads(path.read_text())
    if manifest.get("format") != MANIFEST_TAG:
        raise DataFormatError(f"unsupported model format {manifest.get('format')!r}")
    return manifest


def load_model(model_dir):
    """Rebuild the estimator, its nets, and its optimizer state."""
    manifest = load_manifest(model_dir)
    kind = manifest["kind"]
    if kind not in ESTIMATOR_KINDS:
        raise DataFormatError(f"unknown model kind '{kind}'")
    est = ESTIMATOR_KINDS[kind](**manifest["hyper"])
    est.config_ = EnvConfig.from_text(manifest["config_text"])
    est.normalizer_ = ObservationNormalizer.from_dict(manifest["stats"])
    est.dataset_hash_ = manifest["dataset_hash"]
    est.trained_steps_ = manifest["trained_steps"]
    from .modl import ActionQuantizer
    from .estimators import action_bounds

    est.quantizer_ = ActionQuantizer.for_bounds(action_bounds(est.config_),
                                                est.action_bins)
    est.nets_ = est._build_nets(np.random.default_rng([est.seed, 11]))
    arrays, _ = load_arrays(Path(model_dir) / "params.ckpt")
    est.nets_.store.load_arrays(arrays)
    if "adam.t" in arrays:
        adam = Adam(est.nets_.store.params, lr=est.learning_rate)
        adam.load_state_arrays(arrays)
        est._adam = adam
    est.loss_curve_ = load_curve(model_dir)
    return est


def load_curve(model_dir) -> list[TrainRecord]:
    path = Path(model_dir) / "curve.csv"
    if not path.exists():
        return []
    records = []
    for line in path.read_text().splitlines()[1:]:
        step, nll, kl, total = line.split(",")
        records.append(TrainRecord(int(step), float(nll), float(kl), float(total)))
    return records
