"""Learners: GCBC, the latent-plan model, and the cloning baselines."""

from .estimators import (
    ESTIMATOR_KINDS,
    MultitaskBC,
    PlayGCBC,
    PlayLMP,
    TaskBC,
    action_bounds,
)
from .io import load_model, manifest_hash, save_model
from .losses import bc_window_loss, gcbc_window_loss, kl_diag_gaussians, lmp_window_loss
from .modl import (
    ActionQuantizer,
    ModlHead,
    ModlParams,
    bin_masses_np,
    modl_greedy_bins,
    modl_log_prob,
    modl_sample_bins,
)
from .nets import DiagGaussian

__all__ = [
    "ActionQuantizer",
    "DiagGaussian",
    "ESTIMATOR_KINDS",
    "ModlHead",
    "ModlParams",
    "MultitaskBC",
    "PlayGCBC",
    "PlayLMP",
    "TaskBC",
    "action_bounds",
    "bc_window_loss",
    "bin_masses_np",
    "gcbc_window_loss",
    "kl_diag_gaussians",
    "lmp_window_loss",
    "load_model",
    "manifest_hash",
    "modl_greedy_bins",
    "modl_log_prob",
    "modl_sample_bins",
    "save_model",
]
