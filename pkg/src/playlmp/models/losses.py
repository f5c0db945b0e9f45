"""Training objectives for the play-supervised learners.

All losses are per-step means: for a batch of windows sharing length
kappa, the action term is -(1/kappa) sum_t log pi(a_t | ...) averaged
over the batch, with per-action-dimension log likelihoods summed.
"""

from __future__ import annotations

import numpy as np

from ..autodiff import Tensor, constant, ops
from ..exceptions import ShapeError
from .modl import modl_log_prob
from .nets import DiagGaussian
from .policies import BcNets, GcbcNets, LmpNets, SeqPolicy, action_features


def kl_diag_gaussians(q: DiagGaussian, p: DiagGaussian) -> Tensor:
    """Closed-form KL(q || p) for diagonal Gaussians, summed over dims.

    Inputs are (B, d); returns (B,).
    """
    if q.mu.shape != p.mu.shape:
        raise ShapeError(f"KL dim mismatch: {q.mu.shape} vs {p.mu.shape}")
    dlog = ops.sub(p.log_sigma, q.log_sigma)
    var_ratio = ops.exp(ops.scale(dlog, -2.0))  # sigma_q^2 / sigma_p^2
    dmu = ops.sub(q.mu, p.mu)
    quad = ops.mul(ops.mul(dmu, dmu), ops.exp(ops.scale(p.log_sigma, -2.0)))
    inner = ops.add(dlog,
                    ops.add_scalar(ops.scale(ops.add(var_ratio, quad), 0.5), -0.5))
    return ops.tsum(inner, axis=-1)


def sequence_action_nll(policy: SeqPolicy, cond: np.ndarray,
                        target_bins: np.ndarray, n_bins: int,
                        extra: Tensor | None = None,
                        return_features: bool = False):
    """Mean per-step negative log likelihood of the logged action bins."""
    batch, kappa, dims = target_bins.shape
    features = policy.sequence_features(cond, extra)
    params = policy.head(features)
    targets = target_bins.transpose(1, 0, 2).reshape(kappa * batch, dims)
    nll = ops.scale(ops.tmean(modl_log_prob(params, targets, n_bins)), -1.0)
    if return_features:
        return nll, features
    return nll


def _normalize_obs(normalizer, obs: np.ndarray) -> np.ndarray:
    batch, steps, dim = obs.shape
    return normalizer.transform(obs.reshape(batch * steps, dim)).reshape(obs.shape)


def gcbc_window_loss(nets: GcbcNets, normalizer, obs: np.ndarray,
                     actions: np.ndarray) -> dict:
    """obs (B, kappa+1, obs_dim) raw; actions (B, kappa, dims) raw."""
    sobs = _normalize_obs(normalizer, obs)
    kappa = actions.shape[1]
    goal = np.repeat(sobs[:, -1:, :], kappa, axis=1)
    cond = np.concatenate([sobs[:, :kappa], goal], axis=2)
    bins = nets.quantizer.quantize(actions)
    nll = sequence_action_nll(nets.policy, cond, bins, nets.quantizer.n_bins)
    return {"action_nll": nll, "kl": None, "total": nll}


def bc_window_loss(nets: BcNets, normalizer, obs: np.ndarray, actions: np.ndarray,
                   task_onehot: np.ndarray | None = None) -> dict:
    """Cloning loss, optionally task-conditioned; no goal input."""
    sobs = _normalize_obs(normalizer, obs)
    kappa = actions.shape[1]
    cond = sobs[:, :kappa]
    if nets.n_tasks:
        if task_onehot is None:
            raise ShapeError("multitask policy requires task one-hots")
        onehot = np.repeat(task_onehot[:, None, :], kappa, axis=1)
        cond = np.concatenate([cond, onehot], axis=2)
    bins = nets.quantizer.quantize(actions)
    nll = sequence_action_nll(nets.policy, cond, bins, nets.quantizer.n_bins)
    return {"action_nll": nll, "kl": None, "total": nll}


def lmp_window_loss(nets: LmpNets, normalizer, obs: np.ndarray, actions: np.ndarray,
                    beta: float, noise: np.ndarray) -> dict:
    """Full latent-plan objective on one batch of windows.

    The plan is sampled once per window from the recognition posterior via
    the reparameterization trick and held fixed across the window; the
    conditional prior is trained through the KL term.
    """
    sobs = _normalize_obs(normalizer, obs)
    batch, kappa = actions.shape[0], actions.shape[1]
    feats = action_features(actions, nets.quantizer)
    recog_seq = np.concatenate([sobs[:, :kappa], feats], axis=2)
    posterior = nets.recognize(recog_seq)

    current_goal = np.concatenate([sobs[:, 0], sobs[:, -1]], axis=1)
    prior = nets.propose(current_goal)
    kl = ops.tmean(kl_diag_gaussians(posterior, prior))

    z = ops.reparam_sample(posterior.mu, posterior.log_sigma, constant(noise))
    goal = np.repeat(sobs[:, -1:, :], kappa, axis=1)
    cond = np.concatenate([sobs[:, :kappa], goal], axis=2)
    bins = nets.quantizer.quantize(actions)
    nll, features = sequence_action_nll(nets.policy, cond, bins,
                                        nets.quantizer.n_bins, extra=z,
                                        return_features=True)
    total = ops.add(nll, ops.scale(kl, beta))
    if nets.recon_head is not None:
        pred = nets.recon_head(features)
        target = sobs[:, 1 : kappa + 1].transpose(1, 0, 2).reshape(kappa * batch, -1)
        err = ops.sub(pred, constant(target))
        recon = ops.tmean(ops.mul(err, err))
        total = ops.add(total, ops.scale(recon, nets.recon_weight))
    return {"action_nll": nll, "kl": kl, "total": total}
