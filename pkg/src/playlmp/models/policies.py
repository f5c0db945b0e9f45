"""Policy network bundles: recurrent action decoders and plan encoders.

`SeqPolicy` is the shared trunk of every learner here: a stacked GRU
over per-step conditioning vectors feeding a mixture-of-discretized-
logistics head.  The LMP bundle adds the bidirectional sequence encoder
(posterior over latent plans) and the feedforward (current, goal)
encoder (learned conditional prior).
"""

from __future__ import annotations

import numpy as np

from ..autodiff import Tensor, constant, ops
from .modl import ActionQuantizer, ModlHead, ModlParams
from .nets import (
    GRU,
    MLP,
    BiGRUEncoder,
    DiagGaussian,
    DiagGaussianHead,
    Linear,
    ParamStore,
)


class SeqPolicy:
    """Stacked GRU + MoDL head over a conditioning sequence."""

    def __init__(self, store: ParamStore, name: str, input_dim: int, hidden: int,
                 layers: int, action_dims: int, components: int, n_bins: int, rng):
        self.input_dim = input_dim
        self.gru = GRU(store, f"{name}.gru", input_dim, hidden, layers, rng)
        self.head = ModlHead(store, f"{name}.head", hidden, action_dims,
                             components, n_bins, rng)

    def sequence_features(self, cond: np.ndarray, extra: Tensor | None = None) -> Tensor:
        """Run the GRU over (B, kappa, in_const) steps; returns hidden tops
        stacked time-major as (kappa*B, hidden).  `extra` (B, d) is appended
        to every step's input (the latent plan, fixed across the window)."""
        batch, kappa, _ = cond.shape
        hidden = self.gru.initial_state(batch)
        tops = []
        for t in range(kappa):
            x = constant(cond[:, t])
            if extra is not None:
                x = ops.concat([x, extra], axis=1)
            top, hidden = self.gru.step(x, hidden)
            tops.append(top)
        return ops.concat(tops, axis=0)

    def sequence_params(self, cond: np.ndarray, extra: Tensor | None = None) -> ModlParams:
        return self.head(self.sequence_features(cond, extra))

    def step_params(self, x: np.ndarray, hidden) -> tuple[ModlParams, list]:
        top, hidden = self.gru.step(constant(x), hidden)
        return self.head(top), hidden

    def initial_state(self, batch: int = 1):
        return self.gru.initial_state(batch)


class CondPrior:
    """Feedforward map from concatenated (current, goal) to plan space."""

    def __init__(self, store, name, in_dim, hidden_dims, latent_dim, rng):
        self.trunk = MLP(store, f"{name}.mlp", in_dim, hidden_dims, rng)
        self.head = DiagGaussianHead(store, f"{name}.head", self.trunk.out_dim,
                                     latent_dim, rng)

    def __call__(self, x: Tensor) -> DiagGaussian:
        return self.head(self.trunk(x))


class GcbcNets:
    """Goal-conditioned policy: pi(a | s_t, s_g)."""

    def __init__(self, obs_dim: int, quantizer: ActionQuantizer, hidden: int,
                 layers: int, components: int, rng):
        self.obs_dim = obs_dim
        self.quantizer = quantizer
        self.store = ParamStore()
        self.policy = SeqPolicy(self.store, "policy", 2 * obs_dim, hidden, layers,
                                quantizer.dims, components, quantizer.n_bins, rng)


class BcNets:
    """Task-conditioned or plain cloning policy: pi(a | s_t [, task])."""

    def __init__(self, obs_dim: int, quantizer: ActionQuantizer, hidden: int,
                 layers: int, components: int, rng, n_tasks: int = 0):
        self.obs_dim = obs_dim
        self.n_tasks = n_tasks
        self.quantizer = quantizer
        self.store = ParamStore()
        self.policy = SeqPolicy(self.store, "policy", obs_dim + n_tasks, hidden,
                                layers, quantizer.dims, components, quantizer.n_bins, rng)


class LmpNets:
    """Plan recognition + plan proposal + plan-conditioned policy."""

    def __init__(self, obs_dim: int, quantizer: ActionQuantizer, hidden: int,
                 layers: int, components: int, latent_dim: int, rng,
                 recon_weight: float = 0.0):
        self.obs_dim = obs_dim
        self.latent_dim = latent_dim
        self.quantizer = quantizer
        self.recon_weight = recon_weight
        self.store = ParamStore()
        self.recognition = BiGRUEncoder(self.store, "recognition",
                                        obs_dim + quantizer.dims, hidden,
                                        latent_dim, rng)
        self.proposal = CondPrior(self.store, "proposal", 2 * obs_dim,
                                  [hidden, hidden], latent_dim, rng)
        self.policy = SeqPolicy(self.store, "policy", 2 * obs_dim + latent_dim,
                                hidden, layers, quantizer.dims, components,
                                quantizer.n_bins, rng)
        if recon_weight > 0.0:
            self.recon_head = Linear(self.store, "recon", hidden, obs_dim, rng)
        else:
            self.recon_head = None

    def recognize(self, seq: np.ndarray) -> DiagGaussian:
        """Posterior over plans from a full (B, kappa, obs+act) window."""
        inputs = [constant(seq[:, t]) for t in range(seq.shape[1])]
        return self.recognition(inputs)

    def propose(self, current_goal: np.ndarray) -> DiagGaussian:
        """Conditional prior from concatenated (B, 2*obs) current and goal."""
        return self.proposal(constant(current_goal))


def action_features(actions: np.ndarray, quantizer: ActionQuantizer) -> np.ndarray:
    """Scale raw actions to roughly [-1, 1] for the sequence encoder."""
    lo = np.asarray(quantizer.lows)
    hi = np.asarray(quantizer.highs)
    return (2.0 * (actions - lo) / (hi - lo)) - 1.0
