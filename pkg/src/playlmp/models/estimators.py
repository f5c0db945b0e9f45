"""The learners as sklearn-style estimators.

Each estimator takes hyperparameters in __init__ (so get_params /
set_params / clone compose with the wider ecosystem), learns from a
frozen dataset via ``fit(dataset, config)``, and exposes two prediction
surfaces: a stateless ``predict`` over raw observation rows, and the
closed-loop ``begin_episode`` / ``act_env`` pair used for rollouts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator

from ..data import PlayDataset, sample_window_batch
from ..exceptions import DataFormatError
from ..playground import Action, EnvConfig, EnvState, OBS_DIM, state_to_vector
from ..tasks import TASK_IDS
from .losses import bc_window_loss, gcbc_window_loss, lmp_window_loss
from .modl import (
    ActionQuantizer,
    modl_greedy_bins,
    modl_sample_bins,
)
from .policies import BcNets, GcbcNets, LmpNets
from .training import run_training

PLAY_KINDS = {"play", "teleop", "merged"}
DEMO_KINDS = {"demo"}


def action_bounds(config: EnvConfig) -> list[tuple[float, float]]:
    return [(-config.a_max, config.a_max), (-config.a_max, config.a_max), (0.0, 1.0)]


@dataclass
class RolloutContext:
    goal: np.ndarray | None
    hidden: list
    rng: object
    z: np.ndarray | None = None
    age: int = 0
    onehot: np.ndarray | None = None


class _PolicyEstimator(BaseEstimator):
    """Shared fit/rollout machinery; subclasses define nets and windows."""

    KIND = ""
    ACCEPTED_KINDS: set = set()

    # -- fitting -----------------------------------------------------------

    def fit(self, dataset: PlayDataset, config: EnvConfig):
        if dataset.collector not in self.ACCEPTED_KINDS:
            raise DataFormatError(
                f"{self.KIND} expects a dataset of kind {sorted(self.ACCEPTED_KINDS)}, "
                f"got '{dataset.collector}'")
        if dataset.config_hash != config.hash():
            raise DataFormatError("dataset was not collected under this config")
        if dataset.normalizer is None:
            raise DataFormatError("dataset has no normalization statistics")
        self.config_ = config
        self.normalizer_ = dataset.normalizer
        self.quantizer_ = ActionQuantizer.for_bounds(action_bounds(config),
                                                     self.action_bins)
        self.nets_ = self._build_nets(np.random.default_rng([self.seed, 11]))
        loss_fn = self._make_loss_fn(dataset, start_step=0)
        self.loss_curve_, self._adam = run_training(
            self.nets_.store, loss_fn, self.train_steps, self.learning_rate,
            self.grad_clip, lr_schedule=self.lr_schedule)
        self.trained_steps_ = self.train_steps
        self.dataset_hash_ = dataset.content_hash()
        return self

    def resume(self, dataset: PlayDataset, extra_steps: int):
        """Continue training a fitted model on the same dataset."""
        start = self.trained_steps_
        loss_fn = self._make_loss_fn(dataset, start_step=start)
        records, self._adam = run_training(
            self.nets_.store, loss_fn, start + extra_steps, self.learning_rate,
            self.grad_clip, start_step=start, adam=self._adam,
            lr_schedule=self.lr_schedule)
        self.loss_curve_ = list(self.loss_curve_) + records
        self.trained_steps_ = start + extra_steps
        return self

    def _train_rng(self, start_step: int):
        return np.random.default_rng([self.seed, 13, start_step])

    # -- observation plumbing ----------------------------------------------

    def observe(self, state: EnvState) -> np.ndarray:
        vec = np.asarray(state_to_vector(state), dtype=np.float64)
        return self.normalizer_.transform(vec.reshape(1, -1))[0]

    def _decode(self, params, rng) -> np.ndarray:
        logits = params.logits.data
        means = params.means.data
        log_scales = params.log_scales.data
        if self.decode == "sample":
            bins = modl_sample_bins(logits, means, log_scales,
                                    self.quantizer_.n_bins, rng,
                                    temperature=self.sample_temperature)
        else:
            bins = modl_greedy_bins(logits, means, log_scales, self.quantizer_.n_bins)
        return self.quantizer_.dequantize(bins)

    # -- rollout surface (overridden where conditioning differs) ------------

    def begin_episode(self, goal_state: EnvState | None, rng,
                      task_id: str | None = None) -> RolloutContext:
        raise NotImplementedError

    def act_env(self, state: EnvState, ctx: RolloutContext):
        raise NotImplementedError


class PlayGCBC(_PolicyEstimator):
    """Goal-conditioned behavioral cloning on play windows."""

    KIND = "gcbc"
    ACCEPTED_KINDS = PLAY_KINDS

    def __init__(self, hidden_size=128, rnn_layers=2, mixture_components=5,
                 action_bins=256, kappa_low=16, kappa_high=32, batch_size=32,
                 learning_rate=1e-3, train_steps=2500, grad_clip=1.0,
                 decode="sample", sample_temperature=1.0, lr_schedule="cosine",
                 state_reset_interval=32, seed=0):
        self.hidden_size = hidden_size
        self.rnn_layers = rnn_layers
        self.mixture_components = mixture_components
        self.action_bins = action_bins
        self.kappa_low = kappa_low
        self.kappa_high = kappa_high
        self.batch_size = batch_size
        self.learning_rate = learning_rate
        self.train_steps = train_steps
        self.grad_clip = grad_clip
        self.decode = decode
        self.sample_temperature = sample_temperature
        self.lr_schedule = lr_schedule
        self.state_reset_interval = state_reset_interval
        self.seed = seed

    def _build_nets(self, rng):
        return GcbcNets(OBS_DIM, self.quantizer_, self.hidden_size,
                        self.rnn_layers, self.mixture_components, rng)

    def _make_loss_fn(self, dataset, start_step):
        rng = self._train_rng(start_step)

        def loss_fn(step):
            batch = sample_window_batch(dataset, self.batch_size, self.kappa_low,
                                        self.kappa_high, rng)
            return gcbc_window_loss(self.nets_, self.normalizer_,
                                    batch.observations, batch.actions)

        return loss_fn

    def begin_episode(self, goal_state, rng, task_id=None):
        return RolloutContext(goal=self.observe(goal_state),
                              hidden=self.nets_.policy.initial_state(1), rng=rng)

    def act_env(self, state, ctx):
        if ctx.age % self.state_reset_interval == 0:
            # keep the recurrent context no longer than a training window
            ctx.hidden = self.nets_.policy.initial_state(1)
        ctx.age += 1
        obs = self.observe(state)
        x = np.concatenate([obs, ctx.goal])[None, :]
        params, ctx.hidden = self.nets_.policy.step_params(x, ctx.hidden)
        return Action(*self._decode(params, ctx.rng)[0]), ctx

    def predict(self, X) -> np.ndarray:
        """Greedy one-step actions for raw [obs || goal] rows (n, 2*OBS_DIM)."""
        X = np.asarray(X, dtype=np.float64)
        cond = np.concatenate([self.normalizer_.transform(X[:, :OBS_DIM]),
                               self.normalizer_.transform(X[:, OBS_DIM:])], axis=1)
        params, _ = self.nets_.policy.step_params(
            cond, self.nets_.policy.initial_state(len(X)))
        bins = modl_greedy_bins(params.logits.data, params.means.data,
                                params.log_scales.data, self.quantizer_.n_bins)
        return self.quantizer_.dequantize(bins)


class PlayLMP(_PolicyEstimator):
    """Latent-plan learner: posterior/prior plan encoders plus a
    plan-and-goal conditioned policy, trained end to end on play windows."""

    KIND = "lmp"
    ACCEPTED_KINDS = PLAY_KINDS

    def __init__(self, latent_dim=16, beta=0.01, hidden_size=128, rnn_layers=2,
                 mixture_components=5, action_bins=256, kappa_low=16,
                 kappa_high=32, batch_size=32, learning_rate=1e-3,
                 train_steps=2500, grad_clip=1.0, replan_interval=32,
                 state_recon_weight=0.0, decode="sample", sample_temperature=1.0,
                 lr_schedule="cosine", seed=0):
        self.latent_dim = latent_dim
        self.beta = beta
        self.hidden_size = hidden_size
        self.rnn_layers = rnn_layers
        self.mixture_components = mixture_components
        self.action_bins = action_bins
        self.kappa_low = kappa_low
        self.kappa_high = kappa_high
        self.batch_size = batch_size
        self.learning_rate = learning_rate
        self.train_steps = train_steps
        self.grad_clip = grad_clip
        self.replan_interval = replan_interval
        self.state_recon_weight = state_recon_weight
        self.decode = decode
        self.sample_temperature = sample_temperature
        self.lr_schedule = lr_schedule
        self.seed = seed

    def _build_nets(self, rng):
        return LmpNets(OBS_DIM, self.quantizer_, self.hidden_size, self.rnn_layers,
                       self.mixture_components, self.latent_dim, rng,
                       recon_weight=self.state_recon_weight)

    def _make_loss_fn(self, dataset, start_step):
        rng = self._train_rng(start_step)

        def loss_fn(step):
            batch = sample_window_batch(dataset, self.batch_size, self.kappa_low,
                                        self.kappa_high, rng)
            noise = rng.standard_normal((len(batch), self.latent_dim))
            return lmp_window_loss(self.nets_, self.normalizer_, batch.observations,
                                   batch.actions, self.beta, noise)

        return loss_fn

    def plan(self, obs: np.ndarray, goal: np.ndarray, rng) -> np.ndarray:
        """Sample one latent plan from the conditional prior."""
        prior = self.nets_.propose(np.concatenate([obs, goal])[None, :])
        return prior.sample_np(rng)

    def begin_episode(self, goal_state, rng, task_id=None):
        return RolloutContext(goal=self.observe(goal_state), hidden=None,
                              rng=rng, z=None, age=0)

    def act_env(self, state, ctx):
        obs = self.observe(state)
        if ctx.age % self.replan_interval == 0:
            # fresh plan at ~1 Hz; policy recurrent state resets with it
            ctx.z = self.plan(obs, ctx.goal, ctx.rng)
            ctx.hidden = self.nets_.policy.initial_state(1)
        ctx.age += 1
        x = np.concatenate([obs, ctx.goal, ctx.z[0]])[None, :]
        params, ctx.hidden = self.nets_.policy.step_params(x, ctx.hidden)
        return Action(*self._decode(params, ctx.rng)[0]), ctx

    def predict(self, X) -> np.ndarray:
        """Greedy one-step actions for raw [obs || goal] rows, using the
        prior mean plan (deterministic)."""
        X = np.asarray(X, dtype=np.float64)
        obs = self.normalizer_.transform(X[:, :OBS_DIM])
        goal = self.normalizer_.transform(X[:, OBS_DIM:])
        prior = self.nets_.propose(np.concatenate([obs, goal], axis=1))
        cond = np.concatenate([obs, goal, prior.mu.data], axis=1)
        params, _ = self.nets_.policy.step_params(
            cond, self.nets_.policy.initial_state(len(X)))
        bins = modl_greedy_bins(params.logits.data, params.means.data,
                                params.log_scales.data, self.quantizer_.n_bins)
        return self.quantizer_.dequantize(bins)


class TaskBC(_PolicyEstimator):
    """One behavioral-cloning policy for a single task's demonstrations.

    Fit on the full demo corpus; windows are drawn from this task's
    episodes only, while normalization statistics stay corpus-wide."""

    KIND = "bc"
    ACCEPTED_KINDS = DEMO_KINDS

    def __init__(self, task_id=None, hidden_size=128, rnn_layers=2,
                 mixture_components=5, action_bins=256, kappa_low=4,
                 kappa_high=16, batch_size=32, learning_rate=1e-3,
                 train_steps=600, grad_clip=1.0, decode="sample",
                 sample_temperature=1.0, lr_schedule="cosine",
                 state_reset_interval=16, seed=0):
        self.task_id = task_id
        self.state_reset_interval = state_reset_interval
        self.hidden_size = hidden_size
        self.rnn_layers = rnn_layers
        self.mixture_components = mixture_components
        self.action_bins = action_bins
        self.kappa_low = kappa_low
        self.kappa_high = kappa_high
        self.batch_size = batch_size
        self.learning_rate = learning_rate
        self.train_steps = train_steps
        self.grad_clip = grad_clip
        self.decode = decode
        self.sample_temperature = sample_temperature
        self.lr_schedule = lr_schedule
        self.seed = seed

    def _build_nets(self, rng):
        return BcNets(OBS_DIM, self.quantizer_, self.hidden_size, self.rnn_layers,
                      self.mixture_components, rng)

    def _make_loss_fn(self, dataset, start_step):
        if self.task_id not in TASK_IDS:
            raise DataFormatError(f"unknown task_id '{self.task_id}'")
        subset = dataset.subset(task_id=self.task_id)
        if not subset.episodes:
            raise DataFormatError(f"no demos for task '{self.task_id}' in dataset")
        rng = self._train_rng(start_step)

        def loss_fn(step):
            batch = sample_window_batch(subset, self.batch_size, self.kappa_low,
                                        self.kappa_high, rng)
            return bc_window_loss(self.nets_, self.normalizer_,
                                  batch.observations, batch.actions)

        return loss_fn

    def begin_episode(self, goal_state, rng, task_id=None):
        if task_id is not None and task_id != self.task_id:
            raise DataFormatError(
                f"policy was cloned for '{self.task_id}', asked to run '{task_id}'")
        return RolloutContext(goal=None, hidden=self.nets_.policy.initial_state(1),
                              rng=rng)

    def act_env(self, state, ctx):
        if ctx.age % self.state_reset_interval == 0:
            ctx.hidden = self.nets_.policy.initial_state(1)
        ctx.age += 1
        x = self.observe(state)[None, :]
        params, ctx.hidden = self.nets_.policy.step_params(x, ctx.hidden)
        return Action(*self._decode(params, ctx.rng)[0]), ctx

    def predict(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        cond = self.normalizer_.transform(X)
        params, _ = self.nets_.policy.step_params(
            cond, self.nets_.policy.initial_state(len(X)))
        bins = modl_greedy_bins(params.logits.data, params.means.data,
                                params.log_scales.data, self.quantizer_.n_bins)
        return self.quantizer_.dequantize(bins)


class MultitaskBC(_PolicyEstimator):
    """A single cloning policy conditioned on (state, one-hot task id)."""

    KIND = "multitask_bc"
    ACCEPTED_KINDS = DEMO_KINDS

    def __init__(self, hidden_size=128, rnn_layers=2, mixture_components=5,
                 action_bins=256, kappa_low=4, kappa_high=16, batch_size=32,
                 learning_rate=1e-3, train_steps=1500, grad_clip=1.0,
                 decode="sample", sample_temperature=1.0, lr_schedule="cosine",
                 state_reset_interval=16, seed=0):
        self.state_reset_interval = state_reset_interval
        self.hidden_size = hidden_size
        self.rnn_layers = rnn_layers
        self.mixture_components = mixture_components
        self.action_bins = action_bins
        self.kappa_low = kappa_low
        self.kappa_high = kappa_high
        self.batch_size = batch_size
        self.learning_rate = learning_rate
        self.train_steps = train_steps
        self.grad_clip = grad_clip
        self.decode = decode
        self.sample_temperature = sample_temperature
        self.lr_schedule = lr_schedule
        self.seed = seed

    def _build_nets(self, rng):
        return BcNets(OBS_DIM, self.quantizer_, self.hidden_size, self.rnn_layers,
                      self.mixture_components, rng, n_tasks=len(TASK_IDS))

    def _onehot(self, task_id: str) -> np.ndarray:
        if task_id not in TASK_IDS:
            raise DataFormatError(f"unknown task_id '{task_id}'")
        onehot = np.zeros(len(TASK_IDS))
        onehot[TASK_IDS.index(task_id)] = 1.0
        return onehot

    def _make_loss_fn(self, dataset, start_step):
        rng = self._train_rng(start_step)

        def loss_fn(step):
            batch = sample_window_batch(dataset, self.batch_size, self.kappa_low,
                                        self.kappa_high, rng)
            onehots = np.stack([
                self._onehot(dataset.episodes[i].task_id)
                for i in batch.episode_indices])
            return bc_window_loss(self.nets_, self.normalizer_, batch.observations,
                                  batch.actions, task_onehot=onehots)

        return loss_fn

    def begin_episode(self, goal_state, rng, task_id=None):
        if task_id is None:
            raise DataFormatError("multitask policy needs a task_id per episode")
        return RolloutContext(goal=None, hidden=self.nets_.policy.initial_state(1),
                              rng=rng, onehot=self._onehot(task_id))

    def act_env(self, state, ctx):
        if ctx.age % self.state_reset_interval == 0:
            ctx.hidden = self.nets_.policy.initial_state(1)
        ctx.age += 1
        x = np.concatenate([self.observe(state), ctx.onehot])[None, :]
        params, ctx.hidden = self.nets_.policy.step_params(x, ctx.hidden)
        return Action(*self._decode(params, ctx.rng)[0]), ctx

    def predict(self, X, task_id: str | None = None) -> np.ndarray:
        if task_id is None:
            raise DataFormatError("multitask predict needs task_id")
        X = np.asarray(X, dtype=np.float64)
        cond = np.concatenate([
            self.normalizer_.transform(X),
            np.repeat(self._onehot(task_id)[None, :], len(X), axis=0)], axis=1)
        params, _ = self.nets_.policy.step_params(
            cond, self.nets_.policy.initial_state(len(X)))
        bins = modl_greedy_bins(params.logits.data, params.means.data,
                                params.log_scales.data, self.quantizer_.n_bins)
        return self.quantizer_.dequantize(bins)


ESTIMATOR_KINDS = {
    PlayGCBC.KIND: PlayGCBC,
    PlayLMP.KIND: PlayLMP,
    TaskBC.KIND: TaskBC,
    MultitaskBC.KIND: MultitaskBC,
}
