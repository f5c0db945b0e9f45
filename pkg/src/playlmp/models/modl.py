"""Mixture-of-discretized-logistics action likelihood.

Actions are quantized per dimension into uniform bins (256 by default);
the likelihood of a bin is the mixture-weighted logistic CDF mass over
that bin in bin coordinates (centers at 0..n_bins-1, edges at the half
integers), with the two edge bins absorbing the open tails.

The differentiable log-mass uses the identity
    sigma(b) - sigma(a) = sigma(b) * sigma(-a) * (1 - e^{a-b})
so every term stays finite in log space no matter how far the bin sits
from the component.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..autodiff import Tensor, constant, ops
from ..exceptions import ShapeError
from .nets import Linear, ParamStore

# head output transform: raw=0 puts a component mid-range with a wide scale,
# and scales are floored so inverse scales cannot overflow
SCALE_FLOOR_BINS = 0.1
INIT_SCALE_BINS = 16.0


@dataclass(frozen=True)
class ActionQuantizer:
    lows: tuple
    highs: tuple
    n_bins: int = 256

    @classmethod
    def for_bounds(cls, bounds, n_bins: int = 256) -> "ActionQuantizer":
        lows, highs = zip(*bounds)
        return cls(lows=tuple(float(v) for v in lows),
                   highs=tuple(float(v) for v in highs), n_bins=n_bins)

    @property
    def dims(self) -> int:
        return len(self.lows)

    def quantize(self, actions: np.ndarray) -> np.ndarray:
        a = np.asarray(actions, dtype=np.float64)
        lo = np.asarray(self.lows)
        hi = np.asarray(self.highs)
        if (a < lo - 1e-9).any() or (a > hi + 1e-9).any():
            raise ShapeError("action outside quantization bounds")
        idx = np.floor((a - lo) / (hi - lo) * self.n_bins).astype(np.int64)
        return np.clip(idx, 0, self.n_bins - 1)

    def dequantize(self, bins: np.ndarray) -> np.ndarray:
        b = np.asarray(bins, dtype=np.float64)
        lo = np.asarray(self.lows)
        hi = np.asarray(self.highs)
        return lo + (b + 0.5) * (hi - lo) / self.n_bins


@dataclass
class ModlParams:
    """Per action dimension: K mixture logits, means and log scales in
    bin-coordinate space.  All tensors are (..., dims, K)."""

    logits: Tensor
    means: Tensor
    log_scales: Tensor


class ModlHead:
    """Linear map to mixture parameters for `dims` action dimensions."""

    def __init__(self, store: ParamStore, name: str, in_dim: int, dims: int,
                 components: int, n_bins: int, rng):
        self.dims = dims
        self.components = components
        self.n_bins = n_bins
        self.linear = Linear(store, name, in_dim, dims * 3 * components, rng)
        self._mean_scale = (n_bins - 1) / 2.0
        self._log_scale_shift = _softplus_inverse(
            math.log(INIT_SCALE_BINS / SCALE_FLOOR_BINS))

    def __call__(self, x: Tensor) -> ModlParams:
        n = x.shape[0]
        k = self.components
        raw = ops.reshape(self.linear(x), (n, self.dims, 3 * k))
        logits = ops.narrow(raw, 2, 0, k)
        raw_means = ops.narrow(raw, 2, k, k)
        raw_scales = ops.narrow(raw, 2, 2 * k, k)
        means = ops.scale(ops.add_scalar(raw_means, 1.0), self._mean_scale)
        log_scales = ops.add_scalar(
            ops.softplus(ops.add_scalar(raw_scales, self._log_scale_shift)),
            math.log(SCALE_FLOOR_BINS))
        return ModlParams(logits=logits, means=means, log_scales=log_scales)


def _softplus_inverse(y: float) -> float:
    return y + math.log(-math.expm1(-y))


def modl_log_prob(params: ModlParams, target_bins: np.ndarray, n_bins: int) -> Tensor:
    """Log-likelihood of integer bins under the mixture, summed over action
    dimensions.  target_bins is (N, dims); returns a (N,) tensor."""
    b = np.asarray(target_bins, dtype=np.float64)
    if (b < 0).any() or (b > n_bins - 1).any():
        raise ShapeError("target bin out of range")
    b = b[..., None]  # broadcast against components
    inv_s = ops.exp(ops.neg(params.log_scales))
    x_hi = ops.mul(ops.sub(constant(b + 0.5), params.means), inv_s)
    x_lo = ops.mul(ops.sub(constant(b - 0.5), params.means), inv_s)
    left = ops.neg(ops.softplus(ops.neg(x_hi)))   # log CDF at the upper edge
    right = ops.neg(ops.softplus(x_lo))           # log (1 - CDF) at the lower edge
    width = ops.log1mexp(ops.neg(inv_s))          # log(1 - e^{-1/s}), the bin width term
    is_bottom = (b == 0).astype(np.float64)
    is_top = (b == n_bins - 1).astype(np.float64)
    interior = 1.0 - is_bottom - is_top
    log_mass = ops.add(
        ops.add(ops.mul(left, constant(1.0 - is_top)),
                ops.mul(right, constant(1.0 - is_bottom))),
        ops.mul(width, constant(interior)))
    log_w = ops.sub(params.logits, ops.logsumexp(params.logits, axis=2, keepdims=True))
    per_dim = ops.logsumexp(ops.add(log_w, log_mass), axis=2)  # (N, dims)
    return ops.tsum(per_dim, axis=1)


# ---------------------------------------------------------------------------
# numpy-side mirrors for sampling, greedy decoding, and oracle checks


def _np_sigmoid(x):
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def bin_masses_np(logits: np.ndarray, means: np.ndarray, log_scales: np.ndarray,
                  n_bins: int) -> np.ndarray:
    """Probability mass of every bin, (..., dims, n_bins); tails absorbed."""
    edges = np.arange(n_bins + 1, dtype=np.float64) - 0.5
    scales = np.exp(log_scales)
    x = (edges - means[..., None]) / scales[..., None]
    cdf = _np_sigmoid(x)
    cdf[..., 0] = 0.0
    cdf[..., -1] = 1.0
    per_component = np.diff(cdf, axis=-1)
    shifted = logits - logits.max(axis=-1, keepdims=True)
    weights = np.exp(shifted)
    weights /= weights.sum(axis=-1, keepdims=True)
    return np.einsum("...k,...kb->...b", weights, per_component)


def modl_sample_bins(logits: np.ndarray, means: np.ndarray, log_scales: np.ndarray,
                     n_bins: int, rng, temperature: float = 1.0) -> np.ndarray:
    """Sample a bin per (..., dims): pick a component from the logits, draw a
    logistic variate, and discretize to the nearest bin center.

    `temperature` scales the within-component logistic noise only; component
    choice keeps its full stochasticity, so mode switching survives while
    positional jitter shrinks."""
    gumbel = -np.log(-np.log(rng.uniform(1e-12, 1.0, size=logits.shape)))
    component = np.argmax(logits + gumbel, axis=-1)
    mu = np.take_along_axis(means, component[..., None], axis=-1)[..., 0]
    s = np.exp(np.take_along_axis(log_scales, component[..., None], axis=-1)[..., 0])
    u = rng.uniform(1e-12, 1.0 - 1e-12, size=mu.shape)
    x = mu + temperature * s * np.log(u / (1.0 - u))
    return np.clip(np.floor(x + 0.5), 0, n_bins - 1).astype(np.int64)


def modl_greedy_bins(logits: np.ndarray, means: np.ndarray, log_scales: np.ndarray,
                     n_bins: int) -> np.ndarray:
    return np.argmax(bin_masses_np(logits, means, log_scales, n_bins), axis=-1)
