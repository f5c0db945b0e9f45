"""Network building blocks on top of the autodiff core.

All parameters live in a flat named store (checkpoint-friendly);
weights are Xavier-uniform, biases zero.  Recurrent cells are GRUs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..autodiff import Tensor, constant, ops, parameter


class ParamStore:
    """Flat name -> parameter tensor registry for one model."""

    def __init__(self):
        self.params: dict[str, Tensor] = {}

    def add(self, name: str, array: np.ndarray) -> Tensor:
        if name in self.params:
            raise ValueError(f"duplicate parameter name '{name}'")
        tensor = parameter(array)
        self.params[name] = tensor
        return tensor

    def arrays(self) -> dict[str, np.ndarray]:
        return {name: p.data for name, p in self.params.items()}

    def load_arrays(self, arrays: dict[str, np.ndarray]) -> None:
        for name, p in self.params.items():
            if name not in arrays:
                raise KeyError(f"checkpoint is missing parameter '{name}'")
            if arrays[name].shape != p.data.shape:
                raise ValueError(
                    f"parameter '{name}' shape {arrays[name].shape} != {p.data.shape}")
            p.data = np.array(arrays[name], dtype=np.float64)

    def count(self) -> int:
        return sum(p.size for p in self.params.values())


def xavier_uniform(rng, fan_in: int, fan_out: int) -> np.ndarray:
    limit = math.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_in, fan_out))


class Linear:
    def __init__(self, store: ParamStore, name: str, in_dim: int, out_dim: int, rng):
        self.W = store.add(f"{name}.W", xavier_uniform(rng, in_dim, out_dim))
        self.b = store.add(f"{name}.b", np.zeros(out_dim))

    def __call__(self, x: Tensor) -> Tensor:
        return ops.add(ops.matmul(x, self.W), self.b)


class MLP:
    """Feedforward tanh stack."""

    def __init__(self, store, name, in_dim, hidden_dims, rng):
        self.layers = []
        prev = in_dim
        for i, width in enumerate(hidden_dims):
            self.layers.append(Linear(store, f"{name}.{i}", prev, width, rng))
            prev = width
        self.out_dim = prev

    def __call__(self, x: Tensor) -> Tensor:
        for layer in self.layers:
            x = ops.tanh(layer(x))
        return x


class GRU:
    """Stacked GRU; gate layout [reset | update | candidate]."""

    def __init__(self, store, name, input_dim, hidden_dim, layers, rng):
        self.hidden_dim = hidden_dim
        self.layers = []
        prev = input_dim
        for i in range(layers):
            W = store.add(f"{name}.{i}.W", xavier_uniform(rng, prev, 3 * hidden_dim))
            U = store.add(f"{name}.{i}.U", xavier_uniform(rng, hidden_dim, 3 * hidden_dim))
            b = store.add(f"{name}.{i}.b", np.zeros(3 * hidden_dim))
            self.layers.append((W, U, b))
            prev = hidden_dim

    def initial_state(self, batch: int) -> list[Tensor]:
        return [constant(np.zeros((batch, self.hidden_dim))) for _ in self.layers]

    def step(self, x: Tensor, hidden: list[Tensor]) -> tuple[Tensor, list[Tensor]]:
        new_hidden = []
        for (W, U, b), h in zip(self.layers, hidden):
            gx = ops.add(ops.matmul(x, W), b)
            gh = ops.matmul(h, U)
            x = ops.gru_cell(gx, gh, h)
            new_hidden.append(x)
        return x, new_hidden

    def run(self, inputs: list[Tensor]) -> list[Tensor]:
        hidden = self.initial_state(inputs[0].shape[0])
        tops = []
        for x in inputs:
            top, hidden = self.step(x, hidden)
            tops.append(top)
        return tops


@dataclass
class DiagGaussian:
    """Diagonal Gaussian as (mu, log_sigma) tensors; sigma > 0 by construction."""

    mu: Tensor
    log_sigma: Tensor

    @property
    def dim(self) -> int:
        return self.mu.shape[-1]

    def sample_np(self, rng) -> np.ndarray:
        noise = rng.standard_normal(self.mu.shape)
        return self.mu.data + np.exp(self.log_sigma.data) * noise


class DiagGaussianHead:
    def __init__(self, store, name, in_dim, dim, rng):
        self.dim = dim
        self.linear = Linear(store, name, in_dim, 2 * dim, rng)

    def __call__(self, x: Tensor) -> DiagGaussian:
        out = self.linear(x)
        return DiagGaussian(mu=ops.narrow(out, 1, 0, self.dim),
                            log_sigma=ops.narrow(out, 1, self.dim, self.dim))


class BiGRUEncoder:
    """Bidirectional single-layer GRU; final states of both directions are
    concatenated and mapped to a DiagGaussian."""

    def __init__(self, store, name, input_dim, hidden_dim, out_dim, rng):
        self.forward = GRU(store, f"{name}.fwd", input_dim, hidden_dim, 1, rng)
        self.backward = GRU(store, f"{name}.bwd", input_dim, hidden_dim, 1, rng)
        self.head = DiagGaussianHead(store, f"{name}.head", 2 * hidden_dim, out_dim, rng)

    def __call__(self, inputs: list[Tensor]) -> DiagGaussian:
        fwd_final = self.forward.run(inputs)[-1]
        bwd_final = self.backward.run(list(reversed(inputs)))[-1]
        return self.head(ops.concat([fwd_final, bwd_final], axis=1))
