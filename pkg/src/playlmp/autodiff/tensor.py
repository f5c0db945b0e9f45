"""Dense float64 tensors with taped reverse-mode differentiation.

A ``Tape`` records every primitive op executed while it is active, in
execution order (which is already a topological order of the graph).
``Tape.backward`` walks that list once in reverse, accumulating
vector-Jacobian products into ``Tensor.grad``.

Gradient arrays are never mutated in place: a backward closure may hand
the same array to several parents, and accumulation always builds a new
array.  Anything downstream (clipping, optimizers) must respect that.
"""

from __future__ import annotations

import numpy as np

from ..exceptions import NonFiniteError, ShapeError, TapeError

_ACTIVE: list["Tape"] = []
_TAPE_COUNTER = 0


class Tensor:
    """A dense float64 array plus the bookkeeping for reverse mode."""

    __slots__ = ("data", "requires_grad", "grad", "_parents", "_backward", "_tid")

    def __init__(self, data, requires_grad: bool = False):
        self.data = np.asarray(data, dtype=np.float64)
        self.requires_grad = requires_grad
        self.grad = None
        self._parents = None
        self._backward = None
        self._tid = -1

    @property
    def shape(self):
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    def item(self) -> float:
        if self.data.size != 1:
            raise ShapeError(f"item() on tensor of shape {self.shape}")
        return float(self.data.reshape(()))

    def is_leaf(self) -> bool:
        return self._parents is None

    def __repr__(self):
        flag = ", requires_grad=True" if self.requires_grad else ""
        return f"Tensor(shape={self.data.shape}{flag})"


class Tape:
    """Ordered record of primitive ops; one backward pass per forward pass."""

    def __init__(self):
        global _TAPE_COUNTER
        _TAPE_COUNTER += 1
        self.tid = _TAPE_COUNTER
        self.nodes: list[Tensor] = []
        self.leaves: set[Tensor] = set()
        self.consumed = False

    def __enter__(self) -> "Tape":
        _ACTIVE.append(self)
        return self

    def __exit__(self, exc_type, exc, tb):
        popped = _ACTIVE.pop()
        assert popped is self

    def record(self, out: Tensor, parents: tuple, backward_fn) -> None:
        out._parents = parents
        out._backward = backward_fn
        out._tid = self.tid
        self.nodes.append(out)
        for p in parents:
            if p._parents is None and p.requires_grad:
                self.leaves.add(p)

    def backward(self, loss: Tensor) -> dict[Tensor, np.ndarray]:
        """Propagate d(loss)/d(leaf) to every requires_grad leaf.

        Returns a map from leaf tensor to its gradient array (also left
        on ``leaf.grad``).  The tape is consumed afterwards.
        """
        if self.consumed:
            raise TapeError("backward called twice on one tape")
        if loss.size != 1:
            raise TapeError(f"loss must be scalar, got shape {loss.shape}")
        if loss._tid != self.tid:
            raise TapeError("loss was not produced on this tape")
        self.consumed = True

        for leaf in self.leaves:  # each backward reports exactly d(loss)/d(leaf)
            leaf.grad = None
        loss.grad = np.ones_like(loss.data)
        for node in reversed(self.nodes):
            g = node.grad
            if g is None:
                continue
            node._backward(g)
            node.grad = None
            node._backward = None
            node._parents = None
        return {leaf: leaf.grad for leaf in self.leaves if leaf.grad is not None}


def active_tape() -> Tape | None:
    return _ACTIVE[-1] if _ACTIVE else None


def check_finite(arr: np.ndarray, op: str) -> None:
    # a single reduced check: any NaN/Inf makes the sum non-finite
    if not np.isfinite(arr.sum()):
        raise NonFiniteError(f"non-finite output of op '{op}'")


def accumulate(t: Tensor, g: np.ndarray) -> None:
    """Add a vJp contribution to t.grad without mutating either array."""
    if t.grad is None:
        t.grad = g
    else:
        t.grad = t.grad + g


def constant(data) -> Tensor:
    return Tensor(data, requires_grad=False)


def parameter(data) -> Tensor:
    return Tensor(data, requires_grad=True)
