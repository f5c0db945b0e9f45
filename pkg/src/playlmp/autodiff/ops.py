"""Primitive differentiable ops.

Every op computes its forward value with numpy, validates finiteness,
and (when a tape is active and some input needs gradients) records a
closure computing the exact vector-Jacobian product.  Binary
elementwise ops follow numpy broadcasting; their backward pass sums the
broadcast axes away.
"""

from __future__ import annotations

import numpy as np

from ..exceptions import ShapeError
from .tensor import Tensor, accumulate, active_tape, check_finite


def _np_sigmoid(x: np.ndarray) -> np.ndarray:
    # stable in one pass via tanh
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def _unbroadcast(g: np.ndarray, shape: tuple) -> np.ndarray:
    """Reduce g back to `shape` by summing the axes numpy broadcast over."""
    if g.shape == shape:
        return g
    extra = g.ndim - len(shape)
    if extra > 0:
        g = g.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, s in enumerate(shape) if s == 1 and g.shape[i] != 1)
    if axes:
        g = g.sum(axis=axes, keepdims=True)
    return g


# ---------------------------------------------------------------------------
# binary ops


def matmul(a: Tensor, b: Tensor) -> Tensor:
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeError(f"matmul shapes {a.shape} x {b.shape}")
    y = a.data @ b.data
    check_finite(y, "matmul")
    out = Tensor(y)
    tape = active_tape()
    if tape is not None and (a.requires_grad or b.requires_grad):
        out.requires_grad = True

        def bw(g):
            if a.requires_grad:
                accumulate(a, g @ b.data.T)
            if b.requires_grad:
                accumulate(b, a.data.T @ g)

        tape.record(out, (a, b), bw)
    return out


def add(a: Tensor, b: Tensor) -> Tensor:
    y = a.data + b.data
    check_finite(y, "add")
    out = Tensor(y)
    tape = active_tape()
    if tape is not None and (a.requires_grad or b.requires_grad):
        out.requires_grad = True

        def bw(g):
            if a.requires_grad:
                accumulate(a, _unbroadcast(g, a.data.shape))
            if b.requires_grad:
                accumulate(b, _unbroadcast(g, b.data.shape))

        tape.record(out, (a, b), bw)
    return out


def sub(a: Tensor, b: Tensor) -> Tensor:
    y = a.data - b.data
    check_finite(y, "sub")
    out = Tensor(y)
    tape = active_tape()
    if tape is not None and (a.requires_grad or b.requires_grad):
        out.requires_grad = True

        def bw(g):
            if a.requires_grad:
                accumulate(a, _unbroadcast(g, a.data.shape))
            if b.requires_grad:
                accumulate(b, _unbroadcast(-g, b.data.shape))

        tape.record(out, (a, b), bw)
    return out


def mul(a: Tensor, b: Tensor) -> Tensor:
    y = a.data * b.data
    check_finite(y, "mul")
    out = Tensor(y)
    tape = active_tape()
    if tape is not None and (a.requires_grad or b.requires_grad):
        out.requires_grad = True

        def bw(g):
            if a.requires_grad:
                accumulate(a, _unbroadcast(g * b.data, a.data.shape))
            if b.requires_grad:
                accumulate(b, _unbroadcast(g * a.data, b.data.shape))

        tape.record(out, (a, b), bw)
    return out


# ---------------------------------------------------------------------------
# scalar-constant ops


def scale(a: Tensor, c: float) -> Tensor:
    y = a.data * c
    check_finite(y, "scale")
    out = Tensor(y)
    tape = active_tape()
    if tape is not None and a.requires_grad:
        out.requires_grad = True
        tape.record(out, (a,), lambda g: accumulate(a, g * c))
    return out


def add_scalar(a: Tensor, c: float) -> Tensor:
    y = a.data + c
    check_finite(y, "add_scalar")
    out = Tensor(y)
    tape = active_tape()
    if tape is not None and a.requires_grad:
        out.requires_grad = True
        tape.record(out, (a,), lambda g: accumulate(a, g))
    return out


def neg(a: Tensor) -> Tensor:
    return scale(a, -1.0)


# ---------------------------------------------------------------------------
# unary elementwise ops


def tanh(a: Tensor) -> Tensor:
    y = np.tanh(a.data)
    out = Tensor(y)
    tape = active_tape()
    if tape is not None and a.requires_grad:
        out.requires_grad = True
        tape.record(out, (a,), lambda g: accumulate(a, g * (1.0 - y * y)))
    return out


def sigmoid(a: Tensor) -> Tensor:
    y = _np_sigmoid(a.data)
    out = Tensor(y)
    tape = active_tape()
    if tape is not None and a.requires_grad:
        out.requires_grad = True
        tape.record(out, (a,), lambda g: accumulate(a, g * y * (1.0 - y)))
    return out


def softplus(a: Tensor) -> Tensor:
    y = np.logaddexp(0.0, a.data)
    out = Tensor(y)
    tape = active_tape()
    if tape is not None and a.requires_grad:
        out.requires_grad = True
        tape.record(out, (a,), lambda g: accumulate(a, g * _np_sigmoid(a.data)))
    return out


def exp(a: Tensor) -> Tensor:
    with np.errstate(over="ignore"):
        y = np.exp(a.data)
    check_finite(y, "exp")
    out = Tensor(y)
    tape = active_tape()
    if tape is not None and a.requires_grad:
        out.requires_grad = True
        tape.record(out, (a,), lambda g: accumulate(a, g * y))
    return out


def log(a: Tensor) -> Tensor:
    with np.errstate(divide="ignore", invalid="ignore"):
        y = np.log(a.data)
    check_finite(y, "log")
    out = Tensor(y)
    tape = active_tape()
    if tape is not None and a.requires_grad:
        out.requires_grad = True
        tape.record(out, (a,), lambda g: accumulate(a, g / a.data))
    return out


def log1mexp(a: Tensor) -> Tensor:
    """log(1 - exp(a)) for a < 0, stable over the whole negative axis."""
    x = a.data
    y = np.empty_like(x)
    lo = x < -0.6931471805599453  # ln(1/2): switch point per the usual recipe
    y[lo] = np.log1p(-np.exp(x[lo]))
    hi = ~lo
    y[hi] = np.log(-np.expm1(x[hi]))
    check_finite(y, "log1mexp")
    out = Tensor(y)
    tape = active_tape()
    if tape is not None and a.requires_grad:
        out.requires_grad = True
        # d/dx log(1-e^x) = -e^x / (1-e^x) = -1 / (e^{-x} - 1)
        tape.record(out, (a,), lambda g: accumulate(a, g * (-1.0 / np.expm1(-x))))
    return out


# ---------------------------------------------------------------------------
# reductions and shape ops


def logsumexp(a: Tensor, axis: int, keepdims: bool = False) -> Tensor:
    m = np.max(a.data, axis=axis, keepdims=True)
    shifted = np.exp(a.data - m)
    total = shifted.sum(axis=axis, keepdims=True)
    y = m + np.log(total)
    if not keepdims:
        y = np.squeeze(y, axis=axis)
    check_finite(y, "logsumexp")
    out = Tensor(y)
    tape = active_tape()
    if tape is not None and a.requires_grad:
        out.requires_grad = True
        softmax = shifted / total

        def bw(g):
            ge = g if keepdims else np.expand_dims(g, axis)
            accumulate(a, ge * softmax)

        tape.record(out, (a,), bw)
    return out


def tsum(a: Tensor, axis=None, keepdims: bool = False) -> Tensor:
    y = a.data.sum(axis=axis, keepdims=keepdims)
    check_finite(np.asarray(y), "sum")
    out = Tensor(y)
    tape = active_tape()
    if tape is not None and a.requires_grad:
        out.requires_grad = True

        def bw(g):
            if axis is None:
                accumulate(a, np.broadcast_to(g, a.data.shape))
            else:
                ge = g if keepdims else np.expand_dims(g, axis)
                accumulate(a, np.broadcast_to(ge, a.data.shape))

        tape.record(out, (a,), bw)
    return out


def tmean(a: Tensor, axis=None, keepdims: bool = False) -> Tensor:
    if axis is None:
        n = a.size
    elif isinstance(axis, tuple):
        n = int(np.prod([a.shape[i] for i in axis]))
    else:
        n = a.shape[axis]
    return scale(tsum(a, axis=axis, keepdims=keepdims), 1.0 / n)


def concat(parts: list[Tensor], axis: int = 0) -> Tensor:
    y = np.concatenate([p.data for p in parts], axis=axis)
    check_finite(y, "concat")
    out = Tensor(y)
    tape = active_tape()
    if tape is not None and any(p.requires_grad for p in parts):
        out.requires_grad = True
        sizes = [p.data.shape[axis] for p in parts]
        splits = np.cumsum(sizes[:-1])

        def bw(g):
            for p, piece in zip(parts, np.split(g, splits, axis=axis)):
                if p.requires_grad:
                    accumulate(p, piece)

        tape.record(out, tuple(parts), bw)
    return out


def narrow(a: Tensor, axis: int, start: int, length: int) -> Tensor:
    idx = [slice(None)] * a.ndim
    idx[axis] = slice(start, start + length)
    idx = tuple(idx)
    out = Tensor(a.data[idx])
    tape = active_tape()
    if tape is not None and a.requires_grad:
        out.requires_grad = True

        def bw(g):
            full = np.zeros_like(a.data)
            full[idx] = g
            accumulate(a, full)

        tape.record(out, (a,), bw)
    return out


def reshape(a: Tensor, shape: tuple) -> Tensor:
    out = Tensor(a.data.reshape(shape))
    tape = active_tape()
    if tape is not None and a.requires_grad:
        out.requires_grad = True
        tape.record(out, (a,), lambda g: accumulate(a, g.reshape(a.data.shape)))
    return out


# ---------------------------------------------------------------------------
# fused recurrent cell and sampling


def gru_cell(gx: Tensor, gh: Tensor, h: Tensor) -> Tensor:
    """One GRU step from precomputed gate activations.

    gx = x W + b and gh = h U, both (B, 3H) laid out [reset|update|candidate];
    h is (B, H).  Returns the next hidden state.
    """
    n_h = h.shape[-1]
    if gx.shape != gh.shape or gx.shape[-1] != 3 * n_h:
        raise ShapeError(f"gru_cell shapes gx={gx.shape} gh={gh.shape} h={h.shape}")
    gxd, ghd, hd = gx.data, gh.data, h.data
    r = _np_sigmoid(gxd[:, :n_h] + ghd[:, :n_h])
    z = _np_sigmoid(gxd[:, n_h : 2 * n_h] + ghd[:, n_h : 2 * n_h])
    hh = ghd[:, 2 * n_h :]
    n = np.tanh(gxd[:, 2 * n_h :] + r * hh)
    y = (1.0 - z) * n + z * hd
    check_finite(y, "gru_cell")
    out = Tensor(y)
    tape = active_tape()
    if tape is not None and (gx.requires_grad or gh.requires_grad or h.requires_grad):
        out.requires_grad = True

        def bw(g):
            dn = g * (1.0 - z)
            dz = g * (hd - n)
            dn_pre = dn * (1.0 - n * n)
            dr = dn_pre * hh
            dz_pre = dz * z * (1.0 - z)
            dr_pre = dr * r * (1.0 - r)
            if gx.requires_grad:
                accumulate(gx, np.concatenate([dr_pre, dz_pre, dn_pre], axis=1))
            if gh.requires_grad:
                accumulate(gh, np.concatenate([dr_pre, dz_pre, dn_pre * r], axis=1))
            if h.requires_grad:
                accumulate(h, g * z)

        tape.record(out, (gx, gh, h), bw)
    return out


def reparam_sample(mu: Tensor, log_sigma: Tensor, noise: Tensor) -> Tensor:
    """mu + exp(log_sigma) * noise; gradients reach mu and log_sigma only."""
    if noise.shape != mu.shape:
        raise ShapeError(f"noise shape {noise.shape} != mu shape {mu.shape}")
    if noise.requires_grad:
        raise ShapeError("noise must not require gradients")
    return add(mu, mul(exp(log_sigma), noise))


# operator sugar so model code reads naturally
Tensor.__add__ = lambda self, other: (
    add(self, other) if isinstance(other, Tensor) else add_scalar(self, float(other))
)
Tensor.__sub__ = lambda self, other: (
    sub(self, other) if isinstance(other, Tensor) else add_scalar(self, -float(other))
)
Tensor.__mul__ = lambda self, other: (
    mul(self, other) if isinstance(other, Tensor) else scale(self, float(other))
)
Tensor.__rmul__ = lambda self, other: scale(self, float(other))
Tensor.__neg__ = lambda self: neg(self)
Tensor.__matmul__ = lambda self, other: matmul(self, other)
