"""Minimal reverse-mode automatic differentiation for small recurrent nets."""

from .checkpoint import load_arrays, save_arrays
from .gradcheck import GradCheckReport, grad_check
from .optim import Adam, clip_global_norm
from .tensor import Tape, Tensor, active_tape, constant, parameter
from . import ops

__all__ = [
    "Adam",
    "GradCheckReport",
    "Tape",
    "Tensor",
    "active_tape",
    "clip_global_norm",
    "constant",
    "grad_check",
    "load_arrays",
    "ops",
    "parameter",
    "save_arrays",
]
