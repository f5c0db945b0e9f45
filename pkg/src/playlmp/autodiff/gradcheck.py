"""Central finite-difference verification of analytic gradients."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .tensor import Tape, Tensor


@dataclass
class GradCheckReport:
    max_rel_error: float
    tolerance: float
    passed: bool
    per_param: dict = field(default_factory=dict)

    def __str__(self):
        status = "ok" if self.passed else "FAILED"
        return (f"grad_check {status}: max_rel_error={self.max_rel_error:.3e} "
                f"tol={self.tolerance:.1e}")


def grad_check(forward_fn, params: dict[str, Tensor], tolerance: float = 1e-4,
               h: float = 1e-5) -> GradCheckReport:
    """Compare analytic gradients of a scalar forward_fn against central
    finite differences over every element of every parameter.

    forward_fn must be deterministic (any sampling noise held fixed) and
    must rebuild its graph from `params` on each call.

    Differences below the finite-difference noise floor (float64
    cancellation on f(x+h) - f(x-h), about eps * |f| / h) are not
    evidence of a wrong gradient and are ignored.
    """
    with Tape() as tape:
        loss = forward_fn()
        tape.backward(loss)
    base_value = abs(loss.item())
    noise_floor = 64.0 * np.finfo(np.float64).eps * max(1.0, base_value) / h
    analytic = {k: (p.grad.copy() if p.grad is not None else np.zeros_like(p.data))
                for k, p in params.items()}
    for p in params.values():
        p.grad = None

    worst = 0.0
    per_param: dict[str, float] = {}
    for name, p in params.items():
        flat = p.data.reshape(-1)
        flat_analytic = analytic[name].reshape(-1)
        worst_here = 0.0
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + h
            up = forward_fn().item()
            flat[i] = orig - h
            down = forward_fn().item()
            flat[i] = orig
            numeric = (up - down) / (2.0 * h)
            a = float(flat_analytic[i])
            diff = abs(a - numeric)
            if diff <= noise_floor:
                continue
            err = diff / max(abs(a), abs(numeric), 1e-6)
            if err > worst_here:
                worst_here = err
        per_param[name] = worst_here
        worst = max(worst, worst_here)
    return GradCheckReport(max_rel_error=worst, tolerance=tolerance,
                           passed=worst < tolerance, per_param=per_param)
