"""Tape, primitive op gradients, optimizer, grad-check, checkpoints."""

import math

import numpy as np
import pytest

from playlmp.autodiff import (
    Adam,
    Tape,
    Tensor,
    clip_global_norm,
    constant,
    grad_check,
    load_arrays,
    ops,
    parameter,
    save_arrays,
)
from playlmp.exceptions import NonFiniteError, ShapeError, TapeError


def numeric_grad(fn, param, h=1e-5):
    flat = param.data.reshape(-1)
    grad = np.zeros_like(flat)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + h
        up = fn().item()
        flat[i] = orig - h
        down = fn().item()
        flat[i] = orig
        grad[i] = (up - down) / (2 * h)
    return grad.reshape(param.data.shape)


def analytic_grad(fn, param):
    with Tape() as tape:
        tape.backward(fn())
    grad = param.grad
    param.grad = None
    return grad


def rel_err(a, b):
    denom = np.maximum(np.maximum(np.abs(a), np.abs(b)), 1e-8)
    return float(np.max(np.abs(a - b) / denom))


# ---------------------------------------------------------------------------
# forward examples


def test_matmul_scalar_product():
    out = ops.matmul(constant([[2.0]]), constant([[3.0]]))
    assert out.data.tolist() == [[6.0]]


def test_tanh_origin():
    assert ops.tanh(constant([0.0])).data[0] == 0.0


def test_logsumexp_two_zeros():
    # oracle: direct evaluation of ln sum exp
    expected = math.log(math.exp(0.0) + math.exp(0.0))
    got = ops.logsumexp(constant([0.0, 0.0]), axis=0).item()
    assert abs(got - expected) < 1e-12
    assert abs(got - 0.693147) < 1e-6


def test_matmul_shape_mismatch():
    with pytest.raises(ShapeError):
        ops.matmul(constant(np.zeros((2, 3))), constant(np.zeros((2, 3))))


def test_non_finite_output_is_an_error():
    with pytest.raises(NonFiniteError):
        ops.log(constant([0.0]))
    with pytest.raises(NonFiniteError):
        ops.exp(constant([1e9]))


# ---------------------------------------------------------------------------
# backward examples


def test_square_gradient():
    x = parameter([3.0])
    with Tape() as tape:
        loss = ops.tsum(ops.mul(x, x))
        grads = tape.backward(loss)
    assert x.grad[0] == pytest.approx(6.0)
    assert grads[x][0] == pytest.approx(6.0)


def test_tanh_net_matches_finite_differences():
    rng = np.random.default_rng(0)
    W = parameter(rng.normal(size=(5, 4)))
    x = constant(rng.normal(size=(4, 3)))

    def fn():
        return ops.tsum(ops.tanh(ops.matmul(W, x)))

    assert rel_err(analytic_grad(fn, W), numeric_grad(fn, W)) < 1e-4


def test_unused_parameter_gets_no_gradient():
    x = parameter([2.0])
    unused = parameter([5.0])
    with Tape() as tape:
        grads = tape.backward(ops.tsum(ops.mul(x, x)))
    assert unused.grad is None
    assert unused not in grads


def test_backward_errors():
    x = parameter([1.0, 2.0])
    with Tape() as tape:
        vec = ops.mul(x, x)
        with pytest.raises(TapeError):
            tape.backward(vec)  # non-scalar
    with Tape() as tape:
        loss = ops.tsum(ops.mul(x, x))
        tape.backward(loss)
        with pytest.raises(TapeError):
            tape.backward(loss)  # consumed


def test_backward_linearity():
    rng = np.random.default_rng(1)
    w = parameter(rng.normal(size=(4,)))
    a = constant(rng.normal(size=(4,)))
    b = constant(rng.normal(size=(4,)))

    def loss_a():
        return ops.tsum(ops.mul(ops.tanh(w), a))

    def loss_b():
        return ops.tsum(ops.mul(ops.exp(w), b))

    def loss_sum():
        return ops.add(loss_a(), loss_b())

    total = analytic_grad(loss_sum, w)
    parts = analytic_grad(loss_a, w) + analytic_grad(loss_b, w)
    np.testing.assert_allclose(total, parts, rtol=1e-12)


# ---------------------------------------------------------------------------
# per-primitive vJp vs central finite differences


def _unary_cases():
    return [
        ("tanh", ops.tanh, (-2.0, 2.0)),
        ("sigmoid", ops.sigmoid, (-2.0, 2.0)),
        ("softplus", ops.softplus, (-2.0, 2.0)),
        ("exp", ops.exp, (-2.0, 2.0)),
        ("log", ops.log, (0.1, 2.0)),
        ("log1mexp", ops.log1mexp, (-2.0, -0.1)),
    ]


@pytest.mark.parametrize("name,op,domain", _unary_cases())
def test_unary_gradients(name, op, domain):
    rng = np.random.default_rng(hash(name) % 2**32)
    x = parameter(rng.uniform(*domain, size=(3, 4)))
    w = constant(rng.normal(size=(3, 4)))

    def fn():
        return ops.tsum(ops.mul(op(x), w))

    assert rel_err(analytic_grad(fn, x), numeric_grad(fn, x)) < 1e-4, name


@pytest.mark.parametrize("case", ["add", "sub", "mul", "add_bcast", "mul_bcast",
                                  "matmul", "scale", "add_scalar"])
def test_binary_gradients(case):
    rng = np.random.default_rng(hash(case) % 2**32)
    a = parameter(rng.uniform(-2, 2, size=(3, 4)))
    b_shape = (4,) if case.endswith("bcast") else (3, 4)
    b = parameter(rng.uniform(-2, 2, size=(4, 2) if case == "matmul" else b_shape))
    mix = constant(rng.normal(size=(3, 2) if case == "matmul" else (3, 4)))

    def fn():
        if case in ("add", "add_bcast"):
            out = ops.add(a, b)
        elif case == "sub":
            out = ops.sub(a, b)
        elif case in ("mul", "mul_bcast"):
            out = ops.mul(a, b)
        elif case == "matmul":
            out = ops.matmul(a, b)
        elif case == "scale":
            out = ops.scale(a, -1.7)
        else:
            out = ops.add_scalar(a, 0.3)
        return ops.tsum(ops.mul(out, mix))

    for p in (a, b) if case not in ("scale", "add_scalar") else (a,):
        assert rel_err(analytic_grad(fn, p), numeric_grad(fn, p)) < 1e-4, case


@pytest.mark.parametrize("case", ["logsumexp", "narrow", "concat", "reshape",
                                  "sum_axis", "mean_axis"])
def test_shape_op_gradients(case):
    rng = np.random.default_rng(hash(case) % 2**32)
    a = parameter(rng.uniform(-2, 2, size=(3, 6)))

    def fn():
        if case == "logsumexp":
            out = ops.logsumexp(a, axis=1)
        elif case == "narrow":
            out = ops.narrow(a, 1, 2, 3)
        elif case == "concat":
            out = ops.concat([a, ops.tanh(a)], axis=1)
        elif case == "reshape":
            out = ops.reshape(a, (6, 3))
        elif case == "sum_axis":
            out = ops.tsum(a, axis=0)
        else:
            out = ops.tmean(a, axis=1)
        return ops.tsum(ops.tanh(out))

    assert rel_err(analytic_grad(fn, a), numeric_grad(fn, a)) < 1e-4, case


def test_gru_cell_gradients():
    rng = np.random.default_rng(9)
    gx = parameter(rng.uniform(-2, 2, size=(2, 9)))
    gh = parameter(rng.uniform(-2, 2, size=(2, 9)))
    h = parameter(rng.uniform(-1, 1, size=(2, 3)))
    mix = constant(rng.normal(size=(2, 3)))

    def fn():
        return ops.tsum(ops.mul(ops.gru_cell(gx, gh, h), mix))

    for p in (gx, gh, h):
        assert rel_err(analytic_grad(fn, p), numeric_grad(fn, p)) < 1e-4


# ---------------------------------------------------------------------------
# reparameterized sampling


def test_reparam_passthrough_and_mean_recovery():
    mu = parameter(np.zeros(4))
    log_sigma = parameter(np.zeros(4))
    eps = constant([0.3, -1.2, 0.0, 2.0])
    out = ops.reparam_sample(mu, log_sigma, eps)
    np.testing.assert_allclose(out.data, eps.data)

    mu2 = parameter([1.0, -2.0, 0.5, 3.0])
    out2 = ops.reparam_sample(mu2, log_sigma, constant(np.zeros(4)))
    np.testing.assert_allclose(out2.data, mu2.data)


def test_reparam_monte_carlo_moments():
    # empirical mean/std over 1e5 samples of N(2, 0.5) within 1%
    rng = np.random.default_rng(3)
    n = 100_000
    mu = constant(np.full(n, 2.0))
    log_sigma = constant(np.full(n, math.log(0.5)))
    noise = constant(rng.standard_normal(n))
    samples = ops.reparam_sample(mu, log_sigma, noise).data
    assert abs(samples.mean() - 2.0) < 0.01 * 2.0
    assert abs(samples.std() - 0.5) < 0.01 * 0.5


def test_reparam_gradients_flow_to_mu_and_sigma_not_noise():
    rng = np.random.default_rng(4)
    mu = parameter(rng.normal(size=3))
    log_sigma = parameter(rng.normal(size=3) * 0.1)
    noise = constant(rng.standard_normal(3))
    with Tape() as tape:
        out = ops.tsum(ops.reparam_sample(mu, log_sigma, noise))
        grads = tape.backward(out)
    assert mu in grads and log_sigma in grads
    np.testing.assert_allclose(grads[mu], np.ones(3))
    np.testing.assert_allclose(grads[log_sigma],
                               np.exp(log_sigma.data) * noise.data)


def test_reparam_shape_mismatch():
    with pytest.raises(ShapeError):
        ops.reparam_sample(parameter(np.zeros(3)), parameter(np.zeros(3)),
                           constant(np.zeros(4)))


# ---------------------------------------------------------------------------
# optimizer


def _quadratic_step(adam, x, target=0.0):
    with Tape() as tape:
        diff = ops.add_scalar(x, -target)
        tape.backward(ops.tsum(ops.mul(diff, diff)))
    adam.step()
    adam.zero_grad()


def test_adam_descends_on_quadratic():
    x = parameter([1.0])
    adam = Adam({"x": x}, lr=0.1)
    _quadratic_step(adam, x)
    assert x.data[0] < 1.0


def test_adam_zero_gradient_fixed_point():
    x = parameter([1.5])
    adam = Adam({"x": x}, lr=0.1)
    x.grad = np.zeros(1)
    adam.step()
    assert x.data[0] == 1.5


def test_adam_converges_on_convex_quadratic():
    # oracle: the unique minimum of (x - 0.7)^2 is x* = 0.7
    x = parameter([5.0])
    adam = Adam({"x": x}, lr=0.05)
    for _ in range(500):
        _quadratic_step(adam, x, target=0.7)
    assert abs(x.data[0] - 0.7) < 1e-2


def test_adam_rejects_non_finite_gradient():
    x = parameter([1.0])
    adam = Adam({"x": x}, lr=0.1)
    x.grad = np.array([np.inf])
    with pytest.raises(NonFiniteError):
        adam.step()


def test_clip_global_norm_handles_shared_gradient_arrays():
    a = parameter([3.0])
    b = parameter([4.0])
    shared = np.array([6.0])
    a.grad = shared
    b.grad = shared
    norm = clip_global_norm({"a": a, "b": b}, 1.0)
    assert norm == pytest.approx(math.sqrt(72.0))
    # both got scaled once each, not twice through aliasing
    assert a.grad[0] == pytest.approx(b.grad[0])
    assert a.grad[0] == pytest.approx(6.0 / norm)


# ---------------------------------------------------------------------------
# grad_check


def test_grad_check_linear_map_is_exact():
    rng = np.random.default_rng(5)
    W = parameter(rng.normal(size=(3, 3)))
    x = constant(rng.normal(size=(3, 2)))
    report = grad_check(lambda: ops.tsum(ops.matmul(W, x)), {"W": W})
    assert report.max_rel_error < 1e-8
    assert report.passed


def test_grad_check_two_layer_tanh_net():
    rng = np.random.default_rng(6)
    W1 = parameter(rng.normal(size=(6, 8)))
    W2 = parameter(rng.normal(size=(8, 4)))
    x = constant(rng.normal(size=(2, 6)))

    def fn():
        h = ops.tanh(ops.matmul(x, W1))
        return ops.tsum(ops.tanh(ops.matmul(h, W2)))

    report = grad_check(fn, {"W1": W1, "W2": W2}, tolerance=1e-4)
    assert report.passed, report


def test_grad_check_gru_cell_single_step():
    rng = np.random.default_rng(7)
    from playlmp.models.nets import GRU, ParamStore

    store = ParamStore()
    gru = GRU(store, "g", 4, 5, 1, rng)
    x = constant(rng.normal(size=(2, 4)))
    mix = constant(rng.normal(size=(2, 5)))

    def fn():
        top, _ = gru.step(x, gru.initial_state(2))
        return ops.tsum(ops.mul(top, mix))

    report = grad_check(fn, store.params, tolerance=1e-4)
    assert report.passed, report


# ---------------------------------------------------------------------------
# determinism and checkpoints


def _forward_and_grads(seed):
    rng = np.random.default_rng(seed)
    W = parameter(rng.normal(size=(6, 6)))
    x = constant(rng.normal(size=(6, 2)))
    with Tape() as tape:
        loss = ops.tsum(ops.tanh(ops.matmul(W, x)))
        tape.backward(loss)
    return loss.data.copy(), W.grad.copy()


def test_fixed_seed_bit_identical_runs():
    loss1, grad1 = _forward_and_grads(42)
    loss2, grad2 = _forward_and_grads(42)
    assert loss1.tobytes() == loss2.tobytes()
    assert grad1.tobytes() == grad2.tobytes()


def test_checkpoint_roundtrip_and_byte_stability(tmp_path):
    rng = np.random.default_rng(8)
    arrays = {"layer.W": rng.normal(size=(3, 4)), "layer.b": rng.normal(size=4)}
    path1 = tmp_path / "a.ckpt"
    path2 = tmp_path / "b.ckpt"
    save_arrays(path1, arrays, seed=123)
    save_arrays(path2, arrays, seed=123)
    assert path1.read_bytes() == path2.read_bytes()
    loaded, seed = load_arrays(path1)
    assert seed == 123
    for name in arrays:
        np.testing.assert_array_equal(loaded[name], arrays[name])


def test_checkpoint_rejects_corruption(tmp_path):
    from playlmp.exceptions import DataFormatError

    path = tmp_path / "a.ckpt"
    save_arrays(path, {"w": np.ones(3)}, seed=0)
    raw = bytearray(path.read_bytes())
    path.write_bytes(bytes(raw[:-4]))  # truncate
    with pytest.raises(DataFormatError):
        load_arrays(path)
