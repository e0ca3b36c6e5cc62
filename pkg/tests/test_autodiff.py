from __future__ import annotations

import math

import numpy as np
import pytest

import scenesynth.autodiff as ad
from scenesynth.autodiff import (
    SGD,
    NumericError,
    Params,
    ShapeMismatchError,
    Tape,
    TapeError,
    Variable,
)


def finite_difference(f, arrays: list[np.ndarray], which: int, eps: float = 1e-3) -> np.ndarray:
    """Central-difference gradient of scalar f w.r.t. arrays[which]."""
    base = [a.copy() for a in arrays]
    grad = np.zeros_like(base[which])
    flat = grad.reshape(-1)
    target = base[which].reshape(-1)
    for i in range(target.size):
        orig = target[i]
        target[i] = orig + eps
        hi = f(base)
        target[i] = orig - eps
        lo = f(base)
        target[i] = orig
        flat[i] = (hi - lo) / (2 * eps)
    return grad


def analytic_grads(build, arrays):
    """Run build(vars) under a tape and return gradients for every input."""
    vars_ = [Variable(a, requires_grad=True) for a in arrays]
    with Tape() as tape:
        loss = build(vars_)
    ad.backward(tape, loss)
    return [v.grad if v.grad is not None else np.zeros_like(v.value) for v in vars_]


def check_grads(build, arrays, rtol=1e-3):
    got = analytic_grads(build, arrays)
    for which in range(len(arrays)):
        def scalar(arrs, which=which):
            vs = [Variable(a) for a in arrs]
            return float(build(vs).value)

        want = finite_difference(scalar, arrays, which)
        denom = np.maximum(np.abs(want), 1e-4)
        assert np.max(np.abs(got[which] - want) / denom) < rtol


class TestClosedFormExamples:
    def test_bce_at_zero_logit(self):
        x = Variable(np.array([0.0]), requires_grad=True)
        with Tape() as tape:
            loss = ad.sum_all(ad.bce_logits(x, np.array([1.0])))
        assert float(loss.value) == pytest.approx(math.log(2), abs=1e-12)
        ad.backward(tape, loss)
        assert x.grad[0] == pytest.approx(-0.5, abs=1e-12)

    def test_l1_at_tie_has_zero_grad(self):
        v = np.array([1.0, -2.0, 3.0])
        x = Variable(v, requires_grad=True)
        with Tape() as tape:
            loss = ad.sum_all(ad.l1(x, v))
        assert float(loss.value) == 0.0
        ad.backward(tape, loss)
        assert (x.grad == 0.0).all()


class TestFiniteDifferenceOracles:
    def test_conv2d(self, rng):
        x = rng.standard_normal((1, 3, 8, 8))
        w = rng.standard_normal((4, 3, 3, 3)) * 0.5
        b = rng.standard_normal(4) * 0.1

        def build(vs):
            y = ad.conv2d(vs[0], vs[1], vs[2], stride=2, pad=1)
            return ad.sum_all(ad.mul(y, Variable(np.cos(np.arange(y.size).reshape(y.shape)))))

        check_grads(build, [x, w, b])

    def test_linear(self, rng):
        x = rng.standard_normal((5, 7))
        w = rng.standard_normal((7, 3))
        b = rng.standard_normal(3)

        def build(vs):
            return ad.sum_all(ad.sigmoid(ad.linear(vs[0], vs[1], vs[2])))

        check_grads(build, [x, w, b])

    def test_relu_sigmoid_chain(self, rng):
        x = rng.standard_normal((4, 6)) + 0.05  # keep away from the relu kink

        def build(vs):
            return ad.mean_all(ad.relu(ad.sigmoid(vs[0])))

        check_grads(build, [x])

    def test_softmax_ce(self, rng):
        logits = rng.standard_normal((6, 4))
        targets = rng.integers(0, 4, size=6)

        def build(vs):
            return ad.mean_all(ad.softmax_ce(vs[0], targets))

        check_grads(build, [logits])

    def test_bce_logits(self, rng):
        logits = rng.standard_normal((5, 3))
        labels = rng.integers(0, 2, size=(5, 3)).astype(float)

        def build(vs):
            return ad.sum_all(ad.bce_logits(vs[0], labels))

        check_grads(build, [logits])

    def test_l1_away_from_ties(self, rng):
        pred = rng.standard_normal((4, 4))
        target = pred + np.where(rng.standard_normal((4, 4)) > 0, 0.5, -0.5)

        def build(vs):
            return ad.sum_all(ad.l1(vs[0], target))

        check_grads(build, [pred])

    def test_pool_concat_gather_transpose(self, rng):
        x = rng.standard_normal((2, 3, 4, 4))
        y = rng.standard_normal((2, 3, 4, 4))

        def build(vs):
            a = ad.avg_pool2d(vs[0], 2)
            b = ad.global_avg_pool(vs[1])
            flat = ad.reshape(ad.transpose(a, (0, 2, 3, 1)), (8, 3))
            rows = ad.gather_rows(flat, np.array([0, 3, 3, 5]))
            joined = ad.concat([rows, ad.gather_rows(b, np.array([0, 1, 1, 0]))], axis=1)
            return ad.mean_all(ad.mul(joined, joined))

        check_grads(build, [x, y])

    def test_mul_add_broadcast(self, rng):
        a = rng.standard_normal((3, 4))
        b = rng.standard_normal((1, 4))

        def build(vs):
            return ad.sum_all(ad.mul(ad.add(vs[0], vs[1]), vs[0]))

        check_grads(build, [a, b])


class TestGRL:
    def test_forward_is_bit_identical(self, rng):
        x = Variable(rng.standard_normal((3, 5)))
        out = ad.grl(x, 4.0)
        assert out.value is x.value

    def test_negative_lambda_scaling_dual_graph(self, rng):
        v = rng.standard_normal((4, 4))
        w = rng.standard_normal((4, 2))

        def run(with_grl: bool, lam: float):
            x = Variable(v, requires_grad=True)
            with Tape() as tape:
                h = ad.grl(x, lam) if with_grl else x
                loss = ad.mean_all(ad.sigmoid(ad.linear(h, Variable(w))))
            ad.backward(tape, loss)
            return x.grad

        for lam in (1.0, 2.5, 4.0):
            plain = run(False, lam)
            flipped = run(True, lam)
            assert np.array_equal(flipped, -lam * plain)

    def test_factor_four_ratio_on_linear_probe(self, rng):
        v = rng.standard_normal((6,))
        w = rng.standard_normal((6,))

        def grad_mag(with_grl: bool):
            x = Variable(v, requires_grad=True)
            with Tape() as tape:
                h = ad.grl(ad.reshape(x, (1, 6)), 4.0) if with_grl else ad.reshape(x, (1, 6))
                loss = ad.sum_all(ad.linear(h, Variable(w.reshape(6, 1))))
            ad.backward(tape, loss)
            return x.grad

        ratio = np.abs(grad_mag(True)) / np.abs(grad_mag(False))
        assert np.max(np.abs(ratio - 4.0)) <= 1e-12

    def test_rejects_nonpositive_lambda(self):
        with pytest.raises(ValueError):
            ad.grl(Variable(np.zeros(3)), 0.0)


class TestOptimizer:
    def test_single_step_quadratic(self):
        params = Params()
        p = params.add("p", np.array([3.0]))
        opt = SGD(params, lr=0.1, momentum=0.0)
        with Tape() as tape:
            loss = ad.sum_all(ad.mul(p, p))
        ad.backward(tape, loss)
        opt.step()
        assert p.value[0] == pytest.approx(3.0 - 0.1 * 6.0, abs=1e-12)

    def test_momentum_velocity_recurrence(self):
        params = Params()
        p = params.add("p", np.array([0.0]))
        opt = SGD(params, lr=0.1, momentum=0.9)
        for expected_v in (-0.1, -0.19):
            opt.zero_grad()
            p.grad = np.array([1.0])  # constant gradient
            opt.step()
            assert opt.velocity["p"][0] == pytest.approx(expected_v, abs=1e-12)


class TestTapeDiscipline:
    def test_non_scalar_loss_rejected(self, rng):
        x = Variable(rng.standard_normal((3,)), requires_grad=True)
        with Tape() as tape:
            y = ad.relu(x)
        with pytest.raises(TapeError, match="scalar"):
            ad.backward(tape, y)

    def test_double_backward_rejected(self):
        x = Variable(np.array([2.0]), requires_grad=True)
        with Tape() as tape:
            loss = ad.sum_all(ad.mul(x, x))
        ad.backward(tape, loss)
        with pytest.raises(TapeError, match="consumed"):
            ad.backward(tape, loss)

    def test_no_tape_means_no_gradients(self, rng):
        x = Variable(rng.standard_normal((3, 3)), requires_grad=True)
        out = ad.relu(ad.mul(x, x))
        assert out.requires_grad is False
        assert x.grad is None

    def test_nan_detection(self):
        x = Variable(np.array([1e308]))
        with pytest.raises(NumericError):
            ad.mul(x, x)  # overflows to inf

    def test_shape_mismatch_names_op(self, rng):
        with pytest.raises(ShapeMismatchError, match="linear"):
            ad.linear(Variable(rng.standard_normal((2, 3))), Variable(rng.standard_normal((4, 2))))
        with pytest.raises(ShapeMismatchError, match="conv2d"):
            ad.conv2d(Variable(rng.standard_normal((1, 3, 8, 8))), Variable(rng.standard_normal((4, 2, 3, 3))))


class TestParamsAndCheckpoints:
    def test_duplicate_name_rejected(self):
        params = Params()
        params.add("a", np.zeros(2))
        with pytest.raises(ValueError):
            params.add("a", np.zeros(2))

    def test_deterministic_order(self):
        params = Params()
        for name in ("conv1", "conv2", "bias"):
            params.add(name, np.zeros(1))
        assert params.names() == ["conv1", "conv2", "bias"]

    def test_checkpoint_round_trip(self, tmp_path, rng):
        params = Params()
        params.add("enc.w", rng.standard_normal((4, 3, 3, 3)))
        params.add("enc.b", rng.standard_normal(4))
        params.add("scalar", np.array(2.5))
        path = tmp_path / "model.ckpt"
        ad.save_params(path, params)
        state = ad.load_params(path)
        assert set(state) == {"enc.w", "enc.b", "scalar"}
        for name, var in params.items():
            assert np.array_equal(state[name], var.value)

    def test_load_state_validates_shapes(self, rng):
        params = Params()
        params.add("w", np.zeros((2, 2)))
        with pytest.raises(ShapeMismatchError):
            params.load_state({"w": np.zeros((3, 3))})
        with pytest.raises(KeyError):
            params.load_state({"other": np.zeros((2, 2))})

    def test_bad_magic_rejected(self, tmp_path):
        path = tmp_path / "junk.ckpt"
        path.write_bytes(b"not a checkpoint")
        with pytest.raises(ValueError, match="magic"):
            ad.load_params(path)
