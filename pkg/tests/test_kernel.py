"""
Tests for the differentiation kernel

Tests cover:
- Finite-difference gradient checks for every primitive
- A composed three-layer network and a dense-Jacobian check
- Analytic forward values of single primitives
- Tape semantics (no_grad, seeded backward, error cases)
- Adam
- The checkpoint container
"""

import numpy as np
import pytest

from ocrprep.errors import CheckpointError, GradientError, ShapeError
from ocrprep.kernel import (
    Adam,
    Tape,
    Tensor,
    backward,
    check_gradients,
    decode_checkpoint,
    encode_checkpoint,
    load_checkpoint,
    no_grad,
    ops,
    save_checkpoint,
)

TRIALS = 100


def weighted(out, rng):
    """Scalar readout: sum of out times fixed random weights"""
    w = Tensor(rng.normal(size=out.shape), dtype=np.float64)
    return ops.sum(ops.mul(out, w))


def away_from_zero(rng, shape, margin=0.05):
    values = rng.uniform(margin, 1.0, size=shape)
    return values * rng.choice([-1.0, 1.0], size=shape)


def assert_gradcheck(fn, arrays):
    result = check_gradients(fn, arrays)
    assert result.passed, f"max relative error {result.max_rel_error} at input {result.worst_input}{result.worst_index}"


class TestElementwiseGradients:
    """Gradient checks for elementwise and broadcasting primitives"""

    @pytest.mark.parametrize("op", [ops.add, ops.sub, ops.mul])
    def test_binary_broadcast(self, op):
        """add/sub/mul with a broadcast second operand"""
        rng = np.random.default_rng(0)
        for _ in range(TRIALS):
            a, b = rng.normal(size=(3, 4)), rng.normal(size=(1, 4))
            assert_gradcheck(lambda x, y: weighted(op(x, y), np.random.default_rng(7)), [a, b])

    @pytest.mark.parametrize("op", [ops.sigmoid, ops.tanh])
    def test_smooth_activations(self, op):
        """sigmoid and tanh"""
        rng = np.random.default_rng(1)
        for _ in range(TRIALS):
            x = rng.normal(scale=2.0, size=(2, 5))
            assert_gradcheck(lambda t: weighted(op(t), np.random.default_rng(3)), [x])

    def test_relu(self):
        """relu away from its kink"""
        rng = np.random.default_rng(2)
        for _ in range(TRIALS):
            x = away_from_zero(rng, (2, 5))
            assert_gradcheck(lambda t: weighted(ops.relu(t), np.random.default_rng(3)), [x])

    def test_log_softmax(self):
        """log_softmax along the last axis"""
        rng = np.random.default_rng(3)
        for _ in range(TRIALS):
            x = rng.normal(size=(3, 4))
            assert_gradcheck(lambda t: weighted(ops.log_softmax(t, axis=-1), np.random.default_rng(5)), [x])

    def test_mse(self):
        """mean squared error against a second input"""
        rng = np.random.default_rng(4)
        for _ in range(TRIALS):
            a, b = rng.normal(size=(2, 3)), rng.normal(size=(2, 3))
            assert_gradcheck(lambda x, y: ops.mse(x, y), [a, b])

    def test_sum_and_mean(self):
        """sum and mean reductions"""
        rng = np.random.default_rng(5)
        for _ in range(TRIALS):
            x = rng.normal(size=(2, 3))
            assert_gradcheck(lambda t: ops.add(ops.sum(ops.mul(t, t)), ops.mean(t)), [x])


class TestStructuralGradients:
    """Gradient checks for matmul, convolution and shape primitives"""

    def test_matmul(self):
        """matrix product"""
        rng = np.random.default_rng(10)
        for _ in range(TRIALS):
            a, b = rng.normal(size=(3, 4)), rng.normal(size=(4, 2))
            assert_gradcheck(lambda x, y: weighted(ops.matmul(x, y), np.random.default_rng(1)), [a, b])

    @pytest.mark.parametrize("stride,padding", [(1, 0), (1, 1), (2, 1)])
    def test_conv2d(self, stride, padding):
        """convolution with bias, stride and padding"""
        rng = np.random.default_rng(11)
        for _ in range(TRIALS):
            x = rng.normal(size=(1, 2, 5, 5))
            w = rng.normal(size=(2, 2, 3, 3))
            b = rng.normal(size=(2,))

            def fn(xt, wt, bt):
                out = ops.conv2d(xt, wt, bt, stride=stride, padding=padding)
                return weighted(out, np.random.default_rng(2))

            assert_gradcheck(fn, [x, w, b])

    def test_upsample_nearest(self):
        """nearest-neighbour upsampling"""
        rng = np.random.default_rng(12)
        for _ in range(TRIALS):
            x = rng.normal(size=(1, 2, 2, 3))
            assert_gradcheck(lambda t: weighted(ops.upsample_nearest(t, 2), np.random.default_rng(4)), [x])

    @pytest.mark.parametrize("training", [True, False])
    def test_batch_norm(self, training):
        """batch normalization in both modes"""
        rng = np.random.default_rng(13)
        for _ in range(TRIALS):
            x = rng.normal(size=(2, 3, 2, 2))
            gamma, beta = rng.normal(size=(3,)), rng.normal(size=(3,))
            running_mean = rng.normal(size=3)
            running_var = rng.uniform(0.5, 2.0, size=3)

            def fn(xt, gt, bt):
                out = ops.batch_norm(xt, gt, bt, running_mean.copy(), running_var.copy(), training)
                return weighted(out, np.random.default_rng(6))

            assert_gradcheck(fn, [x, gamma, beta])

    def test_shape_primitives(self):
        """reshape, transpose, getitem, concat and stack"""
        rng = np.random.default_rng(14)
        for _ in range(TRIALS):
            a, b = rng.normal(size=(2, 3)), rng.normal(size=(2, 3))

            def fn(x, y):
                joined = ops.concat([x, y], axis=1)
                stacked = ops.stack([x, y], axis=0)
                moved = ops.transpose(ops.reshape(joined, (3, 4)), (1, 0))
                return ops.add(weighted(moved[1:, :2], np.random.default_rng(8)), weighted(stacked, np.random.default_rng(9)))

            assert_gradcheck(fn, [a, b])

    def test_gru_cell(self):
        """one recurrent step"""
        rng = np.random.default_rng(15)
        for _ in range(TRIALS):
            x_proj = rng.normal(size=(2, 6))
            h = rng.normal(size=(2, 2))
            w_h = rng.normal(scale=0.5, size=(2, 6))
            b_h = rng.normal(size=(6,))
            assert_gradcheck(
                lambda xp, ht, wt, bt: weighted(ops.gru_cell(xp, ht, wt, bt), np.random.default_rng(10)),
                [x_proj, h, w_h, b_h],
            )


class TestComposedNetwork:
    """Gradient check through three stacked layers"""

    def test_three_layer_network(self):
        """conv + batch norm + tanh, conv + sigmoid, linear + log_softmax"""
        rng = np.random.default_rng(20)
        for _ in range(TRIALS):
            x = rng.normal(size=(2, 1, 4, 4))
            w1 = rng.normal(scale=0.5, size=(2, 1, 3, 3))
            w2 = rng.normal(scale=0.5, size=(2, 2, 3, 3))
            w3 = rng.normal(scale=0.5, size=(8, 3))
            gamma, beta = np.ones(2), np.zeros(2)

            def net(xt, a, b, c):
                h = ops.conv2d(xt, a, padding=1)
                h = ops.tanh(ops.batch_norm(h, Tensor(gamma), Tensor(beta), np.zeros(2), np.ones(2), True))
                h = ops.sigmoid(ops.conv2d(h, b, stride=2, padding=1))
                flat = ops.reshape(h, (2, 8))
                return weighted(ops.log_softmax(ops.matmul(flat, c), axis=-1), np.random.default_rng(11))

            assert_gradcheck(net, [x, w1, w2, w3])


class TestTape:
    """Tape recording and backward semantics"""

    def test_records_only_tracked_ops(self):
        """Primitives on constants are not recorded"""
        x = Tensor(np.ones(3), requires_grad=True)
        c = Tensor(np.ones(3))
        with Tape() as tape:
            ops.mul(c, c)
            ops.mul(x, c)
        assert tape.ops() == ["mul"]

    def test_no_grad_suspends_recording(self):
        """Nothing is recorded under no_grad"""
        x = Tensor(np.ones(3), requires_grad=True)
        with Tape() as tape:
            with no_grad():
                y = ops.mul(x, 2.0)
        assert len(tape) == 0
        assert not y.requires_grad

    def test_non_scalar_loss_needs_seed(self):
        """backward on a vector without a seed is rejected"""
        x = Tensor(np.ones(3), requires_grad=True)
        with Tape() as tape:
            y = ops.mul(x, 2.0)
        with pytest.raises(GradientError):
            backward(tape, y)

    def test_seed_shape_must_match(self):
        """Seed of the wrong shape is rejected"""
        x = Tensor(np.ones(3), requires_grad=True)
        with Tape() as tape:
            y = ops.mul(x, 2.0)
        with pytest.raises(ShapeError):
            backward(tape, y, grad=np.ones(4))

    def test_loss_from_other_tape(self):
        """A loss recorded on another tape is rejected"""
        x = Tensor(np.ones(3), requires_grad=True)
        with Tape():
            y = ops.sum(x)
        with pytest.raises(GradientError):
            backward(Tape(), y)

    def test_seeded_backward_is_linear(self):
        """Seeded backward equals backward of sum(output * seed)"""
        rng = np.random.default_rng(30)
        x_val, seed = rng.normal(size=(2, 3)), rng.normal(size=(2, 3))

        x = Tensor(x_val.copy(), requires_grad=True)
        with Tape() as tape:
            y = ops.tanh(ops.mul(x, x))
        backward(tape, y, grad=seed.astype(np.float32))
        seeded = x.grad.copy()

        x2 = Tensor(x_val.copy(), requires_grad=True)
        with Tape() as tape:
            loss = ops.sum(ops.mul(ops.tanh(ops.mul(x2, x2)), Tensor(seed)))
        backward(tape, loss)
        np.testing.assert_allclose(seeded, x2.grad, rtol=1e-5, atol=1e-6)

    def test_reentered_tape_extends_graph(self):
        """Ops appended by re-entering a tape still reach the leaves"""
        x = Tensor(np.array([2.0]), requires_grad=True)
        with Tape() as tape:
            y = ops.mul(x, x)
        with tape:
            z = ops.mul(y, 3.0)
        backward(tape, z)
        assert x.grad[0] == pytest.approx(12.0)

    def test_gradients_reset_between_calls(self):
        """Leaf gradients hold one backward's derivative, not a running sum"""
        x = Tensor(np.array([1.0, 2.0]), requires_grad=True)
        for _ in range(2):
            with Tape() as tape:
                loss = ops.sum(ops.mul(x, x))
            backward(tape, loss)
        np.testing.assert_allclose(x.grad, [2.0, 4.0])

    def test_listed_params_outside_loss_get_zero(self):
        """A listed parameter that took no part in the loss ends with zero grad"""
        w = Tensor(np.array([2.0]), requires_grad=True)
        v = Tensor(np.array([3.0]), requires_grad=True)
        with Tape() as tape:
            loss = ops.sum(ops.mul(w, w))
        backward(tape, loss, params=[w, v])
        np.testing.assert_allclose(w.grad, [4.0])

        with Tape() as tape:
            loss = ops.sum(ops.mul(v, v))
        backward(tape, loss, params=[w, v])
        np.testing.assert_array_equal(w.grad, [0.0])
        np.testing.assert_allclose(v.grad, [6.0])

    def test_vjps_match_dense_jacobian(self):
        """Seeding with each unit vector reproduces the rows of a finite-difference Jacobian"""
        rng = np.random.default_rng(31)
        h = 1e-6
        for _ in range(20):
            x_val = rng.normal(size=(1, 4))
            w = Tensor(rng.normal(size=(4, 3)), dtype=np.float64)

            def f(x):
                return ops.tanh(ops.matmul(x, w))

            jacobian = np.zeros((3, 4))
            for k in range(4):
                step = np.zeros((1, 4))
                step[0, k] = h
                with no_grad():
                    plus = f(Tensor(x_val + step, dtype=np.float64)).data
                    minus = f(Tensor(x_val - step, dtype=np.float64)).data
                jacobian[:, k] = (plus - minus)[0] / (2.0 * h)

            for j in range(3):
                x = Tensor(x_val.copy(), requires_grad=True, dtype=np.float64)
                with Tape() as tape:
                    y = f(x)
                seed = np.zeros((1, 3))
                seed[0, j] = 1.0
                backward(tape, y, grad=seed)
                np.testing.assert_allclose(x.grad[0], jacobian[j], rtol=1e-5, atol=1e-8)


class TestForwardValues:
    """Analytic values of single primitives"""

    def test_sigmoid_at_zero(self):
        """sigmoid(0) is one half"""
        assert ops.sigmoid(Tensor(np.array([0.0]))).data[0] == pytest.approx(0.5)

    def test_unit_kernel_conv_is_identity(self):
        """A 1x1 convolution with weight 1 returns its input"""
        x = np.random.default_rng(32).uniform(size=(1, 1, 32, 128)).astype(np.float32)
        out = ops.conv2d(Tensor(x), Tensor(np.ones((1, 1, 1, 1), np.float32)))
        np.testing.assert_array_equal(out.data, x)

    def test_log_softmax_of_equal_logits(self):
        """Two equal logits give -ln 2 each"""
        out = ops.log_softmax(Tensor(np.zeros((1, 2))), axis=-1)
        np.testing.assert_allclose(out.data, [[-np.log(2.0)] * 2], rtol=1e-6)

    def test_linear_loss_gradient(self):
        """d(3x)/dx is 3"""
        x = Tensor(np.array([1.5]), requires_grad=True)
        with Tape() as tape:
            loss = ops.sum(ops.mul(x, 3.0))
        backward(tape, loss)
        assert x.grad[0] == pytest.approx(3.0)

    def test_white_distance_gradient_vanishes_at_white(self):
        """mean((1 - g)^2) has zero gradient at g = 1"""
        g = Tensor(np.ones((1, 1, 32, 128)), requires_grad=True)
        with Tape() as tape:
            loss = ops.mse(g, Tensor(np.ones((1, 1, 32, 128))))
        backward(tape, loss)
        assert loss.item() == 0.0
        np.testing.assert_array_equal(g.grad, 0.0)


class TestAdam:
    """Adam optimizer"""

    def test_first_step_has_lr_magnitude(self):
        """Bias correction makes the first update lr * sign(grad)"""
        p = Tensor(np.array([1.0, -1.0]), requires_grad=True)
        p.grad[...] = [0.3, -2.0]
        Adam.over([p], lr=0.1).step()
        np.testing.assert_allclose(p.data, [0.9, -0.9], atol=1e-6)

    def test_minimizes_quadratic(self):
        """Adam drives a quadratic toward its minimum"""
        p = Tensor(np.array([3.0, -2.0]), requires_grad=True)
        opt = Adam.over([p], lr=0.1)
        for _ in range(300):
            with Tape() as tape:
                loss = ops.sum(ops.mul(p, p))
            backward(tape, loss)
            opt.step()
        assert np.abs(p.data).max() < 0.05

    def test_frozen_parameters_skipped(self):
        """Parameters with requires_grad off are not updated"""
        p = Tensor(np.array([1.0]), requires_grad=True)
        p.grad[...] = 1.0
        p.requires_grad = False
        Adam.over([p], lr=0.1).step()
        assert p.data[0] == 1.0

    def test_zero_gradient_leaves_parameters(self):
        """A zero gradient at the first step changes nothing"""
        p = Tensor(np.array([1.0, -2.0, 0.5]), requires_grad=True)
        before = p.data.copy()
        Adam.over([p], lr=0.1).step()
        np.testing.assert_array_equal(p.data, before)

    def test_constant_gradient_updates_do_not_grow(self):
        """With a constant gradient the second update is no larger than the first"""
        p = Tensor(np.array([1.0, -1.0, 2.0]), requires_grad=True, dtype=np.float64)
        opt = Adam.over([p], lr=0.01)
        updates = []
        for _ in range(2):
            p.grad[...] = [0.3, -1.2, 5.0]
            before = p.data.copy()
            opt.step()
            updates.append(np.abs(p.data - before))
        assert np.all(updates[1] <= updates[0] + 1e-12)


class TestCheckpoint:
    """Binary weight container"""

    def test_reencode_is_byte_identical(self):
        """decode then encode reproduces the bytes"""
        rng = np.random.default_rng(40)
        state = {"enc1.weight": rng.normal(size=(2, 1, 3, 3)).astype(np.float32), "head.bias": np.zeros(1, np.float32)}
        blob = encode_checkpoint(state, {"kind": "preprocessor", "widths": [2]})
        decoded, config = decode_checkpoint(blob)
        assert encode_checkpoint(decoded, config) == blob
        np.testing.assert_array_equal(decoded["enc1.weight"], state["enc1.weight"])

    def test_save_returns_digest(self, tmp_path):
        """save_checkpoint returns the sha256 of the file"""
        import hashlib

        path = tmp_path / "w.ckpt"
        digest = save_checkpoint(path, {"a": np.ones(2, np.float32)}, {"kind": "x"})
        assert digest == hashlib.sha256(path.read_bytes()).hexdigest()
        state, config = load_checkpoint(path)
        assert config == {"kind": "x"}

    def test_bad_magic(self):
        """Wrong magic is rejected"""
        with pytest.raises(CheckpointError):
            decode_checkpoint(b"NOTACKPT" + bytes(16))

    def test_truncated_and_trailing(self):
        """Truncated files and trailing bytes are rejected"""
        blob = encode_checkpoint({"a": np.ones(3, np.float32)}, {})
        with pytest.raises(CheckpointError):
            decode_checkpoint(blob[:-2])
        with pytest.raises(CheckpointError):
            decode_checkpoint(blob + b"\x00")

    def test_missing_file(self, tmp_path):
        """Loading a missing file is a CheckpointError"""
        with pytest.raises(CheckpointError):
            load_checkpoint(tmp_path / "absent.ckpt")

    def test_invalid_record_name(self):
        """A record name that is not UTF-8 is a CheckpointError"""
        blob = encode_checkpoint({"zz_weight": np.ones(2, np.float32)}, {})
        with pytest.raises(CheckpointError, match="record name"):
            decode_checkpoint(blob.replace(b"zz_weight", b"\xff\xfe_weight", 1))
