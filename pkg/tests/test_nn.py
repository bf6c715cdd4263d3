"""
Unit tests for the tensors, operations and optimizer of tweetrank/nn/...
"""

import numpy as np
import unittest as ut

from tweetrank.errors import (
    ConfigError,
    DegenerateDocumentError,
    DimensionError,
    GraphError,
    NumericError,
    OptimizerError,
)
from tweetrank.nn import functional as F
from tweetrank.nn.base_layers import get_activation
from tweetrank.nn.gradcheck import gradcheck
from tweetrank.nn.optim import SgdConfig, sgd_step
from tweetrank.nn.tensor import Tape, Tensor

GRAD_TOL = 1e-4


def _param(data, name="p"):
    return Tensor(data, requires_grad=True, name=name)


def _conv_oracle(x, filters, bias):
    num_filters, k, c_in = filters.shape
    n = x.shape[0]
    left = (k - 1) // 2
    out = np.zeros((n, num_filters))
    for i in range(n):
        for f in range(num_filters):
            value = bias[f]
            for j in range(k):
                row = i - left + j
                if 0 <= row < n:
                    for c in range(c_in):
                        value += x[row, c] * filters[f, j, c]
            out[i, f] = value
    return out


class test_Tape(ut.TestCase):
    def test_sum_gradient(self):
        w = _param(np.ones(3), "w")
        with Tape() as tape:
            loss = F.sum_all(w)
            tape.backward(loss)
        np.testing.assert_array_equal(w.grad, np.ones(3))

    def test_relu(self):
        w = _param([-1.0, 2.0], "w")
        with Tape() as tape:
            out = F.relu(w)
            tape.backward(F.sum_all(out))
        np.testing.assert_array_equal(out.data, [0.0, 2.0])
        np.testing.assert_array_equal(w.grad, [0.0, 1.0])

    def test_no_recording_without_grad(self):
        w = Tensor(np.ones(3))
        with Tape() as tape:
            F.sum_all(F.relu(w))
        self.assertEqual(len(tape), 0)

    def test_graph_errors(self):
        w = _param(np.ones(3), "w")
        with Tape() as tape:
            with self.assertRaises(GraphError):
                tape.backward(Tensor(1.0))
            with self.assertRaises(GraphError):
                tape.backward(F.relu(w))

    def test_non_finite_forward(self):
        with self.assertRaises(NumericError):
            F.relu(Tensor([1.0, np.inf]))
        with self.assertRaises(NumericError):
            F.scale(Tensor([1.0]), np.nan)


class test_Conv1dSame(ut.TestCase):
    def setUp(self):
        self.rng = np.random.default_rng(42)

    def test_zero_filters(self):
        x = Tensor(self.rng.normal(size=(5, 3)))
        out = F.conv1d_same(x, Tensor(np.zeros((2, 3, 3))), Tensor(np.zeros(2)))
        np.testing.assert_array_equal(out.data, np.zeros((5, 2)))

    def test_identity_kernel(self):
        x = Tensor(self.rng.normal(size=(4, 3)))
        filters = np.eye(3).reshape(3, 1, 3)
        out = F.conv1d_same(x, Tensor(filters), Tensor(np.zeros(3)))
        np.testing.assert_allclose(out.data, x.data, atol=1e-15)

    def test_against_loops(self):
        for k in [1, 2, 3, 4]:
            x = self.rng.normal(size=(6, 3))
            filters = self.rng.normal(size=(2, k, 3))
            bias = self.rng.normal(size=2)
            out = F.conv1d_same(Tensor(x), Tensor(filters), Tensor(bias))
            self.assertEqual(out.shape, (6, 2), msg=f"k={k}")
            np.testing.assert_allclose(out.data, _conv_oracle(x, filters, bias), atol=1e-12)

    def test_batched(self):
        x = self.rng.normal(size=(3, 5, 2))
        filters = self.rng.normal(size=(4, 2, 2))
        bias = self.rng.normal(size=4)
        out = F.conv1d_same(Tensor(x), Tensor(filters), Tensor(bias))
        for b in range(3):
            np.testing.assert_allclose(out.data[b], _conv_oracle(x[b], filters, bias), atol=1e-12)

    def test_dimension_error(self):
        x = Tensor(np.ones((4, 3)))
        with self.assertRaises(DimensionError):
            F.conv1d_same(x, Tensor(np.ones((2, 2, 5))), Tensor(np.zeros(2)))
        with self.assertRaises(DimensionError):
            F.conv1d_same(x, Tensor(np.ones((2, 2, 3))), Tensor(np.zeros(3)))


class test_SoftmaxAndPooling(ut.TestCase):
    def test_uniform_softmax(self):
        out = F.softmax_rows_masked(Tensor([[0.0, 0.0, 0.0]]), np.ones(3))
        np.testing.assert_allclose(out.data, [[1 / 3, 1 / 3, 1 / 3]])

    def test_masked_softmax(self):
        out = F.softmax_rows_masked(Tensor([[1.0, 1.0]]), np.array([1.0, 0.0]))
        np.testing.assert_array_equal(out.data, [[1.0, 0.0]])

    def test_softmax_formula(self):
        values = np.array([1.0, 2.0, 3.0])
        out = F.softmax_rows_masked(Tensor([values]), np.ones(3))
        np.testing.assert_allclose(out.data[0], np.exp(values) / np.exp(values).sum(), rtol=1e-12)

    def test_pooling(self):
        x = Tensor([[0.2, 0.8]])
        np.testing.assert_allclose(F.pool_rows(x, np.ones(2), "max").data, [0.8])
        np.testing.assert_allclose(F.pool_rows(x, np.ones(2), "mean").data, [0.5])
        masked = np.array([1.0, 0.0])
        np.testing.assert_allclose(F.pool_rows(x, masked, "max").data, [0.2])
        np.testing.assert_allclose(F.pool_rows(x, masked, "mean").data, [0.2])

    def test_mean_of_normalized_rows(self):
        rng = np.random.default_rng(0)
        mask = np.array([1.0, 1.0, 1.0, 0.0, 0.0])
        sim = F.softmax_rows_masked(Tensor(rng.normal(size=(4, 5))), mask)
        np.testing.assert_allclose(F.pool_rows(sim, mask, "mean").data, np.full(4, 1 / 3), rtol=1e-12)

    def test_degenerate_mask(self):
        with self.assertRaises(DegenerateDocumentError):
            F.softmax_rows_masked(Tensor(np.ones((2, 3))), np.zeros(3))
        with self.assertRaises(DegenerateDocumentError):
            F.pool_rows(Tensor(np.ones((2, 3))), np.zeros(3), "max")

    def test_unknown_pool(self):
        with self.assertRaises(ValueError):
            F.pool_rows(Tensor(np.ones((2, 3))), np.ones(3), "min")


class test_OperationGradients(ut.TestCase):
    def setUp(self):
        self.rng = np.random.default_rng(7)

    def _check(self, build, params):
        weights = self.rng.normal(size=build().shape)
        errors = gradcheck(lambda: F.sum_all(F.scale(build(), weights)), params)
        for name, err in errors.items():
            self.assertLess(err, GRAD_TOL, msg=name)

    def test_conv1d_same(self):
        x = _param(self.rng.normal(size=(2, 5, 3)), "x")
        filters = _param(self.rng.normal(size=(4, 3, 3)), "filters")
        bias = _param(self.rng.normal(size=4), "bias")
        self._check(lambda: F.conv1d_same(x, filters, bias), {"x": x, "filters": filters, "bias": bias})

    def test_matmul_softmax_pool(self):
        mask = np.array([1.0, 1.0, 1.0, 0.0])
        a = _param(self.rng.normal(size=(3, 2)), "a")
        b = _param(self.rng.normal(size=(4, 2)), "b")
        for kind in ["max", "mean"]:
            build = lambda: F.pool_rows(F.softmax_rows_masked(F.matmul_nt(a, b), mask), mask, kind)
            self._check(build, {"a": a, "b": b})

    def test_linear_and_relu(self):
        x = _param(self.rng.normal(size=(3, 4)), "x")
        weight = _param(self.rng.normal(size=(4, 2)), "weight")
        bias = _param(self.rng.normal(size=2), "bias")
        self._check(lambda: F.relu(F.linear(x, weight, bias)), {"x": x, "weight": weight, "bias": bias})

    def test_embedding_skips_padding(self):
        table = _param(self.rng.normal(size=(5, 3)), "table")
        ids = np.array([[2, 0, 4], [1, 2, 0]])
        self._check(lambda: F.mask_rows(F.embedding(table, ids), ids != 0), {"table": table})
        with Tape() as tape:
            tape.backward(F.sum_all(F.embedding(table, ids)))
        np.testing.assert_array_equal(table.grad[0], np.zeros(3))
        np.testing.assert_array_equal(table.grad[2], np.full(3, 2.0))

    def test_nll_loss(self):
        logits = _param(self.rng.normal(size=(4, 2)), "logits")
        labels = np.array([0, 1, 1, 0])
        errors = gradcheck(lambda: F.nll_loss(logits, labels), {"logits": logits})
        self.assertLess(errors["logits"], GRAD_TOL)


class test_Sgd(ut.TestCase):
    def test_single_step(self):
        p = _param([1.0])
        p.grad = np.array([2.0])
        sgd_step({"p": p}, SgdConfig(learning_rate=0.05))
        np.testing.assert_allclose(p.data, [0.9])
        np.testing.assert_array_equal(p.grad, [0.0])

    def test_zero_gradient(self):
        p = _param([1.5, -2.0])
        p.zero_grad()
        sgd_step({"p": p}, SgdConfig(learning_rate=0.5))
        np.testing.assert_array_equal(p.data, [1.5, -2.0])

    def test_two_steps_on_square(self):
        p = _param([[1.0]])
        config = SgdConfig(learning_rate=0.1)
        for _ in range(2):
            with Tape() as tape:
                tape.backward(F.sum_all(F.matmul_nt(p, p)))
            sgd_step({"p": p}, config)
        np.testing.assert_allclose(p.data, [[0.64]], rtol=1e-12)

    def test_missing_gradient(self):
        with self.assertRaises(OptimizerError) as ctx:
            sgd_step({"conv.0.weight": _param([1.0], "conv.0.weight")}, SgdConfig())
        self.assertEqual(ctx.exception.param_name, "conv.0.weight")
        self.assertIn("conv.0.weight", str(ctx.exception))

    def test_invalid_config(self):
        with self.assertRaises(ConfigError):
            SgdConfig(learning_rate=0.0)
        with self.assertRaises(ConfigError):
            SgdConfig(seed=-1)


class test_Activation(ut.TestCase):
    def test_get_activation(self):
        self.assertIsNone(get_activation(None))
        self.assertIsNone(get_activation("None"))
        self.assertIs(get_activation("ReLU"), F.relu)
        self.assertIs(get_activation(F.relu), F.relu)
        with self.assertRaises(AssertionError):
            get_activation("tanh")


if __name__ == "__main__":
    ut.main()
