"""Tests for the network, its exact input derivatives and the optimizers."""

import numpy as np
import pytest
import torch

from gpinn.config import OptimizerConfig
from gpinn.core.errors import NonFiniteLossError
from gpinn.nn import Checkpoint, Network, evaluate, init_network, loss_gradient, optimize


def _random_net(seed: int, sizes=(3, 8, 8, 2)) -> Network:
    net = Network(sizes, seed=seed)
    rng = np.random.default_rng(seed)
    net.load_parameter_vector(0.7 * rng.standard_normal(net.n_parameters))
    return net


def _value(net, x):
    with torch.no_grad():
        return net(torch.as_tensor(x).reshape(1, -1))[0].numpy()


def _jacobian(net, x):
    return evaluate(net, x.reshape(1, -1), order=1).jacobian[0].detach().numpy()


# ==========================================================================
# Network
# ==========================================================================


class TestNetwork:

    def test_parameter_count(self):
        net = Network([2, 16, 16, 1])
        assert net.n_parameters == 337
        assert net.parameter_vector().numel() == 337
        assert (net.input_dim, net.output_dim) == (2, 1)

    def test_layout_is_contiguous(self):
        net = Network([3, 5, 2])
        slots = net.layout()
        offsets = [s.offset for s in slots]
        sizes = [s.size for s in slots]
        assert offsets == list(np.cumsum([0] + sizes[:-1]))
        assert sum(sizes) == net.n_parameters

    def test_invalid_architectures(self):
        with pytest.raises(ValueError):
            Network([2, 1])
        with pytest.raises(ValueError):
            Network([2, 0, 1])
        with pytest.raises(ValueError):
            Network([2, 4, 1], activation="relu")

    def test_seeded_initialization(self):
        a = init_network([2, 8, 1], seed=5).parameter_vector()
        b = init_network([2, 8, 1], seed=5).parameter_vector()
        c = init_network([2, 8, 1], seed=6).parameter_vector()
        assert torch.equal(a, b)
        assert not torch.equal(a, c)

    def test_biases_start_at_zero(self):
        net = Network([2, 8, 1])
        for layer in net.layers:
            assert torch.count_nonzero(layer.bias) == 0

    def test_float64(self):
        assert all(p.dtype == torch.float64 for p in Network([2, 4, 1]).parameters())

    def test_checkpoint_round_trip(self, tmp_path):
        net = _random_net(1)
        path = net.save(tmp_path / "ckpt.json")
        loaded = Network.load(path)
        x = torch.rand(10, 3, dtype=torch.float64)
        assert torch.equal(net(x), loaded(x))
        doc = Checkpoint.model_validate_json(path.read_text())
        assert doc.layer_sizes == [3, 8, 8, 2]

    def test_load_wrong_length(self):
        with pytest.raises(ValueError):
            Network([2, 4, 1]).load_parameter_vector(np.zeros(3))


# ==========================================================================
# Exact derivatives
# ==========================================================================


class TestDerivatives:

    def test_shapes(self):
        bundle = evaluate(_random_net(0), np.random.default_rng(0).random((5, 3)))
        assert bundle.value.shape == (5, 2)
        assert bundle.jacobian.shape == (5, 2, 3)
        assert bundle.hessian.shape == (5, 2, 3, 3)
        assert torch.allclose(bundle.hessian, bundle.hessian.transpose(-1, -2))

    def test_order_zero_has_no_derivatives(self):
        bundle = evaluate(_random_net(0), np.zeros((2, 3)), order=0)
        assert bundle.jacobian is None and bundle.hessian is None
        with pytest.raises(ValueError):
            bundle.laplacian()

    def test_invalid_inputs(self):
        net = _random_net(0)
        with pytest.raises(ValueError):
            evaluate(net, np.zeros((2, 3)), order=3)
        with pytest.raises(ValueError):
            evaluate(net, np.zeros((2, 2)))

    def test_derivatives_match_finite_differences(self):
        step = 1e-4
        rng = np.random.default_rng(123)
        for seed in range(100):
            net = _random_net(seed)
            x = rng.uniform(-1.0, 1.0, 3)
            bundle = evaluate(net, x)
            jac = bundle.jacobian[0].detach().numpy()
            hess = bundle.hessian[0].detach().numpy()
            fd_jac = np.empty_like(jac)
            fd_hess = np.empty_like(hess)
            for j in range(3):
                e = np.zeros(3)
                e[j] = step
                fd_jac[:, j] = (_value(net, x + e) - _value(net, x - e)) / (2 * step)
                fd_hess[:, :, j] = (_jacobian(net, x + e) - _jacobian(net, x - e)) / (2 * step)
            np.testing.assert_allclose(jac, fd_jac, rtol=1e-5, atol=1e-7)
            np.testing.assert_allclose(hess, fd_hess, rtol=1e-5, atol=1e-7)

    def test_finite_difference_error_is_second_order(self):
        net = _random_net(4)
        x = np.array([0.2, -0.4, 0.3])
        exact = _jacobian(net, x)[:, 0]
        e = np.array([1.0, 0.0, 0.0])

        def error(h):
            fd = (_value(net, x + h * e) - _value(net, x - h * e)) / (2 * h)
            return np.abs(fd - exact).max()

        ratio = error(1e-2) / error(5e-3)
        assert ratio == pytest.approx(4.0, rel=0.1)

    def test_parameter_gradient_of_laplacian_loss(self):
        net = _random_net(9, sizes=(2, 6, 6, 1))
        points = np.random.default_rng(2).uniform(0, 1, (16, 2))

        def loss(n):
            bundle = evaluate(n, points)
            return (bundle.laplacian() ** 2).mean() + (bundle.value**2).mean()

        grad = loss_gradient(net, loss).numpy()
        theta = net.parameter_vector().numpy()
        step = 1e-5
        for k in np.random.default_rng(3).choice(len(theta), size=12, replace=False):
            plus, minus = theta.copy(), theta.copy()
            plus[k] += step
            minus[k] -= step
            net.load_parameter_vector(plus)
            lp = float(loss(net))
            net.load_parameter_vector(minus)
            lm = float(loss(net))
            net.load_parameter_vector(theta)
            assert grad[k] == pytest.approx((lp - lm) / (2 * step), rel=1e-5, abs=1e-8)


# ==========================================================================
# Optimizers
# ==========================================================================


class TestOptimize:

    @pytest.fixture
    def regression(self):
        x = torch.linspace(-1, 1, 32, dtype=torch.float64).reshape(-1, 1)
        y = torch.sin(2 * x)

        def make_loss(net):
            return lambda iteration: ((net(x) - y) ** 2).mean()

        return make_loss

    def test_adam_reduces_loss(self, regression):
        net = Network([1, 16, 1], seed=0)
        config = OptimizerConfig(adam_iterations=300, lbfgs_iterations=0, learning_rate=1e-2)
        result = optimize(net, regression(net), config, "adam")
        assert result.iterations == 300
        assert result.final_loss < 0.1 * result.history[0]["total"]
        assert result.stopped_reason == "budget"
        assert result.states[0].method == "adam"
        assert result.states[0].step == 300

    def test_lbfgs_history_is_monotone(self, regression):
        net = Network([1, 16, 1], seed=0)
        config = OptimizerConfig(adam_iterations=0, lbfgs_iterations=40)
        result = optimize(net, regression(net), config)
        totals = [row["total"] for row in result.history]
        assert all(b <= a + 1e-14 for a, b in zip(totals, totals[1:]))
        assert {row["optimizer"] for row in result.history} == {"lbfgs"}

    def test_adam_then_lbfgs(self, regression):
        net = Network([1, 8, 1], seed=1)
        config = OptimizerConfig(adam_iterations=20, lbfgs_iterations=5)
        result = optimize(net, regression(net), config)
        assert [row["iteration"] for row in result.history] == list(range(25))
        assert [s.method for s in result.states] == ["adam", "lbfgs"]

    def test_convergence_tolerance_stops_early(self, regression):
        net = Network([1, 8, 1], seed=1)
        config = OptimizerConfig(
            adam_iterations=5000, lbfgs_iterations=0, learning_rate=1e-2, tol=1e-3, patience=10
        )
        result = optimize(net, regression(net), config)
        assert result.stopped_reason == "converged"
        assert result.iterations < 5000

    def test_non_finite_loss(self):
        net = Network([1, 4, 1], seed=0)
        config = OptimizerConfig(adam_iterations=5, lbfgs_iterations=0)
        with pytest.raises(NonFiniteLossError) as excinfo:
            optimize(net, lambda it: net(torch.zeros(1, 1)).sum() * float("nan"), config)
        assert excinfo.value.iteration == 0
