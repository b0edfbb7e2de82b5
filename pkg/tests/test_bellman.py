"""
Unit tests for greedy action selection and distributional Bellman targets
"""
import numpy as np
import pytest
from scipy.integrate import trapezoid
from scipy.stats import norm

from distributional.bellman import (
    OperatorInput,
    bellman_targets,
    greedy_action,
    next_action,
    operator_target,
    terminal_target,
)
from distributional.views import Representation
from engine.tensor import no_grad
from utils.errors import DegenerateDiscountError, DimensionError


def conditioned(model, action=0):
    return model.condition(np.zeros((1, 2)), [action])


class TestGreedyAction:
    """Test suite for greedy selection"""

    def test_argmax(self):
        """Test (0.1, 0.5, 0.2, 0.3) picks action 1"""
        assert greedy_action([0.1, 0.5, 0.2, 0.3])[0] == 1

    def test_all_equal(self):
        """Test a full tie resolves to action 0"""
        assert greedy_action([0.4, 0.4, 0.4, 0.4])[0] == 0

    def test_near_tie(self):
        """Test values within 1e-12 of the max count as ties"""
        assert greedy_action([[0.0, 0.7, 0.7 + 5e-13]])[0] == 1
        assert greedy_action([[0.0, 0.7, 0.7 + 1e-9]])[0] == 2

    def test_rows(self):
        """Test selection runs row by row"""
        assert list(greedy_action([[1.0, 0.0], [0.0, 1.0], [2.0, 2.0]])) == [0, 1, 0]

    def test_next_action_on_frozen_views(self, frozen_model, make_view):
        """Test a state-independent model ties every action and picks 0"""
        view = make_view(frozen_model(1.0, 0.3), "qf")
        assert list(next_action(view, np.zeros((3, 2)), 16, np.random.default_rng(0))) == [0, 0, 0]


class TestOperatorTarget:
    """Test suite for the operator applied to non-terminal transitions"""

    def test_quantile_target(self, frozen_model, make_view):
        """Test QF, r = 1, gamma = 0.5, target QF = 2 gives 2"""
        view = make_view(frozen_model(2e-6, 2.0), "qf")
        y = operator_target(OperatorInput(view, [1.0], np.zeros((1, 2)), [0], [[0.1, 0.5, 0.9]], 0.5))
        assert np.allclose(y, 2.0, atol=1e-6)

    def test_density_target(self, small_model, make_view, rng):
        """Test PDF, r = 0, gamma = 0.5 gives 2 p(2z)"""
        view = make_view(small_model, "pdf")
        z = rng.uniform(-2, 2, size=(1, 7))
        y = operator_target(OperatorInput(view, [0.0], np.ones((1, 2)), [2], z, 0.5))
        with no_grad():
            expected = 2.0 * small_model.pdf(2.0 * z, small_model.condition(np.ones((1, 2)), [2])).data
        assert np.allclose(y, expected)

    def test_cdf_target(self, small_model, make_view):
        """Test CDF, r = 0.2, gamma = 0.5, z = 0.7 gives F(1.0)"""
        view = make_view(small_model, "cdf")
        y = operator_target(OperatorInput(view, [0.2], np.zeros((1, 2)), [1], [[0.7]], 0.5))
        with no_grad():
            expected = small_model.cdf(np.array([[1.0]]), conditioned(small_model, 1)).data
        assert y[0, 0] == pytest.approx(expected[0, 0], abs=1e-12)

    def test_density_target_mass(self, small_model, make_view):
        """Test the PDF target integrates to about 1 over the window covering the next-state CDF mass"""
        view = make_view(small_model, "pdf")
        c = conditioned(small_model, 1)
        coverage = 1e-4
        logits = np.log([[coverage / (1.0 - coverage), (1.0 - coverage) / coverage]])
        u_lo, u_hi = small_model.invert(logits, c)[0]
        r, gamma = 0.3, 0.9
        z = np.linspace(r + gamma * u_lo, r + gamma * u_hi, 20001)
        y = operator_target(OperatorInput(view, [r], np.zeros((1, 2)), [1], z[None, :], gamma))
        assert trapezoid(y[0], z) == pytest.approx(1.0, abs=1e-2)

    def test_cdf_target_nondecreasing(self, small_model, make_view):
        """Test CDF targets never decrease in z"""
        view = make_view(small_model, "cdf")
        z = np.linspace(-5.0, 5.0, 401)
        y = operator_target(OperatorInput(view, [0.3, -0.7], np.zeros((2, 2)), [0, 2], np.tile(z, (2, 1)), 0.9))
        assert np.all(np.diff(y, axis=1) >= -1e-12)
        assert np.all((y >= 0.0) & (y <= 1.0))

    def test_zero_discount_density(self, small_model, make_view):
        """Test gamma = 0 is degenerate for PDF and CDF views"""
        for representation in ("pdf", "cdf"):
            with pytest.raises(DegenerateDiscountError):
                operator_target(OperatorInput(make_view(small_model, representation), [0.0], np.zeros((1, 2)), [0], [[0.1]], 0.0))

    def test_zero_discount_quantile(self, small_model, make_view):
        """Test gamma = 0 collapses a QF target onto the reward"""
        y = operator_target(OperatorInput(make_view(small_model, "qf"), [0.4], np.zeros((1, 2)), [0], [[0.2, 0.8]], 0.0))
        assert np.allclose(y, 0.4)

    def test_row_mismatch(self, small_model, make_view):
        """Test inputs must have one row per transition"""
        with pytest.raises(DimensionError):
            OperatorInput(make_view(small_model, "qf"), [0.0, 1.0], np.zeros((1, 2)), [0], [[0.5]], 0.9)


class TestTerminalTarget:
    """Test suite for smoothed Dirac targets"""

    def test_quantile_constant(self, grid_domain):
        """Test QF terminal with r = 0.97 is 0.97 for every fraction"""
        y = terminal_target(Representation.QF, [0.97], np.linspace(0, 1, 9), grid_domain)
        assert np.allclose(y, 0.97)

    def test_density_width(self, grid_domain):
        """Test the PDF target is a Gaussian with sigma 0.02 on [-2, 2] with 200 points"""
        z = np.linspace(-2, 2, 401)
        y = terminal_target(Representation.PDF, [0.5], z, grid_domain)
        assert np.allclose(y[0], norm.pdf(z, loc=0.5, scale=0.02))

    def test_cdf_step_limits(self, grid_domain):
        """Test the CDF target is a step at r"""
        y = terminal_target(Representation.CDF, [0.3], [[-1.0, 0.3, 1.5]], grid_domain)[0]
        assert y[0] <= 1e-3
        assert y[1] == pytest.approx(0.5)
        assert y[2] >= 1 - 1e-3


class TestBellmanTargets:
    """Test suite for batch targets"""

    def test_mixed_batch(self, frozen_model, make_view, rng):
        """Test terminal rows get the smoothed Dirac and live rows the operator"""
        view = make_view(frozen_model(1.0, 0.0), "cdf")
        z = np.array([[-0.5, 0.0, 0.5]])
        y = bellman_targets(view, [1.0, 0.0], np.zeros((2, 2)), [True, False], z, 0.5, 16, rng)
        assert y.shape == (2, 3)
        assert np.allclose(y[0], terminal_target(Representation.CDF, [1.0], z, view.domain)[0])
        assert np.allclose(y[1], 1.0 / (1.0 + np.exp(-z[0] / 0.5)))

    def test_all_terminal_skips_network(self, small_model, make_view, rng):
        """Test an all-terminal batch never needs gamma > 0"""
        view = make_view(small_model, "pdf")
        y = bellman_targets(view, [0.1, -0.2], np.zeros((2, 2)), [True, True], np.zeros((2, 4)), 0.0, 16, rng)
        assert y.shape == (2, 4)

    def test_quantile_batch(self, frozen_model, make_view, rng):
        """Test QF targets shift and scale the frozen quantiles"""
        view = make_view(frozen_model(1.0, 0.0), "qf")
        tau = rng.uniform(size=(3, 5))
        y = bellman_targets(view, [1.0, 2.0, 3.0], np.zeros((3, 2)), [False, False, True], tau, 0.9, 16, rng)
        assert np.allclose(y[:2], np.array([[1.0], [2.0]]) + 0.9 * tau[:2])
        assert np.allclose(y[2], 3.0)


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
