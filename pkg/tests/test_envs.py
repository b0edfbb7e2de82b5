"""
Unit tests for the stochastic grid world, CartPole and the environment factory
"""
import numpy as np
import pytest

from envs import (
    Action,
    CartAction,
    CartPole,
    CartPoleConfig,
    EnvironmentFactory,
    GridWorldConfig,
    GridWorldState,
    StochasticGridWorld,
    cartpole_step,
    grid_step,
    parse_state,
    transition_distribution,
)
from utils.errors import (
    ConfigValidationError,
    EnvironmentUsageError,
    OutOfRangeError,
    UnsupportedEnvironmentError,
)


class TestGridWorldDynamics:
    """Test suite for grid-world transitions"""

    def test_clipped_at_wall(self, rng):
        """Test LEFT from (0, 3) stays put whichever move length is drawn"""
        config = GridWorldConfig()
        rewards = []
        for _ in range(400):
            landing, reward, terminal = grid_step((0, 3), Action.LEFT, config, rng)
            assert landing == GridWorldState(0, 3)
            assert not terminal
            rewards.append(reward)
        assert abs(np.mean(rewards)) <= 3 * 0.1 / np.sqrt(400)
        assert np.std(rewards) == pytest.approx(0.1, rel=0.15)

    def test_target_reward(self, rng):
        """Test RIGHT from (5, 6) always lands on the target with mean reward 1"""
        config = GridWorldConfig()
        rewards = []
        for _ in range(400):
            landing, reward, terminal = grid_step((5, 6), Action.RIGHT, config, rng)
            assert landing == GridWorldState(6, 6) and terminal
            rewards.append(reward)
        assert abs(np.mean(rewards) - 1.0) <= 3 * 0.1 / np.sqrt(400)

    def test_trap_reward(self, rng):
        """Test landing on the trap is terminal with mean reward -1"""
        config = GridWorldConfig(double_move_prob=0.0)
        rewards = [grid_step((3, 2), Action.UP, config, rng)[1] for _ in range(400)]
        assert grid_step((3, 2), Action.UP, config, rng)[2]
        assert abs(np.mean(rewards) + 1.0) <= 3 * 0.1 / np.sqrt(400)

    def test_double_move_frequency(self, rng):
        """Test one and two cell moves are equally likely"""
        config = GridWorldConfig(reward_noise=0.0)
        doubles = sum(grid_step((0, 0), Action.UP, config, rng)[0] == (0, 2) for _ in range(4000))
        assert doubles / 4000 == pytest.approx(0.5, abs=0.03)

    def test_step_from_terminal(self, rng):
        """Test stepping out of a terminal cell is a usage error"""
        with pytest.raises(EnvironmentUsageError):
            grid_step((6, 6), Action.LEFT, GridWorldConfig(), rng)

    def test_unknown_action(self, rng):
        """Test actions outside the four moves"""
        with pytest.raises(OutOfRangeError):
            grid_step((1, 1), 7, GridWorldConfig(), rng)

    def test_transition_distribution_merges(self):
        """Test coinciding landings are merged into one outcome"""
        config = GridWorldConfig()
        assert transition_distribution((5, 6), Action.RIGHT, config) == [(GridWorldState(6, 6), 1.0)]
        outcomes = dict(transition_distribution((1, 1), Action.UP, config))
        assert outcomes == {GridWorldState(1, 2): 0.5, GridWorldState(1, 3): 0.5}

    def test_invalid_config(self):
        """Test target and trap must differ"""
        with pytest.raises(ConfigValidationError):
            GridWorldConfig(trap=(6, 6))


class TestGridWorldEnvironment:
    """Test suite for the grid-world episode interface"""

    def test_encoding_scaled(self):
        """Test coordinates are scaled to the unit square"""
        env = StochasticGridWorld()
        assert np.allclose(env.encode_state((6, 3)), [1.0, 0.5])

    def test_reset_avoids_terminals(self, rng):
        """Test resets never start on the target or trap"""
        env = StochasticGridWorld(rng=rng)
        for _ in range(300):
            env.reset()
            assert not env.config.is_terminal(env.state)

    def test_episode_ends_on_target(self, rng):
        """Test a terminal landing closes the episode"""
        env = StochasticGridWorld(rng=rng)
        env.reset_to((5, 6))
        result = env.step(Action.RIGHT)
        assert result.terminal and not result.truncated
        with pytest.raises(EnvironmentUsageError):
            env.step(Action.RIGHT)

    def test_step_cap_truncates(self, rng):
        """Test the step cap truncates without terminating"""
        env = StochasticGridWorld(GridWorldConfig(step_cap=3), rng)
        env.reset_to((0, 0))
        results = [env.step(Action.LEFT) for _ in range(3)]
        assert [r.truncated for r in results] == [False, False, True]
        assert not any(r.terminal for r in results)

    def test_parse_state(self):
        """Test 'x,y' parsing and bounds"""
        config = GridWorldConfig()
        assert parse_state("2,3", config) == GridWorldState(2, 3)
        assert parse_state("(4, 1)", config) == GridWorldState(4, 1)
        with pytest.raises(OutOfRangeError):
            parse_state("9,9", config)
        with pytest.raises(OutOfRangeError):
            parse_state("north", config)


class TestCartPole:
    """Test suite for the cart-pole dynamics"""

    def test_upright_is_unstable(self):
        """Test a constant push from rest makes the pole angle grow"""
        config = CartPoleConfig()
        state = np.zeros(4)
        angles = []
        for _ in range(10):
            state, reward, _ = cartpole_step(state, CartAction.RIGHT, config)
            angles.append(abs(state[2]))
            assert reward == 1.0
        assert np.all(np.diff(angles[1:]) > 0)

    def test_terminates_when_falling(self):
        """Test the pole eventually leaves the angle band"""
        config = CartPoleConfig()
        state, terminal = np.zeros(4), False
        for _ in range(100):
            state, _, terminal = cartpole_step(state, CartAction.LEFT, config)
            if terminal:
                break
        assert terminal
        assert abs(state[2]) > config.angle_limit or abs(state[0]) > config.position_limit

    def test_truncation(self, rng):
        """Test episodes stop at max_steps"""
        env = CartPole(CartPoleConfig(max_steps=2), rng)
        env.reset()
        first = env.step(CartAction.LEFT)
        second = env.step(CartAction.RIGHT)
        assert not first.truncated and second.truncated and not second.terminal

    def test_raw_encoding(self, rng):
        """Test states are fed to the networks unscaled"""
        env = CartPole(rng=rng)
        state = env.reset()
        assert state.shape == (4,)
        assert np.all(np.abs(state) <= 0.05)
        assert np.array_equal(state, env.state)

    def test_unknown_action(self):
        """Test actions other than LEFT and RIGHT"""
        with pytest.raises(OutOfRangeError):
            cartpole_step(np.zeros(4), 2, CartPoleConfig())


class TestEnvironmentFactory:
    """Test suite for creating environments by name"""

    def test_names(self):
        """Test both benchmarks are registered"""
        assert EnvironmentFactory.names() == ["cartpole", "gridworld"]

    def test_options_override_config(self, rng):
        """Test options reach the environment config"""
        env = EnvironmentFactory.create_environment("gridworld", rng, {"gamma": 0.7})
        assert isinstance(env, StochasticGridWorld)
        assert env.gamma == 0.7

    def test_unknown_environment(self):
        """Test unknown names raise UnsupportedEnvironmentError"""
        with pytest.raises(UnsupportedEnvironmentError):
            EnvironmentFactory.create_environment("mountaincar")


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
