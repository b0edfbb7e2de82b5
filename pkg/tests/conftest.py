"""
Shared fixtures for the UMDQN lab test suites
"""
import numpy as np
import pytest

from config import TrainConfig
from distributional.umnn import UmnnModel
from distributional.views import Representation, ReturnDistributionView, ReturnDomain
from engine.layers import POSITIVITY_DELTA


def frozen_head_bias(value: float) -> float:
    """Last-layer bias making the positive head output `value` when its weights are zero"""
    shifted = value - 1.0 - POSITIVITY_DELTA
    if shifted >= 0.0:
        return shifted
    return float(np.log(value - POSITIVITY_DELTA))


def freeze_affine(model: UmnnModel, slope: float, intercept: float) -> UmnnModel:
    """Set parameters so that G(x | c) = slope * x + intercept for every c"""
    assert slope > 0
    last = model.integrand_net.tail.layers[-1]
    last.weight.data[...] = 0.0
    last.bias.data[...] = frozen_head_bias(slope)
    model.offset.weight.data[...] = 0.0
    model.offset.bias.data[...] = intercept
    return model


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run full training checks")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: full training runs, skipped without --runslow")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def small_model(rng):
    """Width-16 UMNN on 2-d states with 3 actions"""
    return UmnnModel(2, 3, dnn_hidden=(16,), umnn_hidden=(16,), n_cc=32, rng=rng)


@pytest.fixture
def freeze():
    """freeze_affine for models built inside a test"""
    return freeze_affine


@pytest.fixture
def frozen_model():
    """Builder for models with G(x | c) = slope * x + intercept"""
    def build(slope=1.0, intercept=0.0, state_dim=2, n_actions=3):
        model = UmnnModel(state_dim, n_actions, dnn_hidden=(8,), umnn_hidden=(8,), rng=np.random.default_rng(0))
        return freeze_affine(model, slope, intercept)
    return build


@pytest.fixture
def grid_domain():
    return ReturnDomain(-2.0, 2.0, n_z=200, n_tau=200)


@pytest.fixture
def make_view(grid_domain):
    def build(model, representation, domain=None, latent="logistic"):
        return ReturnDistributionView(Representation(representation), model, domain or grid_domain, latent)
    return build


@pytest.fixture
def tiny_config(tmp_path):
    """Fast settings for agent and CLI tests"""
    def build(algorithm="umdqn-c", env="gridworld", **overrides):
        values = dict(
            algorithm=algorithm,
            env=env,
            seed=0,
            total_steps=60,
            output_dir=str(tmp_path / "run"),
            dnn_hidden=(8,),
            umnn_hidden=(8,),
            n_cc=8,
            batch_size=4,
            replay_capacity=100,
            target_update=20,
            n_z=16,
            n_tau=16,
            n_mc=16,
            simpson_points=21,
            eval_every_episodes=1,
            eval_episodes=1,
            checkpoint_every=30,
        )
        if env == "cartpole":
            values.update(gamma=0.99, z_min=-10.0, z_max=110.0)
        values.update(overrides)
        return TrainConfig(**values).validate()
    return build
