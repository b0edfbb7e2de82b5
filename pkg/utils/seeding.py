"""
One run seed fanned out into independent generator streams
"""
from dataclasses import dataclass

import numpy as np


@dataclass
class SeedStreams:
    init: np.random.Generator        # network initialisation
    acting: np.random.Generator      # epsilon-greedy draws
    replay: np.random.Generator      # minibatch sampling
    grid: np.random.Generator        # z / tau grids and expectation draws
    env: np.random.Generator         # training environment
    eval_env: np.random.Generator    # evaluation environment
    evaluation: np.random.Generator  # evaluation-time action draws


def spawn_streams(seed: int) -> SeedStreams:
    children = np.random.SeedSequence(seed).spawn(7)
    return SeedStreams(*(np.random.default_rng(child) for child in children))
