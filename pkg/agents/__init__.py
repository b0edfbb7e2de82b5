"""
UMDQN agents, replay memory and the training loop
"""
from .replay_memory import Experience, ExperienceBatch, ReplayMemory
from .umdqn import (
    EpsilonSchedule,
    epsilon,
    UmdqnAgent,
    KlAgent,
    CramerAgent,
    WassersteinAgent,
    AgentFactory,
)
from .trainer import EpisodeRecord, TrainingLog, evaluate_policy, run_episode, run_training, moving_average

__all__ = [
    'Experience',
    'ExperienceBatch',
    'ReplayMemory',
    'EpsilonSchedule',
    'epsilon',
    'UmdqnAgent',
    'KlAgent',
    'CramerAgent',
    'WassersteinAgent',
    'AgentFactory',
    'EpisodeRecord',
    'TrainingLog',
    'evaluate_policy',
    'run_episode',
    'run_training',
    'moving_average',
]
