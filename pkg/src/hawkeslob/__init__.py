"""Hawkes-driven LOB market making: simulator, RL agents, QVI harness."""

from .backend import BACKEND, USE_NUMBA
from .book import (AgentBookState, BookInitConfig, BookState, FillReport,
                   QueueRedrawPolicy, apply_event, mark_to_market)
from .env import (EpisodeConfig, MarketMakingEnv, Observation,
                  RewardBreakdown)
from .events import EventType, Impulse, RESTRICTED_IMPULSES
from .hawkes import HawkesClock
from .intervention import admissible, admissible_mask, apply_impulse
from .params import KernelParams, default_kernel_params
from .rng import RandomStream, derive_seed

__version__ = "0.1.0"

__all__ = [
    "AgentBookState", "BACKEND", "BookInitConfig", "BookState",
    "EpisodeConfig", "EventType", "FillReport", "HawkesClock", "Impulse",
    "KernelParams", "MarketMakingEnv", "Observation", "QueueRedrawPolicy",
    "RESTRICTED_IMPULSES", "RandomStream", "RewardBreakdown", "USE_NUMBA",
    "admissible", "admissible_mask", "apply_event", "apply_impulse",
    "default_kernel_params", "derive_seed", "mark_to_market",
]
