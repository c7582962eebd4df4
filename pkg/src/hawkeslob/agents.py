"""Non-learning benchmark policies and the checkpoint-policy wrapper.

The probabilistic agent reads the current intensity vector as a
distribution over the next event type and reacts to anticipated market
orders; a fixed priority table makes it a pure function of (observation,
config, mask):

1. normalize the intensities; find the most probable next event;
2. inventory rule (dominates): when |Y| > y_max, send the corrective
   market order (sell through the bid queue when long, buy through the
   ask queue when short), subject to the mask;
3. most probable event MO_BID: quote the bid (LO_T_BID) when not resting
   there, else cancel a resting ask (CO_T_ASK);
4. most probable event MO_ASK: mirrored;
5. otherwise hold. Directional quoting is skipped when it would push the
   resting-order skew beyond ``skew_threshold``.

Intensity ties resolve to the lowest event index, making the whole
procedure deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Protocol, Tuple

import numpy as np

from .env import Observation
from .events import EventType, Impulse
from .ppo import PolicyNets, act as policy_act
from .rng import RandomStream

Action = Tuple[int, Optional[Impulse]]


@dataclass(frozen=True)
class ProbAgentConfig:
    y_max: int = 5
    skew_threshold: int = 1

    def __post_init__(self):
        if self.y_max < 1:
            raise ValueError("y_max must be >= 1")
        if self.skew_threshold < 1:
            raise ValueError("skew_threshold must be >= 1")

    def to_dict(self) -> dict:
        return {"y_max": self.y_max, "skew_threshold": self.skew_threshold}

    @classmethod
    def from_dict(cls, doc: dict) -> "ProbAgentConfig":
        return cls(**doc)


def prob_agent_act(obs: Observation, config: ProbAgentConfig,
                   mask: np.ndarray) -> Action:
    """Deterministic decision procedure described in the module docstring.

    ``mask`` is admissibility over the full canonical impulse order; any
    blocked preference falls through to the next rule, ultimately hold.
    """
    lam = np.asarray(obs.intensities, dtype=np.float64)
    total = lam.sum()
    probs = lam / total if total > 0 else np.full(len(lam), 1.0 / len(lam))
    top_event = EventType(int(np.argmax(probs)))

    if abs(obs.inventory) > config.y_max:
        corrective = Impulse.MO_BID if obs.inventory > 0 else Impulse.MO_ASK
        if mask[int(corrective)]:
            return 1, corrective

    resting_ask = obs.rel_pos_ask >= 0.0
    resting_bid = obs.rel_pos_bid >= 0.0

    if top_event == EventType.MO_BID:
        skew_to_bid = int(not resting_ask) + int(resting_bid)
        if skew_to_bid < config.skew_threshold + 1:
            if not resting_bid and mask[int(Impulse.LO_T_BID)]:
                return 1, Impulse.LO_T_BID
            if resting_ask and mask[int(Impulse.CO_T_ASK)]:
                return 1, Impulse.CO_T_ASK
    elif top_event == EventType.MO_ASK:
        skew_to_ask = int(not resting_bid) + int(resting_ask)
        if skew_to_ask < config.skew_threshold + 1:
            if not resting_ask and mask[int(Impulse.LO_T_ASK)]:
                return 1, Impulse.LO_T_ASK
            if resting_bid and mask[int(Impulse.CO_T_BID)]:
                return 1, Impulse.CO_T_BID
    return 0, None


def random_agent_act(obs: Observation, mask: np.ndarray,
                     rng: RandomStream) -> Action:
    """Intervene with probability 1/2, uniformly over admissible impulses."""
    admissible = np.flatnonzero(mask)
    if admissible.size == 0:
        return 0, None
    if rng.uniform() < 0.5:
        return 1, Impulse(int(admissible[rng.integer(admissible.size)]))
    return 0, None


def hold_agent_act(obs: Observation, mask: np.ndarray) -> Action:
    return 0, None


class Agent(Protocol):
    name: str

    def act(self, obs: Observation, mask: np.ndarray) -> Action: ...


class HoldAgent:
    name = "hold"

    def act(self, obs: Observation, mask: np.ndarray) -> Action:
        return hold_agent_act(obs, mask)


class RandomAgent:
    name = "random"

    def __init__(self, rng: RandomStream):
        self.rng = rng

    def act(self, obs: Observation, mask: np.ndarray) -> Action:
        return random_agent_act(obs, mask, self.rng)


class ProbabilisticAgent:
    name = "prob"

    def __init__(self, config: ProbAgentConfig = ProbAgentConfig()):
        self.config = config

    def act(self, obs: Observation, mask: np.ndarray) -> Action:
        return prob_agent_act(obs, self.config, mask)


class CheckpointAgent:
    """Wraps trained policy networks; samples the stochastic policy."""

    name = "checkpoint"

    def __init__(self, nets: PolicyNets, rng: RandomStream,
                 deterministic: bool = False):
        from .events import RESTRICTED_IMPULSES
        self.nets = nets
        self.rng = rng
        self.deterministic = deterministic
        self._restricted = RESTRICTED_IMPULSES
        self._restricted_idx = np.array([int(p) for p in RESTRICTED_IMPULSES])

    @classmethod
    def load(cls, path: str, rng: RandomStream,
             deterministic: bool = False) -> "CheckpointAgent":
        return cls(PolicyNets.load(path), rng, deterministic)

    def act(self, obs: Observation, mask: np.ndarray) -> Action:
        sub_mask = mask[self._restricted_idx]
        features = self.nets.features(obs)
        if self.deterministic:
            z = float(self.nets.decision.forward(features)[0])
            if z <= 0.0 or not sub_mask.any():
                return 0, None
            logits = self.nets.action.forward(features)
            logits = np.where(sub_mask, logits, -np.inf)
            return 1, self._restricted[int(np.argmax(logits))]
        decision, a_idx, _, _ = policy_act(self.nets, features, sub_mask,
                                           self.rng)
        if decision == 0:
            return 0, None
        return 1, self._restricted[a_idx]


def make_agent(spec: str, rng: RandomStream,
               prob_config: ProbAgentConfig = ProbAgentConfig()):
    """Agent factory for CLI specs: prob | random | hold | checkpoint:<path>."""
    if spec == "hold":
        return HoldAgent()
    if spec == "random":
        return RandomAgent(rng)
    if spec == "prob":
        return ProbabilisticAgent(prob_config)
    if spec.startswith("checkpoint:"):
        return CheckpointAgent.load(spec.split(":", 1)[1], rng)
    raise ValueError(f"unknown agent spec {spec!r}")
