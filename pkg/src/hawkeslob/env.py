"""Episodic impulse-control market-making environment.

The environment advances the Hawkes-driven book between decision grid
points spaced ``decision_dt`` apart. At each grid instant the agent
submits a binary decision and, when intervening, one impulse; the impulse
is applied at the instant and the market then evolves over the following
interval.

Reward over step i (left endpoint t, right endpoint t + dt):

    -eta * Y_t^2 * dt  +  (X_{t+dt} - X_t)  +  (Y*Pmid)_{t+dt} - (Y*Pmid)_t

where Y_t is the inventory held over the interval (post-impulse, matching
the cadlag convention for intervention times) and the deltas include the
impulse's own cash/inventory effect, so the cash and inventory-value
columns telescope exactly to terminal wealth minus initial cash. The final
step adds the terminal adjustment

    -kappa * Y_T^2  -  fee_bps * 1e-4 * |Y_T| * Pmid_T.

Trajectories are bit-reproducible from (seed, action sequence), and grid
refinement with the same seed replays the identical event stream (pending
thinning proposals survive interval boundaries).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from . import _kernels as _k
from .book import (AgentBookState, BookInitConfig, BookState, FillReport,
                   pack_state, sample_initial_state, unpack_state)
from .events import Impulse, N_EVENT_TYPES, RESTRICTED_IMPULSES
from .hawkes import HawkesClock
from .intervention import InadmissibleImpulseError, admissible_mask
from .params import KernelParams, default_kernel_params
from .rng import RandomStream, derive_seed

ACTION_SET_RESTRICTED = "restricted"
ACTION_SET_FULL = "full"

_EVENT_BUF = 4096


@dataclass(frozen=True)
class EpisodeConfig:
    horizon: float = 300.0
    decision_dt: float = 0.1
    eta: float = 10.0
    kappa: float = 0.1
    fee_bps: float = 1.0
    initial_cash: float = 2000.0
    action_set: str = ACTION_SET_RESTRICTED
    history_window: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.horizon <= 0 or self.decision_dt <= 0:
            raise ValueError("horizon and decision_dt must be > 0")
        n = self.horizon / self.decision_dt
        if abs(n - round(n)) > 1e-9:
            raise ValueError("horizon must be an integer number of steps")
        if min(self.eta, self.kappa, self.fee_bps) < 0:
            raise ValueError("eta, kappa and fee_bps must be >= 0")
        if self.action_set not in (ACTION_SET_RESTRICTED, ACTION_SET_FULL):
            raise ValueError(f"unknown action set {self.action_set!r}")
        if self.history_window <= 0:
            raise ValueError("history_window must be > 0")

    @property
    def n_steps(self) -> int:
        return int(round(self.horizon / self.decision_dt))

    def to_dict(self) -> dict:
        return {
            "horizon": self.horizon, "decision_dt": self.decision_dt,
            "eta": self.eta, "kappa": self.kappa, "fee_bps": self.fee_bps,
            "initial_cash": self.initial_cash, "action_set": self.action_set,
            "history_window": self.history_window, "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "EpisodeConfig":
        return cls(**doc)


# Observation vector layout; block names are the ablation vocabulary.
OBS_BLOCKS = {
    "cash": (0, 1),
    "inventory": (1, 2),
    "spread": (2, 3),
    "relative-position": (3, 5),
    "intensity": (5, 5 + N_EVENT_TYPES),
    "history": (5 + N_EVENT_TYPES, 6 + 2 * N_EVENT_TYPES),
    "t_remaining": (6 + 2 * N_EVENT_TYPES, 7 + 2 * N_EVENT_TYPES),
}
OBS_DIM = 7 + 2 * N_EVENT_TYPES


@dataclass(frozen=True)
class Observation:
    """RL-facing state: agent account, book summary, flow statistics."""

    cash: float
    inventory: int
    spread: float
    rel_pos_ask: float
    rel_pos_bid: float
    intensities: np.ndarray
    history: np.ndarray
    t_remaining: float

    def to_vector(self) -> np.ndarray:
        vec = np.empty(OBS_DIM)
        vec[0] = self.cash
        vec[1] = self.inventory
        vec[2] = self.spread
        vec[3] = self.rel_pos_ask
        vec[4] = self.rel_pos_bid
        vec[5:5 + N_EVENT_TYPES] = self.intensities
        vec[5 + N_EVENT_TYPES:6 + 2 * N_EVENT_TYPES] = self.history
        vec[6 + 2 * N_EVENT_TYPES] = self.t_remaining
        return vec


@dataclass(frozen=True)
class RewardBreakdown:
    inventory_penalty: float
    cash_delta: float
    inventory_value_delta: float
    terminal_adjustment: float = 0.0

    @property
    def total(self) -> float:
        return (self.inventory_penalty + self.cash_delta
                + self.inventory_value_delta + self.terminal_adjustment)


@dataclass
class StepRecord:
    t: float
    cash: float
    inventory: int
    p_ask: float
    p_bid: float
    action: str
    reward: RewardBreakdown


def _rel_pos(n: int, q: int) -> float:
    if n < 0:
        return -1.0
    r = n / q
    return 1.0 if r > 1.0 else r


class MarketMakingEnv:
    """One episode per reset; value-like state, single-writer."""

    def __init__(self, kernel_params: Optional[KernelParams] = None,
                 config: EpisodeConfig = EpisodeConfig(),
                 init_config: BookInitConfig = BookInitConfig(),
                 record_trace: bool = False):
        self.kernel_params = kernel_params or default_kernel_params()
        if self.kernel_params.n_types != N_EVENT_TYPES:
            raise ValueError("environment requires the 12-type event model")
        self.config = config
        self.init_config = init_config
        self.record_trace = record_trace
        self._ev_t = np.empty(_EVENT_BUF)
        self._ev_e = np.empty(_EVENT_BUF, dtype=np.int64)
        self._ev_fill = np.empty(_EVENT_BUF, dtype=np.int64)
        self._ev_px = np.empty(_EVENT_BUF)
        self._done = True
        self._step_index = 0

    # -- lifecycle ------------------------------------------------------------

    def reset(self, seed: Optional[int] = None) -> Observation:
        if seed is None:
            seed = self.config.seed
        self._rng = RandomStream(derive_seed(seed, 0xE9150DE))
        self._clock = HawkesClock(self.kernel_params)
        book, agent = sample_initial_state(
            self.init_config, self._rng,
            initial_cash=self.config.initial_cash)
        self._book_arr, self._cash_arr = pack_state(book, agent)
        self._tick = book.tick
        self._step_index = 0
        self._done = False
        self.fills: list[FillReport] = []
        self.trace: list[StepRecord] = []
        self.total_reward = 0.0
        return self._observation()

    # -- views ----------------------------------------------------------------

    @property
    def done(self) -> bool:
        return self._done

    @property
    def t(self) -> float:
        return self._step_index * self.config.decision_dt

    def state(self) -> Tuple[BookState, AgentBookState]:
        return unpack_state(self._book_arr, self._cash_arr, self._tick)

    def mark_to_market(self) -> float:
        return float(self._cash_arr[0]) + self._inventory() * self._p_mid()

    def admissible_mask(self) -> np.ndarray:
        book, agent = self.state()
        return admissible_mask(
            book, agent,
            restricted=self.config.action_set == ACTION_SET_RESTRICTED)

    def _inventory(self) -> int:
        return int(self._book_arr[_k.YINV])

    def _p_mid(self) -> float:
        return (int(self._book_arr[_k.PA]) + int(self._book_arr[_k.PB])) \
            * self._tick / 2.0

    def _observation(self) -> Observation:
        b = self._book_arr
        return Observation(
            cash=float(self._cash_arr[0]),
            inventory=self._inventory(),
            spread=(int(b[_k.PA]) - int(b[_k.PB])) * self._tick,
            rel_pos_ask=_rel_pos(int(b[_k.NA]), int(b[_k.QA])),
            rel_pos_bid=_rel_pos(int(b[_k.NB]), int(b[_k.QB])),
            intensities=self._clock.intensities(),
            history=self._clock.history_features(self.config.history_window),
            t_remaining=self.config.horizon - self.t,
        )

    # -- dynamics ---------------------------------------------------------------

    def step(self, decision: int,
             impulse: Optional[Impulse] = None,
             ) -> Tuple[Observation, RewardBreakdown, bool]:
        if self._done:
            raise RuntimeError("episode is done; call reset()")
        if decision not in (0, 1):
            raise ValueError("decision must be 0 or 1")
        if (impulse is not None) != (decision == 1):
            raise ValueError("impulse must be given iff decision == 1")

        cfg = self.config
        pre_cash = float(self._cash_arr[0])
        pre_inv_value = self._inventory() * self._p_mid()

        action_name = ""
        if decision == 1:
            psi = Impulse(impulse)
            if (cfg.action_set == ACTION_SET_RESTRICTED
                    and psi not in RESTRICTED_IMPULSES):
                raise InadmissibleImpulseError(
                    f"{psi.name} not in the restricted action set")
            if not self.admissible_mask()[int(psi)]:
                raise InadmissibleImpulseError(
                    f"{psi.name} inadmissible in current state")
            _k.apply_impulse(self._book_arr, self._cash_arr, int(psi),
                             self._tick, self.init_config.redraw.p,
                             self._rng.state)
            action_name = psi.name

        y_held = self._inventory()
        t_next = (self._step_index + 1) * cfg.decision_dt
        self._advance(t_next)
        self._step_index += 1

        inventory_penalty = -cfg.eta * float(y_held) ** 2 * cfg.decision_dt
        cash_delta = float(self._cash_arr[0]) - pre_cash
        inv_value_delta = self._inventory() * self._p_mid() - pre_inv_value
        terminal_adjustment = 0.0
        done = self._step_index >= cfg.n_steps
        if done:
            y_t = self._inventory()
            terminal_adjustment = (
                -cfg.kappa * float(y_t) ** 2
                - cfg.fee_bps * 1e-4 * abs(y_t) * self._p_mid())
            self._done = True

        reward = RewardBreakdown(
            inventory_penalty=inventory_penalty,
            cash_delta=cash_delta,
            inventory_value_delta=inv_value_delta,
            terminal_adjustment=terminal_adjustment)
        self.total_reward += reward.total
        obs = self._observation()
        if self.record_trace:
            b = self._book_arr
            self.trace.append(StepRecord(
                t=self.t, cash=float(self._cash_arr[0]),
                inventory=self._inventory(),
                p_ask=int(b[_k.PA]) * self._tick,
                p_bid=int(b[_k.PB]) * self._tick,
                action=action_name, reward=reward))
        return obs, reward, done

    def _advance(self, t_end: float) -> None:
        clock = self._clock
        while True:
            n, overflow = _k.advance_interval(
                clock._kind, clock._mu, clock._a1, clock._a2, clock._a3,
                clock.exc, clock.clock_f, clock.clock_i, clock.counts,
                clock.log_t, clock.log_e, clock._horizon,
                self._book_arr, self._cash_arr, self._tick,
                self.init_config.redraw.p, self._rng.state, t_end,
                clock._lam_buf, self._ev_t, self._ev_e, self._ev_fill,
                self._ev_px)
            for i in range(n):
                if self._ev_fill[i] == 1:
                    self.fills.append(FillReport(side_ask=True,
                                                 price=float(self._ev_px[i])))
                elif self._ev_fill[i] == 2:
                    self.fills.append(FillReport(side_ask=False,
                                                 price=float(self._ev_px[i])))
            if not overflow:
                break
