"""Two-level limit order book state and exogenous event transitions.

The book tracks best prices (as integer tick counts, so price invariants
are exact), top and second-level queue sizes per side, and the agent's
book-relative state: cash, inventory and per-side queue priority. Queue
priority ``n`` is the number of resting orders ahead of the agent's order
on that side across both visible levels (``None`` when not resting); the
agent order is in the top queue iff ``n < q`` and deep otherwise.

Transition semantics follow the per-event difference equations of the
underlying model with ask/bid mirrored signs so that the spread stays
positive. Randomness (cancel targeting, geometric queue redraws on
promotion) is drawn from the environment stream per the draw discipline
documented in :mod:`hawkeslob._kernels`.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional, Tuple

import numpy as np

from . import _kernels as _k
from .events import EventType
from .rng import RandomStream


@dataclass(frozen=True)
class QueueRedrawPolicy:
    """Promoted/replenished second-level size is 1 + Geometric(p)."""

    p: float = 0.4

    def __post_init__(self):
        if not 0.0 < self.p < 1.0:
            raise ValueError("redraw p must be in (0, 1)")

    def sample(self, rng: RandomStream) -> int:
        return 1 + rng.geometric(self.p)


@dataclass(frozen=True)
class BookState:
    """Best prices (ticks) and visible queue sizes."""

    p_ask_ticks: int
    p_bid_ticks: int
    q_ask: int
    q_bid: int
    q_ask_d: int
    q_bid_d: int
    tick: float = 0.01

    def __post_init__(self):
        if self.tick <= 0:
            raise ValueError("tick must be > 0")
        if self.p_ask_ticks <= self.p_bid_ticks:
            raise ValueError("ask must be strictly above bid")
        for q in (self.q_ask, self.q_bid, self.q_ask_d, self.q_bid_d):
            if q < 1:
                raise ValueError("queue sizes must be >= 1")

    @property
    def p_ask(self) -> float:
        return self.p_ask_ticks * self.tick

    @property
    def p_bid(self) -> float:
        return self.p_bid_ticks * self.tick

    @property
    def p_mid(self) -> float:
        return (self.p_ask_ticks + self.p_bid_ticks) * self.tick / 2.0

    @property
    def spread_ticks(self) -> int:
        return self.p_ask_ticks - self.p_bid_ticks

    @property
    def spread(self) -> float:
        return self.spread_ticks * self.tick


@dataclass(frozen=True)
class AgentBookState:
    """Agent cash, inventory and per-side queue priority."""

    cash: float
    inventory: int = 0
    n_ask: Optional[int] = None
    n_bid: Optional[int] = None

    def resting(self, side_ask: bool) -> bool:
        return (self.n_ask if side_ask else self.n_bid) is not None


@dataclass(frozen=True)
class FillReport:
    """One agent limit-order fill."""

    side_ask: bool
    price: float


def check_invariants(book: BookState, agent: AgentBookState) -> None:
    """Raise AssertionError if any state invariant is violated."""
    assert book.p_ask_ticks > book.p_bid_ticks, "spread must be positive"
    assert min(book.q_ask, book.q_bid, book.q_ask_d, book.q_bid_d) >= 1
    for n, q, qd in ((agent.n_ask, book.q_ask, book.q_ask_d),
                     (agent.n_bid, book.q_bid, book.q_bid_d)):
        if n is not None:
            assert 0 <= n <= q + qd, f"priority {n} outside [0, {q + qd}]"


def pack_state(book: BookState, agent: AgentBookState
               ) -> Tuple[np.ndarray, np.ndarray]:
    arr = np.array([
        book.p_ask_ticks, book.p_bid_ticks, book.q_ask, book.q_bid,
        book.q_ask_d, book.q_bid_d,
        -1 if agent.n_ask is None else agent.n_ask,
        -1 if agent.n_bid is None else agent.n_bid,
        agent.inventory,
    ], dtype=np.int64)
    cash = np.array([agent.cash])
    return arr, cash


def unpack_state(arr: np.ndarray, cash: np.ndarray, tick: float
                 ) -> Tuple[BookState, AgentBookState]:
    book = BookState(
        p_ask_ticks=int(arr[_k.PA]), p_bid_ticks=int(arr[_k.PB]),
        q_ask=int(arr[_k.QA]), q_bid=int(arr[_k.QB]),
        q_ask_d=int(arr[_k.QAD]), q_bid_d=int(arr[_k.QBD]), tick=tick)
    agent = AgentBookState(
        cash=float(cash[0]), inventory=int(arr[_k.YINV]),
        n_ask=None if arr[_k.NA] < 0 else int(arr[_k.NA]),
        n_bid=None if arr[_k.NB] < 0 else int(arr[_k.NB]))
    return book, agent


def apply_event(book: BookState, agent: AgentBookState, e: EventType,
                rng: RandomStream,
                replenish: QueueRedrawPolicy = QueueRedrawPolicy(),
                ) -> Tuple[BookState, AgentBookState, Optional[FillReport]]:
    """Apply one exogenous event; returns the new state and any agent fill."""
    arr, cash = pack_state(book, agent)
    pa_pre, pb_pre = book.p_ask, book.p_bid
    fill_code = _k.apply_exogenous(arr, cash, int(e), book.tick,
                                   replenish.p, rng.state)
    book2, agent2 = unpack_state(arr, cash, book.tick)
    fill = None
    if fill_code == 1:
        fill = FillReport(side_ask=True, price=pa_pre)
    elif fill_code == 2:
        fill = FillReport(side_ask=False, price=pb_pre)
    return book2, agent2, fill


def mark_to_market(book: BookState, agent: AgentBookState) -> float:
    """Cash plus inventory valued at mid."""
    return agent.cash + agent.inventory * book.p_mid


# ---------------------------------------------------------------------------
# Initial-state sampling
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BookInitConfig:
    """Initial-state sampling parameters.

    Mid-price ~ Normal(p_mid_mean, p_mid_var) rounded to the tick grid,
    spread ticks ~ 1 + Geometric(spread_geom_p), queue sizes drawn from
    the redraw policy. Draw order: mid, spread, q_ask, q_bid, q_ask_d,
    q_bid_d (then inventory when ``sample_inventory``).
    """

    p_mid_mean: float = 200.0
    p_mid_var: float = 100.0
    spread_geom_p: float = 0.8
    tick: float = 0.01
    redraw: QueueRedrawPolicy = QueueRedrawPolicy()
    inventory_std: float = 2.0

    def to_dict(self) -> dict:
        return {
            "p_mid_mean": self.p_mid_mean, "p_mid_var": self.p_mid_var,
            "spread_geom_p": self.spread_geom_p, "tick": self.tick,
            "redraw_geom_p": self.redraw.p,
            "inventory_std": self.inventory_std,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "BookInitConfig":
        doc = dict(doc)
        redraw = QueueRedrawPolicy(p=doc.pop("redraw_geom_p", 0.4))
        return cls(redraw=redraw, **doc)


def sample_book(config: BookInitConfig, rng: RandomStream) -> BookState:
    mid = rng.normal(config.p_mid_mean, config.p_mid_var ** 0.5)
    center = int(round(mid / config.tick))
    spread_ticks = 1 + rng.geometric(config.spread_geom_p)
    ask = center + (spread_ticks + 1) // 2
    bid = ask - spread_ticks
    return BookState(
        p_ask_ticks=ask, p_bid_ticks=bid,
        q_ask=config.redraw.sample(rng), q_bid=config.redraw.sample(rng),
        q_ask_d=config.redraw.sample(rng), q_bid_d=config.redraw.sample(rng),
        tick=config.tick)


def sample_initial_state(config: BookInitConfig, rng: RandomStream,
                         initial_cash: float = 2000.0,
                         sample_inventory: bool = False,
                         ) -> Tuple[BookState, AgentBookState]:
    """Fresh episode state: sampled book, flat agent (or sampled inventory).

    ``sample_inventory`` draws Y ~ Normal(0, inventory_std^2) rounded to an
    integer, the domain-sampling variant used by the residual evaluators;
    episodes start flat.
    """
    book = sample_book(config, rng)
    inventory = 0
    if sample_inventory:
        inventory = int(round(rng.normal(0.0, config.inventory_std)))
    agent = AgentBookState(cash=initial_cash, inventory=inventory)
    return book, agent


def replace_agent(agent: AgentBookState, **kwargs) -> AgentBookState:
    return replace(agent, **kwargs)
