"""Agent impulse alphabet: admissibility and the state-intervention map.

Admissibility rules:

* ``LO_T`` / ``LO_D``: the agent must not already rest on that side
  (one resting order per side).
* ``LO_IS``: additionally the spread must exceed one tick.
* ``CO_T``: the agent must rest on that side (it cancels its own order,
  wherever that order sits in the visible window).
* ``MO``: the agent must not be at the front of that side's queue (it
  would trade with itself).

``apply_impulse`` returns the instantaneous cash flow K: zero for limit
and cancel impulses, the signed trade cash leg for market orders (a buy
through the ask decreases cash and increases inventory; a sell through
the bid mirrors). K is reported for diagnostics; rewards are computed
from state deltas so it is never double counted.
"""

from __future__ import annotations

from typing import Optional, Tuple

import numpy as np

from . import _kernels as _k
from .book import (AgentBookState, BookState, QueueRedrawPolicy, pack_state,
                   unpack_state)
from .events import (KIND_CO_T, KIND_IS, KIND_LO_D, KIND_LO_T, KIND_MO,
                     IMPULSE_KIND, IMPULSE_SIDE, Impulse, N_IMPULSES,
                     RESTRICTED_IMPULSES)
from .rng import RandomStream


class InadmissibleImpulseError(ValueError):
    pass


def admissible(book: BookState, agent: AgentBookState, psi: Impulse) -> bool:
    kind = int(IMPULSE_KIND[int(psi)])
    side_ask = bool(IMPULSE_SIDE[int(psi)])
    n = agent.n_ask if side_ask else agent.n_bid
    if kind == KIND_CO_T:
        return n is not None
    if kind == KIND_MO:
        return n != 0
    if kind in (KIND_LO_T, KIND_LO_D):
        return n is None
    if kind == KIND_IS:
        return n is None and book.spread_ticks > 1
    raise ValueError(f"unknown impulse {psi}")


def admissible_mask(book: BookState, agent: AgentBookState,
                    restricted: bool = False) -> np.ndarray:
    """Boolean mask over the canonical impulse order.

    With ``restricted`` the mask is zeroed outside the top-of-book
    quote/cancel subset used by the learning agents.
    """
    mask = np.zeros(N_IMPULSES, dtype=bool)
    allowed = RESTRICTED_IMPULSES if restricted else tuple(Impulse)
    for psi in allowed:
        mask[int(psi)] = admissible(book, agent, psi)
    return mask


def apply_impulse(book: BookState, agent: AgentBookState, psi: Impulse,
                  rng: RandomStream,
                  replenish: QueueRedrawPolicy = QueueRedrawPolicy(),
                  ) -> Tuple[BookState, AgentBookState, float]:
    """State-intervention map; returns (book', agent', K)."""
    if not admissible(book, agent, psi):
        raise InadmissibleImpulseError(
            f"impulse {Impulse(psi).name} inadmissible in current state")
    arr, cash = pack_state(book, agent)
    k_cash = _k.apply_impulse(arr, cash, int(psi), book.tick,
                              replenish.p, rng.state)
    book2, agent2 = unpack_state(arr, cash, book.tick)
    return book2, agent2, float(k_cash)


def impulse_from_name(name: str) -> Optional[Impulse]:
    try:
        return Impulse[name]
    except KeyError:
        return None
