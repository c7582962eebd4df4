"""Generator, intervention operator and residuals for candidate value
functions, plus Monte-Carlo Dynkin verification.

A candidate function is any callable ``phi(t, lam, s)`` returning a float,
where ``lam`` is the intensity vector and ``s`` the reduced-state vector
(see :func:`state_to_vector`). The generator applies to exponential
kernels whose decay is constant along each row (gamma_ij == gamma_i), the
case in which the intensity vector is itself Markov; the shipped defaults
satisfy this.

The generator is an expectation operator, so the probabilistic pieces of
the event transition (cancel targeting, geometric queue redraw on
promotion) enter as explicitly enumerated branches with their exact
weights; the geometric tail beyond machine-negligible mass is lumped onto
the last enumerated branch so weights sum to one and constants are
annihilated exactly. Time and intensity partials are central finite
differences: this module verifies candidate functions, it does not train
them, so derivative-free candidates must be supported.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import expm

from . import _kernels as _k
from .book import (AgentBookState, BookInitConfig, BookState, pack_state,
                   sample_book, unpack_state)
from .events import (EVENT_KIND, EVENT_SIDE, IMPULSE_KIND, IMPULSE_SIDE,
                     EventType, Impulse, KIND_CO_D, KIND_CO_T, KIND_MO,
                     N_EVENT_TYPES)
from .hawkes import HawkesClock
from .intervention import admissible
from .params import EXPONENTIAL, KernelParams
from .rng import RandomStream, derive_seed

CandidateFunction = Callable[[float, np.ndarray, np.ndarray], float]

_GEOM_TAIL = 1e-12


def state_to_vector(book: BookState, agent: AgentBookState) -> np.ndarray:
    """Reduced state (X, Y, p_ask, p_bid, q_a, q_b, q_aD, q_bD, n_a, n_b).

    Prices in currency; queue priorities use -1 for "not resting".
    """
    return np.array([
        agent.cash, agent.inventory, book.p_ask, book.p_bid,
        book.q_ask, book.q_bid, book.q_ask_d, book.q_bid_d,
        -1.0 if agent.n_ask is None else agent.n_ask,
        -1.0 if agent.n_bid is None else agent.n_bid,
    ])


def row_gamma(params: KernelParams) -> np.ndarray:
    """Per-type decay vector; requires row-constant gamma."""
    if params.kind != EXPONENTIAL:
        raise ValueError("generator requires an exponential kernel")
    g = params.gamma
    if not np.all(g == g[:, :1]):
        raise ValueError(
            "generator requires row-constant decay (gamma_ij == gamma_i); "
            "pairwise decays make the intensity vector non-Markov")
    return g[:, 0].copy()


def _geom_branches(p: float) -> List[Tuple[float, int]]:
    """(weight, redraw value) pairs: 1 + Geometric(p), tail lumped."""
    branches = []
    k = 0
    remaining = 1.0
    while remaining > _GEOM_TAIL:
        w = remaining * p
        branches.append((w, 1 + k))
        remaining -= w
        k += 1
    if branches:
        w_last, v_last = branches[-1]
        branches[-1] = (w_last + remaining, v_last)
    return branches


def _resolved_exogenous(book: BookState, agent: AgentBookState,
                        e: EventType, hit: int, redraw_val: int
                        ) -> Tuple[BookState, AgentBookState]:
    arr, cash = pack_state(book, agent)
    _k.apply_exogenous_resolved(arr, cash, int(EVENT_KIND[int(e)]),
                                int(EVENT_SIDE[int(e)]), book.tick,
                                hit, redraw_val)
    return unpack_state(arr, cash, book.tick)


def exogenous_branches(book: BookState, agent: AgentBookState, e: EventType,
                       redraw_p: float = 0.4,
                       ) -> List[Tuple[float, BookState, AgentBookState]]:
    """All (weight, post-state) branches of the event transition T_e."""
    kind = int(EVENT_KIND[int(e)])
    side_ask = bool(EVENT_SIDE[int(e)])
    q = book.q_ask if side_ask else book.q_bid
    qd = book.q_ask_d if side_ask else book.q_bid_d
    n_opt = agent.n_ask if side_ask else agent.n_bid
    n = -1 if n_opt is None else n_opt

    if kind == KIND_CO_T:
        if q > 1 and 0 < n < q:
            w_hit = n / q
            return [
                (w_hit, *_resolved_exogenous(book, agent, e, 1, 1)),
                (1.0 - w_hit, *_resolved_exogenous(book, agent, e, 0, 1)),
            ]
        if q == 1 and n != 0:
            return [(w, *_resolved_exogenous(book, agent, e, 0, rv))
                    for w, rv in _geom_branches(redraw_p)]
    elif kind == KIND_CO_D:
        if qd > 1 and n > q:
            w_hit = (n - q) / qd
            return [
                (w_hit, *_resolved_exogenous(book, agent, e, 1, 1)),
                (1.0 - w_hit, *_resolved_exogenous(book, agent, e, 0, 1)),
            ]
    elif kind == KIND_MO:
        if q == 1:
            return [(w, *_resolved_exogenous(book, agent, e, 0, rv))
                    for w, rv in _geom_branches(redraw_p)]
    return [(1.0, *_resolved_exogenous(book, agent, e, 0, 1))]


def impulse_branches(book: BookState, agent: AgentBookState, psi: Impulse,
                     redraw_p: float = 0.4,
                     ) -> Tuple[List[Tuple[float, BookState, AgentBookState]],
                                float]:
    """Branches of Gamma(., psi) plus the (branch-independent) profit K."""
    kind = int(IMPULSE_KIND[int(psi)])
    side_ask = bool(IMPULSE_SIDE[int(psi)])
    q = book.q_ask if side_ask else book.q_bid
    qd = book.q_ask_d if side_ask else book.q_bid_d
    n_opt = agent.n_ask if side_ask else agent.n_bid
    n = -1 if n_opt is None else n_opt

    def resolved(redraw_val: int):
        arr, cash = pack_state(book, agent)
        k_cash = _k.apply_impulse_resolved(arr, cash, kind,
                                           1 if side_ask else 0,
                                           book.tick, redraw_val)
        b2, a2 = unpack_state(arr, cash, book.tick)
        return b2, a2, float(k_cash)

    needs_redraw = False
    if kind == KIND_CO_T:
        needs_redraw = (0 <= n < q and q == 1) or (n >= q and qd == 1)
    elif kind == KIND_MO:
        needs_redraw = q == 1
    if needs_redraw:
        branches = []
        k_cash = 0.0
        for w, rv in _geom_branches(redraw_p):
            b2, a2, k_cash = resolved(rv)
            branches.append((w, b2, a2))
        return branches, k_cash
    b2, a2, k_cash = resolved(1)
    return [(1.0, b2, a2)], k_cash


# ---------------------------------------------------------------------------
# Operators
# ---------------------------------------------------------------------------

def generator(phi: CandidateFunction, t: float, lam: np.ndarray,
              book: Optional[BookState], agent: Optional[AgentBookState],
              params: KernelParams, h_rel: float = 1e-4,
              redraw_p: float = 0.4) -> float:
    """Expected instantaneous drift of phi along the uncontrolled dynamics.

    d_t phi + sum_i [ lam_i (E[phi(t, lam + alpha_col_i, T_i(s))] - phi)
                      + d_{lam_i} phi * gamma_i (mu_i - lam_i) ]

    With 12-type parameters, T_i is the book transition with its
    probabilistic pieces in expectation. Reduced settings (any other
    dimension, or ``book=None``) carry no book state: T_i is the
    identity and candidates see an empty state vector.
    """
    gamma_i = row_gamma(params)
    lam = np.asarray(lam, dtype=np.float64)
    with_book = book is not None and params.n_types == N_EVENT_TYPES
    svec = state_to_vector(book, agent) if with_book else np.empty(0)
    base = phi(t, lam, svec)

    h_t = h_rel * max(1.0, abs(t))
    out = (phi(t + h_t, lam, svec) - phi(t - h_t, lam, svec)) / (2.0 * h_t)

    for i in range(params.n_types):
        lam_jump = lam + params.alpha[:, i]
        if with_book:
            jump = 0.0
            for w, b2, a2 in exogenous_branches(book, agent, EventType(i),
                                                redraw_p):
                jump += w * phi(t, lam_jump, state_to_vector(b2, a2))
        else:
            jump = phi(t, lam_jump, svec)
        out += lam[i] * (jump - base)

        h_l = h_rel * max(1.0, abs(lam[i]))
        lam_p = lam.copy()
        lam_p[i] += h_l
        lam_m = lam.copy()
        lam_m[i] -= h_l
        dphi_dlam = (phi(t, lam_p, svec) - phi(t, lam_m, svec)) / (2.0 * h_l)
        out += dphi_dlam * gamma_i[i] * (params.mu[i] - lam[i])
    return float(out)


def intervention_value(phi: CandidateFunction, t: float, lam: np.ndarray,
                       book: BookState, agent: AgentBookState,
                       redraw_p: float = 0.4,
                       impulses: Optional[Sequence[Impulse]] = None,
                       include_k: bool = False) -> Tuple[float, Impulse]:
    """sup over admissible impulses of E[phi after Gamma].

    The market-order cash flow K already lives inside Gamma (cash is part
    of the post-impulse state), so the default keeps the operator free of
    double counting; ``include_k`` adds K again for candidates whose
    objective carries the instantaneous-profit sum as a separate term.
    ``impulses`` restricts the admissible set (default: full alphabet).
    Deterministic tie-break: the earliest impulse in canonical order wins.
    Raises ValueError when no impulse is admissible.
    """
    lam = np.asarray(lam, dtype=np.float64)
    best = -math.inf
    best_psi: Optional[Impulse] = None
    for psi in (impulses if impulses is not None else tuple(Impulse)):
        if not admissible(book, agent, psi):
            continue
        branches, k_cash = impulse_branches(book, agent, psi, redraw_p)
        value = k_cash if include_k else 0.0
        for w, b2, a2 in branches:
            value += w * phi(t, lam, state_to_vector(b2, a2))
        if value > best:
            best = value
            best_psi = psi
    if best_psi is None:
        raise ValueError("no admissible impulse in this state")
    return float(best), best_psi


def qvi_residual(phi: CandidateFunction, t: float, lam: np.ndarray,
                 book: BookState, agent: AgentBookState,
                 params: KernelParams, eta: float,
                 h_rel: float = 1e-4, redraw_p: float = 0.4) -> float:
    """min of the continuation and intervention residuals.

    Continuation term: -(L phi + f) with running cost f = -eta Y^2 and L
    the full generator (time partial included). Intervention term:
    phi - M phi.
    """
    lam = np.asarray(lam, dtype=np.float64)
    gen = generator(phi, t, lam, book, agent, params, h_rel, redraw_p)
    f_run = -eta * float(agent.inventory) ** 2
    continuation = -(gen + f_run)
    m_phi, _ = intervention_value(phi, t, lam, book, agent, redraw_p)
    intervention = phi(t, lam, state_to_vector(book, agent)) - m_phi
    return float(min(continuation, intervention))


def boundary_residual(phi: CandidateFunction, horizon: float,
                      lam: np.ndarray, book: BookState,
                      agent: AgentBookState, kappa: float) -> float:
    """Squared mismatch against the terminal payoff X + Y Pmid - kappa Y^2."""
    payoff = (agent.cash + agent.inventory * book.p_mid
              - kappa * float(agent.inventory) ** 2)
    value = phi(horizon, np.asarray(lam, dtype=np.float64),
                state_to_vector(book, agent))
    return float((value - payoff) ** 2)


# ---------------------------------------------------------------------------
# Domain sampling for residual diagnostics
# ---------------------------------------------------------------------------

def sample_reduced_state(config: BookInitConfig, rng: RandomStream,
                         initial_cash: float = 2000.0,
                         ) -> Tuple[BookState, AgentBookState]:
    """Book from the initial-state distributions; inventory ~ rounded
    normal; each side rests an order with probability 1/2 at a uniform
    queue priority."""
    book = sample_book(config, rng)
    inventory = int(round(rng.normal(0.0, config.inventory_std)))
    n_ask = n_bid = None
    if rng.uniform() < 0.5:
        n_ask = rng.integer(book.q_ask + book.q_ask_d)
    if rng.uniform() < 0.5:
        n_bid = rng.integer(book.q_bid + book.q_bid_d)
    agent = AgentBookState(cash=initial_cash, inventory=inventory,
                           n_ask=n_ask, n_bid=n_bid)
    return book, agent


def sample_intensities(params: KernelParams, rng: RandomStream) -> np.ndarray:
    """Intensity draws mu_i + (stationary_i - mu_i) * Exp(1)."""
    stat = params.stationary_rates
    lam = np.empty(params.n_types)
    for i in range(params.n_types):
        lam[i] = params.mu[i] + (stat[i] - params.mu[i]) \
            * (-math.log(rng.uniform()))
    return lam


# ---------------------------------------------------------------------------
# Dynkin verification
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DynkinResult:
    function: str
    type_index: int
    t_end: float
    n_paths: int
    estimate: float
    reference: float
    se: float
    z: float

    def to_dict(self) -> dict:
        return {
            "function": self.function, "type_index": self.type_index,
            "t_end": self.t_end, "n_paths": self.n_paths,
            "estimate": self.estimate, "reference": self.reference,
            "se": self.se, "z": self.z,
        }


def dynkin_reference(params: KernelParams, t_end: float) -> Tuple[np.ndarray,
                                                                  np.ndarray]:
    """Closed-form (E[lam(t)], E[N(t)]) via the matrix exponential of the
    affine moment system m' = diag(gamma)(mu - m) + alpha m, c' = m."""
    gamma_i = row_gamma(params)
    d = params.n_types
    big = np.zeros((2 * d + 1, 2 * d + 1))
    big[:d, :d] = params.alpha - np.diag(gamma_i)
    big[:d, 2 * d] = gamma_i * params.mu
    big[d:2 * d, :d] = np.eye(d)
    x0 = np.concatenate([params.mu, np.zeros(d), [1.0]])
    x_t = expm(big * t_end) @ x0
    return x_t[:d], x_t[d:2 * d]


def dynkin_check(params: KernelParams, function: str = "intensity",
                 type_index: int = 0, t_end: float = 2.0,
                 n_paths: int = 10_000, seed: int = 0) -> DynkinResult:
    """Monte-Carlo check that E[phi(t_end)] follows the generator ODE.

    Shipped test functions: ``intensity`` (phi = lam_i) and ``count``
    (phi = N_i). The reference integrates d/dt E[phi] = E[L phi] in closed
    form; the z-score compares the path average against it.
    """
    if function not in ("intensity", "count"):
        raise ValueError("function must be 'intensity' or 'count'")
    if not 0 <= type_index < params.n_types:
        raise IndexError("type_index out of range")
    m_ref, c_ref = dynkin_reference(params, t_end)
    reference = float(m_ref[type_index] if function == "intensity"
                      else c_ref[type_index])
    values = np.empty(n_paths)
    for p in range(n_paths):
        rng = RandomStream(derive_seed(seed, 0xD94, p))
        clock = HawkesClock(params, log_capacity=4096)
        clock.simulate(t_end, rng)
        if function == "intensity":
            values[p] = clock.intensity(type_index, t_end)
        else:
            values[p] = clock.counts[type_index]
    estimate = float(values.mean())
    se = float(values.std(ddof=1) / math.sqrt(n_paths))
    z = (estimate - reference) / se if se > 0 else 0.0
    return DynkinResult(function=function, type_index=type_index,
                        t_end=t_end, n_paths=n_paths, estimate=estimate,
                        reference=reference, se=se, z=float(z))
