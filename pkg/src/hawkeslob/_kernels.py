"""Hot numerical kernels shared by the numba and numpy backends.

Every function here is written against the common subset of plain Python
and numba's nopython mode (numpy arrays, scalars, ``math.*``) and is
decorated with the :func:`hawkeslob.backend.njit` shim, so both backends
execute the same source. All transcendental calls go through ``math`` so
both paths hit the same libm and produce bit-identical streams.

Conventions
-----------
RNG state is ``uint64[4]`` holding a KISS-style generator (two 16-bit-lane
multiply-with-carry streams, a 32-bit xorshift and a 32-bit LCG). All
arithmetic keeps intermediate values below 2**49, so nothing ever wraps:
the generator is exact in both backends and never triggers numpy's scalar
overflow warnings.

Book state is ``int64[9]``::

    0 PA  best ask price (ticks)     5 QBD  bid second-level size
    1 PB  best bid price (ticks)     6 NA   ask queue priority (-1 = none)
    2 QA  ask top size               7 NB   bid queue priority (-1 = none)
    3 QB  bid top size               8 Y    agent inventory
    4 QAD ask second-level size

Cash is ``float64[1]`` (currency). Clock state is ``float64[5]``
(now, excitation anchor time, pending thinning candidate time or nan,
last event time or nan, pending proposal bound) plus ``int64[2]``
(event-log write position, event-log size).

Randomness draw discipline (transition functions); the order is part of
the replay contract:

* exogenous CO_T, top queue >= 2, agent resting in the top queue with
  0 < n < q: one uniform (hit ~ Bernoulli(n/q));
* exogenous CO_D, second level >= 2, agent deep with n > q: one uniform
  (hit ~ Bernoulli((n-q)/q_D));
* any promotion or second-level replenishment: one uniform for the
  geometric queue redraw, drawn after the targeting draw if any.
"""

import math

import numpy as np

from .backend import njit
from .events import EVENT_KIND, EVENT_SIDE, IMPULSE_KIND, IMPULSE_SIDE

# --- book array slots -------------------------------------------------------
PA, PB, QA, QB, QAD, QBD, NA, NB, YINV = 0, 1, 2, 3, 4, 5, 6, 7, 8
# --- clock float slots ------------------------------------------------------
CK_NOW, CK_ANCHOR, CK_PEND_T, CK_LAST, CK_PEND_BOUND = 0, 1, 2, 3, 4
# --- clock int slots --------------------------------------------------------
CK_LOG_NEXT, CK_LOG_SIZE = 0, 1
# --- action kinds (mirrors events.py) ---------------------------------------
K_LO_D, K_LO_T, K_CO_T, K_CO_D, K_MO, K_IS = 0, 1, 2, 3, 4, 5

KIND_EXP = 0
KIND_POWERLAW = 1

_U64 = np.uint64
_M16 = _U64(0xFFFF)
_M32 = _U64(0xFFFFFFFF)
_S5 = _U64(5)
_S6 = _U64(6)
_S13 = _U64(13)
_S16 = _U64(16)
_S17 = _U64(17)
_A_Z = _U64(36969)
_A_W = _U64(18000)
_LCG_A = _U64(69069)
_LCG_C = _U64(1234567)
_TWO26 = 67108864.0
_INV53 = 1.0 / 9007199254740992.0
_TWO_PI = 6.283185307179586

_SEED_C1 = _U64(0x9E3779B9)
_SEED_C2 = _U64(0x85EBCA6B)
_SEED_C3 = _U64(0xC2B2AE35)
_SEED_C4 = _U64(0x27D4EB2F)


# ---------------------------------------------------------------------------
# RNG
# ---------------------------------------------------------------------------

@njit
def _rng_next32(st):
    st[0] = _A_Z * (st[0] & _M16) + (st[0] >> _S16)
    st[1] = _A_W * (st[1] & _M16) + (st[1] >> _S16)
    mwc = (((st[0] & _M32) << _S16) + st[1]) & _M32
    j = st[2]
    j = (j ^ ((j << _S17) & _M32)) & _M32
    j = j ^ (j >> _S13)
    j = (j ^ ((j << _S5) & _M32)) & _M32
    st[2] = j
    st[3] = (_LCG_A * st[3] + _LCG_C) & _M32
    return ((mwc ^ st[3]) + j) & _M32


@njit
def _wash32(x):
    for _ in range(3):
        x = (_LCG_A * x + _LCG_C) & _M32
        x = x ^ (x >> _S13)
        x = (x ^ ((x << _S17) & _M32)) & _M32
    return x


@njit
def rng_seed(st, lo, hi):
    """Initialise RNG state from two 32-bit seed halves."""
    z = _wash32(lo ^ _SEED_C1)
    w = _wash32(hi ^ _SEED_C2)
    jsr = _wash32(lo ^ hi ^ _SEED_C3)
    jcong = _wash32(((lo + hi) & _M32) ^ _SEED_C4)
    if z == _U64(0):
        z = _SEED_C1
    if w == _U64(0):
        w = _SEED_C2
    if jsr == _U64(0):
        jsr = _SEED_C3
    st[0] = z
    st[1] = w
    st[2] = jsr
    st[3] = jcong
    for _ in range(8):
        _rng_next32(st)


@njit
def rng_uniform(st):
    """Uniform draw in (0, 1] with 53 random bits."""
    hi = _rng_next32(st) >> _S5
    lo = _rng_next32(st) >> _S6
    return (float(hi) * _TWO26 + float(lo) + 1.0) * _INV53


@njit
def rng_normal(st):
    u1 = rng_uniform(st)
    u2 = rng_uniform(st)
    return math.sqrt(-2.0 * math.log(u1)) * math.cos(_TWO_PI * u2)


@njit
def rng_geometric(st, p):
    """Number of failures before the first success, support {0, 1, ...}."""
    u = rng_uniform(st)
    return int(math.floor(math.log(u) / math.log1p(-p)))


# ---------------------------------------------------------------------------
# Hawkes intensities
# ---------------------------------------------------------------------------

@njit
def intensities_at(kind, mu, a1, a2, a3, exc, anchor, log_t, log_e,
                   log_next, log_size, horizon, t, out):
    """Fill ``out`` with per-type intensities at time ``t``; return total.

    Exponential kernels (kind 0): evaluates the pairwise excitation state
    ``exc`` anchored at ``anchor`` without mutating it, so the value at a
    given time does not depend on how many intermediate queries were made.
    Power-law kernels (kind 1): direct sum over the event log, newest
    first, truncated at ``horizon`` seconds of age.
    """
    d = mu.shape[0]
    total = 0.0
    if kind == KIND_EXP:
        dt = t - anchor
        for i in range(d):
            s = mu[i]
            for j in range(d):
                e = exc[i, j]
                if e != 0.0:
                    s += e * math.exp(-a2[i, j] * dt)
            out[i] = s
            total += s
    else:
        for i in range(d):
            out[i] = mu[i]
        cap = log_t.shape[0]
        for k in range(log_size):
            idx = (log_next - 1 - k) % cap
            age = t - log_t[idx]
            if age > horizon:
                break
            j = log_e[idx]
            for i in range(d):
                a = a1[i, j]
                if a != 0.0:
                    out[i] += a * (1.0 + age / a3[i, j]) ** (-a2[i, j])
        for i in range(d):
            total += out[i]
    return total


@njit
def register_event(kind, a1, a2, exc, clock_f, clock_i, counts,
                   log_t, log_e, t_ev, j_ev):
    """Apply an event of type ``j_ev`` at time ``t_ev`` to the clock state.

    For exponential kernels the excitation state is decayed from its anchor
    to ``t_ev`` exactly once and the column-``j_ev`` jumps are added; this
    single-decay bookkeeping keeps the state independent of query history.
    """
    d = counts.shape[0]
    if kind == KIND_EXP:
        dt = t_ev - clock_f[CK_ANCHOR]
        for i in range(d):
            for j in range(d):
                if exc[i, j] != 0.0:
                    exc[i, j] *= math.exp(-a2[i, j] * dt)
            exc[i, j_ev] += a1[i, j_ev]
    clock_f[CK_ANCHOR] = t_ev
    clock_f[CK_LAST] = t_ev
    counts[j_ev] += 1
    cap = log_t.shape[0]
    pos = clock_i[CK_LOG_NEXT]
    log_t[pos] = t_ev
    log_e[pos] = j_ev
    clock_i[CK_LOG_NEXT] = (pos + 1) % cap
    if clock_i[CK_LOG_SIZE] < cap:
        clock_i[CK_LOG_SIZE] += 1


@njit
def next_event(kind, mu, a1, a2, a3, exc, clock_f, clock_i, counts,
               log_t, log_e, horizon, rng, t_max, lam_buf):
    """Ogata thinning step: next event at or before ``t_max``.

    Returns ``(t, type)`` with the clock's ``now`` advanced to ``t``, or
    ``(t_max, -1)`` when no event occurs, with ``now`` advanced to
    ``t_max``. A proposal that overshoots ``t_max`` is stored as a pending
    candidate (time and proposal bound) and consumed by the next call, so
    simulating in chunks consumes the identical random stream as one call:
    output is invariant to horizon partitioning, bit for bit.

    The proposal bound is the total intensity at the current anchor, valid
    because both kernel families are non-increasing between events.
    """
    while True:
        if math.isnan(clock_f[CK_PEND_T]):
            lam_bar = intensities_at(
                kind, mu, a1, a2, a3, exc, clock_f[CK_ANCHOR], log_t, log_e,
                clock_i[CK_LOG_NEXT], clock_i[CK_LOG_SIZE], horizon,
                clock_f[CK_NOW], lam_buf)
            if lam_bar <= 0.0:
                clock_f[CK_NOW] = t_max
                return t_max, -1
            u = rng_uniform(rng)
            clock_f[CK_PEND_T] = clock_f[CK_NOW] - math.log(u) / lam_bar
            clock_f[CK_PEND_BOUND] = lam_bar
        t_cand = clock_f[CK_PEND_T]
        if t_cand > t_max:
            clock_f[CK_NOW] = t_max
            return t_max, -1
        lam_bar = clock_f[CK_PEND_BOUND]
        lam_tot = intensities_at(
            kind, mu, a1, a2, a3, exc, clock_f[CK_ANCHOR], log_t, log_e,
            clock_i[CK_LOG_NEXT], clock_i[CK_LOG_SIZE], horizon,
            t_cand, lam_buf)
        v = rng_uniform(rng) * lam_bar
        clock_f[CK_NOW] = t_cand
        clock_f[CK_PEND_T] = np.nan
        if v <= lam_tot:
            acc = 0.0
            j_ev = counts.shape[0] - 1
            for i in range(counts.shape[0]):
                acc += lam_buf[i]
                if v <= acc:
                    j_ev = i
                    break
            return t_cand, j_ev


@njit
def hawkes_simulate(kind, mu, a1, a2, a3, exc, clock_f, clock_i, counts,
                    log_t, log_e, horizon, rng, t_max, lam_buf,
                    out_t, out_e):
    """Sample-and-apply events up to ``t_max``; returns (count, overflow)."""
    cap = out_t.shape[0]
    n = 0
    while True:
        if n >= cap:
            return n, 1
        t_ev, j_ev = next_event(kind, mu, a1, a2, a3, exc, clock_f, clock_i,
                                counts, log_t, log_e, horizon, rng, t_max,
                                lam_buf)
        if j_ev < 0:
            return n, 0
        register_event(kind, a1, a2, exc, clock_f, clock_i, counts,
                       log_t, log_e, t_ev, j_ev)
        out_t[n] = t_ev
        out_e[n] = j_ev
        n += 1


@njit
def history_counts(log_t, log_e, log_next, log_size, now, window, out):
    """Per-type event counts over [now - window, now]."""
    for i in range(out.shape[0]):
        out[i] = 0
    cap = log_t.shape[0]
    for k in range(log_size):
        idx = (log_next - 1 - k) % cap
        if now - log_t[idx] > window:
            break
        out[log_e[idx]] += 1


# ---------------------------------------------------------------------------
# Book transitions
# ---------------------------------------------------------------------------

@njit
def _promote_resolved(book, is_ask, redraw_val):
    """Second level becomes best after the top queue empties."""
    if is_ask == 1:
        book[PA] += 1
        book[QA] = book[QAD]
        book[QAD] = redraw_val
    else:
        book[PB] -= 1
        book[QB] = book[QBD]
        book[QBD] = redraw_val


@njit
def _queue_redraw(rng, redraw_p):
    return 1 + rng_geometric(rng, redraw_p)


@njit
def apply_exogenous_resolved(book, cash, act_kind, is_ask, tick,
                             hit, redraw_val):
    """Apply one exogenous event with all randomness resolved.

    ``hit`` resolves the cancel-targeting Bernoulli draws, ``redraw_val``
    the geometric queue redraw on promotion; both are ignored by branches
    that do not need them. Returns 0 (no agent fill), 1 (ask-side fill) or
    2 (bid-side fill).

    Modelling rules beyond the raw difference equations: in-spread orders
    are no-ops at a one-tick spread; a cancel never removes the last
    visible order of a level when that order is the agent's (the agent's
    orders belong to the agent) nor the last second-level order (the
    two-level window keeps q >= 1); a deep-resting agent order survives an
    in-spread arrival with its priority clamped to the visible window.
    """
    if is_ask == 1:
        iq, iqd, inn = QA, QAD, NA
    else:
        iq, iqd, inn = QB, QBD, NB

    if act_kind == K_LO_D:
        book[iqd] += 1
        return 0

    if act_kind == K_LO_T:
        book[iq] += 1
        return 0

    if act_kind == K_IS:
        if book[PA] - book[PB] <= 1:
            return 0
        if is_ask == 1:
            book[PA] -= 1
        else:
            book[PB] += 1
        q_prev = book[iq]
        book[iqd] = q_prev
        book[iq] = 1
        if book[inn] >= 0:
            n_new = book[inn] + 1
            bound = 1 + q_prev
            if n_new > bound:
                n_new = bound
            book[inn] = n_new
        return 0

    if act_kind == K_CO_T:
        q = book[iq]
        n = book[inn]
        if q == 1:
            if n == 0:
                return 0
            if n > 0:
                book[inn] = n - 1
            _promote_resolved(book, is_ask, redraw_val)
            return 0
        if n >= 0:
            if n >= q:
                book[inn] = n - 1
            elif n > 0 and hit == 1:
                book[inn] = n - 1
        book[iq] = q - 1
        return 0

    if act_kind == K_CO_D:
        qd = book[iqd]
        if qd == 1:
            return 0
        n = book[inn]
        if n > book[iq] and hit == 1:
            book[inn] = n - 1
        book[iqd] = qd - 1
        return 0

    # K_MO
    n = book[inn]
    fill = 0
    if n == 0:
        if is_ask == 1:
            cash[0] += float(book[PA]) * tick
            book[YINV] -= 1
            fill = 1
        else:
            cash[0] -= float(book[PB]) * tick
            book[YINV] += 1
            fill = 2
        book[inn] = -1
    elif n > 0:
        book[inn] = n - 1
    if book[iq] == 1:
        _promote_resolved(book, is_ask, redraw_val)
    else:
        book[iq] -= 1
    return fill


@njit
def apply_exogenous(book, cash, event, tick, redraw_p, rng):
    """Sample the event's randomness per the draw discipline, then apply."""
    act_kind = EVENT_KIND[event]
    is_ask = EVENT_SIDE[event]
    if is_ask == 1:
        iq, iqd, inn = QA, QAD, NA
    else:
        iq, iqd, inn = QB, QBD, NB
    q = book[iq]
    n = book[inn]
    hit = 0
    redraw_val = 1
    if act_kind == K_CO_T:
        if q > 1 and 0 < n < q:
            u = rng_uniform(rng)
            if u < float(n) / float(q):
                hit = 1
        elif q == 1 and n != 0:
            redraw_val = _queue_redraw(rng, redraw_p)
    elif act_kind == K_CO_D:
        if book[iqd] > 1 and n > q:
            u = rng_uniform(rng)
            if u < float(n - q) / float(book[iqd]):
                hit = 1
    elif act_kind == K_MO:
        if q == 1:
            redraw_val = _queue_redraw(rng, redraw_p)
    return apply_exogenous_resolved(book, cash, act_kind, is_ask, tick,
                                    hit, redraw_val)


@njit
def apply_impulse_resolved(book, cash, act_kind, is_ask, tick, redraw_val):
    """Apply one agent impulse with randomness resolved; returns K (cash).

    Admissibility must hold (checked by the caller). K is the signed
    instantaneous cash flow: zero for limit and cancel impulses, the
    trade's cash leg for market-order impulses.
    """
    if is_ask == 1:
        iq, iqd, inn = QA, QAD, NA
    else:
        iq, iqd, inn = QB, QBD, NB

    if act_kind == K_LO_T:
        book[inn] = book[iq]
        book[iq] += 1
        return 0.0

    if act_kind == K_LO_D:
        book[inn] = book[iq] + book[iqd]
        book[iqd] += 1
        return 0.0

    if act_kind == K_IS:
        if is_ask == 1:
            book[PA] -= 1
        else:
            book[PB] += 1
        book[iqd] = book[iq]
        book[iq] = 1
        book[inn] = 0
        return 0.0

    if act_kind == K_CO_T:
        n = book[inn]
        q = book[iq]
        book[inn] = -1
        if n < q:
            if q == 1:
                _promote_resolved(book, is_ask, redraw_val)
            else:
                book[iq] = q - 1
        else:
            if book[iqd] == 1:
                book[iqd] = redraw_val
            else:
                book[iqd] -= 1
        return 0.0

    # K_MO: consume one unit at the top of this side's queue.
    k_cash = 0.0
    if is_ask == 1:
        k_cash = -float(book[PA]) * tick
        cash[0] += k_cash
        book[YINV] += 1
    else:
        k_cash = float(book[PB]) * tick
        cash[0] += k_cash
        book[YINV] -= 1
    n = book[inn]
    if n > 0:
        book[inn] = n - 1
    if book[iq] == 1:
        _promote_resolved(book, is_ask, redraw_val)
    else:
        book[iq] -= 1
    return k_cash


@njit
def apply_impulse(book, cash, impulse, tick, redraw_p, rng):
    act_kind = IMPULSE_KIND[impulse]
    is_ask = IMPULSE_SIDE[impulse]
    if is_ask == 1:
        iq, iqd, inn = QA, QAD, NA
    else:
        iq, iqd, inn = QB, QBD, NB
    redraw_val = 1
    if act_kind == K_CO_T:
        n = book[inn]
        q = book[iq]
        if (n < q and q == 1) or (n >= q and book[iqd] == 1):
            redraw_val = _queue_redraw(rng, redraw_p)
    elif act_kind == K_MO:
        if book[iq] == 1:
            redraw_val = _queue_redraw(rng, redraw_p)
    return apply_impulse_resolved(book, cash, act_kind, is_ask, tick,
                                  redraw_val)


# ---------------------------------------------------------------------------
# Coupled market advance (environment hot loop)
# ---------------------------------------------------------------------------

@njit
def advance_interval(kind, mu, a1, a2, a3, exc, clock_f, clock_i, counts,
                     log_t, log_e, horizon, book, cash, tick, redraw_p,
                     rng, t_end, lam_buf, out_t, out_e, out_fill, out_px):
    """Advance the coupled Hawkes/LOB system to ``t_end``.

    Samples exogenous events by thinning and applies each to the book.
    Records (time, type, fill code, fill price) per event in the output
    buffers; returns ``(n_events, overflow)`` where overflow = 1 means the
    buffers filled before ``t_end`` and the caller should re-invoke.
    """
    cap = out_t.shape[0]
    n = 0
    while True:
        if n >= cap:
            return n, 1
        t_ev, j_ev = next_event(kind, mu, a1, a2, a3, exc, clock_f, clock_i,
                                counts, log_t, log_e, horizon, rng, t_end,
                                lam_buf)
        if j_ev < 0:
            return n, 0
        register_event(kind, a1, a2, exc, clock_f, clock_i, counts,
                       log_t, log_e, t_ev, j_ev)
        pa_pre = book[PA]
        pb_pre = book[PB]
        fill = apply_exogenous(book, cash, j_ev, tick, redraw_p, rng)
        out_t[n] = t_ev
        out_e[n] = j_ev
        out_fill[n] = fill
        if fill == 1:
            out_px[n] = float(pa_pre) * tick
        elif fill == 2:
            out_px[n] = float(pb_pre) * tick
        else:
            out_px[n] = 0.0
        n += 1
