"""Hawkes kernel parameter sets.

Two kernel families are supported for the mutually-exciting process over
the event alphabet:

* exponential: phi_ij(t) = alpha_ij * exp(-gamma_ij * t)
* power-law:   phi_ij(t) = alpha_pl_ij * (1 + t / delta_pl_ij) ** (-beta_pl_ij)

The power-law form is evaluated by direct summation over a truncated event
log (no finite-dimensional recursion exists). The neglected tail mass per
logged event older than the horizon H is bounded by the integrated kernel
tail alpha * delta / (beta - 1) * (1 + H / delta) ** (1 - beta); see
:func:`powerlaw_tail_intensity_bound` for the intensity-level bound used
by the accuracy tests.

Stability requires the spectral radius of the branching matrix (entrywise
integral of the kernel) to be below one; constructors enforce it.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .events import MIRROR_EVENT, N_EVENT_TYPES

EXPONENTIAL = "exponential"
POWERLAW = "powerlaw"

DEFAULT_PL_HORIZON = 60.0


@dataclass(frozen=True, eq=False)
class KernelParams:
    """Baseline/excitation/decay parameters of a d-type Hawkes process."""

    kind: str
    mu: np.ndarray
    alpha: Optional[np.ndarray] = None
    gamma: Optional[np.ndarray] = None
    alpha_pl: Optional[np.ndarray] = None
    beta_pl: Optional[np.ndarray] = None
    delta_pl: Optional[np.ndarray] = None
    pl_horizon: float = DEFAULT_PL_HORIZON

    def __post_init__(self):
        mu = np.ascontiguousarray(np.asarray(self.mu, dtype=np.float64))
        object.__setattr__(self, "mu", mu)
        if mu.ndim != 1 or mu.shape[0] < 1:
            raise ValueError("mu must be a nonempty vector")
        if np.any(mu < 0) or not np.all(np.isfinite(mu)):
            raise ValueError("baseline intensities must be finite and >= 0")
        d = mu.shape[0]
        if self.kind == EXPONENTIAL:
            alpha = self._matrix("alpha", self.alpha, d)
            gamma = self._matrix("gamma", self.gamma, d)
            if np.any(gamma <= 0):
                raise ValueError("gamma entries must be > 0")
            object.__setattr__(self, "alpha", alpha)
            object.__setattr__(self, "gamma", gamma)
        elif self.kind == POWERLAW:
            alpha_pl = self._matrix("alpha_pl", self.alpha_pl, d)
            beta_pl = self._matrix("beta_pl", self.beta_pl, d)
            delta_pl = self._matrix("delta_pl", self.delta_pl, d)
            if np.any(beta_pl <= 1):
                raise ValueError("beta_pl entries must be > 1")
            if np.any(delta_pl <= 0):
                raise ValueError("delta_pl entries must be > 0")
            if self.pl_horizon <= 0:
                raise ValueError("pl_horizon must be > 0")
            object.__setattr__(self, "alpha_pl", alpha_pl)
            object.__setattr__(self, "beta_pl", beta_pl)
            object.__setattr__(self, "delta_pl", delta_pl)
        else:
            raise ValueError(f"unknown kernel kind {self.kind!r}")
        rho = self.spectral_radius
        if not rho < 1.0:
            raise ValueError(
                f"unstable parameters: branching spectral radius {rho:.6f} >= 1")

    @staticmethod
    def _matrix(name: str, value, d: int) -> np.ndarray:
        if value is None:
            raise ValueError(f"{name} is required for this kernel kind")
        m = np.ascontiguousarray(np.asarray(value, dtype=np.float64))
        if m.shape != (d, d):
            raise ValueError(f"{name} must have shape ({d}, {d})")
        if name.startswith("alpha") and np.any(m < 0):
            raise ValueError(f"{name} entries must be >= 0")
        if not np.all(np.isfinite(m)):
            raise ValueError(f"{name} entries must be finite")
        return m

    @property
    def n_types(self) -> int:
        return int(self.mu.shape[0])

    @property
    def branching_matrix(self) -> np.ndarray:
        """Entry ij = integral of phi_ij over [0, inf)."""
        if self.kind == EXPONENTIAL:
            return self.alpha / self.gamma
        return self.alpha_pl * self.delta_pl / (self.beta_pl - 1.0)

    @property
    def spectral_radius(self) -> float:
        return float(np.max(np.abs(np.linalg.eigvals(self.branching_matrix))))

    @property
    def stationary_rates(self) -> np.ndarray:
        """Stationary mean intensities (I - B)^-1 mu."""
        b = self.branching_matrix
        return np.linalg.solve(np.eye(self.n_types) - b, self.mu)

    def kernel_args(self):
        """(kind_code, mu, a1, a2, a3, horizon) tuple for the kernels."""
        d = self.n_types
        if self.kind == EXPONENTIAL:
            return 0, self.mu, self.alpha, self.gamma, \
                np.zeros((d, d)), np.inf
        return 1, self.mu, self.alpha_pl, self.beta_pl, self.delta_pl, \
            float(self.pl_horizon)

    def to_dict(self) -> dict:
        out = {"kind": self.kind, "mu": self.mu.tolist()}
        if self.kind == EXPONENTIAL:
            out["alpha"] = self.alpha.tolist()
            out["gamma"] = self.gamma.tolist()
        else:
            out["alpha_pl"] = self.alpha_pl.tolist()
            out["beta_pl"] = self.beta_pl.tolist()
            out["delta_pl"] = self.delta_pl.tolist()
            out["pl_horizon"] = self.pl_horizon
        return out

    @classmethod
    def from_dict(cls, doc: dict) -> "KernelParams":
        kind = doc["kind"]
        if kind == EXPONENTIAL:
            return cls(kind=kind, mu=doc["mu"], alpha=doc["alpha"],
                       gamma=doc["gamma"])
        return cls(kind=kind, mu=doc["mu"], alpha_pl=doc["alpha_pl"],
                   beta_pl=doc["beta_pl"], delta_pl=doc["delta_pl"],
                   pl_horizon=float(doc.get("pl_horizon",
                                            DEFAULT_PL_HORIZON)))

    @classmethod
    def from_json(cls, path) -> "KernelParams":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def powerlaw_tail_intensity_bound(params: KernelParams,
                                  n_old_events: int) -> float:
    """Upper bound on the intensity truncation error from old events.

    Each event older than the horizon contributes at most
    max_ij phi_ij(horizon) to any component intensity.
    """
    if params.kind != POWERLAW:
        raise ValueError("tail bound applies to power-law kernels")
    phi_h = params.alpha_pl * (
        1.0 + params.pl_horizon / params.delta_pl) ** (-params.beta_pl)
    return float(n_old_events) * float(phi_h.max())


# ---------------------------------------------------------------------------
# Default desk-scale parameter sets
# ---------------------------------------------------------------------------

# Per-side baselines, canonical ask-side order
# [LO_D, LO_T, CO_T, CO_D, MO, IS] in events per second.
_BASE_SIDE_MU = {
    "LO_D": 0.35, "LO_T": 0.50, "CO_T": 0.30,
    "CO_D": 0.25, "MO": 0.20, "IS": 0.10,
}

_DEFAULT_GAMMA = 2.0
_DEFAULT_RADIUS = 0.8
_MIRROR_COUPLING = 0.5
_PL_BETA = 2.5
_PL_DELTA = 0.2


def _default_mu() -> np.ndarray:
    mu = np.empty(N_EVENT_TYPES)
    ask = [_BASE_SIDE_MU[k] for k in ("LO_D", "LO_T", "CO_T", "CO_D",
                                      "MO", "IS")]
    for i, v in enumerate(ask):
        mu[i] = v
        mu[MIRROR_EVENT[i]] = v
    return mu


def _default_branching() -> np.ndarray:
    """Self-excitation plus mirror coupling, scaled to radius 0.8 exactly.

    eigenvalues of I + c*Mirror are 1 +/- c, so the scale below gives a
    spectral radius of exactly ``_DEFAULT_RADIUS`` without an eigensolver.
    """
    m = np.eye(N_EVENT_TYPES)
    for i in range(N_EVENT_TYPES):
        m[i, MIRROR_EVENT[i]] = _MIRROR_COUPLING
    return m * (_DEFAULT_RADIUS / (1.0 + _MIRROR_COUPLING))


def default_kernel_params(profile: str = EXPONENTIAL) -> KernelParams:
    """Shipped 12-type parameter set: ask/bid symmetric, radius 0.8.

    Profiles: ``exponential``, ``powerlaw`` (same branching matrix), and
    ``poisson`` (exponential with zero excitation; each type is an
    independent Poisson stream).
    """
    mu = _default_mu()
    branching = _default_branching()
    if profile == EXPONENTIAL:
        gamma = np.full((N_EVENT_TYPES, N_EVENT_TYPES), _DEFAULT_GAMMA)
        return KernelParams(kind=EXPONENTIAL, mu=mu,
                            alpha=branching * gamma, gamma=gamma)
    if profile == POWERLAW:
        beta = np.full((N_EVENT_TYPES, N_EVENT_TYPES), _PL_BETA)
        delta = np.full((N_EVENT_TYPES, N_EVENT_TYPES), _PL_DELTA)
        alpha_pl = branching * (beta - 1.0) / delta
        return KernelParams(kind=POWERLAW, mu=mu, alpha_pl=alpha_pl,
                            beta_pl=beta, delta_pl=delta)
    if profile == "poisson":
        d = N_EVENT_TYPES
        return KernelParams(kind=EXPONENTIAL, mu=mu, alpha=np.zeros((d, d)),
                            gamma=np.full((d, d), _DEFAULT_GAMMA))
    raise ValueError(f"unknown kernel profile {profile!r}")


def poisson_flow_params(mo_rate: float, lo_top_rate: float = 0.8,
                        co_top_rate: float = 0.4) -> KernelParams:
    """Poisson (zero-excitation) flow with configurable top-of-book churn.

    Ask/bid symmetric baselines with the market-order and top-queue rates
    overridable; deep and in-spread rates keep their defaults. Used by the
    fill-rate studies and the training smoke tests, where market orders at
    decision cadence make queue dynamics informative within one episode.
    """
    mu = _default_mu()
    overrides = {"MO": mo_rate, "LO_T": lo_top_rate, "CO_T": co_top_rate}
    ask_index = {"LO_D": 0, "LO_T": 1, "CO_T": 2, "CO_D": 3, "MO": 4,
                 "IS": 5}
    for name, rate in overrides.items():
        i = ask_index[name]
        mu[i] = rate
        mu[MIRROR_EVENT[i]] = rate
    d = N_EVENT_TYPES
    return KernelParams(kind=EXPONENTIAL, mu=mu, alpha=np.zeros((d, d)),
                        gamma=np.full((d, d), _DEFAULT_GAMMA))
