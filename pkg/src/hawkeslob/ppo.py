"""Two-network policy (decision timing + impulse selection) trained with
PPO's clipped surrogate, GAE advantages, an entropy bonus, and
self-imitation learning from a replay of above-value returns.

The joint policy factorizes as Bernoulli (intervene or not) times a
masked categorical over the four restricted impulses:

    log pi(a|s) = log p(d|s) + d * log p(psi | d=1, s)

and both heads share one clipped-surrogate/SIL objective. The value head
is a separate network. Inadmissible actions are masked out of the
categorical: they receive exactly zero probability and exactly zero
gradient. When no action is admissible the decision is forced to 0 and
the recorded log-probability is log p(d=0).
"""

from __future__ import annotations

import heapq
import json
import math
import os
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .env import (EpisodeConfig, MarketMakingEnv, OBS_BLOCKS, OBS_DIM,
                  Observation)
from .events import RESTRICTED_IMPULSES
from .book import BookInitConfig
from .nn import DenseNet, Gradients
from .params import KernelParams
from .rng import RandomStream, derive_seed

N_ACTIONS = len(RESTRICTED_IMPULSES)
_RESTRICTED_IDX = np.array([int(p) for p in RESTRICTED_IMPULSES])

ABLATION_CHOICES = ("none", "history", "intensity", "spread",
                    "relative-position")


@dataclass(frozen=True)
class TrainerConfig:
    clip_eps: float = 0.2
    discount: float = 0.999
    gae_lambda: float = 0.95
    beta_sil: float = 0.1
    beta_entropy: float = 0.01
    epochs_per_update: int = 4
    minibatch_size: int = 256
    episodes_per_update: int = 5
    total_episodes: int = 60
    learning_rate: float = 3e-4
    hidden_sizes: Tuple[int, ...] = (64, 64)
    sil_capacity: int = 4096
    sil_batch: int = 256
    sil_positive_part: bool = False
    normalize_advantages: bool = True
    freeze_decision_updates: int = 0
    ablation: str = "none"
    checkpoint_every: int = 5

    def __post_init__(self):
        if not 0.0 < self.clip_eps:
            raise ValueError("clip_eps must be positive")
        if not 0.0 < self.discount <= 1.0:
            raise ValueError("discount must be in (0, 1]")
        if not 0.0 < self.gae_lambda <= 1.0:
            raise ValueError("gae_lambda must be in (0, 1]")
        if self.ablation not in ABLATION_CHOICES:
            raise ValueError(f"unknown ablation {self.ablation!r}")

    def to_dict(self) -> dict:
        doc = {k: getattr(self, k) for k in self.__dataclass_fields__}
        doc["hidden_sizes"] = list(self.hidden_sizes)
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "TrainerConfig":
        doc = dict(doc)
        if "hidden_sizes" in doc:
            doc["hidden_sizes"] = tuple(doc["hidden_sizes"])
        return cls(**doc)


# ---------------------------------------------------------------------------
# Observation normalization / ablation
# ---------------------------------------------------------------------------

def build_normalizer(kernel_params: KernelParams, config: EpisodeConfig,
                     tick: float = 0.01) -> Tuple[np.ndarray, np.ndarray]:
    """Fixed affine scales derived from the configuration.

    Intensities and history counts are centred/scaled by the stationary
    rates, so features sit near zero at equilibrium regardless of the
    kernel profile.
    """
    stat = kernel_params.stationary_rates
    center = np.zeros(OBS_DIM)
    scale = np.ones(OBS_DIM)
    center[0] = config.initial_cash
    scale[0] = 200.0
    scale[1] = 5.0
    scale[2] = 5.0 * tick
    lo, hi = OBS_BLOCKS["intensity"]
    center[lo:hi] = stat
    scale[lo:hi] = np.maximum(stat, 1e-3)
    lo, hi = OBS_BLOCKS["history"]
    center[lo:hi - 1] = stat * config.history_window
    scale[lo:hi - 1] = np.maximum(stat * config.history_window, 1.0)
    scale[hi - 1] = config.history_window
    lo, hi = OBS_BLOCKS["t_remaining"]
    center[lo] = config.horizon / 2.0
    scale[lo] = config.horizon / 2.0
    return center, scale


class PolicyNets:
    """Decision, action and value networks plus the feature map."""

    def __init__(self, center: np.ndarray, scale: np.ndarray,
                 hidden_sizes: Sequence[int] = (64, 64),
                 learning_rate: float = 3e-4, ablation: str = "none",
                 rng: Optional[RandomStream] = None):
        rng = rng or RandomStream(0)
        sizes = [OBS_DIM, *hidden_sizes]
        self.decision = DenseNet([*sizes, 1], head="binary-logit",
                                 learning_rate=learning_rate,
                                 rng=rng.spawn(1))
        self.action = DenseNet([*sizes, N_ACTIONS], head="4-way-logits",
                               learning_rate=learning_rate,
                               rng=rng.spawn(2))
        self.value = DenseNet([*sizes, 1], head="scalar",
                              learning_rate=learning_rate, rng=rng.spawn(3))
        self.center = np.asarray(center, dtype=np.float64)
        self.scale = np.asarray(scale, dtype=np.float64)
        if ablation not in ABLATION_CHOICES:
            raise ValueError(f"unknown ablation {ablation!r}")
        self.ablation = ablation

    def features(self, obs: Observation) -> np.ndarray:
        vec = (obs.to_vector() - self.center) / self.scale
        if self.ablation != "none":
            lo, hi = OBS_BLOCKS[self.ablation]
            vec[lo:hi] = 0.0
        return vec

    def to_dict(self, rng: Optional[RandomStream] = None) -> dict:
        return {
            "decision": self.decision.to_dict(),
            "action": self.action.to_dict(),
            "value": self.value.to_dict(),
            "center": self.center.tolist(),
            "scale": self.scale.tolist(),
            "ablation": self.ablation,
            "rng_state": None if rng is None else rng.getstate(),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "PolicyNets":
        nets = cls.__new__(cls)
        nets.decision = DenseNet.from_dict(doc["decision"])
        nets.action = DenseNet.from_dict(doc["action"])
        nets.value = DenseNet.from_dict(doc["value"])
        nets.center = np.asarray(doc["center"], dtype=np.float64)
        nets.scale = np.asarray(doc["scale"], dtype=np.float64)
        nets.ablation = doc["ablation"]
        return nets

    def save(self, path, rng: Optional[RandomStream] = None) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(rng), fh)

    @classmethod
    def load(cls, path) -> "PolicyNets":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


# ---------------------------------------------------------------------------
# Policy arithmetic
# ---------------------------------------------------------------------------

def _log_sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = -np.log1p(np.exp(-z[pos]))
    out[~pos] = z[~pos] - np.log1p(np.exp(z[~pos]))
    return out


def _sigmoid(z: np.ndarray) -> np.ndarray:
    return np.exp(_log_sigmoid(z))


def masked_log_softmax(logits: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Row-wise log-softmax over admissible entries; -inf elsewhere.

    Rows with no admissible entry come back all -inf.
    """
    out = np.full_like(logits, -np.inf)
    any_adm = mask.any(axis=1)
    if not any_adm.any():
        return out
    masked = np.where(mask, logits, -np.inf)
    rows = np.flatnonzero(any_adm)
    m = masked[rows]
    row_max = m.max(axis=1, keepdims=True)
    shifted = m - row_max
    ex = np.where(np.isfinite(shifted), np.exp(shifted), 0.0)
    log_z = np.log(ex.sum(axis=1, keepdims=True))
    out[rows] = np.where(mask[rows], shifted - log_z, -np.inf)
    return out


def act(nets: PolicyNets, features: np.ndarray, mask: np.ndarray,
        rng: RandomStream) -> Tuple[int, int, float, float]:
    """Sample (decision, action index, joint log-prob, value estimate).

    ``mask`` is over the restricted action head. The decision uniform is
    drawn only when at least one action is admissible; the categorical
    uniform only when intervening.
    """
    z_d = float(nets.decision.forward(features)[0])
    value = float(nets.value.forward(features)[0])
    logsig = float(_log_sigmoid(np.array([z_d]))[0])
    logsig_neg = float(_log_sigmoid(np.array([-z_d]))[0])
    if not mask.any():
        return 0, -1, logsig_neg, value
    p1 = math.exp(logsig)
    decision = 1 if rng.uniform() < p1 else 0
    if decision == 0:
        return 0, -1, logsig_neg, value
    logits = nets.action.forward(features).reshape(1, -1)
    logp_a = masked_log_softmax(logits, mask.reshape(1, -1))[0]
    probs = np.where(np.isfinite(logp_a), np.exp(logp_a), 0.0)
    u = rng.uniform()
    acc = 0.0
    a_idx = int(np.flatnonzero(mask)[-1])
    for k in range(N_ACTIONS):
        acc += probs[k]
        if u <= acc:
            a_idx = k
            break
    return 1, a_idx, logsig + float(logp_a[a_idx]), value


# ---------------------------------------------------------------------------
# Rollout storage
# ---------------------------------------------------------------------------

@dataclass
class Transition:
    features: np.ndarray
    decision: int
    action: int
    logp: float
    reward: float
    value: float
    mask: np.ndarray
    ret: float = math.nan
    adv: float = math.nan


@dataclass
class EpisodeResult:
    transitions: List[Transition]
    pnl: float
    mean_abs_inventory: float
    n_fills: int
    action_counts: Dict[str, int]
    total_reward: float


def compute_gae(rewards: np.ndarray, values: np.ndarray, discount: float,
                gae_lambda: float) -> Tuple[np.ndarray, np.ndarray]:
    """GAE advantages and returns-to-go with terminal bootstrap 0."""
    n = len(rewards)
    if n == 0:
        raise ValueError("empty trajectory")
    adv = np.empty(n)
    gae = 0.0
    for i in range(n - 1, -1, -1):
        v_next = values[i + 1] if i + 1 < n else 0.0
        delta = rewards[i] + discount * v_next - values[i]
        gae = delta + discount * gae_lambda * gae
        adv[i] = gae
    return adv, adv + values


class SILBuffer:
    """Capacity-bounded replay; evicts the lowest (R - V at insert) first."""

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = capacity
        self._heap: List[Tuple[float, int, Transition]] = []
        self._counter = 0

    def __len__(self) -> int:
        return len(self._heap)

    def add(self, transition: Transition) -> None:
        priority = transition.ret - transition.value
        heapq.heappush(self._heap, (priority, self._counter, transition))
        self._counter += 1
        if len(self._heap) > self.capacity:
            heapq.heappop(self._heap)

    def sample(self, rng: RandomStream, k: int) -> List[Transition]:
        if not self._heap:
            return []
        return [self._heap[rng.integer(len(self._heap))][2]
                for _ in range(k)]


# ---------------------------------------------------------------------------
# Losses
# ---------------------------------------------------------------------------

def _policy_forward(nets: PolicyNets, feats: np.ndarray, decisions: np.ndarray,
                    actions: np.ndarray, masks: np.ndarray):
    """Shared forward pieces for the PPO and SIL losses."""
    z_d = nets.decision.forward(feats).ravel()
    logits = nets.action.forward(feats)
    logsig = _log_sigmoid(z_d)
    logsig_neg = _log_sigmoid(-z_d)
    p1 = np.exp(logsig)
    logp_a = masked_log_softmax(logits, masks)
    p_a = np.where(np.isfinite(logp_a), np.exp(logp_a), 0.0)
    logp_a_safe = np.where(np.isfinite(logp_a), logp_a, 0.0)
    took = decisions == 1
    idx = np.where(took, np.maximum(actions, 0), 0)
    logp_sel = logp_a_safe[np.arange(len(feats)), idx]
    logp = np.where(took, logsig + logp_sel, logsig_neg)
    return z_d, logits, p1, logsig, logsig_neg, p_a, logp_a_safe, logp


def _policy_logp_grads(nets: PolicyNets, feats: np.ndarray,
                       decisions: np.ndarray, actions: np.ndarray,
                       p1: np.ndarray, p_a: np.ndarray,
                       g_logp: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Map d(loss)/d(logp) to decision-logit and action-logit gradients."""
    g_zd = g_logp * (decisions - p1)
    g_logits = np.zeros_like(p_a)
    took = np.flatnonzero(decisions == 1)
    if took.size:
        one_hot = np.zeros_like(p_a[took])
        one_hot[np.arange(took.size), actions[took]] = 1.0
        g_logits[took] = g_logp[took, None] * (one_hot - p_a[took])
    return g_zd, g_logits


def ppo_loss(nets: PolicyNets, batch: Dict[str, np.ndarray],
             config: TrainerConfig) -> Tuple[float, Dict[str, Gradients],
                                             Dict[str, float]]:
    """Clipped surrogate + value MSE - entropy bonus, with exact grads.

    ``batch`` keys: features (B,F), decisions (B,), actions (B,),
    logp_old (B,), adv (B,), ret (B,), masks (B,4).
    """
    feats = batch["features"]
    decisions = batch["decisions"]
    actions = batch["actions"]
    logp_old = batch["logp_old"]
    adv = batch["adv"]
    ret = batch["ret"]
    masks = batch["masks"]
    n = len(feats)
    if n == 0:
        raise ValueError("empty batch")

    z_d, logits, p1, logsig, logsig_neg, p_a, logp_a_safe, logp = \
        _policy_forward(nets, feats, decisions, actions, masks)
    ratio = np.exp(logp - logp_old)
    if not np.all(np.isfinite(ratio)):
        raise FloatingPointError("non-finite probability ratio; stored "
                                 "log-probs inconsistent with policy")
    eps = config.clip_eps
    s1 = ratio * adv
    s2 = np.clip(ratio, 1.0 - eps, 1.0 + eps) * adv
    surrogate = np.minimum(s1, s2)
    policy_loss = -surrogate.mean()

    v = nets.value.forward(feats).ravel()
    value_err = ret - v
    value_loss = float((value_err ** 2).mean())

    h_d = -(p1 * logsig + (1.0 - p1) * logsig_neg)
    h_a = -(p_a * logp_a_safe).sum(axis=1)
    entropy = float((h_d + p1 * h_a).mean())

    loss = float(policy_loss + value_loss - config.beta_entropy * entropy)

    # gradient of the clipped surrogate: active where min picks s1
    active = (s1 <= s2).astype(np.float64)
    g_logp = -(adv * ratio * active) / n
    g_zd, g_logits = _policy_logp_grads(nets, feats, decisions, actions,
                                        p1, p_a, g_logp)

    # entropy bonus gradients
    beta = config.beta_entropy
    dp1_dz = p1 * (1.0 - p1)
    dhd_dz = dp1_dz * (logsig_neg - logsig)
    g_zd += -(beta / n) * (dhd_dz + h_a * dp1_dz)
    dha_dlogits = -(p_a * (logp_a_safe + h_a[:, None]))
    g_logits += -(beta / n) * p1[:, None] * dha_dlogits

    g_v = -2.0 * value_err / n

    grads = {
        "decision": nets.decision.backward(feats, g_zd.reshape(-1, 1)),
        "action": nets.action.backward(feats, g_logits),
        "value": nets.value.backward(feats, g_v.reshape(-1, 1)),
    }
    stats = {
        "policy_loss": float(policy_loss),
        "value_loss": value_loss,
        "entropy": entropy,
        "mean_ratio": float(ratio.mean()),
        "clip_fraction": float((s2 < s1).mean()),
    }
    return loss, grads, stats


def sil_loss(nets: PolicyNets, entries: Sequence[Transition],
             config: TrainerConfig) -> Tuple[float, Dict[str, Gradients]]:
    """Self-imitation loss -E[w(R, V) log pi(a|s)] over buffer samples.

    The weight is the indicator 1{R > V} by default, or the positive part
    (R - V)+ with ``sil_positive_part``. V enters the weight only (no
    value-head gradient): when every sampled return is at or below the
    value estimate, the gradients are exactly zero.
    """
    empty = {
        "decision": nets.decision.zero_grads(),
        "action": nets.action.zero_grads(),
        "value": nets.value.zero_grads(),
    }
    if not entries:
        return 0.0, empty
    feats = np.stack([tr.features for tr in entries])
    decisions = np.array([tr.decision for tr in entries])
    actions = np.array([tr.action for tr in entries])
    rets = np.array([tr.ret for tr in entries])
    masks = np.stack([tr.mask for tr in entries])
    n = len(entries)

    z_d, logits, p1, logsig, logsig_neg, p_a, logp_a_safe, logp = \
        _policy_forward(nets, feats, decisions, actions, masks)
    v = nets.value.forward(feats).ravel()
    if config.sil_positive_part:
        weight = np.maximum(rets - v, 0.0)
    else:
        weight = (rets > v).astype(np.float64)
    loss = float(-(weight * logp).mean())
    if not weight.any():
        return loss, empty
    g_logp = -weight / n
    g_zd, g_logits = _policy_logp_grads(nets, feats, decisions, actions,
                                        p1, p_a, g_logp)
    grads = {
        "decision": nets.decision.backward(feats, g_zd.reshape(-1, 1)),
        "action": nets.action.backward(feats, g_logits),
        "value": nets.value.zero_grads(),
    }
    return loss, grads


def _add_grads(a: Gradients, b: Gradients, coef: float) -> Gradients:
    return [(dw1 + coef * dw2, db1 + coef * db2)
            for (dw1, db1), (dw2, db2) in zip(a, b)]


def combined_loss(nets: PolicyNets, batch: Dict[str, np.ndarray],
                  sil_entries: Sequence[Transition], config: TrainerConfig
                  ) -> Tuple[float, Dict[str, Gradients], Dict[str, float]]:
    """PPO loss plus beta_sil times the SIL loss, with summed gradients."""
    loss_p, grads_p, stats = ppo_loss(nets, batch, config)
    loss_s, grads_s = sil_loss(nets, sil_entries, config)
    grads = {name: _add_grads(grads_p[name], grads_s[name], config.beta_sil)
             for name in grads_p}
    stats["sil_loss"] = loss_s
    return loss_p + config.beta_sil * loss_s, grads, stats


# ---------------------------------------------------------------------------
# Rollouts and the training loop
# ---------------------------------------------------------------------------

def episode_pnl(env) -> float:
    """Mark-to-market wealth change net of the terminal inventory fee."""
    fee = 0.0
    if env.config.fee_bps > 0:
        book, agent = env.state()
        fee = env.config.fee_bps * 1e-4 * abs(agent.inventory) * book.p_mid
    return env.mark_to_market() - env.config.initial_cash - fee


def rollout_episode(env, nets: PolicyNets, rng: RandomStream,
                    env_seed: int, discount: float = 0.999,
                    gae_lambda: float = 0.95) -> EpisodeResult:
    obs = env.reset(seed=env_seed)
    transitions: List[Transition] = []
    abs_inv = []
    action_counts: Dict[str, int] = {"HOLD": 0}
    done = False
    while not done:
        mask = env.admissible_mask()[_RESTRICTED_IDX]
        features = nets.features(obs)
        decision, a_idx, logp, value = act(nets, features, mask, rng)
        if decision == 1:
            psi = RESTRICTED_IMPULSES[a_idx]
            obs, reward, done = env.step(1, psi)
            action_counts[psi.name] = action_counts.get(psi.name, 0) + 1
        else:
            obs, reward, done = env.step(0)
            action_counts["HOLD"] += 1
        transitions.append(Transition(
            features=features, decision=decision, action=a_idx,
            logp=logp, reward=reward.total, value=value, mask=mask.copy()))
        abs_inv.append(abs(obs.inventory))
    rewards = np.array([tr.reward for tr in transitions])
    values = np.array([tr.value for tr in transitions])
    adv, ret = compute_gae(rewards, values, discount, gae_lambda)
    for tr, a, r in zip(transitions, adv, ret):
        tr.adv = float(a)
        tr.ret = float(r)
    return EpisodeResult(
        transitions=transitions, pnl=episode_pnl(env),
        mean_abs_inventory=float(np.mean(abs_inv)),
        n_fills=len(env.fills), action_counts=action_counts,
        total_reward=float(env.total_reward))


@dataclass
class TrainResult:
    nets: PolicyNets
    log_rows: List[dict]
    checkpoint_path: Optional[str] = None


def train(kernel_params: KernelParams, episode_config: EpisodeConfig,
          trainer_config: TrainerConfig, seed: int,
          out_dir: Optional[str] = None,
          init_config: BookInitConfig = BookInitConfig(),
          env: Optional[object] = None) -> TrainResult:
    """Full training loop; reproducible from ``seed``.

    ``env`` may supply a pre-built environment (any object with the
    MarketMakingEnv step/reset/admissible_mask surface); by default a
    fresh MarketMakingEnv over ``kernel_params`` is used.
    """
    tc = trainer_config
    stream = RandomStream(derive_seed(seed, 0x7141))
    center, scale = build_normalizer(kernel_params, episode_config,
                                     tick=init_config.tick)
    nets = PolicyNets(center, scale, hidden_sizes=tc.hidden_sizes,
                      learning_rate=tc.learning_rate, ablation=tc.ablation,
                      rng=stream.spawn(0))
    buffer = SILBuffer(tc.sil_capacity)
    if env is None:
        env = MarketMakingEnv(kernel_params, episode_config, init_config)

    log_rows: List[dict] = []
    pnls: List[float] = []
    episode = 0
    update = 0
    n_updates = math.ceil(tc.total_episodes / tc.episodes_per_update)
    checkpoint_path = None

    while episode < tc.total_episodes:
        results = []
        n_eps = min(tc.episodes_per_update, tc.total_episodes - episode)
        for _ in range(n_eps):
            res = rollout_episode(env, nets, stream,
                                  derive_seed(seed, 0xE6, episode),
                                  discount=tc.discount,
                                  gae_lambda=tc.gae_lambda)
            results.append(res)
            pnls.append(res.pnl)
            episode += 1
        transitions = [tr for res in results for tr in res.transitions]
        for tr in transitions:
            buffer.add(tr)

        batch_all = {
            "features": np.stack([tr.features for tr in transitions]),
            "decisions": np.array([tr.decision for tr in transitions]),
            "actions": np.array([tr.action for tr in transitions]),
            "logp_old": np.array([tr.logp for tr in transitions]),
            "adv": np.array([tr.adv for tr in transitions]),
            "ret": np.array([tr.ret for tr in transitions]),
            "masks": np.stack([tr.mask for tr in transitions]),
        }
        if tc.normalize_advantages:
            a = batch_all["adv"]
            std = a.std()
            batch_all["adv"] = (a - a.mean()) / (std if std > 0 else 1.0)

        stats: Dict[str, float] = {}
        n = len(transitions)
        freeze_decision = update < tc.freeze_decision_updates
        for _ in range(tc.epochs_per_update):
            order = stream.permutation(n)
            for lo in range(0, n, tc.minibatch_size):
                sel = order[lo:lo + tc.minibatch_size]
                minibatch = {k: v[sel] for k, v in batch_all.items()}
                sil_entries = buffer.sample(stream, min(tc.sil_batch,
                                                        len(buffer)))
                loss, grads, stats = combined_loss(nets, minibatch,
                                                   sil_entries, tc)
                if not math.isfinite(loss):
                    raise RuntimeError(
                        f"non-finite loss at update {update}, episode "
                        f"{episode}; stats={stats}")
                if not freeze_decision:
                    nets.decision.adam_step(grads["decision"])
                nets.action.adam_step(grads["action"])
                nets.value.adam_step(grads["value"])
        update += 1

        pnl_arr = np.array(pnls)
        sharpe_to_date = float("nan")
        if len(pnl_arr) >= 2 and pnl_arr.std(ddof=1) > 0:
            sharpe_to_date = float(pnl_arr.mean() / pnl_arr.std(ddof=1))
        for k, res in enumerate(results):
            log_rows.append({
                "episode": episode - len(results) + k,
                "pnl": res.pnl,
                "mean_abs_inventory": res.mean_abs_inventory,
                "n_fills": res.n_fills,
                "total_reward": res.total_reward,
                "sharpe_to_date": sharpe_to_date,
                "policy_loss": stats.get("policy_loss", float("nan")),
                "value_loss": stats.get("value_loss", float("nan")),
                "entropy": stats.get("entropy", float("nan")),
                "sil_loss": stats.get("sil_loss", float("nan")),
                "action_counts": json.dumps(res.action_counts,
                                            sort_keys=True),
            })
        if out_dir and tc.checkpoint_every and \
                update % tc.checkpoint_every == 0 and update < n_updates:
            os.makedirs(out_dir, exist_ok=True)
            path = os.path.join(out_dir, f"checkpoint_up{update}.json")
            nets.save(path, rng=stream)

    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        checkpoint_path = os.path.join(out_dir, "checkpoint.json")
        nets.save(checkpoint_path, rng=stream)
        _write_training_log(os.path.join(out_dir, "training_log.csv"),
                            log_rows)
    return TrainResult(nets=nets, log_rows=log_rows,
                       checkpoint_path=checkpoint_path)


def _write_training_log(path: str, rows: List[dict]) -> None:
    import csv

    if not rows:
        return
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        for row in rows:
            writer.writerow({k: (repr(v) if isinstance(v, float) else v)
                             for k, v in row.items()})
