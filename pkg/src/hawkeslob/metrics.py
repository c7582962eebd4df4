"""Performance metrics, episode evaluation and run summaries.

Annualization convention: a trading year of 252 days x 6.5 hours, i.e.
252 * 6.5 * 3600 seconds; with the default 300-second horizon that is
19,656 episodes per year. Per-episode return is PnL over initial cash.
Raw per-episode statistics are always reported alongside the annualized
figure so comparisons survive a different convention.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import os
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .env import MarketMakingEnv
from .ppo import episode_pnl
from .rng import derive_seed

SECONDS_PER_TRADING_YEAR = 252 * 6.5 * 3600.0


def annualized_sharpe(episode_pnls: Sequence[float], initial_cash: float,
                      horizon: float) -> Optional[float]:
    """mean/std of per-episode returns scaled by sqrt(episodes per year).

    Returns None (undefined, not infinity) when the returns have zero
    variance; requires at least two episodes.
    """
    pnls = np.asarray(episode_pnls, dtype=np.float64)
    if pnls.size < 2:
        raise ValueError("need at least two episodes")
    returns = pnls / initial_cash
    std = returns.std(ddof=1)
    if std == 0.0:
        return None
    n_year = SECONDS_PER_TRADING_YEAR / horizon
    return float(returns.mean() / std * math.sqrt(n_year))


def detect_pump_and_dump(times: Sequence[float],
                         inventory: Sequence[float],
                         peak_multiple: float = 5.0,
                         ) -> Tuple[bool, float]:
    """Heuristic flag for the inflate-then-unwind inventory signature.

    Flags when the early-episode |Y| peak exceeds ``peak_multiple`` times
    the trace median |Y| and the terminal half unwinds the position
    (net flow opposite in sign to the mid-episode inventory). The score
    is peak/median regardless of the flag.
    """
    y = np.asarray(inventory, dtype=np.float64)
    if y.size < 4:
        return False, 0.0
    abs_y = np.abs(y)
    half = y.size // 2
    median = float(np.median(abs_y))
    peak_early = float(abs_y[:half].max())
    if median == 0.0:
        score = 0.0 if peak_early == 0.0 else math.inf
    else:
        score = peak_early / median
    y_mid = y[half - 1]
    y_end = y[-1]
    unwinds = y_mid != 0 and (y_end - y_mid) * y_mid < 0
    return bool(score > peak_multiple and unwinds), float(score)


@dataclass(frozen=True)
class RunSummary:
    agent: str
    n_episodes: int
    mean_pnl: float
    std_pnl: float
    sharpe: Optional[float]
    mean_abs_inventory: float
    total_fills: int
    action_histogram: Dict[str, int]
    pump_and_dump_fraction: float
    config_hash: str
    seed: int

    def to_dict(self) -> dict:
        return {
            "agent": self.agent,
            "n_episodes": self.n_episodes,
            "mean_pnl": self.mean_pnl,
            "std_pnl": self.std_pnl,
            "sharpe": self.sharpe,
            "mean_abs_inventory": self.mean_abs_inventory,
            "total_fills": self.total_fills,
            "action_histogram": dict(sorted(self.action_histogram.items())),
            "pump_and_dump_fraction": self.pump_and_dump_fraction,
            "config_hash": self.config_hash,
            "seed": self.seed,
        }


def config_hash(*docs: dict) -> str:
    canon = json.dumps(docs, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()[:16]


@dataclass
class EpisodeStats:
    episode: int
    pnl: float
    mean_abs_inventory: float
    n_fills: int
    n_interventions: int
    pump_and_dump: bool
    pump_score: float


def run_episode(env: MarketMakingEnv, agent, seed: int,
                ) -> Tuple[EpisodeStats, List]:
    """Run one seeded episode; returns stats and the step trace."""
    obs = env.reset(seed=seed)
    abs_inv = []
    times = []
    inv = []
    n_interventions = 0
    action_counts: Dict[str, int] = {}
    done = False
    while not done:
        mask = env.admissible_mask()
        decision, psi = agent.act(obs, mask)
        if decision == 1:
            obs, reward, done = env.step(1, psi)
            n_interventions += 1
            action_counts[psi.name] = action_counts.get(psi.name, 0) + 1
        else:
            obs, reward, done = env.step(0)
        abs_inv.append(abs(obs.inventory))
        times.append(env.t)
        inv.append(obs.inventory)
    flagged, score = detect_pump_and_dump(times, inv)
    stats = EpisodeStats(
        episode=0, pnl=episode_pnl(env),
        mean_abs_inventory=float(np.mean(abs_inv)),
        n_fills=len(env.fills), n_interventions=n_interventions,
        pump_and_dump=flagged, pump_score=score)
    return stats, action_counts


def evaluate_agent(env: MarketMakingEnv, agent, n_episodes: int, seed: int,
                   config_docs: Sequence[dict] = (),
                   ) -> Tuple[RunSummary, List[EpisodeStats]]:
    """Evaluate over seeded episodes; reproducible bit-for-bit from seed."""
    episodes: List[EpisodeStats] = []
    histogram: Dict[str, int] = {}
    for e in range(n_episodes):
        stats, action_counts = run_episode(env, agent,
                                           derive_seed(seed, 0xEA1, e))
        stats.episode = e
        episodes.append(stats)
        for name, count in action_counts.items():
            histogram[name] = histogram.get(name, 0) + count
    pnls = [s.pnl for s in episodes]
    sharpe = None
    if len(pnls) >= 2:
        sharpe = annualized_sharpe(pnls, env.config.initial_cash,
                                   env.config.horizon)
    summary = RunSummary(
        agent=getattr(agent, "name", agent.__class__.__name__),
        n_episodes=n_episodes,
        mean_pnl=float(np.mean(pnls)),
        std_pnl=float(np.std(pnls, ddof=1)) if len(pnls) >= 2 else 0.0,
        sharpe=sharpe,
        mean_abs_inventory=float(np.mean([s.mean_abs_inventory
                                          for s in episodes])),
        total_fills=int(sum(s.n_fills for s in episodes)),
        action_histogram=histogram,
        pump_and_dump_fraction=float(np.mean([s.pump_and_dump
                                              for s in episodes])),
        config_hash=config_hash(*config_docs),
        seed=seed)
    return summary, episodes


# ---------------------------------------------------------------------------
# Deterministic serialization (all floats as repr: >= 12 significant digits)
# ---------------------------------------------------------------------------

def write_summary_json(path: str, summary: RunSummary) -> None:
    with open(path, "w") as fh:
        json.dump(summary.to_dict(), fh, sort_keys=True, indent=2)
        fh.write("\n")


def write_episodes_csv(path: str, episodes: Sequence[EpisodeStats]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["episode", "pnl", "mean_abs_inventory", "n_fills",
                         "n_interventions", "pump_and_dump", "pump_score"])
        for s in episodes:
            writer.writerow([s.episode, repr(s.pnl),
                             repr(s.mean_abs_inventory), s.n_fills,
                             s.n_interventions, int(s.pump_and_dump),
                             repr(s.pump_score)])


def write_trace_csv(path: str, env: MarketMakingEnv) -> None:
    """One row per decision step (requires the env to record traces)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "cash", "inventory", "p_ask", "p_bid",
                         "action", "reward_total", "inventory_penalty",
                         "cash_delta", "inventory_value_delta",
                         "terminal_adjustment"])
        for rec in env.trace:
            writer.writerow([
                repr(rec.t), repr(rec.cash), rec.inventory, repr(rec.p_ask),
                repr(rec.p_bid), rec.action, repr(rec.reward.total),
                repr(rec.reward.inventory_penalty),
                repr(rec.reward.cash_delta),
                repr(rec.reward.inventory_value_delta),
                repr(rec.reward.terminal_adjustment)])
