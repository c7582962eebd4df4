"""Command-line interface.

Subcommands: ``simulate`` (raw LOB traces), ``train``, ``eval``,
``sweep``, ``dynkin-check``. Common flags: ``--config <json>``,
``--seed <int>``, ``--out-dir <path>``. All numeric output is decimal
text with full round-trip precision; identical (config, seed) pairs
produce byte-identical outputs.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from typing import Optional

from .agents import ProbAgentConfig, make_agent
from .book import BookInitConfig
from .env import EpisodeConfig, MarketMakingEnv
from .metrics import (config_hash, evaluate_agent, run_episode,
                      write_episodes_csv, write_summary_json,
                      write_trace_csv)
from .params import KernelParams, default_kernel_params
from .ppo import TrainerConfig, train
from .qvi import dynkin_check
from .rng import RandomStream, derive_seed
from .sweep import run_sweep


@dataclass
class AppConfig:
    kernel: KernelParams
    episode: EpisodeConfig
    init: BookInitConfig
    trainer: TrainerConfig
    prob_agent: ProbAgentConfig
    raw: dict

    def docs(self) -> tuple:
        return (self.kernel.to_dict(), self.episode.to_dict(),
                self.init.to_dict(), self.trainer.to_dict(),
                self.prob_agent.to_dict())


def load_app_config(path: Optional[str]) -> AppConfig:
    doc = {}
    if path:
        with open(path) as fh:
            doc = json.load(fh)
    if "kernel" in doc:
        kernel = KernelParams.from_dict(doc["kernel"])
    else:
        kernel = default_kernel_params(doc.get("kernel_profile",
                                               "exponential"))
    episode = EpisodeConfig.from_dict(doc.get("episode", {}))
    init = BookInitConfig.from_dict(doc.get("init", {}))
    trainer = TrainerConfig.from_dict(doc.get("trainer", {}))
    prob_agent = ProbAgentConfig.from_dict(doc.get("prob_agent", {}))
    return AppConfig(kernel=kernel, episode=episode, init=init,
                     trainer=trainer, prob_agent=prob_agent, raw=doc)


def default_config_document() -> dict:
    """The full default configuration as a JSON-ready document."""
    return {
        "kernel": default_kernel_params().to_dict(),
        "episode": EpisodeConfig().to_dict(),
        "init": BookInitConfig().to_dict(),
        "trainer": TrainerConfig().to_dict(),
        "prob_agent": ProbAgentConfig().to_dict(),
    }


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", default=None,
                        help="JSON config document")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out-dir", default=".")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hawkeslob",
        description="Hawkes-LOB market-making simulator and agents")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="write raw episode traces")
    _add_common(p_sim)
    p_sim.add_argument("--episodes", type=int, default=1)
    p_sim.add_argument("--agent", default="hold")

    p_train = sub.add_parser("train", help="train the PPO+SIL policy")
    _add_common(p_train)

    p_eval = sub.add_parser("eval", help="evaluate an agent")
    _add_common(p_eval)
    p_eval.add_argument("--episodes", type=int, default=100)
    p_eval.add_argument(
        "--agent", default="prob",
        help="prob | random | hold | checkpoint:<path>")
    p_eval.add_argument("--traces", action="store_true",
                        help="also write per-episode trace CSVs")

    p_sweep = sub.add_parser("sweep", help="sensitivity/ablation sweep")
    _add_common(p_sweep)
    p_sweep.add_argument("--grid", default=None,
                         help="inline JSON grid, e.g. '{\"fee_bps\":[1,8]}'")
    p_sweep.add_argument("--grid-file", default=None)
    p_sweep.add_argument("--eval-episodes", type=int, default=20)

    p_dyn = sub.add_parser("dynkin-check",
                           help="Monte-Carlo generator verification")
    _add_common(p_dyn)
    p_dyn.add_argument("--function", default="intensity",
                       choices=("intensity", "count"))
    p_dyn.add_argument("--type-index", type=int, default=0)
    p_dyn.add_argument("--t-end", type=float, default=2.0)
    p_dyn.add_argument("--paths", type=int, default=10_000)
    p_dyn.add_argument("--one-type", action="store_true",
                       help="use the 1-type reduction (mu=1, a=0.5, g=1)")
    return parser


def _cmd_simulate(args, app: AppConfig) -> int:
    os.makedirs(args.out_dir, exist_ok=True)
    agent = make_agent(args.agent, RandomStream(derive_seed(args.seed, 0xA9)),
                       app.prob_agent)
    env = MarketMakingEnv(app.kernel, app.episode, app.init,
                          record_trace=True)
    stats_rows = []
    for e in range(args.episodes):
        stats, _ = run_episode(env, agent, derive_seed(args.seed, 0xEA1, e))
        stats.episode = e
        stats_rows.append(stats)
        write_trace_csv(os.path.join(args.out_dir, f"trace_{e}.csv"), env)
    write_episodes_csv(os.path.join(args.out_dir, "episodes.csv"),
                       stats_rows)
    summary = {
        "agent": agent.name, "n_episodes": args.episodes, "seed": args.seed,
        "config_hash": config_hash(*app.docs()),
        "mean_pnl": sum(s.pnl for s in stats_rows) / max(len(stats_rows), 1),
        "total_fills": sum(s.n_fills for s in stats_rows),
    }
    with open(os.path.join(args.out_dir, "summary.json"), "w") as fh:
        json.dump(summary, fh, sort_keys=True, indent=2)
        fh.write("\n")
    return 0


def _cmd_train(args, app: AppConfig) -> int:
    os.makedirs(args.out_dir, exist_ok=True)
    result = train(app.kernel, app.episode, app.trainer, seed=args.seed,
                   out_dir=args.out_dir, init_config=app.init)
    print(f"checkpoint written to {result.checkpoint_path}")
    return 0


def _cmd_eval(args, app: AppConfig) -> int:
    os.makedirs(args.out_dir, exist_ok=True)
    agent = make_agent(args.agent, RandomStream(derive_seed(args.seed, 0xA9)),
                       app.prob_agent)
    env = MarketMakingEnv(app.kernel, app.episode, app.init,
                          record_trace=args.traces)
    summary, episodes = evaluate_agent(env, agent, args.episodes,
                                       seed=args.seed,
                                       config_docs=app.docs())
    write_summary_json(os.path.join(args.out_dir, "summary.json"), summary)
    write_episodes_csv(os.path.join(args.out_dir, "episodes.csv"), episodes)
    if args.traces:
        for e in range(args.episodes):
            run_episode(env, agent, derive_seed(args.seed, 0xEA1, e))
            write_trace_csv(os.path.join(args.out_dir, f"trace_{e}.csv"),
                            env)
    sharpe = "undefined" if summary.sharpe is None else repr(summary.sharpe)
    print(f"agent={summary.agent} episodes={summary.n_episodes} "
          f"mean_pnl={summary.mean_pnl!r} sharpe={sharpe}")
    return 0


def _cmd_sweep(args, app: AppConfig) -> int:
    os.makedirs(args.out_dir, exist_ok=True)
    if args.grid and args.grid_file:
        raise SystemExit("pass either --grid or --grid-file, not both")
    grid = {}
    if args.grid:
        grid = json.loads(args.grid)
    elif args.grid_file:
        with open(args.grid_file) as fh:
            grid = json.load(fh)
    rows = run_sweep(grid, app.episode, app.trainer, app.init,
                     seed=args.seed, eval_episodes=args.eval_episodes,
                     out_csv=os.path.join(args.out_dir, "sweep.csv"))
    print(f"{len(rows)} sweep cells written to "
          f"{os.path.join(args.out_dir, 'sweep.csv')}")
    return 0


def _cmd_dynkin(args, app: AppConfig) -> int:
    if args.one_type:
        params = KernelParams(kind="exponential", mu=[1.0],
                              alpha=[[0.5]], gamma=[[1.0]])
    else:
        params = app.kernel
    result = dynkin_check(params, function=args.function,
                          type_index=args.type_index, t_end=args.t_end,
                          n_paths=args.paths, seed=args.seed)
    doc = json.dumps(result.to_dict(), sort_keys=True, indent=2)
    print(doc)
    if args.out_dir != ".":
        os.makedirs(args.out_dir, exist_ok=True)
        with open(os.path.join(args.out_dir, "dynkin.json"), "w") as fh:
            fh.write(doc + "\n")
    return 0


_COMMANDS = {
    "simulate": _cmd_simulate,
    "train": _cmd_train,
    "eval": _cmd_eval,
    "sweep": _cmd_sweep,
    "dynkin-check": _cmd_dynkin,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    app = load_app_config(args.config)
    return _COMMANDS[args.command](args, app)


if __name__ == "__main__":
    sys.exit(main())
