"""Benchmark the numba-compiled kernels against the pure-numpy fallback.

Runs the same workloads in subprocesses with ``HAWKESLOB_BACKEND`` set to
each backend, checks that the outputs are bit-identical, and prints a
timing table. The numba timings exclude JIT compilation (a warmup pass
runs first; compiled kernels are also disk-cached across runs).

Usage: python benchmarks/backend_bench.py [--episodes N] [--horizon T]
"""

import argparse
import json
import os
import subprocess
import sys

_WORKLOAD = r"""
import json, time
import numpy as np
from hawkeslob.backend import BACKEND
from hawkeslob.env import EpisodeConfig, MarketMakingEnv
from hawkeslob.hawkes import HawkesClock
from hawkeslob.params import KernelParams, default_kernel_params
from hawkeslob.rng import RandomStream

episodes = {episodes}
horizon = {horizon}

# warmup: trigger JIT compilation outside the timed regions
warm = HawkesClock(default_kernel_params())
warm.simulate(2.0, RandomStream(0))
warm_env = MarketMakingEnv(config=EpisodeConfig(horizon=1.0))
warm_env.reset(seed=0)
while not warm_env.done:
    warm_env.step(0)

out = {{"backend": BACKEND}}

t0 = time.perf_counter()
clock = HawkesClock(KernelParams(kind="exponential", mu=[1.0],
                                 alpha=[[0.5]], gamma=[[1.0]]))
times, _ = clock.simulate(20000.0, RandomStream(7))
out["hawkes_1type_s"] = time.perf_counter() - t0
out["hawkes_1type_events"] = len(times)
out["hawkes_digest"] = repr(float(times.sum()))

t0 = time.perf_counter()
clock12 = HawkesClock(default_kernel_params())
t12, _ = clock12.simulate(600.0, RandomStream(8))
out["hawkes_12type_s"] = time.perf_counter() - t0
out["hawkes_12type_events"] = len(t12)

t0 = time.perf_counter()
total = 0.0
for ep in range(episodes):
    env = MarketMakingEnv(config=EpisodeConfig(horizon=horizon))
    env.reset(seed=ep)
    while not env.done:
        env.step(0)
    total += env.mark_to_market()
out["episodes_s"] = time.perf_counter() - t0
out["episodes_digest"] = repr(total)

print(json.dumps(out))
"""


def run_backend(backend: str, episodes: int, horizon: float) -> dict:
    env = dict(os.environ, HAWKESLOB_BACKEND=backend)
    code = _WORKLOAD.format(episodes=episodes, horizon=horizon)
    proc = subprocess.run([sys.executable, "-c", code], env=env,
                          capture_output=True, text=True)
    if proc.returncode != 0:
        raise RuntimeError(f"{backend} workload failed:\n{proc.stderr}")
    return json.loads(proc.stdout)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--episodes", type=int, default=5)
    parser.add_argument("--horizon", type=float, default=60.0)
    args = parser.parse_args()

    results = {b: run_backend(b, args.episodes, args.horizon)
               for b in ("numba", "numpy")}

    for key in ("hawkes_digest", "episodes_digest"):
        if results["numba"][key] != results["numpy"][key]:
            print(f"WARNING: {key} differs between backends -- "
                  "bit-parity broken")
            return 1

    rows = [
        ("1-type Hawkes, 20000s "
         f"({results['numba']['hawkes_1type_events']} events)",
         "hawkes_1type_s"),
        ("12-type Hawkes, 600s "
         f"({results['numba']['hawkes_12type_events']} events)",
         "hawkes_12type_s"),
        (f"{args.episodes} hold episodes, T={args.horizon:g}s",
         "episodes_s"),
    ]
    print(f"{'workload':<45} {'numba':>10} {'numpy':>10} {'speedup':>9}")
    for label, key in rows:
        tn = results["numba"][key]
        tp = results["numpy"][key]
        print(f"{label:<45} {tn:>9.3f}s {tp:>9.3f}s {tp / tn:>8.1f}x")
    print("outputs bit-identical across backends: OK")
    return 0


if __name__ == "__main__":
    sys.exit(main())
