"""Compiled vs pure-Python event loop.

Each mode runs in its own interpreter because the numba switch is read at
import time. Usage: python benchmarks/bench_engine.py [--horizon-ms 5000] [--repeat 3]
"""
import argparse
import json
import os
import subprocess
import sys

CHILD = """
import json, sys, time
import numpy as np
from vrfog import _accel
from vrfog.config import SimConfig
from vrfog.engine import build_workload, execute
from vrfog.policy import build_cache, apply_congestion

horizon, repeat = float(sys.argv[1]), int(sys.argv[2])
cfg = SimConfig(seed=1).with_workload(horizon=horizon)
catalog, tasks = build_workload(cfg)
cache = build_cache(catalog, 0.5)
topo = apply_congestion(cfg.topology, 0.0)
t0 = time.perf_counter()
first = execute(tasks, topo, cache)  # includes compilation when numba is on
warm = time.perf_counter() - t0
times = []
for _ in range(repeat):
    t0 = time.perf_counter()
    out = execute(tasks, topo, cache)
    times.append(time.perf_counter() - t0)
print(json.dumps({"numba": _accel.NUMBA, "tasks": len(tasks), "first": warm,
                  "best": min(times), "checksum": float(np.nansum(out.stage_done))}))
"""


def run(disable, horizon, repeat):
    env = dict(os.environ)
    env.pop("VRFOG_DISABLE_NUMBA", None)
    if disable:
        env["VRFOG_DISABLE_NUMBA"] = "1"
    out = subprocess.run([sys.executable, "-c", CHILD, str(horizon), str(repeat)],
                         env=env, capture_output=True, text=True, check=True)
    return json.loads(out.stdout)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--horizon-ms", type=float, default=5000.0)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    fast = run(False, args.horizon_ms, args.repeat)
    slow = run(True, args.horizon_ms, args.repeat)
    for label, r in (("numba", fast), ("python", slow)):
        print(f"{label:>7}: {r['tasks']} tasks, first call {r['first']:.3f}s, "
              f"best {r['best']:.4f}s ({r['tasks'] / r['best']:.0f} tasks/s)")
    print(f"speedup {slow['best'] / fast['best']:.1f}x, "
          f"checksums {'match' if fast['checksum'] == slow['checksum'] else 'DIFFER'}")


if __name__ == "__main__":
    main()
