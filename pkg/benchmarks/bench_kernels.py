"""Compare the numba kernels against the pure-Python fallback.

Each path runs in its own interpreter because the switch
(ORLICZ_DYNAMICS_DISABLE_NUMBA) is read at import time. JIT compilation is
paid in a warm-up call and reported separately.

    python benchmarks/bench_kernels.py --repeat 3
"""

import argparse
import json
import os
import subprocess
import sys
import time

import numpy as np

WORKLOADS = ("amemiya", "luxemburg", "dual_ascent", "certificate")


def _functions(n, seed):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        k = int(rng.integers(1, 9))
        out.append((rng.choice(np.arange(-20, 21), k, replace=False).reshape(-1, 1), rng.uniform(-5, 5, k)))
    return out


def worker(n, seed, repeat):
    """Runs inside the child process and prints one JSON line."""
    from orlicz_dynamics import (NUMBA_ENABLED, IntegerLine, SimpleFunction, YoungFunction,
                                 dual_ball_oracle, exp_abs_weight, luxemburg_norm, orlicz_norm,
                                 transitivity_certificate)

    Z = IntegerLine()
    phi = YoungFunction.power_log(2.0)
    p2 = YoungFunction.power(2.0)
    fs = [SimpleFunction(Z, p, v) for p, v in _functions(n, seed)]
    K = [(i,) for i in range(-3, 4)]
    w = exp_abs_weight(-1.0)

    jobs = {
        "amemiya": lambda: [orlicz_norm(f, phi) for f in fs],
        "luxemburg": lambda: [luxemburg_norm(f, phi) for f in fs],
        "dual_ascent": lambda: [dual_ball_oracle(f, phi) for f in fs],
        "certificate": lambda: transitivity_certificate(Z, K, (1,), w, p2, range(1, 31)),
    }
    t0 = time.perf_counter()
    for fn in jobs.values():
        fn()
    warm = time.perf_counter() - t0
    res = {"numba": NUMBA_ENABLED, "warmup": warm}
    for name, fn in jobs.items():
        best = np.inf
        for _ in range(repeat):
            t = time.perf_counter()
            fn()
            best = min(best, time.perf_counter() - t)
        res[name] = best
    print(json.dumps(res))


def run_path(disable, args):
    env = dict(os.environ)
    if disable:
        env["ORLICZ_DYNAMICS_DISABLE_NUMBA"] = "1"
    else:
        env.pop("ORLICZ_DYNAMICS_DISABLE_NUMBA", None)
    cmd = [sys.executable, __file__, "--child", "--n", str(args.n), "--seed", str(args.seed),
           "--repeat", str(args.repeat)]
    out = subprocess.run(cmd, env=env, check=True, capture_output=True, text=True).stdout
    return json.loads(out.strip().splitlines()[-1])


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--n", type=int, default=50, help="random functions per workload")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--child", action="store_true", help=argparse.SUPPRESS)
    args = ap.parse_args()
    if args.child:
        worker(args.n, args.seed, args.repeat)
        return
    jit = run_path(False, args)
    py = run_path(True, args)
    print(f"{'workload':<14}{'numba [s]':>12}{'fallback [s]':>14}{'speedup':>10}")
    for name in WORKLOADS:
        print(f"{name:<14}{jit[name]:>12.4f}{py[name]:>14.4f}{py[name] / jit[name]:>10.1f}")
    print(f"{'warm-up':<14}{jit['warmup']:>12.4f}{py['warmup']:>14.4f}")
    if not jit["numba"]:
        print("note: numba is not installed, both columns ran the fallback")


if __name__ == "__main__":
    main()
