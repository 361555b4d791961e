"""Benchmark: compiled walk kernels vs the pure-numpy fallback.

    python3 benchmarks/bench_backends.py [--steps N] [--trials M]

Times the Birkhoff driver on representative observables and prints a
steps/second table per backend.
"""

import argparse
import time

from walklab import make_heaviside, make_quasiperiodic, make_scenery, make_step_law
from walklab.backends import get as get_backend
from walklab.engine import birkhoff_trial


def _cases():
    law1 = make_step_law("lazy_srw_d", {"d": 1, "hold": 0.5})
    law2 = make_step_law("lazy_srw_d", {"d": 2, "hold": 0.5})
    return [
        ("heaviside d=1", law1, make_heaviside()),
        ("scenery d=2", law2, make_scenery(2, 7)),
        ("quasiperiodic d=1", law1, make_quasiperiodic(1)),
    ]


def run(n_steps=500_000, trials=4, quiet=False):
    rows = []
    for backend_name in ("python", "compiled"):
        try:
            backend = get_backend(backend_name)
        except RuntimeError:
            continue
        for case, law, obs in _cases():
            t0 = time.perf_counter()
            for trial in range(trials):
                birkhoff_trial(law, obs, 12, trial, [n_steps], backend=backend)
            dt = time.perf_counter() - t0
            rows.append({"backend": backend_name, "case": case,
                         "steps_per_s": n_steps * trials / dt, "seconds": dt})
    if not quiet:
        print(f"{'backend':<10} {'case':<20} {'Msteps/s':>10} {'seconds':>9}")
        for r in rows:
            print(f"{r['backend']:<10} {r['case']:<20} "
                  f"{r['steps_per_s'] / 1e6:>10.2f} {r['seconds']:>9.3f}")
        by_case = {}
        for r in rows:
            by_case.setdefault(r["case"], {})[r["backend"]] = r["steps_per_s"]
        for case, d in by_case.items():
            if len(d) == 2:
                print(f"speedup {case}: {d['compiled'] / d['python']:.2f}x")
    return rows


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--steps", type=int, default=500_000)
    ap.add_argument("--trials", type=int, default=4)
    args = ap.parse_args()
    run(args.steps, args.trials)
