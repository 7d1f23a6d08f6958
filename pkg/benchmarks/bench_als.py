"""Time the compiled ALS kernel against the numpy fallback.

    python benchmarks/bench_als.py --sizes 100x49,1000x49,6000x49 --repeats 3

Each size gets a planted rank-3 workload with 40% complete and 10% censored
cells. Both backends start from the same factors, so the check column also
reports how far apart their estimates end up.
"""
import argparse
import time

import numpy as np

from limeqo import completion
from limeqo.completion import AlsConfig, als_complete
from limeqo.matrix_core import CENSORED, COMPLETE, UNOBSERVED, WorkloadState
from limeqo.synth import SynthConfig, generate


def make_state(n, k, seed):
    truth = generate(SynthConfig(n, k, 3, 0.05, 10.0, 0, seed)).values
    u = np.random.default_rng(seed).random(truth.shape)
    status = np.where(u < 0.4, COMPLETE, np.where(u < 0.5, CENSORED, UNOBSERVED))
    status[:, 0] = COMPLETE
    return WorkloadState(status, np.where(status == CENSORED, 0.7 * truth, truth))


def best_of(fn, repeats):
    times = []
    for _ in range(repeats):
        start = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - start)
    return min(times), out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="100x49,1000x49,3000x49")
    ap.add_argument("--repeats", type=int, default=3)
    ap.add_argument("--rank", type=int, default=5)
    ap.add_argument("--iters", type=int, default=50)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    if "compiled" not in completion.BACKENDS:
        raise SystemExit("compiled kernel not built; reinstall with cython available")

    print(f"{'size':>10} {'solver':>7} {'python s':>10} {'compiled s':>11} {'speedup':>8} {'max |diff|':>11}")
    for size in args.sizes.split(","):
        n, k = (int(x) for x in size.lower().split("x"))
        state = make_state(n, k, args.seed)
        for solver in completion.SOLVERS:
            cfg = AlsConfig(args.rank, 0.2, args.iters, args.seed, solver)
            t_py, py = best_of(lambda: als_complete(state, cfg, "python"), args.repeats)
            t_c, comp = best_of(lambda: als_complete(state, cfg, "compiled"), args.repeats)
            diff = float(np.abs(py.W_hat - comp.W_hat).max())
            print(f"{size:>10} {solver:>7} {t_py:>10.4f} {t_c:>11.4f} {t_py / t_c:>7.2f}x {diff:>11.2e}")


if __name__ == "__main__":
    main()
