"""Time the compiled butterfly kernel against the numpy fallback.

    python3 benchmarks/bench_butterfly.py [--repeat 5]
"""
import argparse
import timeit

import numpy as np

from offtsim import _backend, core


def bench(n, batch, backend, repeat):
    plan = core.plan_network(n, core.CouplerConvention.PAPER_EQ1)
    x = np.random.default_rng(0).normal(size=(n, batch)) + 0j
    arms = np.zeros(plan.n_arms)
    call = lambda: core._run(plan, x, arm_phases=arms, backend=backend)  # noqa: E731
    number, _ = timeit.Timer(call).autorange()
    return min(timeit.repeat(call, number=number, repeat=repeat)) / number


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    backends = _backend.available()
    print(f"{'n':>6} {'batch':>6} " + " ".join(f"{b + ' (us)':>14}" for b in backends) + "   speedup")
    for n in (8, 64, 512, 4096):
        for batch in (1, 64):
            times = [bench(n, batch, b, args.repeat) for b in backends]
            speed = f"{times[0] / times[-1]:8.1f}x" if len(times) > 1 else "       -"
            print(f"{n:>6} {batch:>6} " + " ".join(f"{t * 1e6:14.1f}" for t in times) + "  " + speed)


if __name__ == "__main__":
    main()
