"""Compare the numba and numpy propagation backends on the Langevin hot loop.

    python3 benchmarks/bench_kernels.py [--steps N] [--repeat R]

Both backends integrate the same noise sequence; the script reports wall time
per step and the largest relative disagreement in the recorded states.
"""
import argparse
import time

import numpy as np

from optograv._kernels import HAVE_NUMBA, Propagator
from optograv.gravity import Scenario, force_linearized
from optograv.langevin import SimConfig, discretize
from optograv.params import preset
from optograv.steady import select_branch


def run_once(backend, phi, c, g, noise, stride):
    prop = Propagator(phi, c, g, backend)
    state = np.zeros(4)
    rec = np.empty((len(noise) // stride + 1, 4))
    t0 = time.perf_counter()
    res = prop.run(state, noise, 0, 0, stride, rec)
    return time.perf_counter() - t0, rec[: res[0]], res


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--steps", type=int, default=2_000_000)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--stride", type=int, default=1000)
    args = ap.parse_args()

    p = preset("A")
    s = select_branch(p)
    cfg = SimConfig.default(p)
    f = force_linearized(p, s.x2_bar, Scenario.SEMICLASSICAL).f
    phi, c, g = discretize(p, s, cfg.dt, f)
    noise = np.random.default_rng(0).standard_normal(args.steps)

    backends = ["numpy"] + (["numba"] if HAVE_NUMBA else [])
    if HAVE_NUMBA:
        run_once("numba", phi, c, g, noise[:10], 1)  # compile
    results = {}
    for b in backends:
        times = []
        for _ in range(args.repeat):
            dt, rec, res = run_once(b, phi, c, g, noise, args.stride)
            times.append(dt)
        results[b] = (min(times), rec, res)
        print(f"{b:>6}: {min(times):.3f} s best of {args.repeat}, "
              f"{1e9 * min(times) / args.steps:.1f} ns/step")
    if len(results) == 2:
        a, b = results["numba"][1], results["numpy"][1]
        scale = np.abs(a).max(axis=0)
        scale[scale == 0] = 1.0  # components that stay identically zero
        print(f"max relative disagreement: {np.max(np.abs(a - b) / scale):.2e}")
        print(f"speedup numba/numpy: {results['numpy'][0] / results['numba'][0]:.2f}x")


if __name__ == "__main__":
    main()
