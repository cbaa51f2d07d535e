"""Time the compiled and pure-Python allocation kernels on the same inputs.

    python3 benchmarks/bench_kernels.py [--reps 64] [--horizon 10000] [--repeat 3]

Both backends must return identical pull counts; the script checks that
before printing timings.
"""
import argparse
import time

import numpy as np

from uniband import kernels
from uniband.core import BanditInstance, RandomnessContract
from uniband.policies import POLICY_KINDS, PolicySpec

TABLE1 = [(0, 10), (0, 9), (0, 8), (1, 9.5), (1, 10), (1, 5)]


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--reps", type=int, default=64)
    ap.add_argument("--horizon", type=int, default=10_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    inst = BanditInstance.from_pairs(TABLE1)
    streams = RandomnessContract(1)
    samples = np.stack([streams.instance_samples(inst, args.horizon, 0, r) for r in range(args.reps)])
    cps = np.array([args.horizon], dtype=np.int64)
    backends = sorted(kernels.BACKENDS)
    steps = args.reps * args.horizon
    print(f"{args.reps} replications x {args.horizon} steps, {inst.n_arms} arms; backends: {', '.join(backends)}")
    print(f"{'policy':<12} {'backend':<9} {'best s':>9} {'Msteps/s':>9}")
    for kind in POLICY_KINDS:
        spec = PolicySpec(kind)
        results = {}
        for backend in backends:
            best = float("inf")
            for _ in range(args.repeat):
                t0 = time.perf_counter()
                out = kernels.simulate_batch(spec.code, spec.init_rounds, samples, cps, backend=backend)
                best = min(best, time.perf_counter() - t0)
            results[backend] = out
            print(f"{kind:<12} {backend:<9} {best:>9.4f} {steps / best / 1e6:>9.2f}")
        if len(results) == 2:
            assert np.array_equal(results["compiled"], results["python"]), f"{kind}: backends disagree"


if __name__ == "__main__":
    main()
