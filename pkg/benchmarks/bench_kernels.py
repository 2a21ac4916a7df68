"""Compare the compiled and NumPy multinomial kernels.

    python benchmarks/bench_kernels.py [--lmax 40] [--repeat 3]
"""

import argparse
import time

import numpy as np

from tmsv_trimer import kernels
from tmsv_trimer.optics import solve_zf, unitary_from_theta


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    parser = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--lmax", type=int, default=40)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()

    u = unitary_from_theta(np.sqrt(2) * solve_zf(1.0))
    backends = kernels.available_backends()
    ls = [l for l in (5, 10, 20, 30, 40, 60, 80, 110) if l <= args.lmax]

    print(f"{'kernel':<8}{'l':>5}" + "".join(f"{b + ' [s]':>16}" for b in backends) + f"{'speedup':>10}{'max|diff|':>12}")
    for name in ("block", "slice"):
        for l in ls:
            if name == "block":
                call = lambda k: k.multinomial_block(l, u.row_a, u.row_c)  # noqa: E731
            else:
                call = lambda k: k.multinomial_slice(l, 3, u.row_a, u.row_c)  # noqa: E731
            mods = [kernels.get_backend(b) for b in backends]
            times = [best_of(lambda m=m: call(m), args.repeat) for m in mods]
            diff = max(float(np.abs(call(mods[0]) - call(m)).max()) for m in mods)
            speed = times[0] / times[-1] if len(times) > 1 else 1.0
            print(f"{name:<8}{l:>5}" + "".join(f"{t:>16.5f}" for t in times) + f"{speed:>10.1f}{diff:>12.1e}")


if __name__ == "__main__":
    main()
