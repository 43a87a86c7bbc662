#!/usr/bin/env python3
"""Time the numba kernels against the pure-numpy fallback.

Runs the factored Born-probability loss (the sampler's hot path) and the
dense Born table for several qubit counts and prints the speedup. Run with
QTOMO_BACKEND unset (or =numba) so both backends are available:

    python3 benchmarks/bench_kernels.py [--reps 20] [--n-list 2,3,4,5,6]
"""

import argparse
import time

import numpy as np

from qtomo import kernels
from qtomo.model import factored_form, prior_sample
from qtomo.qcore import setting_axes, true_state_rank2


def time_call(fn, args, reps):
    fn(*args)  # warm-up (JIT, caches)
    t0 = time.perf_counter()
    for _ in range(reps):
        fn(*args)
    return (time.perf_counter() - t0) / reps


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n-list", default="2,3,4,5,6")
    parser.add_argument("--reps", type=int, default=20)
    args = parser.parse_args()

    if kernels.BACKEND != "numba":
        raise SystemExit("numba backend inactive; unset QTOMO_BACKEND and "
                         "install numba to compare backends")
    nb = kernels.backend_impls("numba")
    np_ = kernels.backend_impls("numpy")

    print(f"{'n':>3} {'kernel':>14} {'numba (ms)':>12} {'numpy (ms)':>12} "
          f"{'speedup':>8}")
    for n in [int(tok) for tok in args.n_list.split(",")]:
        axes = setting_axes(n)
        d = 2 ** n
        gamma, vhat = factored_form(*_params(d))
        p_hat = np.full((3 ** n, d), 1.0 / d)
        rho = true_state_rank2(n)
        for name, call_args in [
            ("loss_factored", (axes, gamma, vhat, p_hat)),
            ("born_dense", (axes, rho)),
        ]:
            t_nb = time_call(nb[name], call_args, args.reps)
            t_np = time_call(np_[name], call_args, args.reps)
            print(f"{n:>3} {name:>14} {t_nb * 1e3:>12.3f} {t_np * 1e3:>12.3f} "
                  f"{t_np / t_nb:>8.1f}x")


def _params(d):
    x = prior_sample(d, 1.0, seed=0)
    return x.y, x.z


if __name__ == "__main__":
    main()
