"""Time the numba kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 3]

Each case runs once untimed per backend (numba compiles on first call),
then the best of ``--repeat`` runs is reported along with the max
absolute difference between the two backends.
"""

import argparse
import time

import numpy as np

from hjlab import _accel
from hjlab.entropy import FunctionClassSample
from hjlab.grid import GridSpec
from hjlab.hamiltonian import LagrangianView, power_norm
from hjlab.hopflax import hopf_lax_points, random_piecewise_linear
from hjlab.kernels import pair_cosine_min, pairwise_l1


def case_hopf_lax():
    datum = random_piecewise_linear(3, 2)
    view = LagrangianView(power_norm(1, 2))
    X = np.random.default_rng(0).uniform(-1, 1, (400, 2))
    return lambda: hopf_lax_points(datum, view, 1.0, X)[0]


def case_pairwise_l1():
    spec = GridSpec.box([-1, -1], [1, 1], 33)
    F = np.random.default_rng(1).normal(size=(300, spec.size))
    w = np.full(spec.size, float(np.prod(spec.h)))
    return lambda: pairwise_l1(F, w)


def case_pair_cosine():
    rng = np.random.default_rng(2)
    P = rng.normal(size=(1500, 2))
    G = rng.normal(size=(1500, 2))
    return lambda: np.atleast_1d(pair_cosine_min(P, G))


CASES = {"hopf_lax_points (400 pts, d=2)": case_hopf_lax, "pairwise_l1 (300 x 1089)": case_pairwise_l1,
         "pair_cosine_min (1500 pts)": case_pair_cosine}


def best_of(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), np.asarray(out, dtype=float)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if not _accel.HAS_NUMBA:
        raise SystemExit("numba is not importable; nothing to compare")
    prev = _accel.use_numba()
    print(f"{'case':34s} {'numba [s]':>10s} {'numpy [s]':>10s} {'speedup':>8s} {'max diff':>10s}")
    try:
        for name, make in CASES.items():
            fn = make()
            _accel.set_numba(True)
            t_nb, a = best_of(fn, args.repeat)
            _accel.set_numba(False)
            t_np, b = best_of(fn, args.repeat)
            diff = float(np.max(np.abs(a - b))) if a.size else 0.0
            print(f"{name:34s} {t_nb:10.4f} {t_np:10.4f} {t_np / t_nb:8.1f} {diff:10.2e}")
    finally:
        _accel.set_numba(prev)


if __name__ == "__main__":
    main()
