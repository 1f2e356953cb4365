"""Benchmark the numba kernels against the pure-numpy fallback.

Times the three low-level primitives on growing statevectors, plus two
end-to-end workloads (a linear solve and a full bilinear estimation). Run:

    python benchmarks/bench_backends.py [--repeats N]

The first numba call triggers JIT compilation; a warmup pass is excluded
from the timings.
"""

import argparse
import time

import numpy as np

from qgpr import _accel
from qgpr.estimator import BilinearSpec, estimate_bilinear
from qgpr.qla import QlaConfig, config_for, make_encoding, qla_solve
from qgpr.statevector import qft_matrix


def random_amps(rng, m):
    amps = rng.normal(size=1 << m) + 1j * rng.normal(size=1 << m)
    return (amps / np.linalg.norm(amps)).astype(np.complex128)


def bench(fn, repeats):
    fn()  # warmup (JIT compile on the numba path)
    best = np.inf
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def primitive_cases(rng):
    cases = []
    for m in (12, 16, 20):
        amps = random_amps(rng, m)
        h = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
        cases.append(
            (f"1q gate      m={m}", lambda a=amps, g=h, mm=m: _accel.apply_matrix(a, g, (mm // 2,), mm))
        )
        f8 = qft_matrix(8)
        cases.append(
            (f"8q QFT block m={m}",
             lambda a=amps, g=f8, mm=m: _accel.apply_matrix(a, g, tuple(range(mm - 8, mm)), mm))
        )
        table = np.exp(1j * rng.normal(size=(256, 4)))
        cases.append(
            (f"phase table  m={m}",
             lambda a=amps, t=table, mm=m: _accel.phase_mul(a, t, mm - 8, 8, 0, 2, mm))
        )
        theta = rng.uniform(0, np.pi, size=256)
        cases.append(
            (f"ctrl Ry      m={m}",
             lambda a=amps, c=np.cos(theta), s=np.sin(theta), mm=m: _accel.pair_rot(
                 a, c, s, mm - 8, 8, 2, mm))
        )
    return cases


def pipeline_cases(rng):
    a = rng.normal(size=(8, 8))
    a = a @ a.T + 8 * np.eye(8)
    lam = np.linalg.eigvalsh(a)
    b = rng.normal(size=8)
    cfg = config_for(a, 8, c=float(lam[0]))

    def solve():
        qla_solve(b, a, cfg)

    spec = BilinearSpec(
        make_encoding(rng.normal(size=8)), make_encoding(rng.normal(size=8)), a, cfg
    )

    def bilinear():
        estimate_bilinear(spec, mode="exact")

    return [("qla_solve n=8 clock=8", solve), ("bilinear  n=8 clock=8", bilinear)]


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    if not _accel.HAS_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")

    rng = np.random.default_rng(0)
    cases = primitive_cases(rng) + pipeline_cases(rng)
    print(f"{'case':<24} {'numpy [ms]':>12} {'numba [ms]':>12} {'speedup':>9}")
    for name, fn in cases:
        with _accel.use_backend("numpy"):
            t_np = bench(fn, args.repeats)
        with _accel.use_backend("numba"):
            t_nb = bench(fn, args.repeats)
        print(f"{name:<24} {t_np * 1e3:>12.3f} {t_nb * 1e3:>12.3f} {t_np / t_nb:>8.2f}x")


if __name__ == "__main__":
    main()
