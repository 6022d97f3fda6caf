"""Time the numba kernels against their numpy fallbacks.

    python benchmarks/bench_kernels.py [--repeat 5]

Both backends are called directly, so the env flag does not matter here.
Numba compile time is excluded by a warm-up call.
"""

import argparse
import time

import numpy as np

from hhl_nopost import kernels
from hhl_nopost._accel import HAS_NUMBA


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def random_hermitian(n, rng):
    z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return (z + z.conj().T) / 2


def jacobi_case(fn, A):
    def run():
        fn(A.copy(), np.eye(A.shape[0], dtype=np.complex128), 1e-15 * np.linalg.norm(A), 100)

    return run


def block_case(fn, n_qubits, k, rng):
    state = rng.standard_normal(2**n_qubits) + 0j
    state /= np.linalg.norm(state)
    mat = np.linalg.qr(rng.standard_normal((2**k, 2**k)) + 0j)[0]
    mask = 1 << (n_qubits - 1)

    def run():
        for shift in range(n_qubits - k):
            fn(state, shift, k, mat, mask, mask)

    return run


def swap_case(fn, n_qubits, rng):
    state = rng.standard_normal(2**n_qubits) + 0j

    def run():
        for a in range(n_qubits - 1):
            fn(state, a, a + 1)

    return run


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if not HAS_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")
    rng = np.random.default_rng(0)
    cases = []
    for n in (32, 64, 128):
        A = random_hermitian(n, rng)
        cases.append((f"jacobi n={n}", jacobi_case(kernels.jacobi_hermitian_nb, A), jacobi_case(kernels._jacobi_np, A)))
    for nq, k in ((12, 1), (16, 1), (16, 2), (20, 1)):
        cases.append(
            (f"apply_block {nq}q k={k}", block_case(kernels.apply_block_nb, nq, k, rng), block_case(kernels._apply_block_np, nq, k, rng))
        )
    cases.append(("swap_bits 20q", swap_case(kernels.swap_bits_nb, 20, rng), swap_case(kernels._swap_bits_np, 20, rng)))

    print(f"{'case':<24}{'numba [ms]':>12}{'numpy [ms]':>12}{'speedup':>10}")
    for name, nb, npy in cases:
        nb()  # compile
        t_nb = best_of(nb, args.repeat)
        t_np = best_of(npy, args.repeat)
        print(f"{name:<24}{1e3 * t_nb:>12.3f}{1e3 * t_np:>12.3f}{t_np / t_nb:>10.1f}x")


if __name__ == "__main__":
    main()
