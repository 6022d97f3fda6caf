"""Hot loops: complex Jacobi sweeps and in-place statevector gate application.

Each kernel has two bodies. The ``*_loop`` variant is written as explicit
loops and compiled with numba; the ``*_np`` variant is vectorized numpy and
runs when numba is disabled. Both mutate their array arguments in place and
must agree to rounding error (see tests/test_kernels.py).

Bit positions count from the least significant bit of the basis index.
"""

import math

import numpy as np

from ._accel import USE_NUMBA, njit


# ---------------------------------------------------------------- Jacobi


def _rotation(app, aqq, apq):
    # U = diag(1, e^{-i phi}) @ [[c, s], [-s, c]] zeroes a[p, q]
    mag = abs(apq)
    phase_conj = np.conj(apq) / mag
    theta = 0.5 * math.atan2(2.0 * mag, aqq - app)
    c = math.cos(theta)
    s = math.sin(theta)
    return c + 0j, s + 0j, -s * phase_conj, c * phase_conj


def _jacobi_loop(a, v, tol, max_sweeps):
    n = a.shape[0]
    elem_tol = tol / max(n, 1)
    for sweep in range(max_sweeps + 1):
        off = 0.0
        for p in range(n):
            for q in range(p + 1, n):
                off += a[p, q].real ** 2 + a[p, q].imag ** 2
        if math.sqrt(off) <= tol:
            return sweep
        if sweep == max_sweeps:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                mag = abs(apq)
                if mag <= elem_tol:
                    continue
                phase_conj = np.conj(apq) / mag
                theta = 0.5 * math.atan2(2.0 * mag, a[q, q].real - a[p, p].real)
                c = math.cos(theta)
                s = math.sin(theta)
                upp = c + 0j
                upq = s + 0j
                uqp = -s * phase_conj
                uqq = c * phase_conj
                for k in range(n):
                    akp = a[k, p]
                    akq = a[k, q]
                    a[k, p] = akp * upp + akq * uqp
                    a[k, q] = akp * upq + akq * uqq
                for k in range(n):
                    apk = a[p, k]
                    aqk = a[q, k]
                    a[p, k] = np.conj(upp) * apk + np.conj(uqp) * aqk
                    a[q, k] = np.conj(upq) * apk + np.conj(uqq) * aqk
                a[p, q] = 0.0
                a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                for k in range(n):
                    vkp = v[k, p]
                    vkq = v[k, q]
                    v[k, p] = vkp * upp + vkq * uqp
                    v[k, q] = vkp * upq + vkq * uqq
    return -1


def _jacobi_np(a, v, tol, max_sweeps):
    n = a.shape[0]
    elem_tol = tol / max(n, 1)
    iu = np.triu_indices(n, 1)
    for sweep in range(max_sweeps + 1):
        if math.sqrt(float(np.sum(np.abs(a[iu]) ** 2))) <= tol:
            return sweep
        if sweep == max_sweeps:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= elem_tol:
                    continue
                upp, upq, uqp, uqq = _rotation(a[p, p].real, a[q, q].real, apq)
                colp = a[:, p].copy()
                colq = a[:, q]
                a[:, p] = colp * upp + colq * uqp
                a[:, q] = colp * upq + colq * uqq
                rowp = a[p, :].copy()
                rowq = a[q, :]
                a[p, :] = np.conj(upp) * rowp + np.conj(uqp) * rowq
                a[q, :] = np.conj(upq) * rowp + np.conj(uqq) * rowq
                a[p, q] = a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                vp = v[:, p].copy()
                vq = v[:, q]
                v[:, p] = vp * upp + vq * uqp
                v[:, q] = vp * upq + vq * uqq
    return -1


# ------------------------------------------------------- statevector gates


def _apply_block_loop(state, shift, k, mat, ctrl_mask, ctrl_val):
    dim = state.shape[0]
    width = 1 << k
    tmask = (width - 1) << shift
    buf = np.empty(width, dtype=np.complex128)
    for i in range(dim):
        if i & tmask:
            continue
        if (i & ctrl_mask) != ctrl_val:
            continue
        for j in range(width):
            buf[j] = state[i | (j << shift)]
        for r in range(width):
            acc = 0j
            for j in range(width):
                acc += mat[r, j] * buf[j]
            state[i | (r << shift)] = acc


def _apply_block_np(state, shift, k, mat, ctrl_mask, ctrl_val):
    width = 1 << k
    tmask = (width - 1) << shift
    base = np.arange(state.shape[0], dtype=np.int64)
    base = base[((base & tmask) == 0) & ((base & ctrl_mask) == ctrl_val)]
    idx = base[:, None] | (np.arange(width, dtype=np.int64) << shift)[None, :]
    state[idx] = state[idx] @ mat.T


def _swap_bits_loop(state, pa, pb):
    ma = 1 << pa
    mb = 1 << pb
    for i in range(state.shape[0]):
        if (i & ma) and not (i & mb):
            j = i ^ ma ^ mb
            tmp = state[i]
            state[i] = state[j]
            state[j] = tmp


def _swap_bits_np(state, pa, pb):
    idx = np.arange(state.shape[0], dtype=np.int64)
    ba = (idx >> pa) & 1
    bb = (idx >> pb) & 1
    perm = idx ^ ((ba ^ bb) << pa) ^ ((ba ^ bb) << pb)
    state[:] = state[perm]


jacobi_hermitian_nb = njit(_jacobi_loop)
apply_block_nb = njit(_apply_block_loop)
swap_bits_nb = njit(_swap_bits_loop)

if USE_NUMBA:
    jacobi_hermitian = jacobi_hermitian_nb
    apply_block = apply_block_nb
    swap_bits = swap_bits_nb
else:
    jacobi_hermitian = _jacobi_np
    apply_block = _apply_block_np
    swap_bits = _swap_bits_np

BACKEND = "numba" if USE_NUMBA else "numpy"
