"""numba-compiled versions of the hot kernels (see ``_numpy`` for the reference)."""

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def _ryser_gray(a):
    k = a.shape[0]
    if k == 0:
        return 1.0 + 0.0j
    row_sums = np.zeros(k, dtype=np.complex128)
    total = 0.0 + 0.0j
    in_set = np.zeros(k, dtype=np.bool_)
    size = 0
    gray_prev = 0
    for i in range(1, 2**k):
        gray = i ^ (i >> 1)
        changed = gray ^ gray_prev
        j = 0
        while (changed >> j) & 1 == 0:
            j += 1
        if in_set[j]:
            in_set[j] = False
            size -= 1
            for r in range(k):
                row_sums[r] -= a[r, j]
        else:
            in_set[j] = True
            size += 1
            for r in range(k):
                row_sums[r] += a[r, j]
        prod = 1.0 + 0.0j
        for r in range(k):
            prod *= row_sums[r]
        if (k - size) % 2 == 0:
            total += prod
        else:
            total -= prod
        gray_prev = gray
    return total


def permanent(a):
    """Gray-code Ryser permanent of a square complex matrix."""
    return complex(_ryser_gray(np.ascontiguousarray(a, dtype=np.complex128)))


@njit(cache=True, nogil=True)
def _batch_permanents(u, rows, cols):
    nb, k = rows.shape
    out = np.empty(nb, dtype=np.complex128)
    sub = np.empty((k, k), dtype=np.complex128)
    for b in range(nb):
        for i in range(k):
            for j in range(k):
                sub[i, j] = u[rows[b, i], cols[b, j]]
        out[b] = _ryser_gray(sub)
    return out


def batch_permanents(u, rows, cols):
    """Permanents of ``u[rows[b]][:, cols[b]]`` for every batch row b."""
    return _batch_permanents(
        np.ascontiguousarray(u, dtype=np.complex128),
        np.ascontiguousarray(rows, dtype=np.int64),
        np.ascontiguousarray(cols, dtype=np.int64),
    )


@njit(cache=True, nogil=True)
def _batch_permanents_grad(u, rows, cols):
    nb, k = rows.shape
    perms = np.empty(nb, dtype=np.complex128)
    grads = np.zeros((nb, k, k), dtype=np.complex128)
    row_sums = np.empty(k, dtype=np.complex128)
    prefix = np.empty(k + 1, dtype=np.complex128)
    suffix = np.empty(k + 1, dtype=np.complex128)
    in_set = np.empty(k, dtype=np.bool_)
    for b in range(nb):
        if k == 0:
            perms[b] = 1.0
            continue
        row_sums[:] = 0.0
        in_set[:] = False
        size = 0
        gray_prev = 0
        total = 0.0 + 0.0j
        for i in range(1, 2**k):
            gray = i ^ (i >> 1)
            changed = gray ^ gray_prev
            j = 0
            while (changed >> j) & 1 == 0:
                j += 1
            if in_set[j]:
                in_set[j] = False
                size -= 1
                for r in range(k):
                    row_sums[r] -= u[rows[b, r], cols[b, j]]
            else:
                in_set[j] = True
                size += 1
                for r in range(k):
                    row_sums[r] += u[rows[b, r], cols[b, j]]
            gray_prev = gray
            sign = 1.0 if (k - size) % 2 == 0 else -1.0
            prefix[0] = 1.0
            for r in range(k):
                prefix[r + 1] = prefix[r] * row_sums[r]
            suffix[k] = 1.0
            for r in range(k - 1, -1, -1):
                suffix[r] = suffix[r + 1] * row_sums[r]
            total += sign * prefix[k]
            for r in range(k):
                e = sign * prefix[r] * suffix[r + 1]
                for c in range(k):
                    if in_set[c]:
                        grads[b, r, c] += e
        perms[b] = total
    return perms, grads


def batch_permanents_grad(u, rows, cols):
    """Permanents plus d Per / d entry for each gathered k x k submatrix."""
    return _batch_permanents_grad(
        np.ascontiguousarray(u, dtype=np.complex128),
        np.ascontiguousarray(rows, dtype=np.int64),
        np.ascontiguousarray(cols, dtype=np.int64),
    )


@njit(cache=True, nogil=True)
def _mesh_unitary(thetas, phis, pairs, phases):
    m = phases.shape[0]
    u = np.eye(m, dtype=np.complex128)
    for k in range(thetas.shape[0]):
        p = pairs[k]
        c = np.cos(thetas[k])
        s = np.sin(thetas[k])
        e = np.exp(1j * phis[k])
        for r in range(m):
            a = u[r, p]
            b = u[r, p + 1]
            u[r, p] = a * e * c + b * s
            u[r, p + 1] = -a * e * s + b * c
    for r in range(m):
        for col in range(m):
            u[r, col] *= np.exp(1j * phases[col])
    return u


def mesh_unitary(thetas, phis, pairs, phases):
    """Product T_1 T_2 ... T_K D of two-mode rotations and output phases."""
    return _mesh_unitary(
        np.ascontiguousarray(thetas, dtype=np.float64),
        np.ascontiguousarray(phis, dtype=np.float64),
        np.ascontiguousarray(pairs, dtype=np.int64),
        np.ascontiguousarray(phases, dtype=np.float64),
    )


@njit(cache=True, nogil=True)
def _mesh_gradient(thetas, phis, pairs, phases, g):
    kk = thetas.shape[0]
    m = phases.shape[0]
    # suffix rows p, p+1 of S_k for each k
    srows = np.empty((kk, 2, m), dtype=np.complex128)
    suffix = np.zeros((m, m), dtype=np.complex128)
    for r in range(m):
        suffix[r, r] = np.exp(1j * phases[r])
    for k in range(kk - 1, -1, -1):
        p = pairs[k]
        for col in range(m):
            srows[k, 0, col] = suffix[p, col]
            srows[k, 1, col] = suffix[p + 1, col]
        c = np.cos(thetas[k])
        s = np.sin(thetas[k])
        e = np.exp(1j * phis[k])
        for col in range(m):
            a = suffix[p, col]
            b = suffix[p + 1, col]
            suffix[p, col] = e * c * a - e * s * b
            suffix[p + 1, col] = s * a + c * b
    gh = np.conj(g).T.copy()
    prefix = np.eye(m, dtype=np.complex128)
    d_theta = np.zeros(kk)
    d_phi = np.zeros(kk)
    tmp = np.empty((2, m), dtype=np.complex128)
    q = np.empty((2, 2), dtype=np.complex128)
    for k in range(kk):
        p = pairs[k]
        for i in range(2):
            for col in range(m):
                acc = 0.0 + 0.0j
                for l in range(m):
                    acc += srows[k, i, l] * gh[l, col]
                tmp[i, col] = acc
        for i in range(2):
            for j in range(2):
                acc = 0.0 + 0.0j
                for l in range(m):
                    acc += tmp[i, l] * prefix[l, p + j]
                q[i, j] = acc
        c = np.cos(thetas[k])
        s = np.sin(thetas[k])
        e = np.exp(1j * phis[k])
        # sum_ij Q[i, j] dT[j, i]
        d_theta[k] = (
            q[0, 0] * (-e * s) + q[1, 0] * (-e * c) + q[0, 1] * c + q[1, 1] * (-s)
        ).real
        d_phi[k] = (q[0, 0] * (1j * e * c) + q[1, 0] * (-1j * e * s)).real
        for r in range(m):
            a = prefix[r, p]
            b = prefix[r, p + 1]
            prefix[r, p] = a * e * c + b * s
            prefix[r, p + 1] = -a * e * s + b * c
    d_phase = np.zeros(m)
    for col in range(m):
        ph = np.exp(1j * phases[col])
        acc = 0.0
        for r in range(m):
            acc += (np.conj(g[r, col]) * 1j * prefix[r, col] * ph).real
        d_phase[col] = acc
    return d_theta, d_phi, d_phase


def mesh_gradient(thetas, phis, pairs, phases, g):
    """Gradient of a real loss through ``mesh_unitary``; see the numpy twin."""
    return _mesh_gradient(
        np.ascontiguousarray(thetas, dtype=np.float64),
        np.ascontiguousarray(phis, dtype=np.float64),
        np.ascontiguousarray(pairs, dtype=np.int64),
        np.ascontiguousarray(phases, dtype=np.float64),
        np.ascontiguousarray(g, dtype=np.complex128),
    )
