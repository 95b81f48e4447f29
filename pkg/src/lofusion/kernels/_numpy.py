"""Pure-numpy reference versions of the hot kernels.

Every function here has an identically named twin in ``_numba``; the two
must agree to rounding error.
"""

from functools import lru_cache

import numpy as np


@lru_cache(maxsize=None)
def _subset_table(k):
    # rows: all nonempty column subsets; sign (-1)^(k-|S|)
    idx = np.arange(1, 2**k)
    members = ((idx[:, None] >> np.arange(k)[None, :]) & 1).astype(np.float64)
    sizes = members.sum(axis=1)
    signs = np.where((k - sizes) % 2 == 0, 1.0, -1.0)
    return members, signs


def permanent(a):
    """Ryser inclusion-exclusion permanent of a square complex matrix."""
    a = np.asarray(a, dtype=np.complex128)
    k = a.shape[0]
    if k == 0:
        return 1.0 + 0.0j
    members, signs = _subset_table(k)
    row_sums = a @ members.T  # (k, 2^k - 1)
    return complex(np.prod(row_sums, axis=0) @ signs)


def batch_permanents(u, rows, cols):
    """Permanents of ``u[rows[b]][:, cols[b]]`` for every batch row b."""
    u = np.asarray(u, dtype=np.complex128)
    rows = np.asarray(rows, dtype=np.int64)
    cols = np.asarray(cols, dtype=np.int64)
    nb, k = rows.shape
    if k == 0:
        return np.ones(nb, dtype=np.complex128)
    sub = u[rows[:, :, None], cols[:, None, :]]  # (B, k, k)
    members, signs = _subset_table(k)
    row_sums = sub @ members.T  # (B, k, S)
    return np.prod(row_sums, axis=1) @ signs


def batch_permanents_grad(u, rows, cols):
    """Permanents plus d Per / d entry for each gathered k x k submatrix.

    Returns ``(perms, grads)`` with ``grads[b, i, j]`` the derivative of
    permanent b with respect to its submatrix entry (i, j).
    """
    u = np.asarray(u, dtype=np.complex128)
    rows = np.asarray(rows, dtype=np.int64)
    cols = np.asarray(cols, dtype=np.int64)
    nb, k = rows.shape
    if k == 0:
        return np.ones(nb, dtype=np.complex128), np.zeros((nb, 0, 0), np.complex128)
    sub = u[rows[:, :, None], cols[:, None, :]]
    members, signs = _subset_table(k)
    row_sums = sub @ members.T  # (B, k, S)
    ones = np.ones_like(row_sums[:, :1, :])
    prefix = np.cumprod(np.concatenate([ones, row_sums[:, :-1, :]], axis=1), axis=1)
    suffix = np.cumprod(
        np.concatenate([ones, row_sums[:, :0:-1, :]], axis=1), axis=1
    )[:, ::-1, :]
    excl = prefix * suffix  # product over all rows but i
    perms = (prefix[:, -1, :] * row_sums[:, -1, :]) @ signs
    grads = (excl * signs) @ members  # (B, k, k)
    return perms, grads


def mesh_unitary(thetas, phis, pairs, phases):
    """Product T_1 T_2 ... T_K D of two-mode rotations and output phases.

    Block for pair (p, p+1): [[e^{i phi} cos t, -e^{i phi} sin t], [sin t, cos t]].
    """
    m = len(phases)
    u = np.eye(m, dtype=np.complex128)
    for t, f, p in zip(thetas, phis, pairs):
        c, s, e = np.cos(t), np.sin(t), np.exp(1j * f)
        a = u[:, p].copy()
        b = u[:, p + 1].copy()
        u[:, p] = a * e * c + b * s
        u[:, p + 1] = -a * e * s + b * c
    return u * np.exp(1j * np.asarray(phases))[None, :]


def mesh_gradient(thetas, phis, pairs, phases, g):
    """Gradient of a real loss through ``mesh_unitary``.

    ``g`` is the conjugate-Wirtinger gradient 2 dL/d(conj U). Returns
    (d_theta, d_phi, d_phase).
    """
    kk = len(thetas)
    m = len(phases)
    pairs = np.asarray(pairs)
    d = np.exp(1j * np.asarray(phases))
    # suffix S_k = T_{k+1} ... T_K D, built right to left as explicit matrices
    blocks = []
    for t, f in zip(thetas, phis):
        c, s, e = np.cos(t), np.sin(t), np.exp(1j * f)
        blocks.append(np.array([[e * c, -e * s], [s, c]]))
    suffix = np.diag(d).astype(np.complex128)
    suffixes = [None] * kk
    for k in range(kk - 1, -1, -1):
        suffixes[k] = suffix
        p = pairs[k]
        suffix = suffix.copy()
        suffix[[p, p + 1], :] = blocks[k] @ suffix[[p, p + 1], :]
    prefix = np.eye(m, dtype=np.complex128)
    d_theta = np.zeros(kk)
    d_phi = np.zeros(kk)
    gh = g.conj().T
    for k in range(kk):
        p = pairs[k]
        # Q = S_{k+1} G^H P_{k-1}, only the (p, p+1) block is needed
        q = suffixes[k][[p, p + 1], :] @ gh @ prefix[:, [p, p + 1]]
        t, f = thetas[k], phis[k]
        c, s, e = np.cos(t), np.sin(t), np.exp(1j * f)
        dt = np.array([[-e * s, -e * c], [c, -s]])
        df = np.array([[1j * e * c, -1j * e * s], [0.0, 0.0]])
        d_theta[k] = np.real(np.sum(q.T * dt))
        d_phi[k] = np.real(np.sum(q.T * df))
        a = prefix[:, p].copy()
        b = prefix[:, p + 1].copy()
        blk = blocks[k]
        prefix[:, p] = a * blk[0, 0] + b * blk[1, 0]
        prefix[:, p + 1] = a * blk[0, 1] + b * blk[1, 1]
    u = prefix * d[None, :]
    d_phase = np.real(np.sum(np.conj(g) * 1j * u, axis=0))
    return d_theta, d_phi, d_phase
