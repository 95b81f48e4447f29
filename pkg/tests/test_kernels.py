import numpy as np
import pytest

from lofusion import kernels
from lofusion.fock import permanent_naive
from lofusion.kernels import _numpy

from conftest import haar

numba_impl = pytest.importorskip("lofusion.kernels._numba")


def random_complex(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


@pytest.mark.parametrize("k", range(0, 8))
def test_permanent_backends_agree_with_naive(k):
    rng = np.random.default_rng(k)
    a = random_complex(rng, k, k)
    ref = permanent_naive(a)
    for impl in (_numpy, numba_impl):
        got = impl.permanent(a)
        assert abs(got - ref) <= 1e-9 * max(1.0, abs(ref))


def test_env_flag_selects_backend():
    import os

    flag = os.environ.get("LOFUSION_DISABLE_JIT", "") not in ("", "0")
    assert kernels.USING_NUMBA is (not flag)


def _batch(rng, m=6, k=3, b=20):
    u = haar(m, rng)
    rows = np.stack([rng.choice(m, k, replace=False) for _ in range(b)]).astype(np.int64)
    cols = np.stack([rng.choice(m, k, replace=False) for _ in range(b)]).astype(np.int64)
    return u, rows, cols


def test_batch_permanents_match_single(rng):
    u, rows, cols = _batch(rng)
    ref = np.array([permanent_naive(u[np.ix_(r, c)]) for r, c in zip(rows, cols)])
    for impl in (_numpy, numba_impl):
        np.testing.assert_allclose(impl.batch_permanents(u, rows, cols), ref, atol=1e-12)


def test_batch_permanent_gradient_matches_finite_difference(rng):
    u, rows, cols = _batch(rng, m=5, k=4, b=6)
    for impl in (_numpy, numba_impl):
        perms, grads = impl.batch_permanents_grad(u, rows, cols)
        np.testing.assert_allclose(perms, impl.batch_permanents(u, rows, cols), atol=1e-12)
        for b in range(len(rows)):
            sub = u[np.ix_(rows[b], cols[b])]
            for i in range(4):
                for j in range(4):
                    # permanent is linear in each entry: d/da_ij = Per(minor)
                    minor = np.delete(np.delete(sub, i, 0), j, 1)
                    assert abs(grads[b, i, j] - permanent_naive(minor)) < 1e-10


def _mesh_args(rng, m):
    k = m * (m - 1) // 2
    pairs = np.array([p for c in range(m - 1) for p in range(m - 2, c - 1, -1)], dtype=np.int64)
    return rng.uniform(0, 2 * np.pi, k), rng.uniform(0, 2 * np.pi, k), pairs, rng.uniform(0, 2 * np.pi, m)


@pytest.mark.parametrize("m", [2, 3, 5])
def test_mesh_unitary_backends_agree(m, rng):
    th, ph, pairs, phases = _mesh_args(rng, m)
    a = _numpy.mesh_unitary(th, ph, pairs, phases)
    b = numba_impl.mesh_unitary(th, ph, pairs, phases)
    np.testing.assert_allclose(a, b, atol=1e-13)
    np.testing.assert_allclose(a @ a.conj().T, np.eye(m), atol=1e-12)


@pytest.mark.parametrize("m", [2, 4])
def test_mesh_gradient_matches_finite_difference(m, rng):
    th, ph, pairs, phases = _mesh_args(rng, m)
    w = random_complex(rng, m, m)

    def loss(th_, ph_, phases_):
        u = _numpy.mesh_unitary(th_, ph_, pairs, phases_)
        return float(np.real(np.sum(np.conj(w) * u)))

    # L = Re<w, U>  =>  G = 2 dL/d(conj U) = w
    for impl in (_numpy, numba_impl):
        dt, dp, dph = impl.mesh_gradient(th, ph, pairs, phases, w)
        h = 1e-6
        for vec, grad, idx in ((th, dt, 0), (ph, dp, 1), (phases, dph, 2)):
            for i in range(vec.size):
                args_p = [th.copy(), ph.copy(), phases.copy()]
                args_m = [th.copy(), ph.copy(), phases.copy()]
                args_p[idx][i] += h
                args_m[idx][i] -= h
                fd = (loss(*args_p) - loss(*args_m)) / (2 * h)
                assert abs(fd - grad[i]) < 1e-7
