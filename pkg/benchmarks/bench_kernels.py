"""Time the numba kernels against the pure-numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat N]

Sizes mirror the optimizer workload: every dual-rail basis transfer of a
k-qubit spec on 2k modes (2^k x 2^k permanents of k x k submatrices).
"""

import argparse
import time

import numpy as np

from lofusion.dualrail import QubitLayout
from lofusion.gates import _transfer_indices
from lofusion.kernels import _numba, _numpy
from lofusion.optimizer import reck_pairs


def best_of(fn, repeat):
    fn()  # warm-up, includes JIT compilation on first use
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases(rng):
    for k in (3, 4, 5):
        m = 2 * k
        u, _ = np.linalg.qr(rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m)))
        rows, cols = _transfer_indices(QubitLayout.standard(k))
        pairs = reck_pairs(m)
        th = rng.uniform(0, 6, len(pairs))
        ph = rng.uniform(0, 6, len(pairs))
        phases = rng.uniform(0, 6, m)
        g = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
        yield f"batch_permanents k={k}", lambda mod: mod.batch_permanents(u, rows, cols)
        yield f"batch_permanents_grad k={k}", lambda mod: mod.batch_permanents_grad(u, rows, cols)
        yield f"mesh_unitary M={m}", lambda mod: mod.mesh_unitary(th, ph, pairs, phases)
        yield f"mesh_gradient M={m}", lambda mod: mod.mesh_gradient(th, ph, pairs, phases, g)
    a = rng.standard_normal((10, 10)) + 1j * rng.standard_normal((10, 10))
    yield "permanent 10x10", lambda mod: mod.permanent(a)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    print(f"{'kernel':<28}{'numpy [ms]':>12}{'numba [ms]':>12}{'speedup':>10}")
    for name, call in cases(rng):
        a = call(_numpy)
        b = call(_numba)
        for x, y in zip(a if isinstance(a, tuple) else (a,), b if isinstance(b, tuple) else (b,)):
            assert np.allclose(x, y, atol=1e-10), name
        t_np = best_of(lambda: call(_numpy), args.repeat)
        t_nb = best_of(lambda: call(_numba), args.repeat)
        print(f"{name:<28}{1e3 * t_np:>12.3f}{1e3 * t_nb:>12.3f}{t_np / t_nb:>10.1f}")


if __name__ == "__main__":
    main()
