"""Hot numeric kernels with a numba path and a pure-numpy fallback.

The numba path is used when numba imports cleanly, unless the environment
variable ``LOFUSION_DISABLE_JIT`` is set to a non-empty value other than
``"0"``. Both paths expose the same five functions.
"""

import os

from . import _numpy

_disabled = os.environ.get("LOFUSION_DISABLE_JIT", "") not in ("", "0")

try:
    if _disabled:
        raise ImportError("JIT disabled by LOFUSION_DISABLE_JIT")
    from . import _numba as _impl

    USING_NUMBA = True
except ImportError:
    _impl = _numpy
    USING_NUMBA = False

permanent = _impl.permanent
batch_permanents = _impl.batch_permanents
batch_permanents_grad = _impl.batch_permanents_grad
mesh_unitary = _impl.mesh_unitary
mesh_gradient = _impl.mesh_gradient

__all__ = [
    "USING_NUMBA",
    "permanent",
    "batch_permanents",
    "batch_permanents_grad",
    "mesh_unitary",
    "mesh_gradient",
]
