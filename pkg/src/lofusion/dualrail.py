"""Dual-rail qubits: encoding onto mode pairs, computational-subspace projection,
linear cluster states and a few logical gates.

Logical amplitude vectors are little-endian: index ``i`` has qubit ``q`` in
``|V>`` iff bit ``q`` of ``i`` is set (qubit 0 is least significant).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from .fock import DimensionError, PhotonicState

SQRT1_2 = 1.0 / np.sqrt(2.0)

H = np.array([1.0, 0.0], dtype=np.complex128)
V = np.array([0.0, 1.0], dtype=np.complex128)
PLUS = np.array([SQRT1_2, SQRT1_2], dtype=np.complex128)
MINUS = np.array([SQRT1_2, -SQRT1_2], dtype=np.complex128)


@dataclass(frozen=True)
class QubitLayout:
    """Qubit q is one photon shared between modes ``pairs[q] = (h_mode, v_mode)``.

    Modes at or above ``2 * num_qubits`` (when ``num_modes`` is larger) are
    vacuum ancillas.
    """

    pairs: Tuple[Tuple[int, int], ...]
    num_modes: int

    def __post_init__(self):
        pairs = tuple((int(h), int(v)) for h, v in self.pairs)
        flat = [m for p in pairs for m in p]
        if len(set(flat)) != len(flat):
            raise ValueError(f"layout reuses a mode: {pairs}")
        if flat and (min(flat) < 0 or max(flat) >= self.num_modes):
            raise ValueError(f"layout modes out of range for {self.num_modes} modes")
        object.__setattr__(self, "pairs", pairs)

    @classmethod
    def standard(cls, num_qubits: int, ancilla_modes: int = 0) -> "QubitLayout":
        """Qubit q on modes (2q, 2q+1)."""
        pairs = tuple((2 * q, 2 * q + 1) for q in range(num_qubits))
        return cls(pairs, 2 * num_qubits + ancilla_modes)

    @property
    def num_qubits(self) -> int:
        return len(self.pairs)

    def occupation(self, index: int) -> Tuple[int, ...]:
        occ = [0] * self.num_modes
        for q, (h, v) in enumerate(self.pairs):
            occ[v if (index >> q) & 1 else h] = 1
        return tuple(occ)

    def basis_modes(self) -> np.ndarray:
        """(2^n, n) array: occupied mode of each qubit for every basis index."""
        n = self.num_qubits
        idx = np.arange(2**n)
        bits = (idx[:, None] >> np.arange(n)[None, :]) & 1
        h = np.array([p[0] for p in self.pairs], dtype=np.int64)
        v = np.array([p[1] for p in self.pairs], dtype=np.int64)
        return np.where(bits == 1, v[None, :], h[None, :]).astype(np.int64)


@dataclass(frozen=True)
class LogicalState:
    """Amplitudes over the {H, V}^n basis.

    ``norm2`` records the squared norm a post-selection left behind; the
    amplitude vector itself is normalized unless it is identically zero.
    """

    amplitudes: np.ndarray
    norm2: float = 1.0

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=np.complex128).ravel()
        n = int(round(np.log2(amps.size))) if amps.size else -1
        if amps.size < 2 or 2**n != amps.size:
            raise DimensionError(f"amplitude vector length {amps.size} is not 2^n, n >= 1")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def num_qubits(self) -> int:
        return int(round(np.log2(self.amplitudes.size)))

    @classmethod
    def product(cls, *qubits) -> "LogicalState":
        """Product state; ``qubits[0]`` is qubit 0."""
        out = np.array([1.0 + 0.0j])
        for q in qubits:
            out = np.kron(np.asarray(q, dtype=np.complex128), out)
        return cls(out)

    def tensor(self, other: "LogicalState") -> "LogicalState":
        """``self`` on the low qubits, ``other`` appended after them."""
        return LogicalState(np.kron(other.amplitudes, self.amplitudes))

    def normalized(self) -> "LogicalState":
        nrm = np.linalg.norm(self.amplitudes)
        if nrm == 0:
            raise ValueError("cannot normalize the zero state")
        return LogicalState(self.amplitudes / nrm)

    def overlap(self, other: "LogicalState") -> complex:
        """<self|other>."""
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def equal_up_to_phase(self, other: "LogicalState", atol: float = 1e-10) -> bool:
        a, b = self.amplitudes, other.amplitudes
        if a.shape != b.shape:
            return False
        ov = np.vdot(a, b)
        if abs(ov) == 0:
            return bool(np.allclose(a, 0, atol=atol) and np.allclose(b, 0, atol=atol))
        phase = ov / abs(ov)
        return bool(np.max(np.abs(a * phase - b)) <= atol)


def encode(logical: LogicalState, layout: QubitLayout) -> PhotonicState:
    """Map each basis term to one photon in the H or V mode of every qubit."""
    if layout.num_qubits != logical.num_qubits:
        raise DimensionError(
            f"layout has {layout.num_qubits} qubits, state has {logical.num_qubits}"
        )
    amps = {
        layout.occupation(i): a for i, a in enumerate(logical.amplitudes) if a != 0
    }
    return PhotonicState(layout.num_modes, amps)


def project_computational(
    state: PhotonicState, layout: QubitLayout
) -> Tuple[LogicalState, float]:
    """Keep the terms with exactly one photon per qubit mode pair.

    Returns the decoded logical state (normalized, with ``norm2`` = |alpha|^2)
    and the discarded weight |beta|^2.
    """
    if state.num_modes != layout.num_modes:
        raise DimensionError(
            f"state has {state.num_modes} modes, layout expects {layout.num_modes}"
        )
    n = layout.num_qubits
    out = np.zeros(2**n, dtype=np.complex128)
    if state.photon_number == n:
        lookup = {layout.occupation(i): i for i in range(2**n)}
        for occ, amp in state.amplitudes.items():
            i = lookup.get(occ)
            if i is not None:
                out[i] += amp
    norm2 = float(np.vdot(out, out).real)
    residual = max(0.0, state.norm2() - norm2)
    if norm2 > 0:
        out = out / np.sqrt(norm2)
    return LogicalState(out, norm2=norm2), residual


# -- logical gates ---------------------------------------------------------

_SINGLE = {
    "X": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    "Z": np.array([[1, 0], [0, -1]], dtype=np.complex128),
    "H": np.array([[1, 1], [1, -1]], dtype=np.complex128) * SQRT1_2,
    "I": np.eye(2, dtype=np.complex128),
}


def _as_tensor(amps: np.ndarray, n: int) -> np.ndarray:
    # axis q of the returned tensor is qubit q
    return amps.reshape([2] * n).transpose(list(range(n - 1, -1, -1)))


def _from_tensor(t: np.ndarray, n: int) -> np.ndarray:
    return t.transpose(list(range(n - 1, -1, -1))).reshape(-1)


def apply_logical(op: str, targets: Sequence[int], state: LogicalState) -> LogicalState:
    """Apply X, Y, Z, H (one target) or CZ (two targets) to a logical state."""
    n = state.num_qubits
    targets = [int(t) for t in targets]
    if any(t < 0 or t >= n for t in targets):
        raise IndexError(f"target out of range for {n} qubits: {targets}")
    name = op.upper()
    amps = state.amplitudes.copy()
    if name == "CZ":
        if len(targets) != 2 or targets[0] == targets[1]:
            raise ValueError("CZ needs two distinct targets")
        idx = np.arange(2**n)
        both = ((idx >> targets[0]) & 1) & ((idx >> targets[1]) & 1)
        amps[both == 1] *= -1
        return LogicalState(amps, norm2=state.norm2)
    if name not in _SINGLE:
        raise ValueError(f"unknown logical operator {op!r}")
    if len(targets) != 1:
        raise ValueError(f"{name} takes one target")
    t = _as_tensor(amps, n)
    t = np.moveaxis(np.tensordot(_SINGLE[name], t, axes=([1], [targets[0]])), 0, targets[0])
    return LogicalState(_from_tensor(t, n), norm2=state.norm2)


def pauli_expectation(state: LogicalState, paulis: dict) -> float:
    """<state| prod_q P_q |state> for a {qubit: 'X'|'Y'|'Z'} map."""
    s = state
    for q, p in paulis.items():
        s = apply_logical(p, [q], s)
    return float(np.vdot(state.amplitudes, s.amplitudes).real)


def make_chain_cluster(n: int) -> LogicalState:
    """Linear cluster C_n = prod_i CZ_{i,i+1} |+>^n."""
    if n < 1:
        raise ValueError("cluster needs at least one qubit")
    state = LogicalState.product(*([PLUS] * n))
    for i in range(n - 1):
        state = apply_logical("CZ", [i, i + 1], state)
    return state


def chain_stabilizers(n: int):
    """Generators Z_{i-1} X_i Z_{i+1}, truncated at the chain ends."""
    gens = []
    for i in range(n):
        g = {i: "X"}
        if i > 0:
            g[i - 1] = "Z"
        if i < n - 1:
            g[i + 1] = "Z"
        gens.append(g)
    return gens


def stabilizer_check(state: LogicalState, n: Optional[int] = None, atol: float = 1e-9) -> bool:
    """True iff every chain stabilizer has expectation 1 within ``atol``."""
    n = state.num_qubits if n is None else n
    if state.num_qubits != n:
        return False
    return all(abs(pauli_expectation(state, g) - 1.0) <= atol for g in chain_stabilizers(n))
