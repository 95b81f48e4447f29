"""Fusion gates as mode unitaries and the post-selected hybrid-operation evaluator.

All 4x4 gates use the mode order (H1, V1, H2, V2).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import kernels
from .dualrail import (
    MINUS,
    PLUS,
    H,
    V,
    LogicalState,
    QubitLayout,
    apply_logical,
    make_chain_cluster,
)
from .fock import DimensionError, compose, embed

FIDELITY_ATOL = 1e-9

SIGMA = {
    "x": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "y": np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    "z": np.array([[1, 0], [0, -1]], dtype=np.complex128),
}


def build_local_rotation(axis: str, angle: float) -> np.ndarray:
    """exp(i * angle * sigma_axis) = cos(angle) I + i sin(angle) sigma_axis."""
    try:
        s = SIGMA[axis.lower()]
    except KeyError:
        raise ValueError(f"unknown rotation axis {axis!r}") from None
    return np.cos(angle) * np.eye(2) + 1j * np.sin(angle) * s


def direct_sum(a, b) -> np.ndarray:
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    out = np.zeros((a.shape[0] + b.shape[0],) * 2, dtype=np.complex128)
    out[: a.shape[0], : a.shape[0]] = a
    out[a.shape[0] :, a.shape[0] :] = b
    return out


def signed_v_swap() -> np.ndarray:
    """V1 -> -V2, V2 -> V1; H modes untouched."""
    b = np.zeros((4, 4), dtype=np.complex128)
    b[0, 0] = b[2, 2] = 1.0
    b[3, 1] = 1.0
    b[1, 3] = -1.0
    return b


def build_cz1(x1: float = 0.0, x2: float = 0.0) -> np.ndarray:
    """Single-qubit fusion gate A(x1, x2) . B . C, success 1/2 for any x1, x2."""
    a = direct_sum(
        build_local_rotation("z", x2),
        build_local_rotation("x", x1) @ build_local_rotation("z", -x2),
    )
    c = direct_sum(np.eye(2), build_local_rotation("y", np.pi / 4))
    return compose(a, compose(signed_v_swap(), c))


def _stretch_mixer() -> np.ndarray:
    c, s = np.cos(np.pi / 8), np.sin(np.pi / 8)
    return np.array(
        [
            [s, 0, -c, 0],
            [0, c, 0, -s],
            [c, 0, s, 0],
            [0, s, 0, c],
        ],
        dtype=np.complex128,
    )


def build_stretch() -> np.ndarray:
    """Stretch gate A . X . B followed by a Z waveplate on the first qubit.

    As printed, A . X . B sends |++> to Z1|C2> and |--> to |C2>; the trailing
    V1 phase flip restores |++> -> |C2>, |--> -> Z1|C2>.
    """
    q = np.pi / 4
    a = direct_sum(
        build_local_rotation("z", q),
        build_local_rotation("z", -q) @ build_local_rotation("y", -q),
    )
    b = direct_sum(build_local_rotation("y", q), build_local_rotation("x", -q))
    z1 = np.diag([1.0, -1.0, 1.0, 1.0]).astype(np.complex128)
    return compose(compose(compose(a, _stretch_mixer()), b), z1)


def build_pbs() -> np.ndarray:
    """Polarizing beam splitter: H modes transmitted, V modes exchanged."""
    u = np.zeros((4, 4), dtype=np.complex128)
    u[0, 0] = u[2, 2] = 1.0
    u[1, 3] = u[3, 1] = 1.0
    return u


def hadamard_plate() -> np.ndarray:
    """Half-wave plate taking |H> -> |+>, |V> -> |->."""
    return np.array([[1, 1], [1, -1]], dtype=np.complex128) / np.sqrt(2.0)


def build_canonical_cz() -> np.ndarray:
    """Post-selected CZ with three 1/3 splitters; success 1/9.

    Six modes (H1, V1, H2, V2, a1, a2): the V modes meet on a 1/3 splitter and
    each H mode is attenuated to 1/3 intensity against a vacuum ancilla.
    """
    t = 1.0 / np.sqrt(3.0)
    r = np.sqrt(2.0 / 3.0)
    u = np.zeros((6, 6), dtype=np.complex128)
    u[np.ix_([1, 3], [1, 3])] = [[t, -r], [r, t]]
    u[np.ix_([0, 4], [0, 4])] = [[t, r], [r, -t]]
    u[np.ix_([2, 5], [2, 5])] = [[t, r], [r, -t]]
    return u


GATE_CATALOG = {
    "cz1": build_cz1,
    "stretch": build_stretch,
    "pbs": build_pbs,
    "cz_canonical": build_canonical_cz,
}


# -- hybrid operations -------------------------------------------------------


@dataclass(frozen=True)
class HybridOpSpec:
    """Subspace transformation: ``inputs[k]`` must map to ``alpha * targets[k]``.

    ``ancilla_modes`` only tells the optimizer how many vacuum modes to add.
    """

    num_qubits: int
    inputs: Tuple[LogicalState, ...]
    targets: Tuple[LogicalState, ...]
    description: str = ""
    ancilla_modes: int = 0
    layout: QubitLayout = field(default=None)

    def __post_init__(self):
        if self.layout is None:
            object.__setattr__(self, "layout", QubitLayout.standard(self.num_qubits))
        if len(self.inputs) != len(self.targets) or not self.inputs:
            raise ValueError("need matching, nonempty input and target lists")
        for s in (*self.inputs, *self.targets):
            if s.num_qubits != self.num_qubits:
                raise DimensionError("spec state has the wrong qubit count")
        for name, states in (("inputs", self.inputs), ("targets", self.targets)):
            gram = self._matrix(states).conj().T @ self._matrix(states)
            if not np.allclose(gram, np.eye(len(states)), atol=1e-10):
                raise ValueError(f"spec {name} are not orthonormal")

    @staticmethod
    def _matrix(states) -> np.ndarray:
        return np.stack([s.amplitudes for s in states], axis=1)

    @property
    def dim(self) -> int:
        return len(self.inputs)

    def input_matrix(self) -> np.ndarray:
        return self._matrix(self.inputs)

    def target_matrix(self) -> np.ndarray:
        return self._matrix(self.targets)


@dataclass
class HybridEvalResult:
    effective_matrix: np.ndarray
    fidelity: float
    success: Optional[float]
    alpha: Optional[complex]
    success_surrogate: float
    branch_norms: np.ndarray
    branch_alphas: np.ndarray


def _transfer_indices(layout: QubitLayout) -> Tuple[np.ndarray, np.ndarray]:
    modes = layout.basis_modes()
    d = modes.shape[0]
    # batch b = o * d + i : rows from input basis i, cols from output basis o
    rows = np.tile(modes, (d, 1))
    cols = np.repeat(modes, d, axis=0)
    return rows, cols


def computational_transfer(u, layout: QubitLayout) -> np.ndarray:
    """T[o, i] = <o| Omega(U) |i> between dual-rail basis states.

    Each qubit holds one photon in one mode, so every entry is a plain
    permanent with no factorial weights. Modes beyond the layout stay vacuum.
    """
    u = np.asarray(u, dtype=np.complex128)
    if u.shape[0] < layout.num_modes:
        raise DimensionError(f"unitary has {u.shape[0]} modes, layout needs {layout.num_modes}")
    rows, cols = _transfer_indices(layout)
    d = 2**layout.num_qubits
    return kernels.batch_permanents(u, rows, cols).reshape(d, d)


def hybrid_scores(t: np.ndarray, spec: HybridOpSpec):
    """(effective matrix A, fidelity, success surrogate, projected norms) from a transfer matrix."""
    cin = spec.input_matrix()
    ctar = spec.target_matrix()
    out = t @ cin
    a = ctar.conj().T @ out
    d = spec.dim
    branch = np.sum(np.abs(out) ** 2, axis=0)
    total = float(branch.sum())
    tr = np.trace(a)
    fidelity = float(abs(tr) ** 2 / (d * total)) if total > 0 else 0.0
    surrogate = float(np.sum(np.abs(a) ** 2) / d)
    return a, fidelity, surrogate, branch


def evaluate_hybrid(u, spec: HybridOpSpec, fidelity_atol: float = FIDELITY_ATOL) -> HybridEvalResult:
    """Fidelity and post-selected success of ``U`` on a hybrid operation.

    A[j, k] = <target_j| P Omega(U) |input_k>. Fidelity is
    |tr A|^2 / (d * sum_k ||P Omega(U) input_k||^2), which is 1 exactly when A
    is alpha times identity and nothing leaks elsewhere in the computational
    space. Success ||A||_F^2 / d is only reported at unit fidelity.
    """
    u = np.asarray(u, dtype=np.complex128)
    if u.shape[0] < spec.layout.num_modes:
        raise DimensionError(
            f"unitary has {u.shape[0]} modes, spec needs {spec.layout.num_modes}"
        )
    t = computational_transfer(u, spec.layout)
    a, fidelity, surrogate, branch = hybrid_scores(t, spec)
    diag = np.diag(a).copy()
    success = alpha = None
    if fidelity >= 1.0 - fidelity_atol:
        success = surrogate
        alpha = complex(np.mean(diag))
    return HybridEvalResult(
        effective_matrix=a,
        fidelity=fidelity,
        success=success,
        alpha=alpha,
        success_surrogate=surrogate,
        branch_norms=branch,
        branch_alphas=diag,
    )


# -- standard specs --------------------------------------------------------


def _cz(state: LogicalState, pairs: Sequence[Tuple[int, int]]) -> LogicalState:
    for p in pairs:
        state = apply_logical("CZ", p, state)
    return state


def fusion_spec(m: int, description: str = "") -> HybridOpSpec:
    """|H>|C_m> -> |H>|C_m>, |V>|C_m> -> |V> Z_1 |C_m> on 1 + m qubits."""
    cm = make_chain_cluster(m)
    h = LogicalState.product(H).tensor(cm)
    v = LogicalState.product(V).tensor(cm)
    return HybridOpSpec(
        num_qubits=m + 1,
        inputs=(h, v),
        targets=(h, apply_logical("CZ", [0, 1], v)),
        description=description or f"fuse C_{m} onto a cluster end",
    )


def make_standard_specs() -> Dict[str, HybridOpSpec]:
    specs = {}
    specs["cz1_spec"] = HybridOpSpec(
        num_qubits=2,
        inputs=(LogicalState.product(H, PLUS), LogicalState.product(V, PLUS)),
        targets=(LogicalState.product(H, PLUS), LogicalState.product(V, MINUS)),
        description="fuse |+> onto a cluster: |H+> -> |H+>, |V+> -> |V->",
    )
    c2 = make_chain_cluster(2)
    c2_perp = _cz(LogicalState.product(MINUS, PLUS), [(0, 1)])
    specs["cz2_spec"] = HybridOpSpec(
        num_qubits=3,
        inputs=(LogicalState.product(H).tensor(c2), LogicalState.product(V).tensor(c2)),
        targets=(LogicalState.product(H).tensor(c2), LogicalState.product(V).tensor(c2_perp)),
        description="fuse C_2 onto a cluster: |H>|C2> -> |H>|C2>, |V>|C2> -> |V>|C2perp>",
    )
    specs["stretch_spec"] = HybridOpSpec(
        num_qubits=2,
        inputs=(LogicalState.product(PLUS, PLUS), LogicalState.product(MINUS, MINUS)),
        targets=(c2, apply_logical("Z", [0], c2)),
        description="stretch: |++> -> |C2>, |--> -> Z1|C2>",
    )
    basis = [LogicalState.product(a, b) for b in (H, V) for a in (H, V)]
    specs["cz_operator_spec"] = HybridOpSpec(
        num_qubits=2,
        inputs=tuple(basis),
        targets=tuple(apply_logical("CZ", [0, 1], s) for s in basis),
        description="full CZ operator on all four basis states",
        ancilla_modes=2,
    )
    specs["c3_fusion_spec"] = fusion_spec(3)
    specs["c4_fusion_spec"] = fusion_spec(4)
    # qubits 0 = k, 1 = k+1 (neighbours in the chain), 2 = w (grafted)
    graft_in = [LogicalState.product(a, b, PLUS) for b in (H, V) for a in (H, V)]
    specs["graft_spec"] = HybridOpSpec(
        num_qubits=3,
        inputs=tuple(graft_in),
        targets=tuple(_cz(s, [(0, 2), (2, 1), (0, 1)]) for s in graft_in),
        description="graft a |+> qubit between chain neighbours k, k+1 (three CZs)",
    )
    return specs


def spec_names() -> List[str]:
    return sorted(make_standard_specs())
