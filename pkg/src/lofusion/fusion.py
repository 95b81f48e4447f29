"""Sequential cluster growth with exact post-selection bookkeeping."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np

from .dualrail import (
    PLUS,
    LogicalState,
    QubitLayout,
    encode,
    make_chain_cluster,
    project_computational,
    stabilizer_check,
)
from .fock import apply_mode_unitary, compose, embed
from .gates import build_cz1, build_pbs, build_stretch, direct_sum, hadamard_plate


class FusionError(RuntimeError):
    """A post-selection left nothing behind."""


@dataclass
class FusionOutcome:
    state: LogicalState
    step_success: float
    cumulative_success: float
    steps: List[Tuple[str, Tuple[int, ...], float]] = field(default_factory=list)

    def is_chain_cluster(self) -> bool:
        return stabilizer_check(self.state)


def _qubit_modes(*qubits: int) -> List[int]:
    return [m for q in qubits for m in (2 * q, 2 * q + 1)]


def _apply_and_project(state: LogicalState, u4, qubits, name):
    n = state.num_qubits
    layout = QubitLayout.standard(n)
    modes = _qubit_modes(*qubits)
    u = embed(u4, modes, layout.num_modes)
    out, _ = project_computational(apply_mode_unitary(u, encode(state, layout)), layout)
    if out.norm2 <= 0:
        raise FusionError(f"{name} on qubits {qubits} left no computational component")
    return LogicalState(out.amplitudes), (name, tuple(modes), out.norm2)


def fuse_single(cluster: LogicalState) -> FusionOutcome:
    """Append |+> and fuse it to the last qubit with the CZ~1 gate (success 1/2)."""
    n = cluster.num_qubits
    joined = cluster.tensor(LogicalState.product(PLUS))
    state, step = _apply_and_project(joined, build_cz1(0.0, 0.0), (n - 1, n), "cz1")
    return FusionOutcome(state, step[2], step[2], [step])


def pbs_step(cluster: LogicalState) -> Tuple[LogicalState, Tuple[str, Tuple[int, ...], float]]:
    """Append C_2 and apply the PBS between the cluster end and the pair's first qubit.

    A Hadamard plate on the transmitted pair qubit follows the PBS, giving
    (|C_{n-1}>|H>|++> + |~C_{n-1}>|V>|-->)/sqrt(2) after post-selection.
    """
    n = cluster.num_qubits
    joined = cluster.tensor(make_chain_cluster(2))
    u = compose(build_pbs(), direct_sum(np.eye(2), hadamard_plate()))
    return _apply_and_project(joined, u, (n - 1, n), "pbs")


def fuse_bell(cluster: LogicalState) -> FusionOutcome:
    """Fuse a Bell pair (C_2) onto the cluster end: PBS then stretch gate, 1/4 overall."""
    n = cluster.num_qubits
    mid, s1 = pbs_step(cluster)
    out, s2 = _apply_and_project(mid, build_stretch(), (n, n + 1), "stretch")
    step = s1[2] * s2[2]
    return FusionOutcome(out, step, step, [s1, s2])


def grow_chain(n: int, mode: str = "single") -> FusionOutcome:
    """Grow C_n by repeated fusion from |+> (single) or from C_2 (bell)."""
    if mode not in ("single", "bell"):
        raise ValueError(f"mode must be 'single' or 'bell', got {mode!r}")
    if n < 1 or (mode == "bell" and (n < 2 or n % 2)):
        raise ValueError(f"invalid target length {n} for mode {mode}")
    if mode == "single":
        outcome = FusionOutcome(make_chain_cluster(1), 1.0, 1.0)
        fuse = fuse_single
    else:
        outcome = FusionOutcome(make_chain_cluster(2), 1.0, 1.0)
        fuse = fuse_bell
    while outcome.state.num_qubits < n:
        step = fuse(outcome.state)
        outcome = FusionOutcome(
            step.state,
            step.step_success,
            outcome.cumulative_success * step.step_success,
            outcome.steps + step.steps,
        )
    return outcome


def spared_photons(n: int, s: float) -> float:
    """Large-n average of photons saved per success: [n - (2-s)/(1-s)] s^(1-n)."""
    if not 0.0 < s < 1.0:
        raise ValueError(f"success probability must lie in (0, 1), got {s}")
    if n < 1:
        raise ValueError("n must be >= 1")
    return (n - (2.0 - s) / (1.0 - s)) * s ** (1 - n)


def beamsplitter_budget(n: int, mode: str = "sequential") -> int:
    """Splitters needed for an n-qubit chain: n-1 sequential, n(2n-1) for a global mesh."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if mode == "sequential":
        return n - 1
    if mode == "global":
        return n * (2 * n - 1)
    raise ValueError(f"mode must be 'sequential' or 'global', got {mode!r}")


def expected_chain_success(n: int, mode: str = "single") -> float:
    if mode == "single":
        return 0.5 ** (n - 1)
    return 0.25 ** (n // 2 - 1)


__all__ = [
    "FusionError",
    "FusionOutcome",
    "fuse_single",
    "fuse_bell",
    "pbs_step",
    "grow_chain",
    "spared_photons",
    "beamsplitter_budget",
    "expected_chain_success",
]
