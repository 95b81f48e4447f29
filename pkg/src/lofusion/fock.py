"""Multi-photon linear optics: permanents, transition amplitudes, state evolution.

Convention: a mode unitary ``U`` maps input creation operators to output
ones as ``a_i^dag -> sum_j U[i, j] b_j^dag``. A single photon entering mode
``i`` therefore leaves with amplitudes ``U[i, :]``, and the transition
amplitude between occupations ``n`` (in) and ``m`` (out) is

    Per(U[rows repeated by n][:, cols repeated by m]) / sqrt(prod n_i! prod m_j!)

Applying ``U`` and then ``V`` is the product ``U @ V``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Dict, Iterator, Sequence, Tuple

import numpy as np

from . import kernels

PRUNE = 1e-14
UNITARY_ATOL = 1e-10
NORM_ATOL = 1e-10

Occupation = Tuple[int, ...]


class DimensionError(ValueError):
    """Matrix or occupation sizes do not line up."""


class SectorError(ValueError):
    """Photon numbers differ where a fixed-N sector is required."""


def as_mode_unitary(u, atol: float = UNITARY_ATOL) -> np.ndarray:
    """Validate ``u`` as a square unitary and return it as complex128."""
    u = np.asarray(u, dtype=np.complex128)
    if u.ndim != 2 or u.shape[0] != u.shape[1] or u.shape[0] < 1:
        raise DimensionError(f"mode unitary must be square with dim >= 1, got {u.shape}")
    dev = np.linalg.norm(u @ u.conj().T - np.eye(u.shape[0]))
    if dev > atol:
        raise ValueError(f"matrix is not unitary (||UU^dag - I||_F = {dev:.3e})")
    return u


def is_unitary(u, atol: float = UNITARY_ATOL) -> bool:
    u = np.asarray(u)
    return bool(np.linalg.norm(u @ u.conj().T - np.eye(u.shape[0])) <= atol)


def permanent(matrix) -> complex:
    """Permanent of a square matrix (Gray-code Ryser, O(2^k k)); 1 for 0x0."""
    a = np.asarray(matrix, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"permanent needs a square matrix, got shape {a.shape}")
    return kernels.permanent(a)


def permanent_naive(matrix) -> complex:
    """O(k!) expansion over permutations; kept as an oracle for ``permanent``."""
    a = np.asarray(matrix, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"permanent needs a square matrix, got shape {a.shape}")
    k = a.shape[0]
    total = 0.0 + 0.0j
    rows = np.arange(k)
    for perm in itertools.permutations(range(k)):
        total += np.prod(a[rows, list(perm)])
    return complex(total)


def _check_occupation(occ, num_modes: int | None = None) -> Occupation:
    occ = tuple(int(x) for x in occ)
    if any(x < 0 for x in occ):
        raise ValueError(f"negative photon count in {occ}")
    if num_modes is not None and len(occ) != num_modes:
        raise DimensionError(f"occupation {occ} has {len(occ)} modes, expected {num_modes}")
    return occ


def _factorial_norm(occ: Sequence[int]) -> float:
    return math.prod(math.factorial(x) for x in occ)


def _repeat_index(occ: Sequence[int]) -> np.ndarray:
    return np.repeat(np.arange(len(occ)), occ)


def transition_amplitude(u, inp, out) -> complex:
    """<out| Omega(U) |inp> for Fock occupations ``inp`` and ``out``."""
    u = np.asarray(u, dtype=np.complex128)
    m = u.shape[0]
    inp = _check_occupation(inp)
    out = _check_occupation(out)
    if len(inp) != m or len(out) != m:
        raise DimensionError(f"occupations must have {m} modes")
    if sum(inp) != sum(out):
        raise SectorError(f"photon number {sum(inp)} in, {sum(out)} out")
    sub = u[np.ix_(_repeat_index(inp), _repeat_index(out))]
    norm = math.sqrt(_factorial_norm(inp) * _factorial_norm(out))
    return kernels.permanent(sub) / norm


def compositions(n: int, m: int) -> Iterator[Occupation]:
    """All occupations of ``n`` photons in ``m`` modes, lexicographically descending."""
    if m == 0:
        if n == 0:
            yield ()
        return
    if m == 1:
        yield (n,)
        return
    for first in range(n, -1, -1):
        for rest in compositions(n - first, m - 1):
            yield (first,) + rest


@dataclass(frozen=True)
class PhotonicState:
    """Normalized superposition of Fock occupations in a fixed photon-number sector.

    ``amplitudes`` is kept sorted by occupation so iteration and reports are
    deterministic.
    """

    num_modes: int
    amplitudes: Dict[Occupation, complex] = field(default_factory=dict)

    def __post_init__(self):
        if self.num_modes < 1:
            raise DimensionError("num_modes must be >= 1")
        cleaned = {}
        n_total = None
        for occ, amp in self.amplitudes.items():
            occ = _check_occupation(occ, self.num_modes)
            n = sum(occ)
            if n_total is None:
                n_total = n
            elif n != n_total:
                raise SectorError("mixed photon-number sectors are not supported")
            cleaned[occ] = complex(amp)
        if not cleaned:
            raise ValueError("state has no amplitudes")
        norm2 = sum(abs(a) ** 2 for a in cleaned.values())
        if abs(norm2 - 1.0) > NORM_ATOL:
            raise ValueError(f"state is not normalized (norm^2 = {norm2!r})")
        object.__setattr__(self, "amplitudes", dict(sorted(cleaned.items())))

    @classmethod
    def from_amplitudes(cls, num_modes: int, amplitudes, normalize: bool = True):
        amps = {tuple(k): complex(v) for k, v in dict(amplitudes).items()}
        if normalize:
            norm = math.sqrt(sum(abs(a) ** 2 for a in amps.values()))
            if norm == 0.0:
                raise ValueError("cannot normalize a zero state")
            amps = {k: v / norm for k, v in amps.items()}
        return cls(num_modes, amps)

    @classmethod
    def fock(cls, occupation) -> "PhotonicState":
        occ = _check_occupation(occupation)
        return cls(len(occ), {occ: 1.0})

    @property
    def photon_number(self) -> int:
        return sum(next(iter(self.amplitudes)))

    def norm2(self) -> float:
        return float(sum(abs(a) ** 2 for a in self.amplitudes.values()))

    def amplitude(self, occupation) -> complex:
        return self.amplitudes.get(tuple(occupation), 0.0j)

    def inner(self, other: "PhotonicState") -> complex:
        """<self|other>."""
        return complex(
            sum(a.conjugate() * other.amplitude(k) for k, a in self.amplitudes.items())
        )

    def allclose(self, other: "PhotonicState", atol: float = 1e-10) -> bool:
        keys = set(self.amplitudes) | set(other.amplitudes)
        return all(abs(self.amplitude(k) - other.amplitude(k)) <= atol for k in keys)


def _active_modes(u: np.ndarray) -> np.ndarray:
    eye = np.eye(u.shape[0])
    moved = np.any(u != eye, axis=0) | np.any(u != eye, axis=1)
    return np.flatnonzero(moved)


def _evolve_block(u_sub: np.ndarray, occ: Occupation) -> Dict[Occupation, complex]:
    n = sum(occ)
    out = {}
    rows = _repeat_index(occ)
    in_norm = _factorial_norm(occ)
    for target in compositions(n, len(occ)):
        cols = _repeat_index(target)
        amp = kernels.permanent(u_sub[np.ix_(rows, cols)])
        if amp != 0:
            out[target] = amp / math.sqrt(in_norm * _factorial_norm(target))
    return out


def apply_mode_unitary(u, state: PhotonicState) -> PhotonicState:
    """Omega(U)|state> via transition amplitudes.

    Only the modes that ``U`` actually mixes are expanded; the remaining
    modes pass through untouched, which keeps embedded few-mode gates cheap
    on wide states.
    """
    u = np.asarray(u, dtype=np.complex128)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise DimensionError(f"mode unitary must be square, got {u.shape}")
    if u.shape[0] != state.num_modes:
        raise DimensionError(f"unitary acts on {u.shape[0]} modes, state has {state.num_modes}")
    active = _active_modes(u)
    if active.size == 0:
        return state
    u_sub = u[np.ix_(active, active)]
    cache: Dict[Occupation, Dict[Occupation, complex]] = {}
    result: Dict[Occupation, complex] = {}
    for occ, amp in state.amplitudes.items():
        occ_arr = np.asarray(occ)
        local = tuple(occ_arr[active])
        if local not in cache:
            cache[local] = _evolve_block(u_sub, local)
        for target, t_amp in cache[local].items():
            full = occ_arr.copy()
            full[active] = target
            key = tuple(int(x) for x in full)
            result[key] = result.get(key, 0.0j) + amp * t_amp
    pruned = {k: v for k, v in result.items() if abs(v) > PRUNE}
    return PhotonicState.from_amplitudes(state.num_modes, pruned, normalize=True)


def apply_mode_unitary_poly(u, state: PhotonicState) -> PhotonicState:
    """Omega(U)|state> by expanding prod_i (sum_j U_ij b_j^dag)^{n_i} / sqrt(n_i!).

    Independent of the permanent route; used as its oracle.
    """
    u = np.asarray(u, dtype=np.complex128)
    m = u.shape[0]
    if m != state.num_modes:
        raise DimensionError(f"unitary acts on {m} modes, state has {state.num_modes}")
    result: Dict[Occupation, complex] = {}
    for occ, amp in state.amplitudes.items():
        # polynomial in output creation operators: monomial exponents -> coefficient
        poly: Dict[Occupation, complex] = {(0,) * m: amp / math.sqrt(_factorial_norm(occ))}
        for i, count in enumerate(occ):
            for _ in range(count):
                nxt: Dict[Occupation, complex] = {}
                for mono, coef in poly.items():
                    for j in range(m):
                        if u[i, j] == 0:
                            continue
                        new = list(mono)
                        new[j] += 1
                        key = tuple(new)
                        nxt[key] = nxt.get(key, 0.0j) + coef * u[i, j]
                poly = nxt
        for mono, coef in poly.items():
            # (b^dag)^k |0> = sqrt(k!) |k>
            val = coef * math.sqrt(_factorial_norm(mono))
            result[mono] = result.get(mono, 0.0j) + val
    pruned = {k: v for k, v in result.items() if abs(v) > PRUNE}
    return PhotonicState.from_amplitudes(m, pruned, normalize=True)


def compose(first, then) -> np.ndarray:
    """Mode unitary for applying ``first`` and afterwards ``then``."""
    first = np.asarray(first, dtype=np.complex128)
    then = np.asarray(then, dtype=np.complex128)
    if first.shape != then.shape or first.ndim != 2:
        raise DimensionError(f"cannot compose shapes {first.shape} and {then.shape}")
    return first @ then


def embed(u_small, mode_indices: Sequence[int], num_modes: int) -> np.ndarray:
    """Act as ``u_small`` on ``mode_indices`` (in that order), identity elsewhere."""
    u_small = np.asarray(u_small, dtype=np.complex128)
    idx = [int(i) for i in mode_indices]
    if u_small.ndim != 2 or u_small.shape != (len(idx), len(idx)):
        raise DimensionError(f"{len(idx)} mode indices for a {u_small.shape} block")
    if len(idx) > num_modes:
        raise DimensionError("block is larger than the full mode count")
    if len(set(idx)) != len(idx):
        raise IndexError(f"repeated mode index in {idx}")
    if any(i < 0 or i >= num_modes for i in idx):
        raise IndexError(f"mode index out of range 0..{num_modes - 1}: {idx}")
    full = np.eye(num_modes, dtype=np.complex128)
    full[np.ix_(idx, idx)] = u_small
    return full
