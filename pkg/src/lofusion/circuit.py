"""Plain-text circuit files.

One operation per line, ``gate(mode, mode, ... ; param, param, ...)``; the
parameter part is optional. ``#`` starts a comment. An optional header line
``modes = M`` fixes the mode count, otherwise it is one past the largest
index used. Parameters are radians and may be written with ``pi``, e.g.
``-3*pi/8``.

Operations apply in file order, so the circuit unitary is the left-to-right
product of the per-line unitaries.
"""

from __future__ import annotations

import ast
import math
import operator
import re
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .fock import compose, embed
from .gates import (
    build_canonical_cz,
    build_cz1,
    build_local_rotation,
    build_pbs,
    build_stretch,
)


class CircuitParseError(ValueError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column
        self.reason = message


def beam_splitter(theta: float, phi: float) -> np.ndarray:
    """Two-mode rotation [[e^{i phi} cos, -e^{i phi} sin], [sin, cos]]."""
    c, s, e = np.cos(theta), np.sin(theta), np.exp(1j * phi)
    return np.array([[e * c, -e * s], [s, c]], dtype=np.complex128)


def phase_shift(phi: float) -> np.ndarray:
    return np.array([[np.exp(1j * phi)]], dtype=np.complex128)


@dataclass(frozen=True)
class GateDef:
    num_modes: int
    param_counts: Tuple[int, ...]
    build: Callable[..., np.ndarray]


GATES: Dict[str, GateDef] = {
    "cz1": GateDef(4, (0, 2), build_cz1),
    "stretch": GateDef(4, (0,), build_stretch),
    "pbs": GateDef(4, (0,), build_pbs),
    "cz_canonical": GateDef(6, (0,), build_canonical_cz),
    "rx": GateDef(2, (1,), lambda a: build_local_rotation("x", a)),
    "ry": GateDef(2, (1,), lambda a: build_local_rotation("y", a)),
    "rz": GateDef(2, (1,), lambda a: build_local_rotation("z", a)),
    "bs": GateDef(2, (2,), beam_splitter),
    "phase": GateDef(1, (1,), phase_shift),
}


@dataclass(frozen=True)
class CircuitOp:
    gate: str
    modes: Tuple[int, ...]
    params: Tuple[float, ...] = ()

    def unitary(self) -> np.ndarray:
        return np.asarray(GATES[self.gate].build(*self.params), dtype=np.complex128)


@dataclass(frozen=True)
class CircuitFile:
    modes: int
    ops: Tuple[CircuitOp, ...]

    def unitary(self) -> np.ndarray:
        return circuit_unitary(self)


# -- parameter literals ----------------------------------------------------

_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
}
_UNOPS = {ast.UAdd: operator.pos, ast.USub: operator.neg}


def _eval_node(node):
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) and not isinstance(
        node.value, bool
    ):
        return float(node.value)
    if isinstance(node, ast.Name) and node.id == "pi":
        return math.pi
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        return _BINOPS[type(node.op)](_eval_node(node.left), _eval_node(node.right))
    if isinstance(node, ast.UnaryOp) and type(node.op) in _UNOPS:
        return _UNOPS[type(node.op)](_eval_node(node.operand))
    raise ValueError("unsupported expression")


def parse_angle(text: str) -> float:
    """Evaluate a number or a ``pi`` arithmetic expression such as ``-pi/8``."""
    text = text.strip()
    if not text:
        raise ValueError("empty number")
    try:
        tree = ast.parse(text, mode="eval")
        value = _eval_node(tree.body)
    except (SyntaxError, ValueError, ZeroDivisionError, OverflowError):
        raise ValueError(f"bad number {text!r}") from None
    if not math.isfinite(value):
        raise ValueError(f"bad number {text!r}")
    return value


# -- parsing ---------------------------------------------------------------

_OP_RE = re.compile(r"\s*([A-Za-z_][A-Za-z0-9_]*)\s*\((.*)\)\s*$")
_MODES_RE = re.compile(r"\s*modes\s*[=:]\s*(\S+)\s*$")


def _split_fields(body: str, offset: int) -> List[Tuple[str, int]]:
    """Comma-separated fields of ``body`` with their 1-based columns."""
    out = []
    start = 0
    for i, ch in enumerate(body + ","):
        if ch == ",":
            raw = body[start:i]
            lead = len(raw) - len(raw.lstrip())
            out.append((raw.strip(), offset + start + lead + 1))
            start = i + 1
    if len(out) == 1 and not out[0][0]:
        return []
    return out


def parse_circuit(text: str) -> CircuitFile:
    ops: List[CircuitOp] = []
    declared: Optional[int] = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        indent = len(line) - len(line.lstrip()) + 1
        m = _MODES_RE.match(line)
        if m:
            if declared is not None or ops:
                raise CircuitParseError("'modes' must come once, before any operation", lineno, indent)
            try:
                declared = int(m.group(1))
            except ValueError:
                raise CircuitParseError(f"bad mode count {m.group(1)!r}", lineno, m.start(1) + 1) from None
            if declared < 1:
                raise CircuitParseError("mode count must be >= 1", lineno, m.start(1) + 1)
            continue
        m = _OP_RE.match(line)
        if not m:
            raise CircuitParseError("expected gate(modes; params)", lineno, indent)
        name = m.group(1)
        if name not in GATES:
            raise CircuitParseError(f"unknown gate {name!r}", lineno, m.start(1) + 1)
        gdef = GATES[name]
        body = m.group(2)
        body_col = m.start(2)
        if ";" in body:
            cut = body.index(";")
            mode_part, param_part = body[:cut], body[cut + 1 :]
            param_col = body_col + cut + 1
        else:
            mode_part, param_part, param_col = body, "", body_col + len(body)
        modes = []
        for field_text, col in _split_fields(mode_part, body_col):
            if not re.fullmatch(r"\d+", field_text):
                raise CircuitParseError(f"bad mode index {field_text!r}", lineno, col)
            modes.append(int(field_text))
        if len(modes) != gdef.num_modes:
            raise CircuitParseError(
                f"{name} acts on {gdef.num_modes} modes, got {len(modes)}", lineno, body_col + 1
            )
        if len(set(modes)) != len(modes):
            raise CircuitParseError(f"repeated mode index in {name}", lineno, body_col + 1)
        params = []
        for field_text, col in _split_fields(param_part, param_col):
            try:
                params.append(parse_angle(field_text))
            except ValueError as exc:
                raise CircuitParseError(str(exc), lineno, col) from None
        if len(params) not in gdef.param_counts:
            want = " or ".join(str(c) for c in gdef.param_counts)
            raise CircuitParseError(
                f"{name} takes {want} parameters, got {len(params)}", lineno, param_col + 1
            )
        if declared is not None and max(modes) >= declared:
            col = body_col + 1
            raise CircuitParseError(
                f"mode index {max(modes)} out of range for {declared} modes", lineno, col
            )
        ops.append(CircuitOp(name, tuple(modes), tuple(params)))
    if declared is None:
        if not ops:
            raise CircuitParseError("circuit has no operations and no mode count", 1, 1)
        declared = 1 + max(max(op.modes) for op in ops)
    return CircuitFile(declared, tuple(ops))


def format_circuit(circuit: CircuitFile) -> str:
    """Text that parses back to the same circuit (floats use repr)."""
    lines = [f"modes = {circuit.modes}"]
    for op in circuit.ops:
        modes = ", ".join(str(i) for i in op.modes)
        if op.params:
            params = ", ".join(repr(float(p)) for p in op.params)
            lines.append(f"{op.gate}({modes}; {params})")
        else:
            lines.append(f"{op.gate}({modes})")
    return "\n".join(lines) + "\n"


def circuit_unitary(circuit: CircuitFile) -> np.ndarray:
    u = np.eye(circuit.modes, dtype=np.complex128)
    for op in circuit.ops:
        u = compose(u, embed(op.unitary(), op.modes, circuit.modes))
    return u


def circuit_from_ops(modes: int, ops: Sequence[Tuple[str, Sequence[int], Sequence[float]]]) -> CircuitFile:
    return CircuitFile(modes, tuple(CircuitOp(g, tuple(m), tuple(float(p) for p in ps)) for g, m, ps in ops))
