"""Gate-level circuits for the phase oracle, the diffuser and the full search.

Gates act on qubit indices with qubit 0 as the most significant bit. The IR
keeps multi-controlled phases as a single gate; :func:`decompose` rewrites them
into ``h, x, cx, u1, cu1, rz`` before export. Global phases are tracked as
metadata and never emitted as gates.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .grover import GroverPlan
from .hamiltonian import DiagonalHamiltonian, pauli_coefficients

UNITARY_CAP = 12
EXPORT_KINDS = ("h", "x", "cx", "u1", "cu1", "rz")
_ANGLED = ("u1", "cu1", "rz", "mcu1")
_ARITY = {"h": 1, "x": 1, "u1": 1, "rz": 1, "cx": 2, "cu1": 2}


class CircuitError(ValueError):
    pass


@dataclass(frozen=True)
class Gate:
    """``qubits`` lists controls first and the target last."""

    kind: str
    qubits: tuple[int, ...]
    angle: float | None = None

    def __post_init__(self):
        if self.kind not in _ARITY and self.kind != "mcu1":
            raise CircuitError(f"unknown gate kind {self.kind!r}")
        if self.kind in _ARITY and len(self.qubits) != _ARITY[self.kind]:
            raise CircuitError(f"{self.kind} takes {_ARITY[self.kind]} qubits")
        if len(set(self.qubits)) != len(self.qubits) or not self.qubits:
            raise CircuitError("gate qubits must be distinct and nonempty")
        if (self.kind in _ANGLED) != (self.angle is not None):
            raise CircuitError(f"angle mismatch for {self.kind}")
        if self.angle is not None and not math.isfinite(self.angle):
            raise CircuitError("angle must be finite")

    @property
    def controls(self) -> tuple[int, ...]:
        return self.qubits[:-1] if self.kind in ("cx", "cu1", "mcu1") else ()

    @property
    def target(self) -> int:
        return self.qubits[-1]

    def to_json(self) -> dict:
        return {"kind": self.kind, "qubits": list(self.qubits), "angle": self.angle}


@dataclass
class GateCircuit:
    n_qubits: int
    gates: list[Gate] = field(default_factory=list)
    global_phase: float = 0.0

    def add(self, kind: str, *qubits: int, angle: float | None = None) -> GateCircuit:
        g = Gate(kind, tuple(qubits), angle)
        if any(not 0 <= q < self.n_qubits for q in g.qubits):
            raise CircuitError(f"qubit index out of range in {g}")
        self.gates.append(g)
        return self

    def extend(self, other: GateCircuit) -> GateCircuit:
        if other.n_qubits != self.n_qubits:
            raise CircuitError("qubit counts differ")
        self.gates.extend(other.gates)
        self.global_phase += other.global_phase
        return self

    def counts(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for g in self.gates:
            out[g.kind] = out.get(g.kind, 0) + 1
        return out

    def to_json(self) -> dict:
        return {
            "n_qubits": self.n_qubits,
            "global_phase": self.global_phase,
            "gates": [g.to_json() for g in self.gates],
        }


# ---------------------------------------------------------------------------
# compilation


def compile_diagonal(h: DiagonalHamiltonian, theta: float) -> GateCircuit:
    """``exp(-i H theta)`` from the Pauli-Z expansion of ``H``.

    Each Z-string is a CNOT ladder onto its last qubit, an Rz, and the ladder
    undone; the identity term becomes a global phase.
    """
    c = GateCircuit(h.n_qubits)
    for subset, coeff in pauli_coefficients(h).coeffs.items():
        angle = 2 * float(coeff) * theta
        if not subset:
            c.global_phase += -float(coeff) * theta
            continue
        ladder = [(subset[i], subset[i + 1]) for i in range(len(subset) - 1)]
        for a, b in ladder:
            c.add("cx", a, b)
        c.add("rz", subset[-1], angle=angle)
        for a, b in reversed(ladder):
            c.add("cx", a, b)
    return c


def compile_phase_oracle(h: DiagonalHamiltonian, theta: float) -> GateCircuit:
    return compile_diagonal(h, theta)


def compile_projector_oracle(h: DiagonalHamiltonian, theta: float, sign: int) -> GateCircuit:
    """Phase ``exp(i sign theta)`` on the kernel of ``H``, identity elsewhere."""
    marks = DiagonalHamiltonian(h.n_qubits, tuple(int(d == 0) for d in h.diag))
    return compile_diagonal(marks, -sign * theta)


def compile_diffuser(n: int, theta: float, sign: int) -> GateCircuit:
    """``H X MCU1(sign theta) X H``: a phase on the uniform superposition."""
    if n < 1:
        raise CircuitError("need at least one qubit")
    c = GateCircuit(n)
    for q in range(n):
        c.add("h", q)
    for q in range(n):
        c.add("x", q)
    if n == 1:
        c.add("u1", 0, angle=sign * theta)
    else:
        c.add("mcu1", *range(n), angle=sign * theta)
    for q in range(n):
        c.add("x", q)
    for q in range(n):
        c.add("h", q)
    return c


def compile_search(h: DiagonalHamiltonian, p: GroverPlan) -> GateCircuit:
    """Uniform superposition followed by ``j`` oracle + diffuser rounds."""
    n = h.n_qubits
    c = GateCircuit(n)
    for q in range(n):
        c.add("h", q)
    if p.oracle_mode == "literal":
        oracle = compile_phase_oracle(h, p.theta)
    else:
        oracle = compile_projector_oracle(h, p.theta, p.diffuser_sign)
    diffuser = compile_diffuser(n, p.theta, p.diffuser_sign)
    for _ in range(p.iterations):
        c.extend(oracle)
        c.extend(diffuser)
    return c


# ---------------------------------------------------------------------------
# multi-controlled decomposition


def _toffoli(c: GateCircuit, a: int, b: int, t: int):
    # CCZ from controlled phases, conjugated by H on the target
    c.add("h", t)
    c.add("cu1", b, t, angle=math.pi / 2)
    c.add("cx", a, b)
    c.add("cu1", b, t, angle=-math.pi / 2)
    c.add("cx", a, b)
    c.add("cu1", a, t, angle=math.pi / 2)
    c.add("h", t)


def _mcx_dirty_chain(c: GateCircuit, ctrl: list[int], t: int, anc: list[int]):
    """m controls with m-2 dirty ancillas, 4(m-2) Toffolis."""
    m = len(ctrl)
    a = anc[: m - 2]

    def tgt(i):
        return a[i + 1] if i + 1 < m - 2 else t

    middle_down = [(ctrl[i + 2], a[i], a[i + 1]) for i in range(m - 4, -1, -1)]
    middle_up = middle_down[::-1]
    base = (ctrl[0], ctrl[1], a[0])
    top = (ctrl[m - 1], a[m - 3], tgt(m - 3))
    seq = [top] + middle_down + [base] + middle_up + [top] + middle_down + [base] + middle_up
    for x, y, z in seq:
        _toffoli(c, x, y, z)


def _mcx(c: GateCircuit, ctrl: list[int], t: int, dirty: list[int]):
    m = len(ctrl)
    if m == 0:
        c.add("x", t)
    elif m == 1:
        c.add("cx", ctrl[0], t)
    elif m == 2:
        _toffoli(c, ctrl[0], ctrl[1], t)
    elif len(dirty) >= m - 2:
        _mcx_dirty_chain(c, ctrl, t, dirty)
    elif dirty:
        a = dirty[0]
        m1 = (m + 1) // 2
        c1, c2 = ctrl[:m1], ctrl[m1:]
        for _ in range(2):
            _mcx(c, c1, a, c2 + [t])
            _mcx(c, c2 + [a], t, c1)
    else:
        raise CircuitError("multi-controlled X needs a spare qubit")


def _mcu1(c: GateCircuit, ctrl: list[int], t: int, angle: float):
    if not ctrl:
        c.add("u1", t, angle=angle)
        return
    if len(ctrl) == 1:
        c.add("cu1", ctrl[0], t, angle=angle)
        return
    *rest, k = ctrl
    # the target is idle during the inner Toffoli ladders, so it serves as dirty ancilla
    c.add("cu1", k, t, angle=angle / 2)
    _mcx(c, rest, k, [t])
    c.add("cu1", k, t, angle=-angle / 2)
    _mcx(c, rest, k, [t])
    _mcu1(c, rest, t, angle / 2)


def decompose(c: GateCircuit) -> GateCircuit:
    """Rewrite every ``mcu1`` into the export gate set."""
    out = GateCircuit(c.n_qubits, global_phase=c.global_phase)
    for g in c.gates:
        if g.kind == "mcu1":
            _mcu1(out, list(g.controls), g.target, g.angle)
        else:
            out.gates.append(g)
    return out


# ---------------------------------------------------------------------------
# simulation


def gate_matrix(kind: str, angle: float | None = None) -> np.ndarray:
    """Single-qubit matrix acting on the target (controls handled separately)."""
    if kind == "h":
        return np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
    if kind in ("x", "cx"):
        return np.array([[0, 1], [1, 0]], dtype=complex)
    if kind in ("u1", "cu1", "mcu1"):
        return np.diag([1, np.exp(1j * angle)])
    if kind == "rz":
        return np.diag([np.exp(-0.5j * angle), np.exp(0.5j * angle)])
    raise CircuitError(f"unknown gate kind {kind!r}")


def apply_gate(state: np.ndarray, g: Gate, n: int) -> np.ndarray:
    """Apply a gate to the leading axis of ``state`` (shape ``(2**n, ...)``)."""
    t = state.reshape([2] * n + [-1]).copy()
    m = gate_matrix(g.kind, g.angle)
    idx: list = [slice(None)] * (n + 1)
    for q in g.controls:
        idx[q] = 1
    sub = t[tuple(idx)]
    axis = g.target - sum(1 for q in g.controls if q < g.target)
    sub = np.moveaxis(np.tensordot(m, sub, axes=([1], [axis])), 0, axis)
    t[tuple(idx)] = sub
    return t.reshape(state.shape)


def simulate(c: GateCircuit, state: np.ndarray | None = None) -> np.ndarray:
    if state is None:
        state = np.zeros(1 << c.n_qubits, dtype=complex)
        state[0] = 1
    s = np.asarray(state, dtype=complex)
    for g in c.gates:
        s = apply_gate(s, g, c.n_qubits)
    return s * np.exp(1j * c.global_phase)


def circuit_unitary(c: GateCircuit) -> np.ndarray:
    if c.n_qubits > UNITARY_CAP:
        raise CircuitError(f"{c.n_qubits} qubits exceed the dense cap {UNITARY_CAP}")
    return simulate(c, np.eye(1 << c.n_qubits, dtype=complex))


def phase_aligned_distance(a: np.ndarray, b: np.ndarray) -> float:
    """``max |a - e^{i g} b|`` with the global phase ``g`` taken from the largest entry."""
    k = np.unravel_index(np.argmax(np.abs(b)), b.shape)
    if abs(b[k]) == 0:
        return float(np.max(np.abs(a)))
    ph = a[k] / b[k]
    ph = ph / abs(ph) if abs(ph) else 1
    return float(np.max(np.abs(a - ph * b)))


# ---------------------------------------------------------------------------
# OpenQASM 2.0


def format_angle(x: float) -> str:
    """``pi`` fractions when exact to 1e-12, otherwise the float repr."""
    if x == 0:
        return "0"
    r = Fraction(x / math.pi).limit_denominator(64)
    if r and abs(float(r) * math.pi - x) < 1e-12:
        num, den = abs(r.numerator), r.denominator
        body = "pi" if num == 1 else f"{num}*pi"
        if den != 1:
            body += f"/{den}"
        return ("-" if r < 0 else "") + body
    return repr(float(x))


def export_qasm(c: GateCircuit, measure: bool = False) -> str:
    d = decompose(c)
    lines = ["OPENQASM 2.0;", 'include "qelib1.inc";']
    if d.global_phase:
        lines.append(f"// global phase: {repr(float(d.global_phase))}")
    lines.append(f"qreg q[{d.n_qubits}];")
    if measure:
        lines.append(f"creg c[{d.n_qubits}];")
    for g in d.gates:
        if g.kind not in EXPORT_KINDS:
            raise CircuitError(f"cannot export gate {g.kind}")
        args = ",".join(f"q[{q}]" for q in g.qubits)
        head = g.kind if g.angle is None else f"{g.kind}({format_angle(g.angle)})"
        lines.append(f"{head} {args};")
    if measure:
        for q in range(d.n_qubits):
            lines.append(f"measure q[{q}] -> c[{q}];")
    return "\n".join(lines) + "\n"


_STMT = re.compile(r"^(\w+)(?:\(([^)]*)\))?\s+(.+);$")
_ANGLE = re.compile(r"^(-)?(?:(\d+)\*)?pi(?:/(\d+))?$")


def parse_angle(text: str) -> float:
    text = text.replace(" ", "")
    m = _ANGLE.match(text)
    if m:
        v = int(m.group(2) or 1) * math.pi / int(m.group(3) or 1)
        return -v if m.group(1) else v
    return float(text)


def parse_qasm(text: str) -> GateCircuit:
    """Read back the subset written by :func:`export_qasm`."""
    n = None
    phase = 0.0
    gates = []
    for raw in text.splitlines():
        line = raw.strip()
        if line.startswith("// global phase:"):
            phase = float(line.split(":", 1)[1])
            continue
        if not line or line.startswith("//") or line.startswith(("OPENQASM", "include", "creg", "measure")):
            continue
        if line.startswith("qreg"):
            n = int(re.search(r"\[(\d+)\]", line).group(1))
            continue
        m = _STMT.match(line)
        if not m:
            raise CircuitError(f"cannot parse {line!r}")
        kind, angle, args = m.groups()
        qubits = tuple(int(q) for q in re.findall(r"q\[(\d+)\]", args))
        gates.append(Gate(kind, qubits, None if angle is None else parse_angle(angle)))
    if n is None:
        raise CircuitError("missing qreg declaration")
    out = GateCircuit(n, global_phase=phase)
    for g in gates:
        out.add(g.kind, *g.qubits, angle=g.angle)
    return out
