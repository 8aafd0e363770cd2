"""Diagonal Hamiltonians built from pseudo-Boolean polynomials.

Each variable ``v`` maps to the projector ``(I - Z_v) / 2`` onto bit value 1,
so the operator is diagonal with ``diag[x] = p(bits of x)``. Qubit 0 is the
most significant bit of the basis index, i.e. the leftmost ket symbol.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .bitpoly import BitPoly, VarId
from .reduction import basis_bits

MAX_QUBITS = 20


class NegativeEigenvalueError(ValueError):
    pass


def ket(index: int, n: int) -> str:
    return "".join(str(b) for b in basis_bits(index, n))


@dataclass(frozen=True)
class DiagonalHamiltonian:
    n_qubits: int
    diag: tuple[int, ...]
    labels: tuple[VarId, ...] = ()

    def __post_init__(self):
        if len(self.diag) != 1 << self.n_qubits:
            raise ValueError("diag length must be 2**n_qubits")

    @property
    def array(self) -> np.ndarray:
        return np.array(self.diag, dtype=float)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["index", "state", "eigenvalue"])
        for i, d in enumerate(self.diag):
            w.writerow([i, ket(i, self.n_qubits), d])
        return buf.getvalue()

    def to_json(self) -> dict:
        return {"n_qubits": self.n_qubits, "qubits": list(self.labels), "diag": list(self.diag)}


@dataclass(frozen=True)
class PauliZExpansion:
    """``H = sum_S coeff[S] * prod_{q in S} Z_q``; the empty subset is the identity."""

    n_qubits: int
    coeffs: dict[tuple[int, ...], Fraction]

    def mask(self, subset: tuple[int, ...]) -> int:
        m = 0
        for q in subset:
            m |= 1 << (self.n_qubits - 1 - q)
        return m

    def to_diag(self) -> tuple[Fraction, ...]:
        out = []
        for x in range(1 << self.n_qubits):
            total = Fraction(0)
            for s, c in self.coeffs.items():
                total += -c if bin(x & self.mask(s)).count("1") & 1 else c
            out.append(total)
        return tuple(out)

    def render(self) -> str:
        if not self.coeffs:
            return "0"
        parts = []
        for s, c in self.coeffs.items():
            op = "*".join(f"Z{q}" for q in s) or "I"
            parts.append(f"{'-' if c < 0 else '+'} {abs(c)}*{op}")
        text = " ".join(parts)
        return text[2:] if text.startswith("+ ") else "-" + text[2:]

    def to_json(self) -> list[dict]:
        return [
            {"qubits": list(s), "mask": self.mask(s), "num": c.numerator, "den": c.denominator}
            for s, c in self.coeffs.items()
        ]


def from_polynomial(p: BitPoly, var_order: Sequence[VarId]) -> DiagonalHamiltonian:
    """Evaluate ``p`` on every basis state of the ordered variables."""
    order = list(var_order)
    extra = set(p.variables()) - set(order)
    if extra:
        raise ValueError(f"polynomial uses variables outside the order: {sorted(extra)}")
    n = len(order)
    if n > MAX_QUBITS:
        raise ValueError(f"{n} qubits exceed the limit {MAX_QUBITS}")
    diag = []
    for x in range(1 << n):
        v = p.evaluate(dict(zip(order, basis_bits(x, n))))
        if v < 0:
            raise NegativeEigenvalueError(f"eigenvalue {v} at |{ket(x, n)}>")
        diag.append(v)
    return DiagonalHamiltonian(n, tuple(diag), tuple(order))


def pauli_coefficients(h: DiagonalHamiltonian) -> PauliZExpansion:
    """Exact Walsh-Hadamard transform ``c_S = 2**-n sum_x (-1)**|x & S| diag[x]``."""
    n = h.n_qubits
    f = list(h.diag)
    step = 1
    while step < len(f):
        for i in range(0, len(f), 2 * step):
            for k in range(i, i + step):
                a, b = f[k], f[k + step]
                f[k], f[k + step] = a + b, a - b
        step *= 2
    found = {}
    for m in range(1 << n):
        if f[m]:
            found[tuple(q for q in range(n) if m >> (n - 1 - q) & 1)] = Fraction(f[m], 1 << n)
    # identity first, then by subset size, then lexicographic
    return PauliZExpansion(n, {s: found[s] for s in sorted(found, key=lambda s: (len(s), s))})


def ground_states(h: DiagonalHamiltonian) -> list[int]:
    return [i for i, d in enumerate(h.diag) if d == 0]


@dataclass(frozen=True)
class PhaseEntry:
    state: str
    eigenvalue: int
    phase: float | None

    @property
    def symbolic(self) -> str:
        d = self.eigenvalue
        if d == 0:
            return "0"
        return f"-{d}θ" if d != 1 else "-θ"


def phase_table(h: DiagonalHamiltonian, theta: float | None = None) -> list[PhaseEntry]:
    """Phase of each basis state under ``exp(-i H theta)`` relative to a kernel state.

    With ``theta=None`` only the symbolic multiple of theta is filled in.
    """
    out = []
    for i, d in enumerate(h.diag):
        out.append(PhaseEntry(ket(i, h.n_qubits), d, None if theta is None else -d * theta))
    return out
