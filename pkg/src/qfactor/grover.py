"""Generalized Grover search with a phase-matched oracle and diffuser.

The oracle either applies ``exp(-i H theta)`` literally or, in projector mode,
multiplies only the kernel states of ``H`` by ``exp(i sign theta)``. The
diffuser gives the uniform state the same phase. With
``theta = 2 asin(sin(pi / (4j + 2)) / sin(phi))`` projector mode reaches the
marked subspace exactly after ``j`` iterations.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .hamiltonian import DiagonalHamiltonian, ket

ORACLE_MODES = ("projector", "literal")


class PlanError(ValueError):
    pass


@dataclass(frozen=True)
class GroverPlan:
    n_qubits: int
    marked_count: int
    phi: float
    iterations: int
    theta: float
    oracle_mode: str = "projector"
    diffuser_sign: int = -1

    @property
    def space_size(self) -> int:
        return 1 << self.n_qubits

    def to_json(self) -> dict:
        return {
            "n": self.n_qubits,
            "M": self.marked_count,
            "phi": self.phi,
            "theta": self.theta,
            "j": self.iterations,
            "mode": self.oracle_mode,
            "diffuser_sign": self.diffuser_sign,
        }


def _target(j: int) -> float:
    return math.sin(math.pi / (4 * j + 2))


def plan(
    marked_count: int,
    n_qubits: int,
    j_override: int | None = None,
    oracle_mode: str = "projector",
    diffuser_sign: int = -1,
) -> GroverPlan:
    if n_qubits < 1:
        raise PlanError("need at least one qubit")
    size = 1 << n_qubits
    if not 1 <= marked_count <= size:
        raise PlanError(f"marked count must lie in [1, {size}], got {marked_count}")
    if oracle_mode not in ORACLE_MODES:
        raise PlanError(f"unknown oracle mode {oracle_mode!r}")
    if diffuser_sign not in (-1, 1):
        raise PlanError("diffuser sign must be -1 or +1")
    sin_phi = math.sqrt(marked_count / size)
    phi = math.asin(sin_phi)
    if j_override is None:
        j = 1
        while _target(j) > sin_phi:
            j += 1
    else:
        j = j_override
        if j < 0:
            raise PlanError("iterations must be non-negative")
        if j >= 1 and _target(j) > sin_phi * (1 + 1e-15):
            raise PlanError(f"j={j} gives sin(pi/(4j+2)) > sin(phi); theta would not be real")
    theta = 2 * math.asin(min(1.0, _target(j) / sin_phi)) if j >= 1 else 0.0
    return GroverPlan(n_qubits, marked_count, phi, j, theta, oracle_mode, diffuser_sign)


def initial_state(n: int) -> np.ndarray:
    if n < 0:
        raise ValueError("n must be non-negative")
    size = 1 << n
    return np.full(size, 1 / math.sqrt(size), dtype=complex)


def apply_oracle(s: np.ndarray, h: DiagonalHamiltonian, p: GroverPlan) -> np.ndarray:
    d = h.array
    if d.shape != s.shape:
        raise ValueError("state and Hamiltonian dimensions differ")
    if p.oracle_mode == "literal":
        return s * np.exp(-1j * d * p.theta)
    phase = np.where(d == 0, np.exp(1j * p.diffuser_sign * p.theta), 1.0)
    return s * phase


def apply_diffuser(s: np.ndarray, p: GroverPlan) -> np.ndarray:
    psi0 = initial_state(p.n_qubits)
    overlap = np.vdot(psi0, s)
    return s + (np.exp(1j * p.diffuser_sign * p.theta) - 1) * overlap * psi0


def step(s: np.ndarray, h: DiagonalHamiltonian, p: GroverPlan) -> np.ndarray:
    return apply_diffuser(apply_oracle(s, h, p), p)


def run(h: DiagonalHamiltonian, p: GroverPlan) -> np.ndarray:
    if p.n_qubits != h.n_qubits:
        raise ValueError("plan and Hamiltonian qubit counts differ")
    s = initial_state(p.n_qubits)
    for _ in range(p.iterations):
        s = step(s, h, p)
    return s


def probabilities(s: np.ndarray) -> np.ndarray:
    return np.abs(s) ** 2


def success_probability(s: np.ndarray, marked) -> float:
    idx = list(marked)
    if not idx:
        return 0.0
    return float(np.sum(probabilities(s)[idx]))


def sample(s: np.ndarray, shots: int, seed: int) -> dict[str, int]:
    """Multinomial shot counts keyed by ket string, deterministic per seed."""
    if shots < 1:
        raise ValueError("shots must be positive")
    n = int(round(math.log2(len(s))))
    p = probabilities(s)
    p = p / p.sum()
    counts = np.random.default_rng(seed).multinomial(shots, p)
    return {ket(i, n): int(c) for i, c in enumerate(counts) if c}


def probabilities_csv(s: np.ndarray) -> str:
    n = int(round(math.log2(len(s))))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["index", "state", "probability"])
    for i, v in enumerate(probabilities(s)):
        w.writerow([i, ket(i, n), f"{v:.12f}"])
    return buf.getvalue()
