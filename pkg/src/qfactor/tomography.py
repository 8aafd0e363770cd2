"""Simulated Pauli-basis tomography with linear-inversion reconstruction.

Every one of the ``3**n`` settings rotates each qubit into the X, Y or Z basis
and samples computational-basis outcomes. Pauli expectations are read from the
canonical setting of each string (identity positions measured in Z), and the
density matrix is ``2**-n * sum_P <P> P``.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass
from functools import reduce

import numpy as np

from .circuit import Gate, apply_gate

PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.diag([1, -1]).astype(complex),
}
PURITY_TOL = 1e-9


class TomographyError(ValueError):
    pass


@dataclass(frozen=True)
class MeasurementRecord:
    """Outcome distribution of one setting.

    ``shots == 0`` marks an exact record whose ``probabilities`` come straight
    from the state; otherwise ``counts`` holds sampled outcomes keyed by ket.
    """

    setting: str
    shots: int
    counts: dict[str, int]
    probabilities: tuple[float, ...] | None = None

    def distribution(self) -> np.ndarray:
        n = len(self.setting)
        if self.probabilities is not None:
            return np.array(self.probabilities)
        p = np.zeros(1 << n)
        for k, c in self.counts.items():
            p[int(k, 2)] = c
        return p / self.shots

    def to_json(self) -> dict:
        out = {"setting": self.setting, "shots": self.shots, "counts": dict(self.counts)}
        if self.probabilities is not None:
            out["probabilities"] = list(self.probabilities)
        return out


def settings_list(n: int) -> list[str]:
    return ["".join(s) for s in itertools.product("XYZ", repeat=n)]


def rotate(state: np.ndarray, setting: str) -> np.ndarray:
    """Map the eigenbasis of each requested Pauli onto the computational basis."""
    n = len(setting)
    s = state
    for q, b in enumerate(setting):
        if b == "Y":
            s = apply_gate(s, Gate("u1", (q,), -math.pi / 2), n)
        if b in "XY":
            s = apply_gate(s, Gate("h", (q,)), n)
    return s


def simulate_settings(state: np.ndarray, shots: int, seed: int) -> list[MeasurementRecord]:
    """One record per setting; ``shots=0`` gives exact probabilities."""
    if shots < 0:
        raise TomographyError("shots must be non-negative")
    n = int(round(math.log2(len(state))))
    out = []
    for idx, setting in enumerate(settings_list(n)):
        p = np.abs(rotate(np.asarray(state, dtype=complex), setting)) ** 2
        p = p / p.sum()
        if shots == 0:
            out.append(MeasurementRecord(setting, 0, {}, tuple(float(x) for x in p)))
            continue
        draws = np.random.default_rng([seed, idx]).multinomial(shots, p)
        counts = {format(i, f"0{n}b"): int(c) for i, c in enumerate(draws) if c}
        out.append(MeasurementRecord(setting, shots, counts))
    return out


def stokes(records: list[MeasurementRecord]) -> dict[str, float]:
    """Expectation of every Pauli string, identity string fixed to 1."""
    if not records:
        raise TomographyError("no records")
    n = len(records[0].setting)
    by_setting = {r.setting: r for r in records}
    missing = set(settings_list(n)) - set(by_setting)
    if missing:
        raise TomographyError(f"missing settings: {sorted(missing)[:5]}")
    dists = {s: r.distribution() for s, r in by_setting.items()}
    parity = np.array([[(x >> (n - 1 - q)) & 1 for q in range(n)] for x in range(1 << n)])
    out = {}
    for ps in itertools.product("IXYZ", repeat=n):
        label = "".join(ps)
        if set(label) == {"I"}:
            out[label] = 1.0
            continue
        setting = label.replace("I", "Z")
        mask = np.array([c != "I" for c in label])
        signs = 1 - 2 * (parity[:, mask].sum(axis=1) & 1)
        out[label] = float(np.dot(dists[setting], signs))
    return out


def pauli_matrix(label: str) -> np.ndarray:
    return reduce(np.kron, (PAULI[c] for c in label))


def reconstruct(expectations: dict[str, float], n: int) -> np.ndarray:
    labels = ["".join(p) for p in itertools.product("IXYZ", repeat=n)]
    missing = [s for s in labels if s not in expectations]
    if missing:
        raise TomographyError(f"missing expectations: {missing[:5]}")
    rho = sum(expectations[s] * pauli_matrix(s) for s in labels)
    return rho / (1 << n)


def theoretical_dm(marked, n: int) -> np.ndarray:
    idx = sorted(set(marked))
    if not idx:
        raise TomographyError("marked set is empty")
    psi = np.zeros(1 << n, dtype=complex)
    psi[idx] = 1 / math.sqrt(len(idx))
    return np.outer(psi, psi.conj())


def pure_state_dm(state: np.ndarray) -> np.ndarray:
    s = np.asarray(state, dtype=complex)
    return np.outer(s, s.conj())


def overlap(rho_t: np.ndarray, rho_e: np.ndarray) -> float:
    """``Re <psi|rho_e|psi>`` for the pure target ``rho_t = |psi><psi|``."""
    w, v = np.linalg.eigh(rho_t)
    if abs(w[-1] - 1) > PURITY_TOL or np.any(np.abs(w[:-1]) > PURITY_TOL):
        raise TomographyError("target density matrix is not pure")
    psi = v[:, -1]
    return float(np.real(np.vdot(psi, rho_e @ psi)))


def fidelity(rho_t: np.ndarray, rho_e: np.ndarray) -> float:
    """Uhlmann fidelity for a pure target, ``sqrt(<psi|rho_e|psi>)``.

    A linear-inversion estimate is not PSD, so the overlap may leave [0, 1];
    it is clamped to that range before the square root.
    """
    return math.sqrt(min(1.0, max(0.0, overlap(rho_t, rho_e))))


def psd_project(rho: np.ndarray) -> np.ndarray:
    """Closest unit-trace PSD matrix in Frobenius norm (eigenvalue clipping)."""
    h = (rho + rho.conj().T) / 2
    w, v = np.linalg.eigh(h)
    w = w[::-1].copy()
    v = v[:, ::-1]
    d = len(w)
    acc = 0.0
    i = d
    # zero the most negative eigenvalues, spreading their mass over the rest
    while i > 0 and w[i - 1] + acc / i < 0:
        acc += w[i - 1]
        w[i - 1] = 0
        i -= 1
    w[:i] += acc / i if i else 0
    out = (v * w) @ v.conj().T
    return out / np.trace(out).real


def dm_to_json(rho: np.ndarray) -> list[list[list[float]]]:
    return [[[_clean(z.real), _clean(z.imag)] for z in row] for row in rho]


def _clean(x: float, digits: int = 12) -> float:
    v = round(float(x), digits)
    return 0.0 if v == 0 else v


def dm_to_csv(rho: np.ndarray) -> str:
    n = int(round(math.log2(rho.shape[0])))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["row", "col", "row_state", "col_state", "real", "imag"])
    for i in range(rho.shape[0]):
        for j in range(rho.shape[1]):
            z = rho[i, j]
            w.writerow([i, j, format(i, f"0{n}b"), format(j, f"0{n}b"), f"{_clean(z.real):.12f}", f"{_clean(z.imag):.12f}"])
    return buf.getvalue()
