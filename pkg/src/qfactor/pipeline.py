"""End-to-end composition: reduce, build the Hamiltonian, plan and run the search."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import grover
from .bitpoly import BitPoly
from .hamiltonian import DiagonalHamiltonian, from_polynomial, ground_states
from .reduction import (
    ContradictionError,
    EquationSystem,
    NoTemplateError,
    ReducedSystem,
    build_multiplication_table,
    hamiltonian_polynomial,
    make_template,
    minimize,
    resolve_mode,
)


@dataclass
class Reduction:
    alpha: int
    system: EquationSystem
    reduced: ReducedSystem
    polynomial: BitPoly
    hamiltonian_mode: str
    notice: str | None


@dataclass
class SearchResult:
    reduction: Reduction
    hamiltonian: DiagonalHamiltonian
    marked: list[int]
    plan: grover.GroverPlan | None
    state: np.ndarray


def reduce_with_mode(composite_n: int, alpha: int, bit_len: int | None, mode: str) -> Reduction:
    system = build_multiplication_table(make_template(composite_n, alpha, bit_len))
    rs = minimize(system)
    effective, notice = resolve_mode(rs, mode)
    return Reduction(alpha, system, rs, hamiltonian_polynomial(rs, mode), effective, notice)


def sweep_alpha(composite_n: int, alphas, bit_len: int | None, mode: str) -> tuple[Reduction | None, list[dict]]:
    """First alpha whose reduction is consistent, plus one status entry per alpha tried."""
    log = []
    for a in alphas:
        try:
            red = reduce_with_mode(composite_n, a, bit_len, mode)
        except NoTemplateError as e:
            log.append({"alpha": a, "status": "no-template", "detail": str(e)})
        except ContradictionError as e:
            log.append({"alpha": a, "status": "contradiction", "detail": str(e)})
        else:
            log.append({"alpha": a, "status": "ok"})
            return red, log
    return None, log


def search(
    red: Reduction,
    oracle_mode: str = "projector",
    iterations: int | None = None,
    diffuser_sign: int = -1,
) -> SearchResult:
    rs = red.reduced
    h = from_polynomial(red.polynomial, rs.ordering)
    marked = ground_states(h)
    if h.n_qubits == 0:
        # nothing left to search: the reduction fixed every factor bit
        return SearchResult(red, h, marked, None, np.ones(1, dtype=complex))
    p = grover.plan(len(marked), h.n_qubits, iterations, oracle_mode, diffuser_sign)
    return SearchResult(red, h, marked, p, grover.run(h, p))
