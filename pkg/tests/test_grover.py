import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qfactor.bitpoly import elementary_symmetric
from qfactor.grover import (
    PlanError,
    apply_diffuser,
    apply_oracle,
    initial_state,
    plan,
    probabilities_csv,
    run,
    sample,
    step,
    success_probability,
)
from qfactor.hamiltonian import DiagonalHamiltonian, from_polynomial, ground_states

TETRA = ["p1", "q1", "r1"]
PENTA = ["p1", "q1", "r1", "s1"]
H875 = from_polynomial(2 * elementary_symmetric(TETRA, 2) + 5 * elementary_symmetric(TETRA, 3), TETRA)
H4375 = from_polynomial(
    2 * elementary_symmetric(PENTA, 2) + 18 * elementary_symmetric(PENTA, 3) - 23 * elementary_symmetric(PENTA, 4),
    PENTA,
)


def dense_run(h, p):
    """Build oracle and diffuser as full matrices and multiply them out."""
    size = 1 << h.n_qubits
    d = np.array(h.diag, dtype=float)
    if p.oracle_mode == "literal":
        oracle = np.diag(np.exp(-1j * d * p.theta))
    else:
        oracle = np.diag(np.where(d == 0, np.exp(1j * p.diffuser_sign * p.theta), 1))
    psi0 = np.full(size, size ** -0.5)
    diff = np.eye(size) + (np.exp(1j * p.diffuser_sign * p.theta) - 1) * np.outer(psi0, psi0)
    s = psi0.astype(complex)
    for _ in range(p.iterations):
        s = diff @ oracle @ s
    return s


def test_plan_875():
    p = plan(4, 3, 1)
    assert abs(p.phi - math.pi / 4) < 1e-12
    assert abs(p.theta - math.pi / 2) < 1e-12
    assert plan(4, 3).iterations == 1


def test_plan_4375():
    p = plan(5, 4, 2)
    phi = math.asin(math.sqrt(5) / 4)
    assert abs(p.phi - phi) < 1e-12
    assert abs(p.theta - 2 * math.asin(math.sin(math.pi / 10) / math.sin(phi))) < 1e-12
    assert abs(p.theta - 1.1714085418048845) < 1e-12
    # j=1 already satisfies the reality condition
    assert plan(5, 4).iterations == 1


def test_plan_errors():
    with pytest.raises(PlanError):
        plan(0, 3)
    with pytest.raises(PlanError):
        plan(9, 3)
    with pytest.raises(PlanError):
        plan(1, 4, 1)
    with pytest.raises(PlanError):
        plan(4, 3, oracle_mode="bogus")
    with pytest.raises(PlanError):
        plan(4, 3, diffuser_sign=2)


@pytest.mark.parametrize("m,n", [(m, n) for n in range(1, 7) for m in range(1, (1 << n) + 1)])
def test_plan_minimal_j(m, n):
    p = plan(m, n)
    s = math.sqrt(m / (1 << n))
    assert math.sin(math.pi / (4 * p.iterations + 2)) <= s + 1e-15
    if p.iterations > 1:
        assert math.sin(math.pi / (4 * p.iterations - 2)) > s
    assert 0 < p.phi <= math.pi / 2


def test_initial_state():
    s = initial_state(3)
    assert np.allclose(s, 1 / (2 * math.sqrt(2)))
    assert np.allclose(initial_state(1), [2 ** -0.5] * 2)
    assert abs(np.linalg.norm(s) - 1) < 1e-12


def test_oracle_literal_phase():
    p = plan(4, 3, 1, "literal")
    s = apply_oracle(initial_state(3), H875, p)
    assert np.isclose(s[3] / initial_state(3)[3], -1)
    zero = DiagonalHamiltonian(3, (0,) * 8)
    assert np.allclose(apply_oracle(initial_state(3), zero, p), initial_state(3))


def test_diffuser_examples():
    p0 = plan(4, 3, 0)
    s = initial_state(3) * np.exp(0.3j)
    assert np.allclose(apply_diffuser(s, p0), s)
    p = plan(1, 1, 1, diffuser_sign=1)
    p = type(p)(1, 1, p.phi, 1, math.pi, "projector", 1)
    assert np.allclose(apply_diffuser(initial_state(1), p), -initial_state(1))


@pytest.mark.parametrize("sign", [-1, 1])
def test_projector_exact_875(sign):
    p = plan(4, 3, 1, "projector", sign)
    s = run(H875, p)
    assert np.allclose(np.abs(s) ** 2, [0.25, 0.25, 0.25, 0, 0.25, 0, 0, 0], atol=1e-12)
    assert abs(success_probability(s, ground_states(H875)) - 1) < 1e-9


@pytest.mark.parametrize("sign", [-1, 1])
def test_projector_exact_4375(sign):
    p = plan(5, 4, 2, "projector", sign)
    s = run(H4375, p)
    assert abs(success_probability(s, ground_states(H4375)) - 1) < 1e-9


def test_literal_875_regression():
    s = run(H875, plan(4, 3, 1, "literal"))
    p = success_probability(s, [0, 1, 2, 4])
    assert abs(p - 17 / 32) < 1e-12
    assert abs(success_probability(run(H875, plan(4, 3, 1, "literal", 1)), [0, 1, 2, 4]) - 9 / 32) < 1e-12


@pytest.mark.parametrize("h,m,j", [(H875, 4, 1), (H4375, 5, 2)])
@pytest.mark.parametrize("mode", ["projector", "literal"])
@pytest.mark.parametrize("sign", [-1, 1])
def test_matches_dense_matrices(h, m, j, mode, sign):
    p = plan(m, h.n_qubits, j, mode, sign)
    assert np.allclose(run(h, p), dense_run(h, p), atol=1e-12)


def test_run_zero_iterations():
    assert np.allclose(run(H875, plan(4, 3, 0)), initial_state(3))


def test_run_is_composition():
    p = plan(5, 4, 2, "literal")
    s = initial_state(4)
    for _ in range(2):
        s = step(s, H4375, p)
    assert np.array_equal(s, run(H4375, p))


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 5), st.data())
def test_projector_invariance_and_norm(n, data):
    size = 1 << n
    diag = data.draw(st.lists(st.integers(0, 3), min_size=size, max_size=size))
    if 0 not in diag:
        diag[0] = 0
    h = DiagonalHamiltonian(n, tuple(diag))
    marked = ground_states(h)
    sign = data.draw(st.sampled_from([-1, 1]))
    p = plan(len(marked), n, None, "projector", sign)
    s = run(h, p)
    assert abs(np.linalg.norm(s) - 1) < 1e-12
    unmarked = [i for i in range(size) if i not in marked]
    assert np.ptp(s[marked].real) < 1e-10 and np.ptp(s[marked].imag) < 1e-10
    if unmarked:
        assert np.ptp(s[unmarked].real) < 1e-10 and np.ptp(s[unmarked].imag) < 1e-10
    assert abs(success_probability(s, marked) - 1) < 1e-9


@pytest.mark.parametrize("sign", [-1, 1])
def test_literal_equals_projector_two_valued(sign):
    # unmarked/marked phase ratio is exp(-i lam theta) for literal, exp(-i sign theta) for projector
    p = plan(3, 3, 1, "projector", sign)
    lam = 1.0 if sign == 1 else 2 * math.pi / p.theta - 1
    assert math.isclose(math.cos(lam * p.theta), math.cos(sign * p.theta))
    assert math.isclose(math.sin(lam * p.theta), math.sin(sign * p.theta))
    h = DiagonalHamiltonian(3, tuple(0 if m else lam for m in (1, 0, 1, 0, 1, 0, 0, 0)))
    pl = plan(3, 3, 1, "literal", sign)
    a = np.abs(run(h, pl)) ** 2
    b = np.abs(run(h, p)) ** 2
    assert np.allclose(a, b, atol=1e-12)


def test_success_probability_examples():
    assert abs(success_probability(initial_state(3), [0, 1, 2, 4]) - 0.5) < 1e-15
    assert success_probability(initial_state(3), []) == 0


def test_sample():
    s = np.zeros(8, dtype=complex)
    s[0] = 1
    assert sample(s, 100, 7) == {"000": 100}
    big = sample(initial_state(1), 10**6, 11)
    assert abs(big["0"] / 1e6 - 0.5) < 0.002
    assert sample(initial_state(3), 500, 3) == sample(initial_state(3), 500, 3)
    with pytest.raises(ValueError):
        sample(s, 0, 1)


def test_probabilities_csv():
    lines = probabilities_csv(run(H875, plan(4, 3, 1))).splitlines()
    assert lines[0] == "index,state,probability"
    assert lines[1] == "0,000,0.250000000000"
