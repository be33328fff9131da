import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from partrot.circuit import (
    CNOT,
    CNOT_MATRIX,
    U3,
    Circuit,
    circuit_to_matrix,
    ladder_circuit,
    metrics,
    pauli_exp_circuit,
    simplify,
    u3_from_matrix,
    u3_matrix,
)
from partrot.numerics import DenseLimitError, expm_i_hermitian, phase_aligned_distance
from partrot.pauli import PauliTerm, term_matrix, to_matrix


def random_term(rng, n, w):
    qs = rng.choice(n, size=w, replace=False)
    return PauliTerm.from_sparse(float(rng.uniform(-2, 2)), {int(q): "XYZ"[rng.integers(3)] for q in qs}, n)


def test_u3_matrix_determinant():
    m = u3_matrix(0.3, 0.7, -0.2)
    assert np.isclose(np.linalg.det(m), np.exp(1j * 0.5))


@given(st.floats(-7, 7), st.floats(-7, 7), st.floats(-7, 7), st.floats(-3, 3))
def test_u3_from_matrix_roundtrip(th, ph, la, g):
    v = np.exp(1j * g) * u3_matrix(th, ph, la)
    t2, p2, l2, g2 = u3_from_matrix(v)
    assert np.allclose(np.exp(1j * g2) * u3_matrix(t2, p2, l2), v, atol=1e-12)


def test_exp_z_is_single_rotation():
    c = pauli_exp_circuit(PauliTerm(1.0, "Z"), 0.4)
    assert len(c.gates) == 1 and isinstance(c.gates[0], U3)
    rz = np.diag([np.exp(0.4j), np.exp(-0.4j)])
    assert np.allclose(circuit_to_matrix(c), rz, atol=1e-12)


def test_exp_zz_structure():
    c = pauli_exp_circuit(PauliTerm(1.0, "ZZ"), 0.3)
    kinds = [type(g).__name__ for g in c.gates]
    assert kinds == ["CNOT", "U3", "CNOT"]
    assert c.gates[0] == CNOT(0, 1) and c.gates[1].qubit == 1
    assert np.linalg.norm(circuit_to_matrix(c) - expm_i_hermitian(term_matrix(PauliTerm(1.0, "ZZ")), 0.3)) < 1e-12


def test_exp_x():
    term = PauliTerm(0.8, "X")
    c = pauli_exp_circuit(term, 0.25)
    assert np.linalg.norm(circuit_to_matrix(c) - expm_i_hermitian(term_matrix(term), 0.25)) < 1e-12


def test_identity_term_is_phase():
    c = pauli_exp_circuit(PauliTerm(2.0, "II"), 0.5)
    assert c.gates == () and c.phase == pytest.approx(1.0)


def test_ladder_oracle_random_terms(rng):
    for _ in range(40):
        n = int(rng.integers(1, 6))
        term = random_term(rng, n, int(rng.integers(1, n + 1)))
        angle = float(rng.uniform(-2, 2))
        c = pauli_exp_circuit(term, angle)
        exact = expm_i_hermitian(term_matrix(term), angle)
        assert np.linalg.norm(circuit_to_matrix(c) - exact) < 1e-12
        assert c.cnot_count == 2 * (term.weight - 1)


def test_circuit_to_matrix_basics():
    assert np.allclose(circuit_to_matrix(Circuit(2)), np.eye(4))
    assert np.allclose(circuit_to_matrix(Circuit(2, (CNOT(0, 1),))), CNOT_MATRIX)
    with pytest.raises(DenseLimitError):
        circuit_to_matrix(Circuit(13))


def test_gate_validation():
    with pytest.raises(ValueError):
        CNOT(1, 1)
    with pytest.raises(ValueError):
        U3(0, float("inf"), 0, 0)
    with pytest.raises(ValueError):
        Circuit(2, (CNOT(0, 2),))


def test_simplify_examples():
    assert simplify(Circuit(2, (CNOT(0, 1), CNOT(0, 1)))).gates == ()
    c = simplify(Circuit(1, (U3(0, 0.1, 0.2, 0.3), U3(0, 0.4, 0.5, 0.6))))
    assert len(c.gates) == 1
    term = PauliTerm(1.0, "XYZ")
    both = pauli_exp_circuit(term, 0.3) + pauli_exp_circuit(term, -0.3)
    s = simplify(both)
    assert s.gates == ()
    assert np.allclose(circuit_to_matrix(s), np.eye(8), atol=1e-12)


def random_circuit(rng, n, m):
    gates = []
    for _ in range(m):
        if rng.random() < 0.4 and n > 1:
            a, b = rng.choice(n, 2, replace=False)
            gates.append(CNOT(int(a), int(b)))
        else:
            gates.append(U3(int(rng.integers(n)), *rng.uniform(-4, 4, 3)))
    return Circuit(n, tuple(gates), float(rng.uniform(-1, 1)))


@given(st.integers(0, 2**31))
def test_simplify_preserves_unitary_and_is_idempotent(seed):
    rng = np.random.default_rng(seed)
    c = random_circuit(rng, 3, 30)
    s = simplify(c)
    a, b = circuit_to_matrix(c), circuit_to_matrix(s)
    assert np.linalg.norm(a - b) < 1e-10
    assert simplify(s) == s
    assert s.cnot_count <= c.cnot_count


def test_metrics_examples():
    assert metrics(Circuit(2)).as_dict() == {"cnot_count": 0, "u3_count": 0, "depth": 0}
    assert metrics(Circuit(4, (CNOT(0, 1), CNOT(2, 3)))).depth == 1
    assert metrics(Circuit(3, (CNOT(0, 1), CNOT(1, 2)))).depth == 2


def test_depth_invariant_under_commuting_swap():
    a = Circuit(4, (CNOT(0, 1), U3(2, 1, 2, 3), CNOT(2, 3), U3(0, 1, 1, 1)))
    b = Circuit(4, (U3(2, 1, 2, 3), CNOT(0, 1), U3(0, 1, 1, 1), CNOT(2, 3)))
    assert metrics(a) == metrics(b)


def test_inverse_and_remap(rng):
    c = random_circuit(rng, 3, 12)
    assert np.allclose(circuit_to_matrix(c + c.inverse()), np.eye(8), atol=1e-12)
    r = c.remap([4, 0, 2], 5)
    assert r.n == 5 and r.cnot_count == c.cnot_count


def test_ladder_circuit_commuting_terms_exact():
    terms = [PauliTerm(1.0, "ZZI"), PauliTerm(0.5, "IZZ"), PauliTerm(0.3, "ZIZ")]
    c = ladder_circuit(terms, 0.7, 3)
    exact = expm_i_hermitian(to_matrix(terms, [0, 1, 2]), 0.7)
    assert np.linalg.norm(circuit_to_matrix(c) - exact) < 1e-12
