import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chemcut.circuit import (
    MAX_QUBITS,
    Circuit,
    Gate,
    GateKind,
    basis_state,
    circuit_unitary,
    decompose_cx_via_cz,
    expectation,
    gate,
    gate_census,
    gate_matrix,
    pauli_rotation,
    simulate,
    trotter_circuit,
)
from chemcut.pauli import PauliSum, axes_to_key

from conftest import (
    Z,
    dense_gate,
    dense_pauli,
    dense_unitary,
    embed,
    equal_up_to_phase,
    random_circuit,
    random_observable,
)

BELL = Circuit(2, [gate(GateKind.H, 0), gate(GateKind.CX, 0, 1)])


def test_gate_validation():
    with pytest.raises(ValueError):
        gate(GateKind.CX, 0)
    with pytest.raises(ValueError):
        gate(GateKind.RZ, 0)
    with pytest.raises(ValueError):
        Circuit(2, [Gate(GateKind.CX, (1, 1))])
    with pytest.raises(ValueError):
        Circuit(2, [Gate(GateKind.H, (2,))])


def test_two_qubit_kinds():
    assert {k for k in GateKind if k.n_qubits == 2} == {GateKind.CX, GateKind.CZ, GateKind.CP, GateKind.RZZ}


def test_gate_matrix_conventions():
    t = 0.37
    assert np.allclose(gate_matrix(Gate(GateKind.RZ, (0,), t)), np.diag([np.exp(-0.5j * t), np.exp(0.5j * t)]))
    assert np.allclose(gate_matrix(Gate(GateKind.CP, (0, 1), t)), np.diag([1, 1, 1, np.exp(1j * t)]))
    zz = np.kron(Z, Z)
    expected = math.cos(t / 2) * np.eye(4) - 1j * math.sin(t / 2) * zz
    assert np.allclose(gate_matrix(Gate(GateKind.RZZ, (0, 1), t)), expected)
    for k in (GateKind.CX, GateKind.CZ, GateKind.CP, GateKind.RZZ):
        g = Gate(k, (0, 1), t if k.parametric else None)
        assert np.allclose(circuit_unitary(Circuit(2, [g])), dense_gate(g, 2))


def test_simulate_basics():
    psi = simulate(Circuit(2, []))
    assert psi[0] == 1 and np.count_nonzero(psi) == 1
    bell = simulate(BELL)
    assert np.allclose(bell, [1 / math.sqrt(2), 0, 0, 1 / math.sqrt(2)])


def test_simulation_cap():
    assert MAX_QUBITS >= 20
    with pytest.raises(ValueError):
        basis_state(0, MAX_QUBITS + 1)


@pytest.mark.parametrize("seed", range(10))
def test_random_circuit_matches_dense(seed):
    rng = np.random.default_rng(seed)
    c = random_circuit(rng, 3, 25)
    assert np.allclose(circuit_unitary(c), dense_unitary(c), atol=1e-12)
    psi = simulate(c, [1, 0, 1])
    assert abs(np.linalg.norm(psi) - 1) < 1e-10


def test_norm_preserved_at_20_qubits(rng):
    c = random_circuit(rng, 20, 200)
    assert abs(np.linalg.norm(simulate(c)) - 1) < 1e-10


def test_expectation_examples(rng):
    assert expectation(basis_state(0, 1), PauliSum.from_label("Z0")) == 1.0
    bell = simulate(BELL)
    assert abs(expectation(bell, PauliSum.from_label("Z0 Z1")) - 1) < 1e-12
    assert abs(expectation(bell, PauliSum.from_label("Z0", n_qubits=2))) < 1e-12
    psi = rng.normal(size=16) + 1j * rng.normal(size=16)
    psi /= np.linalg.norm(psi)
    O = random_observable(rng, 4, 8)
    assert abs(expectation(psi, O) - np.vdot(psi, dense_pauli(O) @ psi).real) < 1e-12


def test_expectation_errors():
    with pytest.raises(ValueError):
        expectation(basis_state(0, 2), PauliSum.from_label("Z0", 1j))
    with pytest.raises(ValueError):
        expectation(basis_state(0, 2), PauliSum.from_label("Z0", 1.0, 3))


def dense_exp_pauli(axes, theta, n):
    P = embed({q: {"X": np.array([[0, 1], [1, 0]]), "Y": np.array([[0, -1j], [1j, 0]]), "Z": Z}[a]
               for q, a in axes.items()}, n)
    return math.cos(theta / 2) * np.eye(1 << n) - 1j * math.sin(theta / 2) * P


def test_pauli_rotation_single_z():
    assert pauli_rotation(axes_to_key({0: "Z"}), 0.3) == [Gate(GateKind.RZ, (0,), 0.3)]
    with pytest.raises(ValueError):
        pauli_rotation((0, 0), 0.3)


@settings(max_examples=60, deadline=None)
@given(st.dictionaries(st.integers(0, 3), st.sampled_from("XYZ"), min_size=1, max_size=4),
       st.floats(-math.pi, math.pi))
def test_pauli_rotation_matches_dense_exponential(axes, theta):
    c = Circuit(4, pauli_rotation(axes_to_key(axes), theta))
    assert equal_up_to_phase(circuit_unitary(c), dense_exp_pauli(axes, theta, 4))
    inverse = Circuit(4, pauli_rotation(axes_to_key(axes), -theta))
    assert np.allclose(circuit_unitary(c + inverse), np.eye(16), atol=1e-10)


def test_pauli_rotation_zero_angle_is_identity():
    c = Circuit(2, pauli_rotation(axes_to_key({0: "X", 1: "Z"}), 0.0))
    assert np.allclose(circuit_unitary(c), np.eye(4))


def test_trotter_single_term_exact():
    G = PauliSum({axes_to_key({0: "X", 1: "Z"}): 0.4j}, 2)
    c = trotter_circuit(G)
    # exp(i 0.4 P) = exp(-i theta/2 P) with theta = -0.8
    assert equal_up_to_phase(circuit_unitary(c), dense_exp_pauli({0: "X", 1: "Z"}, -0.8, 2))


def test_trotter_two_terms_first_order():
    t = 1e-2
    G = PauliSum({axes_to_key({0: "X"}): 1j * t, axes_to_key({0: "Z", 1: "Y"}): 1j * t}, 2)
    exact = _expm(dense_pauli(G))
    err = np.abs(circuit_unitary(trotter_circuit(G)) - exact).max()
    assert err < 10 * t * t


def _expm(a):
    w, v = np.linalg.eig(a)
    return v @ np.diag(np.exp(w)) @ np.linalg.inv(v)


def test_trotter_rejects_real_coefficients():
    with pytest.raises(ValueError):
        trotter_circuit(PauliSum({(1, 0): 0.5}, 1))


def test_gate_census():
    assert gate_census(Circuit(2, [])) == {}
    assert gate_census(BELL) == {GateKind.H: 1, GateKind.CX: 1}


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(0, 20), st.integers(0, 20))
def test_census_is_additive(seed, n1, n2):
    rng = np.random.default_rng(seed)
    a, b = random_circuit(rng, 3, n1), random_circuit(rng, 3, n2)
    both = gate_census(a + b)
    for k in GateKind:
        assert both.get(k, 0) == gate_census(a).get(k, 0) + gate_census(b).get(k, 0)


def test_decompose_cx_via_cz(rng):
    one = Circuit(2, [gate(GateKind.CX, 1, 0)])
    d = decompose_cx_via_cz(one)
    assert len(d) == 3 and np.allclose(circuit_unitary(d), circuit_unitary(one))
    no_cx = Circuit(2, [gate(GateKind.H, 0), gate(GateKind.CZ, 0, 1)])
    assert decompose_cx_via_cz(no_cx) == no_cx
    c = random_circuit(rng, 3, 30)
    d = decompose_cx_via_cz(c)
    assert GateKind.CX not in gate_census(d)
    assert decompose_cx_via_cz(d) == d
    assert np.allclose(circuit_unitary(d), circuit_unitary(c))
