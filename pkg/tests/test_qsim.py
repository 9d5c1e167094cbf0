import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from qpechem.qsim import (
    Circuit,
    Gate,
    NoiseModel,
    QuantumState,
    apply_circuit,
    apply_entangling_with_visibility,
    apply_gate,
    apply_phase_damping,
    measure_qubit,
    probability_of_outcome,
    rx,
    ry,
    rz,
)

X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]])
Z = np.diag([1.0, -1.0]).astype(complex)
angles = st.floats(-4 * math.pi, 4 * math.pi, allow_nan=False)


@given(angles)
def test_rotations_are_exponentials(t):
    assert np.allclose(rx(t), expm(-0.5j * t * X))
    assert np.allclose(ry(t), expm(-0.5j * t * Y))
    assert np.allclose(rz(t), expm(-0.5j * t * Z))


@given(angles)
def test_angled_gates_unitary(t):
    for kind, q in [("RX", (0,)), ("RY", (0,)), ("RZ", (0,)), ("T", (0,)), ("CG", (0,)), ("CRZ", (0, 1)), ("CT", (0, 1))]:
        m = Gate(kind, q, t).matrix()
        assert np.allclose(m.conj().T @ m, np.eye(m.shape[0]))


def test_gate_validation():
    with pytest.raises(ValueError):
        Gate("CNOT", (0,))
    with pytest.raises(ValueError):
        Gate("RZ", (0,))
    with pytest.raises(ValueError):
        Gate("FOO", (0,))
    with pytest.raises(ValueError):
        Gate("CNOT", (1, 1))
    with pytest.raises(ValueError):
        Gate("U", (0,), unitary=np.array([[1, 1], [0, 1]]))
    with pytest.raises(IndexError):
        Circuit(2).add("H", 2)


def test_circuit_unitary_matches_kron():
    c = Circuit(3).add("H", 0).add("CNOT", 0, 2).add("RZ", 1, angle=0.3)
    H = np.array([[1, 1], [1, -1]]) / math.sqrt(2)
    I = np.eye(2)
    P0, P1 = np.diag([1, 0]), np.diag([0, 1])
    cnot02 = np.kron(np.kron(P0, I), I) + np.kron(np.kron(P1, I), X)
    ref = np.kron(np.kron(I, rz(0.3)), I) @ cnot02 @ np.kron(np.kron(H, I), I)
    assert np.allclose(c.unitary(), ref)


def test_qubit_zero_is_most_significant():
    s = apply_gate(QuantumState.zero(2), Gate("X", (0,)))
    assert np.allclose(s.probabilities(), [0, 0, 1, 0])


def test_global_phase_gates():
    c = Circuit(1).add("G", angle=0.7)
    assert np.allclose(c.unitary(), np.exp(-0.7j) * np.eye(2))
    c = Circuit(2).add("CG", 0, angle=0.7)
    assert np.allclose(c.unitary(), np.diag([1, 1, np.exp(-0.7j), np.exp(-0.7j)]))


def _random_state(rng, n):
    v = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    return QuantumState(v / np.linalg.norm(v))


def test_pure_and_mixed_agree(rng):
    c = Circuit(3).add("H", 1).add("CU", 1, 0, unitary=ry(0.4)).add("CRZ", 2, 1, angle=1.1).add("T", 0, angle=0.2)
    psi = _random_state(rng, 3)
    pure = apply_circuit(psi, c)
    mixed = apply_circuit(psi.to_mixed(), c)
    assert np.allclose(pure.density_matrix(), mixed.data)
    assert mixed.is_valid() and pure.is_valid()
    assert psi.is_valid()  # inputs untouched


def test_mode_and_product():
    s = QuantumState.product([1, 0], np.array([0, 1.0]))
    assert s.n_qubits == 2 and s.mode == "pure"
    assert np.allclose(s.probabilities(), [0, 1, 0, 0])
    assert QuantumState.zero(2, mixed=True).mode == "mixed"


@settings(max_examples=30, deadline=None)
@given(st.floats(0, 1), st.integers(0, 2**31 - 1))
def test_phase_damping_is_cptp(gamma, seed):
    psi = _random_state(np.random.default_rng(seed), 2)
    out = apply_phase_damping(psi, 0, gamma)
    assert out.mode == "mixed" and out.is_valid()
    assert out.trace() == pytest.approx(1.0)
    # populations unchanged, coherences scaled by sqrt(1 - gamma)
    rho = psi.density_matrix().reshape(2, 2, 2, 2)
    got = out.data.reshape(2, 2, 2, 2)
    assert np.allclose(got[0, :, 0, :], rho[0, :, 0, :])
    assert np.allclose(got[0, :, 1, :], math.sqrt(1 - gamma) * rho[0, :, 1, :])


def test_kraus_completeness():
    g = 0.06
    k0 = np.diag([1, math.sqrt(1 - g)])
    k1 = np.diag([0, math.sqrt(g)])
    assert np.allclose(k0.T @ k0 + k1.T @ k1, np.eye(2))


def test_visibility_model():
    plus = QuantumState.product(np.array([1, 1]) / math.sqrt(2), [0, 1])
    g = Gate("CRZ", (0, 1), 1.0)
    ideal = apply_gate(plus.to_mixed(), g)
    same = apply_entangling_with_visibility(plus, g, 1.0)
    assert np.allclose(same.data, ideal.data)
    half = apply_entangling_with_visibility(plus, g, 0.5)
    rho = half.data.reshape(2, 2, 2, 2)
    ref = ideal.data.reshape(2, 2, 2, 2)
    assert np.allclose(rho[0, :, 1, :], 0.5 * ref[0, :, 1, :])
    assert np.allclose(rho[1, :, 1, :], ref[1, :, 1, :])
    with pytest.raises(ValueError):
        apply_entangling_with_visibility(plus, Gate("H", (0,)), 0.9)


def test_noise_model_defaults():
    nm = NoiseModel()
    assert (nm.gamma, nm.visibility, nm.active) == (0.06, 0.93, True)
    assert not NoiseModel.off().active
    with pytest.raises(ValueError):
        NoiseModel(gamma=1.5)


def test_measurement_statistics():
    s = QuantumState(np.array([math.sqrt(0.3), math.sqrt(0.7)]))
    assert probability_of_outcome(s, 0, 1) == pytest.approx(0.7)
    rng = np.random.default_rng(5)
    ones = sum(measure_qubit(s, 0, rng)[0] for _ in range(4000))
    assert abs(ones / 4000 - 0.7) < 4 * math.sqrt(0.21 / 4000)


def test_measurement_collapses_and_is_seeded():
    bell = apply_circuit(QuantumState.zero(2), Circuit(2).add("H", 0).add("CNOT", 0, 1))
    for mixed in (False, True):
        st0 = bell.to_mixed() if mixed else bell
        b, post = measure_qubit(st0, 0, 11)
        assert probability_of_outcome(post, 1, b) == pytest.approx(1.0)
        assert post.is_valid()
        assert measure_qubit(st0, 0, 11)[0] == b
