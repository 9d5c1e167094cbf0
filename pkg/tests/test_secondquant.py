import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from qpechem.ci import build_blocks
from qpechem.integrals import h2_mo_integrals
from qpechem.secondquant import (
    FermionTerm,
    PauliString,
    TrotterPlan,
    build_h2_hamiltonian,
    count_gates,
    exact_propagator,
    ground_energy,
    group_terms,
    hamiltonian_matrix,
    jordan_wigner,
    ladder,
    number_operator_matrix,
    pauli_sum_matrix,
    sector_indices,
    template_circuit,
    term_order,
    trotter_circuit,
)


def _ladder_matrix(j, n, creation, occupied=1):
    return sum(c * _pm(s) for s, c in ladder(j, n, creation, occupied))


def _pm(s):
    return PauliString(1.0, s).matrix()


@pytest.mark.parametrize("occupied", [0, 1])
def test_canonical_anticommutation(occupied):
    n = 4
    a = [_ladder_matrix(j, n, False, occupied) for j in range(n)]
    ad = [_ladder_matrix(j, n, True, occupied) for j in range(n)]
    eye = np.eye(2**n)
    for i, j in itertools.product(range(n), repeat=2):
        assert np.allclose(a[i] @ ad[j] + ad[j] @ a[i], eye * (i == j))
        assert np.allclose(a[i] @ a[j] + a[j] @ a[i], 0)
        assert np.allclose(ad[i], a[i].conj().T)


def test_occupied_convention():
    # a+_0 on the vacuum sets qubit 0 to the "occupied" value
    for occ in (1, 0):
        vac = np.zeros(16)
        vac[0 if occ == 1 else 15] = 1
        out = _ladder_matrix(0, 4, True, occ) @ vac
        assert np.count_nonzero(np.abs(out) > 1e-12) == 1
        idx = int(np.argmax(np.abs(out)))
        assert (idx >> 3) & 1 == occ


def test_number_operator_eigenvalues():
    for occ in (0, 1):
        N = number_operator_matrix(4, occ)
        for i in range(16):
            ones = bin(i).count("1")
            assert N[i, i].real == pytest.approx(ones if occ else 4 - ones)
        assert len(sector_indices(2, 4, occ)) == 6


def test_pauli_string_validation():
    with pytest.raises(ValueError):
        PauliString(1.0, "XQ")
    assert PauliString(1.0, "IXIZ").support == (1, 3)


def test_term_validation():
    with pytest.raises(ValueError):
        FermionTerm("coulomb", (0, 1), 1.0)
    with pytest.raises(ValueError):
        FermionTerm("double", (3, 3, 1, 0), 1.0)
    with pytest.raises(ValueError):
        FermionTerm("hopping", (1, 0), 1.0)
    with pytest.raises(ValueError):
        FermionTerm("number", (0, 1), 1.0)
    with pytest.raises(IndexError):
        jordan_wigner(FermionTerm("number", (5,), 1.0), 4)


def test_number_and_coulomb_pauli_forms():
    ps = {p.letters: p.coefficient for p in jordan_wigner(FermionTerm("number", (2,), 2.0), 4)}
    assert ps == pytest.approx({"IIII": 1.0, "IIZI": -1.0})
    ps = {p.letters: p.coefficient for p in jordan_wigner(FermionTerm("coulomb", (3, 1), 4.0), 4)}
    assert ps == pytest.approx({"IIII": 1.0, "IZII": -1.0, "IIIZ": -1.0, "IZIZ": 1.0})


def test_h2_term_list(terms_eq):
    kinds = [t.kind for t in terms_eq]
    assert kinds.count("number") == 4
    assert kinds.count("coulomb") == 6
    assert kinds.count("double") == 2
    assert "excitation" not in kinds and "number_excitation" not in kinds


def test_hamiltonian_hermitian_and_conserves_particles(terms_eq):
    H = hamiltonian_matrix(terms_eq)
    N = number_operator_matrix()
    assert np.allclose(H, H.conj().T)
    assert np.allclose(H @ N, N @ H)


def _ci_spectrum(mo):
    return build_blocks(mo).eigenvalues()


@pytest.mark.parametrize("occupied", [0, 1])
@pytest.mark.parametrize("r", [0.7, 1.3886, 3.0])
def test_jw_spectrum_equals_ci(r, occupied):
    mo = h2_mo_integrals(r)
    H = hamiltonian_matrix(build_h2_hamiltonian(mo), 4, occupied)
    idx = sector_indices(2, 4, occupied)
    assert np.allclose(np.linalg.eigvalsh(H[np.ix_(idx, idx)]), _ci_spectrum(mo), atol=1e-10)


def _random_term(kind, rng):
    n = 5
    idx = list(rng.permutation(n)[: {"number": 1, "excitation": 2, "coulomb": 2, "number_excitation": 3, "double": 4}[kind]])
    if kind in ("excitation", "coulomb", "double") and idx[0] < idx[1]:
        idx[0], idx[1] = idx[1], idx[0]
    if kind == "number_excitation" and idx[0] < idx[2]:
        idx[0], idx[2] = idx[2], idx[0]
    return FermionTerm(kind, tuple(int(i) for i in idx), float(rng.normal()))


@settings(max_examples=25, deadline=None)
@given(
    st.sampled_from(["number", "excitation", "coulomb", "number_excitation", "double"]),
    st.integers(0, 2**31 - 1),
    st.floats(-3.0, 3.0),
    st.booleans(),
)
def test_templates_match_exponential(kind, seed, time, controlled):
    rng = np.random.default_rng(seed)
    term = _random_term(kind, rng)
    circ = template_circuit(term, time, controlled, n_qubits=5)
    ref = expm(-1j * time * hamiltonian_matrix([term], 5))
    if controlled:
        ref = np.block([[np.eye(32), np.zeros((32, 32))], [np.zeros((32, 32)), ref]])
    assert np.allclose(circ.unitary(), ref, atol=1e-9)


def test_zero_time_template_is_identity(terms_eq):
    for g in group_terms(terms_eq):
        assert np.allclose(template_circuit(g, 0.0).unitary(), np.eye(16), atol=1e-12)


def test_template_group_validation(terms_eq):
    with pytest.raises(ValueError):
        template_circuit(terms_eq[:5], 1.0)
    with pytest.raises(ValueError):
        template_circuit([], 1.0)


def test_excitation_gate_count_grows_with_span():
    short = len(template_circuit(FermionTerm("excitation", (1, 0), 0.5), 1.0, n_qubits=6))
    long = len(template_circuit(FermionTerm("excitation", (5, 0), 0.5), 1.0, n_qubits=6))
    assert long - short == 2 * 2 * 4  # two strings, a CNOT pair per extra qubit


def test_trotter_counts(terms_eq):
    rep = count_gates(trotter_circuit(terms_eq, TrotterPlan(1.0, 1)), trotter_number=1)
    assert rep.total == 94 and rep.two_qubit == 36
    six = count_gates(trotter_circuit(terms_eq, TrotterPlan(1.0, 6)), trotter_number=6)
    assert six.total == 6 * 94 and six.per_step == 94
    assert six.ipea_gates(13) == six.total * (2**14 - 1)
    assert six.ipea_gates(13, guard_bits=0) == six.total * (2**13 - 1)


def test_trotter_plan_validation():
    with pytest.raises(ValueError):
        TrotterPlan(1.0, 0)


def test_term_order_is_deterministic(terms_eq):
    assert term_order(terms_eq) == term_order(list(reversed(terms_eq)))
    assert term_order(terms_eq)[0].startswith("number")


@pytest.mark.parametrize("tn", [1, 3])
def test_controlled_trotter_matches_uncontrolled(terms_eq, tn):
    u = trotter_circuit(terms_eq, TrotterPlan(0.7, tn)).unitary()
    cu = trotter_circuit(terms_eq, TrotterPlan(0.7, tn, controlled=True)).unitary()
    assert np.allclose(cu[:16, :16], np.eye(16))
    assert np.allclose(cu[16:, 16:], u)
    assert np.allclose(cu[:16, 16:], 0)


def test_trotter_converges_to_exact(terms_eq):
    exact = exact_propagator(terms_eq, 1.0)
    errs = [np.linalg.norm(trotter_circuit(terms_eq, TrotterPlan(1.0, tn)).unitary() - exact, 2) for tn in (2, 4, 8, 16)]
    assert all(b < a for a, b in zip(errs, errs[1:]))
    # first order: halving dt roughly halves the error
    assert 1.7 < errs[-2] / errs[-1] < 2.3


def test_exact_propagator_limits(terms_eq):
    with pytest.raises(ValueError):
        exact_propagator(terms_eq, 1.0, n_qubits=11)


def test_pauli_sum_matrix_linear(terms_eq):
    strings = jordan_wigner(terms_eq, 4)
    assert np.allclose(pauli_sum_matrix(strings, 4), hamiltonian_matrix(terms_eq))
    assert all(abs(p.coefficient.imag) < 1e-14 for p in strings)


def test_ground_energy_in_sector(terms_eq, blocks_eq):
    e, v = ground_energy(terms_eq)
    assert e == pytest.approx(blocks_eq.eigenvalues()[0], abs=1e-10)
    assert np.linalg.norm(v) == pytest.approx(1.0)
