import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qpechem.ci import (
    BLOCKS,
    CONFIGURATIONS,
    build_blocks,
    ci_matrix,
    curve_energies,
    diagonalize_2x2,
    dissociation_reference,
    full_ci_oracle,
    slater_condon,
)
from qpechem.integrals import h2_mo_integrals


def test_configurations():
    assert [c.occupied for c in CONFIGURATIONS] == [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
    covered = sorted(i for idx in BLOCKS.values() for i in idx)
    assert covered == list(range(6))


def test_ci_matrix_is_block_diagonal(mo_eq):
    H = ci_matrix(mo_eq)
    assert np.allclose(H, H.T, atol=1e-14)
    mask = np.zeros_like(H, dtype=bool)
    for idx in BLOCKS.values():
        mask[np.ix_(idx, idx)] = True
    assert np.all(np.abs(H[~mask]) < 1e-12)


def test_blocks_at_equilibrium(blocks_eq):
    assert blocks_eq.H16 == pytest.approx(np.array([[-1.83715679, 0.18092091], [0.18092091, -0.24494819]]), abs=1e-7)
    assert blocks_eq.H2 == pytest.approx(-1.24453610, abs=1e-7)
    assert blocks_eq.H5 == pytest.approx(blocks_eq.H2, abs=1e-12)
    assert blocks_eq.H34[0, 0] == pytest.approx(blocks_eq.H34[1, 1], abs=1e-12)


def test_block_eigenvalues_match_dense_oracle(mo_eq, blocks_eq):
    dense = [p.energy for p in full_ci_oracle(mo_eq)]
    assert np.allclose(blocks_eq.eigenvalues(), dense, atol=1e-12)


def test_block_lookup(blocks_eq):
    assert blocks_eq.block("2").shape == (1, 1)
    with pytest.raises(KeyError):
        blocks_eq.block("7")


@settings(max_examples=200)
@given(
    st.floats(-5, 5, allow_nan=False),
    st.floats(-5, 5, allow_nan=False),
    st.floats(-5, 5, allow_nan=False),
)
def test_diagonalize_2x2_matches_eigh(a, b, d):
    m = np.array([[a, b], [b, d]])
    lo, hi = diagonalize_2x2(m)
    ref_vals, _ = np.linalg.eigh(m)
    assert [lo.energy, hi.energy] == pytest.approx(ref_vals, abs=1e-12)
    for pair in (lo, hi):
        v = pair.amplitudes
        assert np.linalg.norm(v) == pytest.approx(1.0)
        assert np.allclose(m @ v, pair.energy * v, atol=1e-11)
    assert abs(lo.amplitudes @ hi.amplitudes) < 1e-12


def test_diagonalize_2x2_rejects_bad_input():
    with pytest.raises(ValueError):
        diagonalize_2x2(np.eye(3))
    with pytest.raises(ValueError):
        diagonalize_2x2(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_triplet_component_is_antisymmetric_combination(blocks_eq):
    e1, e2 = diagonalize_2x2(blocks_eq.H34)
    assert e1.amplitudes == pytest.approx(np.array([1, 1]) / np.sqrt(2))
    assert e1.energy == pytest.approx(blocks_eq.H2, abs=1e-12)
    assert e2.energy > e1.energy


@pytest.mark.parametrize("r", [0.6, 1.0, 1.3886, 2.5, 4.0])
def test_triplet_degeneracy(r):
    b = build_blocks(h2_mo_integrals(r))
    e = curve_energies(b)
    assert abs(e["E1"] - b.H2) < 1e-10
    assert abs(e["E1"] - b.H5) < 1e-10
    assert e["G"] < e["E1"] < e["E2"] < e["E3"]


def test_slater_condon_hermitian(mo_eq):
    for a in CONFIGURATIONS:
        for b in CONFIGURATIONS:
            assert slater_condon(mo_eq, a.occupied, b.occupied) == pytest.approx(
                slater_condon(mo_eq, b.occupied, a.occupied), abs=1e-14
            )


def test_diagonal_element_is_hf_energy(mo_eq, scf_eq):
    assert slater_condon(mo_eq, (0, 1), (0, 1)) == pytest.approx(scf_eq.electronic_energy, abs=1e-12)


def test_dissociation_limit():
    # two electrons, minimal basis: FCI is exact for separated atoms
    b = build_blocks(h2_mo_integrals(20.0))
    g = curve_energies(b)["G"] + 1 / 20.0
    assert g == pytest.approx(dissociation_reference(), abs=1e-6)


def test_equilibrium_minimum():
    rs = np.arange(1.30, 1.50, 0.01)
    g = [curve_energies(build_blocks(h2_mo_integrals(r)))["G"] + 1 / r for r in rs]
    assert abs(rs[int(np.argmin(g))] - 1.3886) <= 0.01
