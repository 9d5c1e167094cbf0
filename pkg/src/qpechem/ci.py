"""Two-electron configuration basis and the symmetry-blocked CI Hamiltonian."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .integrals import MOIntegrals, hydrogen_atom_energy

__all__ = [
    "SPIN_ORBITAL_LABELS",
    "CONFIGURATIONS",
    "BLOCKS",
    "Configuration",
    "Eigenpair",
    "BlockHamiltonian",
    "slater_condon",
    "ci_matrix",
    "build_blocks",
    "diagonalize_2x2",
    "full_ci_oracle",
    "dissociation_reference",
    "curve_energies",
]

SPIN_ORBITAL_LABELS = ("g+", "g-", "u+", "u-")


@dataclass(frozen=True)
class Configuration:
    """Slater determinant a+_i a+_j |vac> with i < j."""

    label: str
    occupied: tuple[int, int]

    def __post_init__(self):
        i, j = self.occupied
        if not 0 <= i < j < 4:
            raise ValueError(f"occupied spin orbitals must be ascending in 0..3, got {self.occupied}")

    def __str__(self):
        i, j = self.occupied
        return f"{self.label}=|{SPIN_ORBITAL_LABELS[i]},{SPIN_ORBITAL_LABELS[j]}|"


CONFIGURATIONS = (
    Configuration("Phi1", (0, 1)),
    Configuration("Phi2", (0, 2)),
    Configuration("Phi3", (0, 3)),
    Configuration("Phi4", (1, 2)),
    Configuration("Phi5", (1, 3)),
    Configuration("Phi6", (2, 3)),
)

# block label -> configuration indices (0-based into CONFIGURATIONS)
BLOCKS = {"16": (0, 5), "2": (1,), "34": (2, 3), "5": (4,)}


@dataclass(frozen=True)
class Eigenpair:
    energy: float
    amplitudes: np.ndarray


def _antisym(mo: MOIntegrals, p, q, r, s) -> float:
    """<pq||rs> in physicist notation."""
    # stored h[p,q,r,s] = <pq|sr>
    g = mo.h_pqrs
    return g[p, q, s, r] - g[p, q, r, s]


def _excitation(bra, ket):
    """Orbitals in ket not in bra (holes) and in bra not in ket (particles), plus phase."""
    holes = [o for o in ket if o not in bra]
    parts = [o for o in bra if o not in ket]
    # Permute ket into maximum coincidence with bra: replace each hole by the
    # matching particle in place and count transpositions needed to sort.
    mapped = list(ket)
    for h, p in zip(holes, parts):
        mapped[mapped.index(h)] = p
    sign = 1
    arr = mapped[:]
    for i in range(len(arr)):
        for j in range(len(arr) - 1 - i):
            if arr[j] > arr[j + 1]:
                arr[j], arr[j + 1] = arr[j + 1], arr[j]
                sign = -sign
    return holes, parts, sign


def slater_condon(mo: MOIntegrals, bra: tuple[int, ...], ket: tuple[int, ...]) -> float:
    """<bra|H|ket> for determinants given as ascending occupied spin-orbital tuples."""
    h = mo.h_pq
    holes, parts, sign = _excitation(bra, ket)
    if len(holes) == 0:
        one = sum(h[i, i] for i in ket)
        two = 0.5 * sum(_antisym(mo, i, j, i, j) for i in ket for j in ket)
        return float(one + two)
    if len(holes) == 1:
        (i,), (a,) = holes, parts
        val = h[a, i] + sum(_antisym(mo, a, j, i, j) for j in ket if j != i)
        return float(sign * val)
    if len(holes) == 2:
        i, j = holes
        a, b = parts
        return float(sign * _antisym(mo, a, b, i, j))
    return 0.0


def ci_matrix(mo: MOIntegrals) -> np.ndarray:
    """Dense 6x6 electronic Hamiltonian in the (Phi1..Phi6) basis."""
    if mo.n_spin_orbitals != 4:
        raise ValueError(f"expected 4 spin orbitals, got {mo.n_spin_orbitals}")
    n = len(CONFIGURATIONS)
    H = np.empty((n, n))
    for a, ca in enumerate(CONFIGURATIONS):
        for b, cb in enumerate(CONFIGURATIONS):
            H[a, b] = slater_condon(mo, ca.occupied, cb.occupied)
    return H


@dataclass(frozen=True)
class BlockHamiltonian:
    H16: np.ndarray
    H34: np.ndarray
    H2: float
    H5: float
    nuclear_repulsion: float = 0.0

    def block(self, label: str) -> np.ndarray:
        """Block as a matrix (1x1 blocks returned as 1x1 arrays)."""
        if label == "16":
            return self.H16
        if label == "34":
            return self.H34
        if label == "2":
            return np.array([[self.H2]])
        if label == "5":
            return np.array([[self.H5]])
        raise KeyError(f"unknown block {label!r}; expected one of {list(BLOCKS)}")

    def eigenvalues(self) -> np.ndarray:
        vals = [self.H2, self.H5]
        vals += [p.energy for p in diagonalize_2x2(self.H16)]
        vals += [p.energy for p in diagonalize_2x2(self.H34)]
        return np.sort(vals)


def build_blocks(mo: MOIntegrals) -> BlockHamiltonian:
    H = ci_matrix(mo)
    i16, i34 = BLOCKS["16"], BLOCKS["34"]
    return BlockHamiltonian(
        H16=H[np.ix_(i16, i16)].copy(),
        H34=H[np.ix_(i34, i34)].copy(),
        H2=float(H[1, 1]),
        H5=float(H[4, 4]),
        nuclear_repulsion=mo.nuclear_repulsion,
    )


def _canonical_sign(v):
    k = int(np.argmax(np.abs(v) > 1e-12))
    return v if v[k] > 0 else -v


def diagonalize_2x2(block) -> tuple[Eigenpair, Eigenpair]:
    """Closed-form eigenpairs of a real symmetric 2x2 matrix, ascending."""
    m = np.asarray(block, dtype=float)
    if m.shape != (2, 2):
        raise ValueError(f"expected a 2x2 matrix, got shape {m.shape}")
    if abs(m[0, 1] - m[1, 0]) > 1e-12 * max(1.0, np.abs(m).max()):
        raise ValueError("block is not symmetric")
    a, b, d = m[0, 0], 0.5 * (m[0, 1] + m[1, 0]), m[1, 1]
    mean = 0.5 * (a + d)
    radius = math.hypot(0.5 * (a - d), b)
    theta = 0.5 * math.atan2(2.0 * b, a - d)
    upper = np.array([math.cos(theta), math.sin(theta)])
    lower = np.array([-math.sin(theta), math.cos(theta)])
    return (
        Eigenpair(mean - radius, _canonical_sign(lower)),
        Eigenpair(mean + radius, _canonical_sign(upper)),
    )


def full_ci_oracle(mo: MOIntegrals) -> list[Eigenpair]:
    """Dense diagonalization of the 6x6 CI matrix, ascending energies."""
    vals, vecs = np.linalg.eigh(ci_matrix(mo))
    return [Eigenpair(float(e), _canonical_sign(vecs[:, k])) for k, e in enumerate(vals)]


def dissociation_reference(primitives=None) -> float:
    """Total energy of two isolated hydrogen atoms in the same basis."""
    return 2.0 * hydrogen_atom_energy(primitives)


def curve_energies(blocks: BlockHamiltonian) -> dict[str, float]:
    """Electronic energies of the four potential curves.

    G and E3 are the lower and upper eigenvalues of the (1,6) block, E1 the
    triplet (lower (3,4) eigenvalue, equal to the 2 and 5 blocks) and E2 the
    singlet upper (3,4) eigenvalue.
    """
    g, e3 = diagonalize_2x2(blocks.H16)
    e1, e2 = diagonalize_2x2(blocks.H34)
    return {"G": g.energy, "E1": e1.energy, "E2": e2.energy, "E3": e3.energy}
