"""STO-3G integrals and restricted Hartree-Fock for minimal-basis H2.

Only s-type contracted Gaussians are supported; every integral has a closed
form in terms of the zeroth-order Boys function.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from importlib import resources

import numpy as np
from scipy.linalg import eigh

__all__ = [
    "GaussianPrimitive",
    "BasisFunction",
    "AOIntegrals",
    "SCFResult",
    "MOIntegrals",
    "SCFConvergenceError",
    "boys_f0",
    "load_basis_data",
    "h2_basis",
    "ao_integrals",
    "compute_ao_integrals",
    "run_rhf",
    "transform_to_mo",
    "hydrogen_atom_energy",
    "h2_mo_integrals",
]


class SCFConvergenceError(RuntimeError):
    """Raised when the SCF loop hits its iteration cap."""

    def __init__(self, iterations: int, residual: float):
        super().__init__(
            f"SCF did not converge in {iterations} iterations (max |dP| = {residual:.3e})"
        )
        self.iterations = iterations
        self.residual = residual


@dataclass(frozen=True)
class GaussianPrimitive:
    exponent: float
    contraction_coefficient: float

    def __post_init__(self):
        if not self.exponent > 0:
            raise ValueError(f"Gaussian exponent must be positive, got {self.exponent}")


@dataclass(frozen=True)
class BasisFunction:
    """Contracted s-type Gaussian centred at ``center`` (bohr).

    Primitive coefficients are taken as given for normalized primitives; the
    contraction as a whole is renormalized so the self-overlap is exactly one.
    """

    center: np.ndarray
    primitives: tuple[GaussianPrimitive, ...]

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float).reshape(3))
        object.__setattr__(self, "primitives", tuple(self.primitives))
        if not self.primitives:
            raise ValueError("basis function needs at least one primitive")

    @property
    def exponents(self) -> np.ndarray:
        return np.array([p.exponent for p in self.primitives])

    @property
    def coefficients(self) -> np.ndarray:
        """Coefficients multiplying unit-normalized primitives, renormalized."""
        a = self.exponents
        d = np.array([p.contraction_coefficient for p in self.primitives])
        n = (2.0 * a / np.pi) ** 0.75
        c = d * n
        ab = a[:, None] + a[None, :]
        s = np.sum(c[:, None] * c[None, :] * (np.pi / ab) ** 1.5)
        return c / math.sqrt(s)


@dataclass(frozen=True)
class AOIntegrals:
    """Atomic-orbital integrals. ``eri`` uses chemist ordering (ij|kl)."""

    overlap: np.ndarray
    kinetic: np.ndarray
    nuclear_attraction: np.ndarray
    eri: np.ndarray
    nuclear_repulsion: float
    eri_convention: str = "chemist"

    @property
    def core_hamiltonian(self) -> np.ndarray:
        return self.kinetic + self.nuclear_attraction

    @property
    def n_basis(self) -> int:
        return self.overlap.shape[0]


@dataclass(frozen=True)
class SCFResult:
    mo_coefficients: np.ndarray
    orbital_energies: np.ndarray
    electronic_energy: float
    total_energy: float
    converged: bool
    iterations: int
    energy_history: tuple[float, ...] = field(default=(), repr=False)


@dataclass(frozen=True)
class MOIntegrals:
    """Spin-orbital integrals for the second-quantized Hamiltonian.

    Spin orbitals are ordered (g up, g down, u up, u down). ``h_pqrs`` is
    stored in operator order::

        H = sum_pq h_pq a+_p a_q + 1/2 sum_pqrs h_pqrs a+_p a+_q a_r a_s

    i.e. ``h_pqrs[p, q, r, s]`` multiplies ``a+_p a+_q a_r a_s`` and equals
    the physicist integral ``<pq|sr>`` (electron 1 in p and s, electron 2 in
    q and r).
    """

    h_pq: np.ndarray
    h_pqrs: np.ndarray
    nuclear_repulsion: float
    convention: str = "operator order a+p a+q a_r a_s, h_pqrs = <pq|sr>; spin orbitals (g+, g-, u+, u-)"

    @property
    def n_spin_orbitals(self) -> int:
        return self.h_pq.shape[0]


def boys_f0(x: float) -> float:
    """Zeroth-order Boys function F0(x) = int_0^1 exp(-x t^2) dt."""
    if x < 0:
        raise ValueError(f"Boys function argument must be non-negative, got {x}")
    if x < 1e-8:
        # Taylor series; the closed form loses precision near zero.
        return 1.0 - x / 3.0 + x * x / 10.0
    sx = math.sqrt(x)
    return 0.5 * math.sqrt(math.pi) / sx * math.erf(sx)


def load_basis_data(path=None) -> list[GaussianPrimitive]:
    """Read a basis file with one ``exponent coefficient`` pair per line."""
    if path is None:
        text = resources.files("qpechem.data").joinpath("sto3g_h.txt").read_text()
    else:
        with open(path) as fh:
            text = fh.read()
    prims = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"line {lineno}: expected 'exponent coefficient', got {line!r}")
        prims.append(GaussianPrimitive(float(parts[0]), float(parts[1])))
    if not prims:
        raise ValueError("basis file contains no primitives")
    return prims


def h2_basis(bond_length: float, primitives=None) -> tuple[list[BasisFunction], np.ndarray]:
    """Two 1s functions on nuclei placed at +-r/2 along z.

    Returns the basis and the nuclear coordinates.
    """
    if not bond_length > 0:
        raise ValueError(f"bond length must be positive, got {bond_length}")
    prims = load_basis_data() if primitives is None else list(primitives)
    centers = np.array([[0.0, 0.0, -bond_length / 2], [0.0, 0.0, bond_length / 2]])
    return [BasisFunction(c, prims) for c in centers], centers


def _gaussian_product(a, A, b, B):
    p = a + b
    P = (a * A + b * B) / p
    K = math.exp(-a * b / p * float(np.dot(A - B, A - B)))
    return p, P, K


def ao_integrals(basis, nuclei, charges=None) -> AOIntegrals:
    """All one- and two-electron integrals over s-type contracted Gaussians."""
    nuclei = np.atleast_2d(np.asarray(nuclei, dtype=float))
    charges = np.ones(len(nuclei)) if charges is None else np.asarray(charges, dtype=float)
    nb = len(basis)
    # flattened primitive lists: (exponent, coefficient, center)
    prims = [list(zip(bf.exponents, bf.coefficients, itertools.repeat(bf.center))) for bf in basis]

    S = np.zeros((nb, nb))
    T = np.zeros((nb, nb))
    V = np.zeros((nb, nb))
    for i in range(nb):
        for j in range(i, nb):
            s = t = v = 0.0
            for a, ca, A in prims[i]:
                for b, cb, B in prims[j]:
                    p, P, K = _gaussian_product(a, A, b, B)
                    mu = a * b / p
                    ab2 = float(np.dot(A - B, A - B))
                    sab = (math.pi / p) ** 1.5 * K
                    s += ca * cb * sab
                    t += ca * cb * mu * (3.0 - 2.0 * mu * ab2) * sab
                    for Z, C in zip(charges, nuclei):
                        pc2 = float(np.dot(P - C, P - C))
                        v -= ca * cb * Z * 2.0 * math.pi / p * K * boys_f0(p * pc2)
            S[i, j] = S[j, i] = s
            T[i, j] = T[j, i] = t
            V[i, j] = V[j, i] = v

    eri = np.zeros((nb,) * 4)
    done = {}
    for i, j, k, l in itertools.product(range(nb), repeat=4):
        key = _eri_key(i, j, k, l)
        if key in done:
            eri[i, j, k, l] = done[key]
            continue
        val = 0.0
        for a, ca, A in prims[i]:
            for b, cb, B in prims[j]:
                p, P, Kab = _gaussian_product(a, A, b, B)
                for c, cc, C in prims[k]:
                    for d, cd, D in prims[l]:
                        q, Q, Kcd = _gaussian_product(c, C, d, D)
                        pq2 = float(np.dot(P - Q, P - Q))
                        pref = 2.0 * math.pi**2.5 / (p * q * math.sqrt(p + q))
                        val += ca * cb * cc * cd * pref * Kab * Kcd * boys_f0(p * q / (p + q) * pq2)
        done[key] = eri[i, j, k, l] = val

    enuc = 0.0
    for (Za, Ra), (Zb, Rb) in itertools.combinations(zip(charges, nuclei), 2):
        enuc += float(Za * Zb) / float(np.linalg.norm(Ra - Rb))
    return AOIntegrals(S, T, V, eri, enuc)


def _eri_key(i, j, k, l):
    ij = (i, j) if i >= j else (j, i)
    kl = (k, l) if k >= l else (l, k)
    return (ij, kl) if ij >= kl else (kl, ij)


def compute_ao_integrals(bond_length: float, basis=None) -> AOIntegrals:
    """AO integrals for H2 at ``bond_length`` bohr.

    ``basis`` may be a pair of prebuilt :class:`BasisFunction` objects, in
    which case the nuclei are taken to sit on their centers.
    """
    if not bond_length > 0:
        raise ValueError(f"bond length must be positive, got {bond_length}")
    if basis is None:
        basis, nuclei = h2_basis(bond_length)
    else:
        basis = list(basis)
        if len(basis) != 2:
            raise ValueError("H2 needs exactly two basis functions")
        nuclei = np.array([bf.center for bf in basis])
        sep = float(np.linalg.norm(nuclei[0] - nuclei[1]))
        if abs(sep - bond_length) > 1e-9:
            raise ValueError(f"basis centers are {sep} bohr apart, expected {bond_length}")
    return ao_integrals(basis, nuclei)


def _density(C, n_occ):
    occ = C[:, :n_occ]
    return 2.0 * occ @ occ.T


def _fock(h, eri, P):
    J = np.einsum("kl,ijkl->ij", P, eri)
    K = np.einsum("kl,ikjl->ij", P, eri)
    return h + J - 0.5 * K


def _fix_signs(C):
    """Make each MO's first AO weight positive (g = (+,+), u = (+,-))."""
    C = C.copy()
    for k in range(C.shape[1]):
        if C[0, k] < 0:
            C[:, k] *= -1
    return C


def run_rhf(
    ao: AOIntegrals,
    n_electrons: int = 2,
    *,
    tol: float = 1e-10,
    max_iter: int = 200,
    raise_on_failure: bool = True,
) -> SCFResult:
    """Restricted Hartree-Fock from a core-Hamiltonian guess (no DIIS, no damping)."""
    if n_electrons <= 0 or n_electrons % 2:
        raise ValueError(f"RHF needs a positive even electron count, got {n_electrons}")
    n_occ = n_electrons // 2
    if n_occ > ao.n_basis:
        raise ValueError("more occupied orbitals than basis functions")
    S, h, eri = ao.overlap, ao.core_hamiltonian, ao.eri

    eps, C = eigh(h, S)
    P = _density(C, n_occ)
    history = []
    residual = float("inf")
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        F = _fock(h, eri, P)
        history.append(0.5 * float(np.sum(P * (h + F))))
        eps, C = eigh(F, S)
        P_new = _density(C, n_occ)
        residual = float(np.max(np.abs(P_new - P)))
        P = P_new
        if residual < tol:
            converged = True
            break
    if not converged and raise_on_failure:
        raise SCFConvergenceError(it, residual)

    F = _fock(h, eri, P)
    e_elec = 0.5 * float(np.sum(P * (h + F)))
    history.append(e_elec)
    C = _fix_signs(C)
    return SCFResult(
        mo_coefficients=C,
        orbital_energies=eps,
        electronic_energy=e_elec,
        total_energy=e_elec + ao.nuclear_repulsion,
        converged=converged,
        iterations=it,
        energy_history=tuple(history),
    )


def transform_to_mo(ao: AOIntegrals, scf: SCFResult) -> MOIntegrals:
    """Spin-orbital integrals over (g up, g down, u up, u down)."""
    if not scf.converged:
        raise ValueError("refusing to transform integrals from an unconverged SCF")
    C = scf.mo_coefficients
    h_mo = C.T @ ao.core_hamiltonian @ C
    g_mo = np.einsum("pi,qj,rk,sl,pqrs->ijkl", C, C, C, C, ao.eri, optimize=True)

    n = 2 * C.shape[1]
    spatial = np.arange(n) // 2
    spin = np.arange(n) % 2
    same = spin[:, None] == spin[None, :]
    h_pq = np.where(same, h_mo[np.ix_(spatial, spatial)], 0.0)
    # h_pqrs = <pq|sr> = (ps|qr); spin(p)=spin(s), spin(q)=spin(r)
    chem = np.einsum("psqr->pqrs", g_mo[np.ix_(spatial, spatial, spatial, spatial)])
    mask = same[:, None, None, :] & same[None, :, :, None]
    h_pqrs = np.where(mask, chem, 0.0)
    return MOIntegrals(h_pq=h_pq, h_pqrs=h_pqrs, nuclear_repulsion=ao.nuclear_repulsion)


def hydrogen_atom_energy(primitives=None) -> float:
    """Ground-state energy of one H atom in the same basis (1x1 core Hamiltonian)."""
    prims = load_basis_data() if primitives is None else list(primitives)
    bf = BasisFunction(np.zeros(3), prims)
    ao = ao_integrals([bf], np.zeros((1, 3)))
    return float(ao.core_hamiltonian[0, 0] / ao.overlap[0, 0])


def h2_mo_integrals(bond_length: float) -> MOIntegrals:
    """Convenience pipeline: AO integrals, RHF, spin-orbital transform."""
    ao = compute_ao_integrals(bond_length)
    return transform_to_mo(ao, run_rhf(ao))
