"""Second-quantized H2: Jordan-Wigner mapping, circuit templates, Trotter compilation.

Qubit j carries spin orbital j. With ``occupied=1`` (default) |1> marks an
occupied orbital and a_j -> sigma+_j Z_{j+1} ... Z_{N-1} with sigma+ = |0><1|;
``occupied=0`` is the opposite labelling. Both give the same spectrum.
"""

from __future__ import annotations

import functools
import math
from collections import Counter
from dataclasses import dataclass, field
from collections.abc import Iterable, Sequence

import numpy as np
from scipy.linalg import expm

from .integrals import MOIntegrals
from .qsim import Circuit, Gate

__all__ = [
    "KINDS",
    "FermionTerm",
    "PauliString",
    "TrotterPlan",
    "ResourceReport",
    "ladder",
    "jordan_wigner",
    "pauli_matrix",
    "pauli_sum_matrix",
    "hamiltonian_matrix",
    "number_operator_matrix",
    "sector_indices",
    "build_h2_hamiltonian",
    "template_circuit",
    "group_terms",
    "trotter_circuit",
    "count_gates",
    "exact_propagator",
    "ground_energy",
    "trotter_ground_energy",
    "trotter_scan",
]

KINDS = ("number", "excitation", "coulomb", "number_excitation", "double")
_ARITY = {"number": 1, "excitation": 2, "coulomb": 2, "number_excitation": 3, "double": 4}
ZERO_TOL = 1e-12


@dataclass(frozen=True)
class FermionTerm:
    """One Hermitian piece of the second-quantized Hamiltonian.

    ================== ============ =============================================
    kind               indices      operator (times ``coefficient``)
    ================== ============ =============================================
    number             (p,)         a+p ap
    excitation         (p, q), p>q  a+p aq + a+q ap
    coulomb            (p, q), p>q  a+p a+q aq ap
    number_excitation  (p, q, r)    a+p a+q aq ar + a+r a+q aq ap, p>r
    double             (p, q, r, s) a+p a+q ar as + a+s a+r aq ap
    ================== ============ =============================================
    """

    kind: str
    indices: tuple[int, ...]
    coefficient: float

    def __post_init__(self):
        object.__setattr__(self, "indices", tuple(int(i) for i in self.indices))
        if self.kind not in KINDS:
            raise ValueError(f"unknown term kind {self.kind!r}")
        idx = self.indices
        if len(idx) != _ARITY[self.kind]:
            raise ValueError(f"{self.kind} term takes {_ARITY[self.kind]} indices, got {idx}")
        if len(set(idx)) != len(idx):
            raise ValueError(f"{self.kind} term indices must be distinct, got {idx}")
        if min(idx) < 0:
            raise ValueError(f"negative orbital index in {idx}")
        if self.kind in ("excitation", "coulomb") and not idx[0] > idx[1]:
            raise ValueError(f"{self.kind} term needs p > q, got {idx}")
        if self.kind == "number_excitation" and not idx[0] > idx[2]:
            raise ValueError(f"number_excitation term needs p > r, got {idx}")
        if self.kind == "double" and not idx[0] > idx[1]:
            raise ValueError(f"double term needs p > q, got {idx}")

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(sorted(set(self.indices)))

    def monomials(self) -> list[tuple[complex, tuple[tuple[int, bool], ...]]]:
        """(coefficient, ladder ops) pairs; each op is (index, is_creation), leftmost first."""
        h = self.coefficient
        idx = self.indices
        if self.kind == "number":
            (p,) = idx
            return [(h, ((p, True), (p, False)))]
        if self.kind == "excitation":
            p, q = idx
            return [(h, ((p, True), (q, False))), (h, ((q, True), (p, False)))]
        if self.kind == "coulomb":
            p, q = idx
            return [(h, ((p, True), (q, True), (q, False), (p, False)))]
        if self.kind == "number_excitation":
            p, q, r = idx
            return [
                (h, ((p, True), (q, True), (q, False), (r, False))),
                (h, ((r, True), (q, True), (q, False), (p, False))),
            ]
        p, q, r, s = idx
        return [
            (h, ((p, True), (q, True), (r, False), (s, False))),
            (h, ((s, True), (r, True), (q, False), (p, False))),
        ]

    def label(self) -> str:
        return f"{self.kind}{self.indices}"


@dataclass(frozen=True)
class PauliString:
    coefficient: complex
    letters: str

    def __post_init__(self):
        if set(self.letters) - set("IXYZ"):
            raise ValueError(f"invalid Pauli letters {self.letters!r}")

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(i for i, c in enumerate(self.letters) if c != "I")

    def matrix(self) -> np.ndarray:
        return self.coefficient * pauli_matrix(self.letters)

    def __str__(self):
        c = self.coefficient
        c = c.real if abs(c.imag) < 1e-15 else c
        return f"{c:+.10g} {self.letters}"


# --- Pauli algebra -----------------------------------------------------------

_PRODUCT = {
    ("I", "I"): (1, "I"), ("I", "X"): (1, "X"), ("I", "Y"): (1, "Y"), ("I", "Z"): (1, "Z"),
    ("X", "I"): (1, "X"), ("X", "X"): (1, "I"), ("X", "Y"): (1j, "Z"), ("X", "Z"): (-1j, "Y"),
    ("Y", "I"): (1, "Y"), ("Y", "X"): (-1j, "Z"), ("Y", "Y"): (1, "I"), ("Y", "Z"): (1j, "X"),
    ("Z", "I"): (1, "Z"), ("Z", "X"): (1j, "Y"), ("Z", "Y"): (-1j, "X"), ("Z", "Z"): (1, "I"),
}  # fmt: skip


def _mul_strings(a: str, b: str) -> tuple[complex, str]:
    phase = 1 + 0j
    out = []
    for x, y in zip(a, b):
        f, z = _PRODUCT[x, y]
        phase *= f
        out.append(z)
    return phase, "".join(out)


def _mul_sums(a: dict, b: dict) -> dict:
    out: dict[str, complex] = {}
    for sa, ca in a.items():
        for sb, cb in b.items():
            f, s = _mul_strings(sa, sb)
            out[s] = out.get(s, 0) + f * ca * cb
    return out


@functools.lru_cache(maxsize=None)
def ladder(j: int, n_qubits: int, creation: bool, occupied: int = 1) -> tuple[tuple[str, complex], ...]:
    """Pauli expansion of a_j (or a+_j) under Jordan-Wigner."""
    if not 0 <= j < n_qubits:
        raise IndexError(f"orbital {j} out of range for {n_qubits} qubits")
    if occupied not in (0, 1):
        raise ValueError("occupied must be 0 or 1")
    # sigma+ = |0><1| = (X + iY)/2 lowers |1> -> |0>
    lowers_one = (occupied == 1) != creation
    sign = 1 if lowers_one else -1
    head = "I" * j
    tail = "Z" * (n_qubits - j - 1)
    return ((head + "X" + tail, 0.5 + 0j), (head + "Y" + tail, 0.5j * sign))


def _monomial_sum(ops, n_qubits, occupied) -> dict:
    acc = {"I" * n_qubits: 1 + 0j}
    for j, dag in ops:
        acc = _mul_sums(acc, dict(ladder(j, n_qubits, dag, occupied)))
    return acc


def jordan_wigner(term, n_qubits: int, occupied: int = 1) -> list[PauliString]:
    """Map a term (or a group of terms, summed) to Pauli strings.

    Strings are merged, near-zero coefficients (|c| < 1e-12) dropped, and the
    result sorted by letters. Hermitian input yields real coefficients.
    """
    terms = [term] if isinstance(term, FermionTerm) else list(term)
    total: dict[str, complex] = {}
    for t in terms:
        if max(t.indices) >= n_qubits:
            raise IndexError(f"term {t.label()} does not fit in {n_qubits} qubits")
        for coef, ops in t.monomials():
            for s, c in _monomial_sum(ops, n_qubits, occupied).items():
                total[s] = total.get(s, 0) + coef * c
    out = []
    for s in sorted(total):
        c = total[s]
        if abs(c) < ZERO_TOL:
            continue
        if abs(c.imag) < ZERO_TOL:
            c = complex(c.real, 0.0)
        out.append(PauliString(c, s))
    return out


_PMAT = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.diag([1.0, -1.0]).astype(complex),
}


def pauli_matrix(letters: str) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for c in letters:
        out = np.kron(out, _PMAT[c])
    return out


def pauli_sum_matrix(strings: Iterable[PauliString], n_qubits: int) -> np.ndarray:
    m = np.zeros((2**n_qubits, 2**n_qubits), dtype=complex)
    for p in strings:
        m += p.matrix()
    return m


def hamiltonian_matrix(terms: Sequence[FermionTerm], n_qubits: int = 4, occupied: int = 1) -> np.ndarray:
    return pauli_sum_matrix(jordan_wigner(list(terms), n_qubits, occupied), n_qubits)


def number_operator_matrix(n_qubits: int = 4, occupied: int = 1) -> np.ndarray:
    terms = [FermionTerm("number", (j,), 1.0) for j in range(n_qubits)]
    return hamiltonian_matrix(terms, n_qubits, occupied)


def sector_indices(n_electrons: int, n_qubits: int = 4, occupied: int = 1) -> np.ndarray:
    """Basis states holding ``n_electrons`` (qubit 0 = most significant bit)."""
    idx = []
    for i in range(2**n_qubits):
        ones = bin(i).count("1")
        count = ones if occupied == 1 else n_qubits - ones
        if count == n_electrons:
            idx.append(i)
    return np.array(idx)


# --- Hamiltonian -------------------------------------------------------------


def _sort_sign(seq, reverse):
    """Sort a 2-tuple, returning (sorted, sign of the permutation)."""
    a, b = seq
    if (a > b) == reverse or a == b:
        return (a, b), 1
    return (b, a), -1


def build_h2_hamiltonian(mo: MOIntegrals, *, tol: float = ZERO_TOL) -> list[FermionTerm]:
    """Hermitian term list equivalent to the full second-quantized Hamiltonian.

    Two-body monomials are put in a canonical order (creation indices
    descending, annihilation ascending), paired with their Hermitian
    conjugates and classified. Terms with |h| < ``tol`` are dropped, which
    removes everything forbidden by spin and g/u symmetry.
    """
    n = mo.n_spin_orbitals
    if n != 4:
        raise ValueError(f"minimal-basis H2 needs 4 spin orbitals, got {n}")
    h1, h2 = mo.h_pq, mo.h_pqrs
    if not np.allclose(h1, h1.T, atol=1e-12):
        raise ValueError("one-body integrals are not symmetric")
    terms: list[FermionTerm] = []
    for p in range(n):
        terms.append(FermionTerm("number", (p,), float(h1[p, p])))
    for p in range(n):
        for q in range(p):
            terms.append(FermionTerm("excitation", (p, q), float(h1[p, q])))

    canon: dict[tuple[int, int, int, int], float] = {}
    for p, q, r, s in np.ndindex(n, n, n, n):
        c = 0.5 * h2[p, q, r, s]
        if p == q or r == s or c == 0.0:
            continue
        (cp, cq), s1 = _sort_sign((p, q), reverse=True)
        (ar, as_), s2 = _sort_sign((r, s), reverse=False)
        key = (cp, cq, ar, as_)
        canon[key] = canon.get(key, 0.0) + s1 * s2 * c

    seen = set()
    for key in sorted(canon):
        if key in seen:
            continue
        cp, cq, ar, as_ = key
        conj = (as_, ar, cq, cp)
        seen.update({key, conj})
        c = canon[key]
        if conj != key:
            c_conj = canon.get(conj, 0.0)
            if abs(c - c_conj) > 1e-10:
                raise ValueError(f"two-body integrals are not Hermitian at {key}")
        cre, ann = {cp, cq}, {ar, as_}
        shared = cre & ann
        if len(shared) == 2:
            terms.append(FermionTerm("coulomb", (cp, cq), float(c)))
        elif len(shared) == 1:
            (m,) = shared
            (x,) = cre - shared
            (y,) = ann - shared
            # rewrite a+cp a+cq a_ar a_as as sign * a+x a+m a_m a_y
            sign = (1 if (cp, cq) == (x, m) else -1) * (1 if (ar, as_) == (m, y) else -1)
            if x > y:
                terms.append(FermionTerm("number_excitation", (x, m, y), float(sign * c)))
            else:
                terms.append(FermionTerm("number_excitation", (y, m, x), float(sign * c)))
        else:
            # orient so the largest index is created
            if max(key) in (cp, cq):
                terms.append(FermionTerm("double", (cp, cq, ar, as_), float(c)))
            else:
                terms.append(FermionTerm("double", conj, float(c)))
    return [t for t in terms if abs(t.coefficient) >= tol]


# --- circuits ----------------------------------------------------------------

_KIND_ORDER = {k: i for i, k in enumerate(KINDS)}
_DIAGONAL = ("number", "coulomb")


def group_terms(terms: Sequence[FermionTerm]) -> list[list[FermionTerm]]:
    """Group by (kind, orbital support) in deterministic order.

    Double excitations acting on the same four orbitals share one set of
    Pauli strings and are compiled together.
    """
    groups: dict[tuple, list[FermionTerm]] = {}
    for t in terms:
        groups.setdefault((_KIND_ORDER[t.kind], t.support), []).append(t)
    return [sorted(groups[k], key=lambda t: t.indices) for k in sorted(groups)]


def _pauli_gadget(p: PauliString, time: float, qmap) -> list[Gate]:
    """exp(-i c t P): basis change, CNOT ladder, Rz(2ct), undo."""
    sup = p.support
    pre, post = [], []
    for q in sup:
        c = p.letters[q]
        if c == "X":
            pre.append(Gate("H", (qmap(q),)))
            post.append(Gate("H", (qmap(q),)))
        elif c == "Y":
            pre.append(Gate("RX", (qmap(q),), math.pi / 2))
            post.append(Gate("RX", (qmap(q),), -math.pi / 2))
    ladder_gates = [Gate("CNOT", (qmap(a), qmap(b))) for a, b in zip(sup, sup[1:])]
    rot = Gate("RZ", (qmap(sup[-1]),), 2.0 * p.coefficient.real * time)
    return pre + ladder_gates + [rot] + ladder_gates[::-1] + post


def _diagonal_gates(strings: Sequence[PauliString], time: float, qmap) -> list[Gate]:
    """G, then T per single Z, then CNOT-Rz-CNOT per ZZ.

    Uses exp(-i c t Z) = exp(-i c t) T(-2 c t); the collected global phase
    goes into one G gate, omitted when it cancels exactly.
    """
    phase = 0.0
    singles, pairs = [], []
    for p in strings:
        c = p.coefficient.real
        sup = p.support
        if not sup:
            phase += c * time
        elif len(sup) == 1:
            phase += c * time
            singles.append(Gate("T", (qmap(sup[0]),), -2.0 * c * time))
        elif len(sup) == 2:
            pairs.extend(_pauli_gadget(p, time, qmap))
        else:
            raise ValueError(f"diagonal template cannot handle {p.letters}")
    gates = [Gate("G", (), phase)] if phase != 0.0 else []
    return gates + singles + pairs


def _basis_key(p: PauliString):
    # orders passes as in the templates: all-X (M = H) first, then with Y
    return (p.letters.count("Y"), p.letters)


def _controlled(gates: list[Gate], control: int) -> list[Gate]:
    """Promote every angle-dependent gate to its controlled form."""
    out = []
    for g in gates:
        if g.kind == "G":
            out.append(Gate("CG", (control,), g.angle))
        elif g.kind == "T":
            out.append(Gate("CT", (control,) + g.qubits, g.angle))
        elif g.kind == "RZ":
            out.append(Gate("CRZ", (control,) + g.qubits, g.angle))
        else:
            out.append(g)
    return out


def template_circuit(
    term,
    time: float,
    controlled: bool = False,
    *,
    n_qubits: int = 4,
    occupied: int = 1,
) -> Circuit:
    """Circuit for exp(-i time * term) built from the term-kind template.

    ``term`` may be a single :class:`FermionTerm` or a group of terms of one
    kind on one orbital support. With ``controlled`` the register moves to
    qubits 1..N and qubit 0 controls every angle-dependent gate.
    """
    terms = [term] if isinstance(term, FermionTerm) else list(term)
    if not terms:
        raise ValueError("empty term group")
    kinds = {t.kind for t in terms}
    if len(kinds) != 1:
        raise ValueError(f"a template group must share one kind, got {sorted(kinds)}")
    if not math.isfinite(time):
        raise ValueError("time must be finite")
    kind = kinds.pop()
    strings = jordan_wigner(terms, n_qubits, occupied)
    offset = 1 if controlled else 0
    qmap = (lambda q: q + 1) if controlled else (lambda q: q)
    if kind in _DIAGONAL:
        gates = _diagonal_gates(strings, time, qmap)
    else:
        gates = []
        for p in sorted(strings, key=_basis_key):
            if not p.support:
                raise ValueError(f"unexpected identity component in {kind} term")
            gates.extend(_pauli_gadget(p, time, qmap))
    if controlled:
        gates = _controlled(gates, 0)
    return Circuit(n_qubits + offset, gates)


@dataclass(frozen=True)
class TrotterPlan:
    total_time: float = 1.0
    trotter_number: int = 1
    controlled: bool = False
    occupied: int = 1

    def __post_init__(self):
        if int(self.trotter_number) != self.trotter_number or self.trotter_number < 1:
            raise ValueError(f"Trotter number must be a positive integer, got {self.trotter_number}")

    @property
    def dt(self) -> float:
        return self.total_time / self.trotter_number


def trotter_circuit(terms: Sequence[FermionTerm], plan: TrotterPlan, *, n_qubits: int = 4) -> Circuit:
    """First-order product formula: one template per term group, repeated T_n times."""
    step = Circuit(n_qubits + (1 if plan.controlled else 0))
    for group in group_terms(terms):
        step += template_circuit(group, plan.dt, plan.controlled, n_qubits=n_qubits, occupied=plan.occupied)
    return step.repeated(plan.trotter_number)


def term_order(terms: Sequence[FermionTerm]) -> list[str]:
    return ["+".join(t.label() for t in g) for g in group_terms(terms)]


@dataclass(frozen=True)
class ResourceReport:
    by_type: dict[str, int]
    one_qubit: int
    two_qubit: int
    global_phase: int
    n_qubits: int
    trotter_number: int | None = None
    term_order: tuple[str, ...] = field(default=(), compare=False)

    @property
    def total(self) -> int:
        """One- plus two-qubit gates; bare global phases act on no qubit."""
        return self.one_qubit + self.two_qubit

    @property
    def per_step(self) -> float | None:
        return None if not self.trotter_number else self.total / self.trotter_number

    def ipea_gates(self, bits: int, guard_bits: int = 1) -> int:
        """Gates for an IPEA run built by repeating this circuit.

        ``bits + guard_bits`` iterations apply U^(2^k) for k = 0 .. bits +
        guard_bits - 1, i.e. 2^(bits + guard_bits) - 1 copies in total.
        """
        m = bits + guard_bits
        return self.total * (2**m - 1)


def count_gates(circuit: Circuit, *, trotter_number: int | None = None, order: Sequence[str] = ()) -> ResourceReport:
    by_type = Counter(g.kind for g in circuit)
    one = sum(1 for g in circuit if g.n_qubits == 1)
    two = sum(1 for g in circuit if g.n_qubits == 2)
    zero = sum(1 for g in circuit if g.n_qubits == 0)
    return ResourceReport(dict(sorted(by_type.items())), one, two, zero, circuit.n_qubits, trotter_number, tuple(order))


def exact_propagator(terms: Sequence[FermionTerm], t: float, *, n_qubits: int = 4, occupied: int = 1) -> np.ndarray:
    if n_qubits > 10:
        raise ValueError(f"dense propagator limited to 10 qubits, got {n_qubits}")
    return expm(-1j * t * hamiltonian_matrix(terms, n_qubits, occupied))


def ground_energy(terms: Sequence[FermionTerm], n_electrons: int = 2, *, n_qubits: int = 4, occupied: int = 1):
    """Lowest eigenpair of the JW Hamiltonian in the ``n_electrons`` sector (full-space vector)."""
    H = hamiltonian_matrix(terms, n_qubits, occupied)
    idx = sector_indices(n_electrons, n_qubits, occupied)
    vals, vecs = np.linalg.eigh(H[np.ix_(idx, idx)])
    v = np.zeros(2**n_qubits, dtype=complex)
    v[idx] = vecs[:, 0]
    return float(vals[0]), v


def trotter_ground_energy(unitary: np.ndarray, ground_vector: np.ndarray, t: float, exact: float) -> float:
    """Energy of the propagator eigenvector closest to the exact ground state.

    The branch of -arg(lambda)/t is chosen nearest to ``exact``.
    """
    vals, vecs = np.linalg.eig(unitary)
    k = int(np.argmax(np.abs(vecs.conj().T @ ground_vector)))
    e = -np.angle(vals[k]) / t
    period = 2 * math.pi / t
    return float(e + period * round((exact - e) / period))


def trotter_scan(
    terms: Sequence[FermionTerm],
    max_trotter: int = 12,
    *,
    total_time: float = 1.0,
    threshold: float = 1e-4,
    n_qubits: int = 4,
    occupied: int = 1,
):
    """Ground-energy error and gate count for T_n = 1 .. max_trotter.

    Energies come from diagonalizing the compiled circuit's own matrix.
    Returns (rows, first T_n with |error| <= threshold or None).
    """
    exact, gvec = ground_energy(terms, n_qubits=n_qubits, occupied=occupied)
    rows = []
    first = None
    for tn in range(1, max_trotter + 1):
        plan = TrotterPlan(total_time, tn, occupied=occupied)
        circ = trotter_circuit(terms, plan, n_qubits=n_qubits)
        e = trotter_ground_energy(circ.unitary(), gvec, total_time, exact)
        rep = count_gates(circ, trotter_number=tn)
        err = e - exact
        rows.append(
            {
                "trotter_number": tn,
                "dt": plan.dt,
                "gates_total": rep.total,
                "gates_2q": rep.two_qubit,
                "energy_error_hartree": err,
            }
        )
        if first is None and abs(err) <= threshold:
            first = tn
    return rows, first
