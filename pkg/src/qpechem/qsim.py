"""Small dense quantum simulator: pure and density-matrix states.

Qubit 0 is the most significant bit of a basis-state index, i.e. the basis
state |q0 q1 ... q_{n-1}> has index sum_k q_k 2^(n-1-k). Every module in the
package relies on this ordering.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Gate",
    "Circuit",
    "QuantumState",
    "NoiseModel",
    "gate_matrix",
    "apply_gate",
    "apply_circuit",
    "apply_phase_damping",
    "apply_entangling_with_visibility",
    "measure_qubit",
    "probability_of_outcome",
    "controlled",
]

_I2 = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)

ONE_QUBIT = {"H", "X", "RX", "RY", "RZ", "T", "U", "CG"}
TWO_QUBIT = {"CNOT", "CRZ", "CT", "CU"}
ANGLED = {"RX", "RY", "RZ", "T", "G", "CG", "CRZ", "CT"}
KINDS = ONE_QUBIT | TWO_QUBIT | {"G"}


def rx(theta):
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -1j * s], [-1j * s, c]])


def ry(theta):
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def rz(theta):
    return np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])


def tgate(theta):
    """T(theta)|0> = |0>, T(theta)|1> = exp(-i theta)|1>."""
    return np.diag([1.0, np.exp(-1j * theta)])


def controlled(u: np.ndarray) -> np.ndarray:
    """|0><0| (x) 1 + |1><1| (x) u, control as the most significant qubit."""
    u = np.asarray(u, dtype=complex)
    d = u.shape[0]
    out = np.eye(2 * d, dtype=complex)
    out[d:, d:] = u
    return out


@dataclass(frozen=True)
class Gate:
    """One primitive operation.

    ``qubits`` lists the acted-on qubits; for controlled kinds the control
    comes first. ``G`` is the global phase exp(-i angle) and acts on no
    qubits. ``CG`` is its controlled form, which reduces to a phase on the
    control qubit alone, so it carries just ``(control,)``.
    """

    kind: str
    qubits: tuple[int, ...]
    angle: float | None = None
    unitary: np.ndarray | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        if self.kind not in KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        expected = 0 if self.kind == "G" else 2 if self.kind in TWO_QUBIT else 1
        if len(self.qubits) != expected:
            raise ValueError(f"{self.kind} acts on {expected} qubit(s), got {self.qubits}")
        if len(set(self.qubits)) != len(self.qubits):
            raise ValueError(f"repeated qubit in {self.qubits}")
        if self.kind in ANGLED and self.angle is None:
            raise ValueError(f"{self.kind} needs an angle")
        if self.kind in ("U", "CU"):
            if self.unitary is None:
                raise ValueError(f"{self.kind} needs a 2x2 unitary")
            u = np.asarray(self.unitary, dtype=complex)
            if u.shape != (2, 2) or not np.allclose(u.conj().T @ u, _I2, atol=1e-10):
                raise ValueError("generic gate matrix must be a 2x2 unitary")
            object.__setattr__(self, "unitary", u)

    @property
    def n_qubits(self) -> int:
        return len(self.qubits)

    @property
    def is_controlled(self) -> bool:
        return self.kind in {"CNOT", "CRZ", "CT", "CU", "CG"}

    def matrix(self) -> np.ndarray:
        return gate_matrix(self)

    def __str__(self):
        ang = "" if self.angle is None else f"({self.angle:.6g})"
        return f"{self.kind}{ang}{list(self.qubits)}"


def gate_matrix(gate: Gate) -> np.ndarray:
    """Matrix on the gate's own qubits (in the order listed)."""
    k, a = gate.kind, gate.angle
    if k == "G":
        return np.array([[np.exp(-1j * a)]])
    if k == "H":
        return _H
    if k == "X":
        return _X
    if k == "RX":
        return rx(a)
    if k == "RY":
        return ry(a)
    if k == "RZ":
        return rz(a)
    if k in ("T", "CG"):
        return tgate(a)
    if k == "U":
        return gate.unitary
    if k == "CNOT":
        return controlled(_X)
    if k == "CRZ":
        return controlled(rz(a))
    if k == "CT":
        return controlled(tgate(a))
    if k == "CU":
        return controlled(gate.unitary)
    raise AssertionError(k)


class Circuit:
    """Ordered gate list on a fixed register of ``n_qubits``."""

    def __init__(self, n_qubits: int, gates=()):
        if n_qubits < 1:
            raise ValueError("circuit needs at least one qubit")
        self.n_qubits = int(n_qubits)
        self.gates: list[Gate] = []
        self.extend(gates)

    def append(self, gate: Gate) -> Circuit:
        for q in gate.qubits:
            if not 0 <= q < self.n_qubits:
                raise IndexError(f"qubit {q} out of range for {self.n_qubits}-qubit circuit")
        self.gates.append(gate)
        return self

    def add(self, kind: str, *qubits: int, angle: float | None = None, unitary=None) -> Circuit:
        return self.append(Gate(kind, qubits, angle, unitary))

    def extend(self, gates) -> Circuit:
        for g in gates:
            self.append(g)
        return self

    def __iadd__(self, other):
        return self.extend(other.gates if isinstance(other, Circuit) else other)

    def __len__(self):
        return len(self.gates)

    def __iter__(self):
        return iter(self.gates)

    def __repr__(self):
        return f"Circuit(n_qubits={self.n_qubits}, gates={len(self.gates)})"

    def repeated(self, times: int) -> Circuit:
        return Circuit(self.n_qubits, self.gates * int(times))

    def unitary(self) -> np.ndarray:
        """Dense matrix of the whole circuit (columns are basis inputs)."""
        dim = 2**self.n_qubits
        # Evolve the identity as a batch of column vectors.
        psi = np.eye(dim, dtype=complex).reshape([2] * self.n_qubits + [dim])
        for g in self.gates:
            psi = _apply_tensor(psi, gate_matrix(g), g.qubits, self.n_qubits)
        return psi.reshape(dim, dim)


def _apply_tensor(psi, matrix, qubits, n):
    """Apply ``matrix`` to the leading ``n`` axes of tensor ``psi``."""
    if not qubits:
        return psi * matrix[0, 0]
    k = len(qubits)
    m = matrix.reshape([2] * (2 * k))
    out = np.tensordot(m, psi, axes=(list(range(k, 2 * k)), list(qubits)))
    # tensordot puts the k new axes first; move them back into place.
    return np.moveaxis(out, list(range(k)), list(qubits))


class QuantumState:
    """Pure statevector or density matrix on ``n_qubits``.

    Once a state is mixed it stays mixed; operations return new objects and
    never mutate their input.
    """

    def __init__(self, data, n_qubits: int | None = None, *, mixed: bool | None = None):
        data = np.asarray(data, dtype=complex)
        if mixed is None:
            mixed = data.ndim == 2
        dim = data.shape[0]
        n = int(round(math.log2(dim))) if n_qubits is None else int(n_qubits)
        if 2**n != dim:
            raise ValueError(f"dimension {dim} is not 2**{n}")
        if mixed and data.shape != (dim, dim):
            raise ValueError("density matrix must be square")
        if not mixed and data.ndim != 1:
            raise ValueError("statevector must be one-dimensional")
        self.data = data
        self.n_qubits = n
        self.mixed = bool(mixed)

    @classmethod
    def zero(cls, n_qubits: int, *, mixed: bool = False) -> QuantumState:
        psi = np.zeros(2**n_qubits, dtype=complex)
        psi[0] = 1.0
        st = cls(psi, n_qubits)
        return st.to_mixed() if mixed else st

    @classmethod
    def product(cls, *factors) -> QuantumState:
        """Tensor product of statevectors/density matrices, first factor = qubit 0."""
        states = [f if isinstance(f, QuantumState) else QuantumState(f) for f in factors]
        if any(s.mixed for s in states):
            mats = [s.density_matrix() for s in states]
            out = mats[0]
            for m in mats[1:]:
                out = np.kron(out, m)
            return cls(out, mixed=True)
        out = states[0].data
        for s in states[1:]:
            out = np.kron(out, s.data)
        return cls(out)

    @property
    def mode(self) -> str:
        return "mixed" if self.mixed else "pure"

    @property
    def dim(self) -> int:
        return 2**self.n_qubits

    def copy(self) -> QuantumState:
        return QuantumState(self.data.copy(), self.n_qubits, mixed=self.mixed)

    def density_matrix(self) -> np.ndarray:
        if self.mixed:
            return self.data
        return np.outer(self.data, self.data.conj())

    def to_mixed(self) -> QuantumState:
        if self.mixed:
            return self
        return QuantumState(self.density_matrix(), self.n_qubits, mixed=True)

    def trace(self) -> float:
        if self.mixed:
            return float(np.real(np.trace(self.data)))
        return float(np.vdot(self.data, self.data).real)

    def probabilities(self) -> np.ndarray:
        if self.mixed:
            return np.real(np.diag(self.data)).clip(min=0.0)
        return np.abs(self.data) ** 2

    def is_valid(self, atol: float = 1e-10) -> bool:
        if not self.mixed:
            return abs(self.trace() - 1.0) <= atol
        rho = self.data
        if abs(self.trace() - 1.0) > atol or not np.allclose(rho, rho.conj().T, atol=atol):
            return False
        return float(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min()) >= -atol

    def apply_matrix(self, matrix, qubits) -> QuantumState:
        qubits = tuple(qubits)
        for q in qubits:
            if not 0 <= q < self.n_qubits:
                raise IndexError(f"qubit {q} out of range for {self.n_qubits}-qubit state")
        matrix = np.asarray(matrix, dtype=complex)
        n = self.n_qubits
        if not self.mixed:
            psi = _apply_tensor(self.data.reshape([2] * n), matrix, qubits, n)
            return QuantumState(psi.reshape(-1), n)
        if not qubits:
            return self.copy()
        rho = self.data.reshape([2] * (2 * n))
        rho = _apply_tensor(rho, matrix, qubits, n)
        # columns: rho U^dagger, i.e. apply conj(U) on the column axes
        cols = tuple(q + n for q in qubits)
        rho = _apply_tensor_axes(rho, matrix.conj(), cols)
        return QuantumState(rho.reshape(2**n, 2**n), n, mixed=True)

    def __repr__(self):
        return f"QuantumState(n_qubits={self.n_qubits}, mode={self.mode!r})"


def _apply_tensor_axes(t, matrix, axes):
    k = len(axes)
    m = matrix.reshape([2] * (2 * k))
    out = np.tensordot(m, t, axes=(list(range(k, 2 * k)), list(axes)))
    return np.moveaxis(out, list(range(k)), list(axes))


@dataclass(frozen=True)
class NoiseModel:
    """Control-qubit phase damping plus imperfect two-photon visibility.

    ``dephasing`` selects where the damping channel is applied:
    ``"per_controlled_u"`` (once after each controlled-U block) or
    ``"per_gate"`` (after every gate touching the control).
    """

    gamma: float = 0.06
    visibility: float = 0.93
    enabled: bool = True
    dephasing: str = "per_controlled_u"

    def __post_init__(self):
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError(f"gamma must lie in [0, 1], got {self.gamma}")
        if not 0.0 <= self.visibility <= 1.0:
            raise ValueError(f"visibility must lie in [0, 1], got {self.visibility}")
        if self.dephasing not in ("per_controlled_u", "per_gate"):
            raise ValueError(f"unknown dephasing placement {self.dephasing!r}")

    @classmethod
    def off(cls) -> NoiseModel:
        return cls(gamma=0.0, visibility=1.0, enabled=False)

    @property
    def active(self) -> bool:
        return self.enabled and (self.gamma > 0.0 or self.visibility < 1.0)


def apply_gate(state: QuantumState, gate: Gate) -> QuantumState:
    return state.apply_matrix(gate_matrix(gate), gate.qubits)


def apply_circuit(state: QuantumState, circuit: Circuit) -> QuantumState:
    if circuit.n_qubits != state.n_qubits:
        raise ValueError(f"circuit has {circuit.n_qubits} qubits, state has {state.n_qubits}")
    for g in circuit:
        state = apply_gate(state, g)
    return state


def apply_phase_damping(state: QuantumState, qubit: int, gamma: float) -> QuantumState:
    """Kraus channel diag(1, sqrt(1-gamma)), diag(0, sqrt(gamma)) on ``qubit``."""
    if not 0.0 <= gamma <= 1.0:
        raise ValueError(f"gamma must lie in [0, 1], got {gamma}")
    rho = state.to_mixed()
    k0 = np.diag([1.0, math.sqrt(1.0 - gamma)])
    k1 = np.diag([0.0, math.sqrt(gamma)])
    a = rho.apply_matrix(k0, (qubit,)).data
    b = rho.apply_matrix(k1, (qubit,)).data
    return QuantumState(a + b, rho.n_qubits, mixed=True)


def _dephase_between(state: QuantumState, qubit: int) -> QuantumState:
    """Remove coherences between the |0> and |1> sectors of ``qubit``."""
    p0 = state.apply_matrix(np.diag([1.0, 0.0]), (qubit,)).data
    p1 = state.apply_matrix(np.diag([0.0, 1.0]), (qubit,)).data
    return QuantumState(p0 + p1, state.n_qubits, mixed=True)


def apply_entangling_with_visibility(state: QuantumState, gate: Gate, visibility: float) -> QuantumState:
    """rho -> V U rho U^dag + (1 - V) D(U rho U^dag).

    D strips the coherence between the control's |0> and |1> sectors, which
    is exactly what a controlled operation imprints its conditional phase on;
    with distinguishable photons that phase is not seen by the interference.
    """
    if not 0.0 <= visibility <= 1.0:
        raise ValueError(f"visibility must lie in [0, 1], got {visibility}")
    if gate.kind not in TWO_QUBIT:
        raise ValueError(f"visibility model applies to two-qubit gates, got {gate.kind}")
    out = apply_gate(state.to_mixed(), gate)
    if visibility == 1.0:
        return out
    killed = _dephase_between(out, gate.qubits[0])
    return QuantumState(visibility * out.data + (1.0 - visibility) * killed.data, out.n_qubits, mixed=True)


def probability_of_outcome(state: QuantumState, qubit: int, bit: int) -> float:
    """Exact Born probability that measuring ``qubit`` gives ``bit``."""
    if not 0 <= qubit < state.n_qubits:
        raise IndexError(f"qubit {qubit} out of range")
    if bit not in (0, 1):
        raise ValueError("bit must be 0 or 1")
    probs = state.probabilities().reshape([2] * state.n_qubits)
    return float(np.take(probs, bit, axis=qubit).sum())


def measure_qubit(state: QuantumState, qubit: int, rng=None) -> tuple[int, QuantumState]:
    """Projective Z measurement; returns the outcome and the renormalized state.

    ``rng`` may be a seed or a ``numpy.random.Generator``; one uniform draw is
    consumed per call.
    """
    rng = np.random.default_rng(rng)
    p1 = probability_of_outcome(state, qubit, 1)
    bit = int(rng.random() < p1)
    p = p1 if bit else 1.0 - p1
    proj = np.diag([1.0, 0.0]) if bit == 0 else np.diag([0.0, 1.0])
    post = state.apply_matrix(proj, (qubit,))
    if state.mixed:
        post = QuantumState(post.data / p, state.n_qubits, mixed=True)
    else:
        post = QuantumState(post.data / math.sqrt(p), state.n_qubits)
    return bit, post
