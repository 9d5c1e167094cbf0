"""Iterative phase estimation on a one-qubit register.

Phase convention: the propagator U = exp(-i H t) acts on an eigenstate with
energy E as U|psi> = exp(2 pi i phi)|psi>, so phi = (-E t / 2 pi) mod 1 and
energies come back as E = -2 pi phi / t (unwrapped, see
:func:`phase_to_energy`). With this convention the feedback rotation
Rz(-2 pi b) on the control cancels the bits already measured.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from collections.abc import Mapping, Sequence

import numpy as np
from scipy.linalg import expm
from scipy.stats import binom

from .qsim import (
    Circuit,
    Gate,
    NoiseModel,
    QuantumState,
    apply_entangling_with_visibility,
    apply_gate,
    apply_phase_damping,
    probability_of_outcome,
    ry,
    rz,
)

__all__ = [
    "OneQubitUnitaryParams",
    "IPEAConfig",
    "PhaseEstimate",
    "SuccessReport",
    "decompose_1q_unitary",
    "power_params",
    "controlled_u_circuit",
    "block_propagator",
    "block_params",
    "exact_phase",
    "phase_bits",
    "bits_to_phase",
    "bits_to_string",
    "accepted_phases",
    "feedback_angle",
    "ipea_run",
    "ipea_register_reuse",
    "forced_feedforward_probabilities",
    "majority_success",
    "success_probability",
    "ipea_success",
    "phase_to_energy",
    "energy_to_phase",
    "ERROR_BOUND",
]

TWO_PI = 2.0 * math.pi
#: single-sample IPEA error bound, 1 - 8/pi^2
ERROR_BOUND = 1.0 - 8.0 / math.pi**2


def _wrap(angle: float) -> float:
    """Map to (-pi, pi]."""
    a = math.remainder(angle, TWO_PI)
    return math.pi if a == -math.pi else a


@dataclass(frozen=True)
class OneQubitUnitaryParams:
    """U = exp(i alpha) Ry(beta) Rz(gamma) Ry(-beta)."""

    alpha: float
    beta: float
    gamma: float

    def matrix(self) -> np.ndarray:
        return np.exp(1j * self.alpha) * ry(self.beta) @ rz(self.gamma) @ ry(-self.beta)


def decompose_1q_unitary(u, *, atol: float = 1e-10) -> OneQubitUnitaryParams:
    """Find (alpha, beta, gamma) with beta in [0, pi], gamma and alpha in (-pi, pi].

    Only unitaries whose eigenvectors are real up to phase fit this form
    (every propagator of a real symmetric 2x2 Hamiltonian does). Anything
    else, i.e. a nonzero Pauli-Y component after removing the global phase,
    raises ``ValueError`` rather than silently returning a wrong circuit.
    """
    u = np.asarray(u, dtype=complex)
    if u.shape != (2, 2):
        raise ValueError(f"expected a 2x2 matrix, got shape {u.shape}")
    if not np.allclose(u.conj().T @ u, np.eye(2), atol=atol):
        raise ValueError("matrix is not unitary")
    alpha = 0.5 * np.angle(np.linalg.det(u))
    v = np.exp(-1j * alpha) * u  # now in SU(2): c I - i s (n . sigma)
    c = 0.5 * (v[0, 0] + v[1, 1])
    sz = 0.5j * (v[0, 0] - v[1, 1])
    sx = 0.5j * (v[0, 1] + v[1, 0])
    sy = -0.5 * (v[0, 1] - v[1, 0])
    if abs(c.imag) > 1e-8 or abs(sz.imag) > 1e-8 or abs(sx.imag) > 1e-8 or abs(sy) > 1e-8:
        raise ValueError("unitary has a Y-axis rotation component; not of the form e^{ia} Ry Rz Ry^dag")
    c, sz, sx = c.real, sz.real, sx.real
    s = math.hypot(sx, sz)
    if s < 1e-14:
        beta, s = 0.0, 0.0
    else:
        beta = math.atan2(sx, sz)
        if beta < 0:
            beta += math.pi
            s = -s
        if beta > math.pi - 1e-15 and abs(sx) < 1e-15:
            # beta = pi is the same axis as beta = 0 with gamma negated
            beta, s = 0.0, -s
    gamma = 2.0 * math.atan2(s, c)
    if gamma > math.pi:
        gamma -= TWO_PI
        alpha += math.pi
    elif gamma <= -math.pi:
        gamma += TWO_PI
        alpha += math.pi
    return OneQubitUnitaryParams(_wrap(alpha), beta, gamma)


def power_params(p: OneQubitUnitaryParams, j: int) -> OneQubitUnitaryParams:
    """Parameters of U^j: alpha and gamma scale with j, beta is unchanged."""
    if j < 0:
        raise ValueError(f"power must be non-negative, got {j}")
    if j == 0:
        return OneQubitUnitaryParams(0.0, 0.0, 0.0)
    # reduce mod 4 pi (gamma) and 2 pi (alpha) in exact integer arithmetic where possible
    return OneQubitUnitaryParams(_scaled_angle(p.alpha, j, TWO_PI), p.beta, _scaled_angle(p.gamma, j, 2 * TWO_PI))


def _scaled_angle(angle: float, j: int, period: float) -> float:
    return math.fmod(angle * j, period) if j < 2**53 else math.fmod(angle * float(j), period)


def controlled_u_circuit(
    p: OneQubitUnitaryParams, *, control: int = 0, target: int = 1, n_qubits: int = 2
) -> Circuit:
    """Controlled-U network: Ry(-beta), controlled-Rz(gamma), Ry(beta), control phase.

    The global phase exp(i alpha) of U becomes a phase gate on the control.
    """
    circ = Circuit(n_qubits)
    circ.add("RY", target, angle=-p.beta)
    circ.add("CRZ", control, target, angle=p.gamma)
    circ.add("RY", target, angle=p.beta)
    circ.add("CG", control, angle=-p.alpha)
    return circ


def block_propagator(block, t: float = 1.0) -> np.ndarray:
    """exp(-i H t) for a 1x1 or 2x2 block, returned as a 2x2 matrix.

    A 1x1 block becomes the scalar phase times the identity on a dummy qubit.
    """
    h = np.atleast_2d(np.asarray(block, dtype=float))
    if h.shape == (1, 1):
        return np.exp(-1j * h[0, 0] * t) * np.eye(2)
    if h.shape != (2, 2):
        raise ValueError(f"block must be 1x1 or 2x2, got {h.shape}")
    return expm(-1j * t * h)


def block_params(block, t: float = 1.0) -> OneQubitUnitaryParams:
    """Decomposition of exp(-i H t) computed analytically from H.

    H = a 1 + h (cos(beta) Z + sin(beta) X) gives alpha = -a t, gamma = 2 h t
    before wrapping; the wrapping here matches :func:`decompose_1q_unitary`
    only up to equivalent angles, which is all the circuit needs.
    """
    h = np.atleast_2d(np.asarray(block, dtype=float))
    if h.shape == (1, 1):
        return OneQubitUnitaryParams(-h[0, 0] * t, 0.0, 0.0)
    a = 0.5 * (h[0, 0] + h[1, 1])
    hz = 0.5 * (h[0, 0] - h[1, 1])
    hx = 0.5 * (h[0, 1] + h[1, 0])
    r = math.hypot(hx, hz)
    beta = math.atan2(hx, hz) if r > 0 else 0.0
    if beta < 0:
        beta += math.pi
        r = -r
    return OneQubitUnitaryParams(-a * t, beta, 2.0 * r * t)


def exact_phase(energy: float, t: float = 1.0) -> float:
    return energy_to_phase(energy, t)


def energy_to_phase(energy: float, t: float = 1.0) -> float:
    """phi = (-E t / 2 pi) mod 1."""
    return (-energy * t / TWO_PI) % 1.0


DEFAULT_ENERGY_CEILING = 0.5 * math.pi


def phase_to_energy(
    phi: float,
    r: float | None = None,
    t: float = 1.0,
    reference: float | None = None,
    *,
    ceiling: float = DEFAULT_ENERGY_CEILING,
) -> float:
    """Energy from a measured phase.

    The electronic energy is -2 pi phi / t, moved into the window
    (ceiling - 2 pi / t, ceiling]. The default window covers every minimal-basis
    H2 level for r >= 0.5 bohr at t = 1. If ``r`` is given the nuclear
    repulsion 1/r is added; if ``reference`` is given it is subtracted.
    """
    if t <= 0:
        raise ValueError(f"time step must be positive, got {t}")
    period = TWO_PI / t
    e = -TWO_PI * (phi % 1.0) / t
    if e <= ceiling - period:
        e += period
    if r is not None:
        e += 1.0 / r
    if reference is not None:
        e -= reference
    return e


def phase_bits(phi: float, k: int) -> tuple[tuple[int, ...], float]:
    """First ``k`` binary digits of phi (most significant first) and the remainder delta."""
    scaled = (phi % 1.0) * 2**k
    whole = math.floor(scaled)
    delta = scaled - whole
    whole %= 2**k
    return tuple((whole >> (k - 1 - i)) & 1 for i in range(k)), delta


def bits_to_phase(bits: Sequence[int]) -> float:
    return sum(b * 2.0 ** -(i + 1) for i, b in enumerate(bits))


def bits_to_string(bits: Sequence[int]) -> str:
    return "0." + "".join(str(int(b)) for b in bits)


def _int_to_bits(value: int, k: int) -> tuple[int, ...]:
    value %= 2**k
    return tuple((value >> (k - 1 - i)) & 1 for i in range(k))


def accepted_phases(phi: float, k: int) -> list[tuple[int, ...]]:
    """Bit strings of phi~ and phi~ + 2^-k (wrapping past 1)."""
    lower, _ = phase_bits(phi, k)
    whole = int("".join(map(str, lower)), 2)
    return [lower, _int_to_bits(whole + 1, k)]


def feedback_angle(bits: Sequence[int | None], k: int) -> float:
    """omega_k = -2 pi b with b = 0.0 phi_{k+1} ... phi_K (bits indexed from 1)."""
    kk = len(bits)
    b = 0.0
    for m in range(k + 1, kk + 1):
        b += bits[m - 1] * 2.0 ** -(m - k + 1)
    return -TWO_PI * b


@dataclass(frozen=True)
class IPEAConfig:
    bits: int = 20
    samples: int = 31
    time_step: float = 1.0
    noise: NoiseModel = field(default_factory=NoiseModel)
    seed: int | None = 0
    register_reuse: bool = False

    def __post_init__(self):
        if self.bits < 1:
            raise ValueError(f"need at least one bit, got {self.bits}")
        if self.samples < 1 or self.samples % 2 == 0:
            raise ValueError(f"samples per bit must be odd and positive, got {self.samples}")
        if not self.time_step > 0:
            raise ValueError(f"time step must be positive, got {self.time_step}")


@dataclass(frozen=True)
class PhaseEstimate:
    bits: tuple[int, ...]
    tallies: tuple[int, ...]
    samples: int
    phi: float
    energy: float
    block: str | None = None
    seed: int | None = None

    @property
    def binary(self) -> str:
        return bits_to_string(self.bits)

    @property
    def majority_fractions(self) -> tuple[float, ...]:
        return tuple(max(c, self.samples - c) / self.samples for c in self.tallies)


def _register_state(eigenstate) -> QuantumState:
    if isinstance(eigenstate, QuantumState):
        st = eigenstate
    else:
        st = QuantumState(np.asarray(eigenstate, dtype=complex).reshape(-1))
    if st.n_qubits != 1:
        raise ValueError("register must be a single qubit")
    if abs(st.trace() - 1.0) > 1e-10:
        raise ValueError(f"register state is not normalized (norm^2 = {st.trace():.12f})")
    return st


def _controlled_power(state: QuantumState, params: OneQubitUnitaryParams, noise: NoiseModel) -> QuantumState:
    """Apply the controlled-U^j network to (control=0, register=1)."""
    noisy = noise.active
    for g in controlled_u_circuit(params):
        if noisy and g.kind == "CRZ":
            state = apply_entangling_with_visibility(state, g, noise.visibility)
        else:
            state = apply_gate(state, g)
        if noisy and noise.dephasing == "per_gate" and 0 in g.qubits:
            state = apply_phase_damping(state, 0, noise.gamma)
    if noisy and noise.dephasing == "per_controlled_u":
        state = apply_phase_damping(state, 0, noise.gamma)
    return state


_PLUS = np.array([1.0, 1.0]) / math.sqrt(2)


def _iteration_state(params, register: QuantumState, k: int, omega: float, noise: NoiseModel) -> QuantumState:
    """Pre-measurement state of iteration k with feedback angle omega."""
    state = QuantumState.product(QuantumState(_PLUS), register)
    state = _controlled_power(state, power_params(params, 2 ** (k - 1)), noise)
    state = apply_gate(state, Gate("RZ", (0,), omega))
    return apply_gate(state, Gate("H", (0,)))


def _as_params(block, t):
    if isinstance(block, OneQubitUnitaryParams):
        return block
    return block_params(block, t)


def ipea_run(block, eigenstate, cfg: IPEAConfig, *, label: str | None = None, rng=None) -> PhaseEstimate:
    """Run the K-bit IPEA, least significant bit first, majority-voting n samples per bit.

    ``block`` is a 1x1/2x2 Hamiltonian or precomputed unitary parameters.
    The register is re-prepared in ``eigenstate`` for every iteration unless
    ``cfg.register_reuse`` is set.
    """
    if cfg.register_reuse:
        return ipea_register_reuse(block, eigenstate, cfg, label=label, rng=rng)
    params = _as_params(block, cfg.time_step)
    register = _register_state(eigenstate)
    rng = np.random.default_rng(cfg.seed if rng is None else rng)
    K, n = cfg.bits, cfg.samples
    bits: list[int | None] = [None] * K
    tallies = [0] * K
    for k in range(K, 0, -1):
        omega = feedback_angle(bits, k) if k < K else 0.0
        state = _iteration_state(params, register, k, omega, cfg.noise)
        p1 = probability_of_outcome(state, 0, 1)
        ones = int(np.count_nonzero(rng.random(n) < p1))
        tallies[k - 1] = ones
        bits[k - 1] = int(2 * ones > n)
    return _estimate(bits, tallies, cfg, label)


def _estimate(bits, tallies, cfg, label):
    phi = bits_to_phase(bits)
    return PhaseEstimate(
        bits=tuple(bits),
        tallies=tuple(tallies),
        samples=cfg.samples,
        phi=phi,
        energy=phase_to_energy(phi, t=cfg.time_step),
        block=label,
        seed=cfg.seed,
    )


def ipea_register_reuse(block, register, cfg: IPEAConfig, *, label: str | None = None, rng=None) -> PhaseEstimate:
    """IPEA where the register output of each measurement feeds the next shot.

    Every control measurement collapses the register, so an imperfect
    eigenstate drifts toward one eigenstate as bits are read out.
    """
    if not cfg.register_reuse:
        raise ValueError("register reuse requested with a config that re-prepares the register")
    params = _as_params(block, cfg.time_step)
    reg = _register_state(register)
    rng = np.random.default_rng(cfg.seed if rng is None else rng)
    K, n = cfg.bits, cfg.samples
    bits: list[int | None] = [None] * K
    tallies = [0] * K
    if cfg.noise.active:
        reg = reg.to_mixed()
    state = QuantumState.product(np.array([1.0, 0.0]), reg)
    proj = (np.diag([1.0, 0.0]), np.diag([0.0, 1.0]))
    for k in range(K, 0, -1):
        omega = feedback_angle(bits, k) if k < K else 0.0
        pw = power_params(params, 2 ** (k - 1))
        draws = rng.random(n)
        ones = 0
        for u in draws:
            # control is |0> here: rotate it to |+>
            state = apply_gate(state, Gate("H", (0,)))
            state = _controlled_power(state, pw, cfg.noise)
            state = apply_gate(state, Gate("RZ", (0,), omega))
            state = apply_gate(state, Gate("H", (0,)))
            p1 = probability_of_outcome(state, 0, 1)
            b = int(u < p1)
            ones += b
            p = p1 if b else 1.0 - p1
            post = state.apply_matrix(proj[b], (0,))
            scale = p if post.mixed else math.sqrt(p)
            state = QuantumState(post.data / scale, 2, mixed=post.mixed)
            if b:
                state = apply_gate(state, Gate("X", (0,)))
        tallies[k - 1] = ones
        bits[k - 1] = int(2 * ones > n)
    return _estimate(bits, tallies, cfg, label)


def forced_feedforward_probabilities(block, register, target_bits: Sequence[int], cfg: IPEAConfig) -> list[float]:
    """Single-shot probability of reading each bit of ``target_bits``.

    The feedback for bit k is forced to the value implied by the target's
    less significant bits, so the product of majority-vote successes over
    all bits is the probability that the algorithm returns exactly
    ``target_bits``. Returned in bit order phi_1 .. phi_K.
    """
    params = _as_params(block, cfg.time_step)
    reg = _register_state(register)
    K = len(target_bits)
    out = [0.0] * K
    for k in range(K, 0, -1):
        omega = feedback_angle(target_bits, k) if k < K else 0.0
        state = _iteration_state(params, reg, k, omega, cfg.noise)
        out[k - 1] = probability_of_outcome(state, 0, int(target_bits[k - 1]))
    return out


def majority_success(p: float, n: int) -> float:
    """P[Binomial(n, p) > n/2] for odd n."""
    if n < 1 or n % 2 == 0:
        raise ValueError(f"majority vote needs an odd sample count, got {n}")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability out of range: {p}")
    return float(binom.sf(n // 2, n, p))


@dataclass(frozen=True)
class SuccessReport:
    samples: int
    per_bit_single_shot: dict[str, tuple[float, ...]]
    per_bit_majority: dict[str, tuple[float, ...]]
    per_phase: dict[str, float]
    total: float
    confidence_interval: tuple[float, float]

    @property
    def accepted(self) -> tuple[str, ...]:
        return tuple(self.per_phase)


def _total(per_bit: Mapping[str, Sequence[float]], n: int) -> tuple[dict, dict, float]:
    maj = {k: tuple(majority_success(p, n) for p in v) for k, v in per_bit.items()}
    per_phase = {k: float(np.prod(v)) for k, v in maj.items()}
    return maj, per_phase, min(1.0, sum(per_phase.values()))


def success_probability(
    per_bit_p,
    n: int,
    accepted: Sequence[str] | None = None,
    *,
    estimate_shots: int = 301,
    mc_runs: int = 2000,
    confidence: float = 0.68,
    seed: int | None = 0,
) -> SuccessReport:
    """Majority-vote success estimator.

    ``per_bit_p`` is either one sequence of single-shot probabilities (a
    single accepted phase) or a mapping from accepted-phase label to such a
    sequence. Each bit succeeds with P[Binomial(n, p) > n/2]; a phase is
    obtained with the product over its bits; the total sums the accepted
    phases. The confidence interval comes from Monte-Carlo resampling of
    the per-bit probabilities as if each were estimated from
    ``estimate_shots`` shots.
    """
    if isinstance(per_bit_p, Mapping):
        table = {str(k): tuple(float(p) for p in v) for k, v in per_bit_p.items()}
    else:
        labels = list(accepted) if accepted else ["phase"]
        if len(labels) != 1:
            raise ValueError("a single probability list needs exactly one accepted-phase label")
        table = {labels[0]: tuple(float(p) for p in per_bit_p)}
    if accepted is not None and isinstance(per_bit_p, Mapping):
        table = {k: table[k] for k in accepted}
    for v in table.values():
        for p in v:
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"probability out of range: {p}")
    maj, per_phase, total = _total(table, n)

    lo = hi = total
    if mc_runs > 0:
        rng = np.random.default_rng(seed)
        keys = list(table)
        probs = [np.array(table[k]) for k in keys]
        samples = np.empty(mc_runs)
        for i in range(mc_runs):
            acc = 0.0
            for p in probs:
                phat = rng.binomial(estimate_shots, p) / estimate_shots
                acc += float(np.prod(binom.sf(n // 2, n, phat)))
            samples[i] = min(1.0, acc)
        tail = 0.5 * (1.0 - confidence)
        lo, hi = (float(x) for x in np.quantile(samples, [tail, 1.0 - tail]))
        lo, hi = min(lo, total), max(hi, total)
    return SuccessReport(
        samples=n,
        per_bit_single_shot=table,
        per_bit_majority=maj,
        per_phase=per_phase,
        total=total,
        confidence_interval=(lo, hi),
    )


def ipea_success(block, register, target_energy: float, cfg: IPEAConfig, **kwargs) -> SuccessReport:
    """Success probability of obtaining ``target_energy`` to within 2^-K."""
    phi = energy_to_phase(target_energy, cfg.time_step)
    table = {}
    for bits in accepted_phases(phi, cfg.bits):
        table[bits_to_string(bits)] = forced_feedforward_probabilities(block, register, bits, cfg)
    return success_probability(table, cfg.samples, **kwargs)
