"""Phase-estimation simulation of minimal-basis H2: integrals, CI, IPEA and Trotter compilation."""

from .ci import build_blocks, curve_energies, diagonalize_2x2, dissociation_reference, full_ci_oracle
from .integrals import compute_ao_integrals, h2_mo_integrals, run_rhf, transform_to_mo
from .ipea import IPEAConfig, PhaseEstimate, ipea_run, ipea_success, success_probability
from .qsim import Circuit, Gate, NoiseModel, QuantumState
from .secondquant import FermionTerm, TrotterPlan, build_h2_hamiltonian, jordan_wigner, trotter_circuit

__version__ = "0.1.0"

__all__ = [
    "Circuit",
    "FermionTerm",
    "Gate",
    "IPEAConfig",
    "NoiseModel",
    "PhaseEstimate",
    "QuantumState",
    "TrotterPlan",
    "build_blocks",
    "build_h2_hamiltonian",
    "compute_ao_integrals",
    "curve_energies",
    "diagonalize_2x2",
    "dissociation_reference",
    "full_ci_oracle",
    "h2_mo_integrals",
    "ipea_run",
    "ipea_success",
    "jordan_wigner",
    "run_rhf",
    "success_probability",
    "transform_to_mo",
    "trotter_circuit",
]
