"""Run configuration and the four scan/diagnostic drivers behind the CLI.

Every driver returns plain rows (dicts) or a JSON-ready dict; serialization
lives in :mod:`qpechem.cli`. Per-row random streams are derived from
``(seed, grid index, curve index)`` so any row can be regenerated alone.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any

import numpy as np

from .ci import build_blocks, diagonalize_2x2, dissociation_reference
from .integrals import compute_ao_integrals, run_rhf, transform_to_mo
from .ipea import (
    TWO_PI,
    IPEAConfig,
    accepted_phases,
    bits_to_string,
    energy_to_phase,
    exact_phase,
    ipea_run,
    ipea_success,
)
from .qsim import NoiseModel
from .secondquant import (
    TrotterPlan,
    build_h2_hamiltonian,
    count_gates,
    term_order,
    trotter_circuit,
    trotter_scan,
)

EQUILIBRIUM_BOHR = 1.3886
CURVES = ("G", "E1", "E2", "E3")
# curve -> (block, index of eigenpair in ascending order)
CURVE_SOURCE = {"G": ("16", 0), "E3": ("16", 1), "E1": ("34", 0), "E2": ("34", 1)}
SWEEP_AXES = ("n", "bits", "fidelity")
SUBCOMMANDS = ("scf", "curve", "ipea", "trotter", "sweep")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class Grid:
    start: float = 0.5
    stop: float = 5.0
    step: float = 0.05

    def points(self) -> list[float]:
        if not self.step > 0:
            raise ConfigError(f"grid step must be positive, got {self.step}")
        if self.stop < self.start or self.start <= 0:
            raise ConfigError(f"empty or unphysical grid {self.start}..{self.stop}")
        n = int(math.floor((self.stop - self.start) / self.step + 1e-9)) + 1
        return [round(self.start + i * self.step, 10) for i in range(n)]


@dataclass(frozen=True)
class RunConfig:
    """All knobs for every subcommand. Defaults reproduce the reference run.

    JSON keys mirror the field names; ``noise`` and ``grid`` are nested
    objects. Unknown keys are rejected.
    """

    grid: Grid = field(default_factory=Grid)
    r: float = EQUILIBRIUM_BOHR
    bits: int = 20
    samples: int = 31
    time_step: float = 1.0
    noise: NoiseModel = field(default_factory=NoiseModel)
    seed: int = 0
    block: str = "16"
    state: int = 0
    register_reuse: bool = False
    occupied: int = 1
    workers: int = 1
    # trotter scan
    max_trotter: int = 12
    trotter_threshold: float = 1e-4
    ipea_bits: int = 13
    guard_bits: int = 1
    # sweeps
    axis: str = "n"
    values: tuple = ()
    fidelity: float = 1.0
    mc_runs: int = 200

    def __post_init__(self):
        if self.r <= 0:
            raise ConfigError(f"bond length must be positive, got {self.r}")
        if self.block not in ("16", "2", "34", "5"):
            raise ConfigError(f"unknown block {self.block!r}")
        if self.state not in (0, 1):
            raise ConfigError("state must be 0 (lower) or 1 (upper)")
        if self.axis not in SWEEP_AXES:
            raise ConfigError(f"unknown sweep axis {self.axis!r}; expected one of {SWEEP_AXES}")
        if not 0.0 <= self.fidelity <= 1.0:
            raise ConfigError(f"fidelity must lie in [0, 1], got {self.fidelity}")
        if self.workers < 1 or self.mc_runs < 0 or self.max_trotter < 1:
            raise ConfigError("workers and max_trotter must be >= 1, mc_runs >= 0")
        if self.occupied not in (0, 1):
            raise ConfigError("occupied must be 0 or 1")
        object.__setattr__(self, "values", tuple(self.values))
        self.grid.points()
        try:
            self.ipea_config()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def ipea_config(self, **over) -> IPEAConfig:
        kw = dict(
            bits=self.bits,
            samples=self.samples,
            time_step=self.time_step,
            noise=self.noise,
            seed=self.seed,
            register_reuse=self.register_reuse,
        )
        kw.update(over)
        return IPEAConfig(**kw)

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["values"] = list(self.values)
        return d

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> RunConfig:
        data = dict(data)
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        try:
            if "grid" in data:
                data["grid"] = Grid(**data["grid"])
            if "noise" in data:
                data["noise"] = NoiseModel(**data["noise"])
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def load(cls, path: str | Path | None) -> RunConfig:
        if path is None:
            return cls()
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON in {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"config {path} must hold a JSON object")
        return cls.from_dict(data)


# --- single point ------------------------------------------------------------


def electronic_structure(r: float):
    ao = compute_ao_integrals(r)
    scf = run_rhf(ao)
    mo = transform_to_mo(ao, scf)
    return ao, scf, mo


def _eigenpair(blocks, block: str, state: int):
    m = blocks.block(block)
    if m.shape == (1, 1):
        if state != 0:
            raise ConfigError(f"block {block} has a single state")
        return float(m[0, 0]), np.array([1.0, 0.0])
    return diagonalize_2x2(m)[state].energy, diagonalize_2x2(m)[state].amplitudes


def run_scf(cfg: RunConfig) -> dict[str, Any]:
    ao, scf, _ = electronic_structure(cfg.r)
    c = scf.mo_coefficients
    symmetric = bool(
        np.isclose(c[0, 0], c[1, 0], atol=1e-8) and np.isclose(c[0, 1], -c[1, 1], atol=1e-8)
    )
    return {
        "r_bohr": cfg.r,
        "converged": scf.converged,
        "iterations": scf.iterations,
        "electronic_energy_hartree": scf.electronic_energy,
        "nuclear_repulsion_hartree": ao.nuclear_repulsion,
        "total_energy_hartree": scf.total_energy,
        "orbital_energies_hartree": scf.orbital_energies.tolist(),
        "mo_coefficients": c.tolist(),
        "orbitals_symmetry_adapted": symmetric,
        "energy_history_hartree": list(scf.energy_history),
    }


def run_ipea(cfg: RunConfig) -> dict[str, Any]:
    _, _, mo = electronic_structure(cfg.r)
    blocks = build_blocks(mo)
    exact, vec = _eigenpair(blocks, cfg.block, cfg.state)
    m = blocks.block(cfg.block)
    est = ipea_run(m, vec, cfg.ipea_config(), label=cfg.block)
    ref = dissociation_reference()
    nuc = mo.nuclear_repulsion
    phi = exact_phase(exact, cfg.time_step)
    return {
        "r": cfg.r,
        "block": cfg.block,
        "state": cfg.state,
        "K": cfg.bits,
        "n": cfg.samples,
        "t": cfg.time_step,
        "seed": cfg.seed,
        "noise": asdict(cfg.noise),
        "bits": est.binary,
        "phi": est.phi,
        "tallies": list(est.tallies),
        "majority_fractions": list(est.majority_fractions),
        "energy": est.energy,
        "energy_total": est.energy + nuc,
        "energy_relative": est.energy + nuc - ref,
        "oracle_energy": exact,
        "oracle_phi": phi,
        "accepted_bits": [bits_to_string(b) for b in accepted_phases(phi, cfg.bits)],
        "abs_error": abs(est.energy - exact),
        "target_precision": TWO_PI * 2.0**-cfg.bits / cfg.time_step,
    }


# --- curves ------------------------------------------------------------------

CURVE_HEADER = (
    "r_bohr",
    "curve",
    "block",
    "K",
    "n",
    "seed",
    "row_seed",
    "phase_binary",
    "phase_decimal",
    "energy_ipea_hartree",
    "energy_oracle_hartree",
    "abs_error_hartree",
    "within_target",
    "min_majority_fraction",
)


def _curve_point(args) -> list[dict[str, Any]]:
    cfg, i, r = args
    _, _, mo = electronic_structure(r)
    blocks = build_blocks(mo)
    offset = mo.nuclear_repulsion - dissociation_reference()
    target = TWO_PI * 2.0**-cfg.bits / cfg.time_step
    rows = []
    for j, curve in enumerate(CURVES):
        block, state = CURVE_SOURCE[curve]
        exact, vec = _eigenpair(blocks, block, state)
        row_seed = [cfg.seed, i, j]
        est = ipea_run(blocks.block(block), vec, cfg.ipea_config(), label=block, rng=np.random.default_rng(row_seed))
        err = abs(est.energy - exact)
        rows.append(
            {
                "r_bohr": r,
                "curve": curve,
                "block": block,
                "K": cfg.bits,
                "n": cfg.samples,
                "seed": cfg.seed,
                "row_seed": "-".join(map(str, row_seed)),
                "phase_binary": est.binary,
                "phase_decimal": est.phi,
                "energy_ipea_hartree": est.energy + offset,
                "energy_oracle_hartree": exact + offset,
                "abs_error_hartree": err,
                "within_target": err <= target,
                "min_majority_fraction": min(est.majority_fractions),
            }
        )
    return rows


def run_curve(cfg: RunConfig) -> list[dict[str, Any]]:
    """IPEA energies for curves G, E1, E2, E3 over the bond grid, ordered by (r, curve)."""
    jobs = [(cfg, i, r) for i, r in enumerate(cfg.grid.points())]
    if cfg.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            chunks = list(pool.map(_curve_point, jobs))
    else:
        chunks = [_curve_point(j) for j in jobs]
    return [row for chunk in chunks for row in chunk]


# --- trotter -----------------------------------------------------------------

TROTTER_HEADER = (
    "trotter_number",
    "dt",
    "gates_total",
    "gates_2q",
    "energy_error_hartree",
    "meets_threshold",
    "first_meeting_threshold",
    "ipea_gates_extrapolated",
)


def run_trotter(cfg: RunConfig) -> list[dict[str, Any]]:
    _, _, mo = electronic_structure(cfg.r)
    terms = build_h2_hamiltonian(mo)
    rows, first = trotter_scan(
        terms, cfg.max_trotter, total_time=cfg.time_step, threshold=cfg.trotter_threshold, occupied=cfg.occupied
    )
    for row in rows:
        row["meets_threshold"] = abs(row["energy_error_hartree"]) <= cfg.trotter_threshold
        row["first_meeting_threshold"] = row["trotter_number"] == first
        row["ipea_gates_extrapolated"] = row["gates_total"] * (2 ** (cfg.ipea_bits + cfg.guard_bits) - 1)
    return rows


def trotter_resources(cfg: RunConfig, trotter_number: int):
    _, _, mo = electronic_structure(cfg.r)
    terms = build_h2_hamiltonian(mo)
    circ = trotter_circuit(terms, TrotterPlan(cfg.time_step, trotter_number, occupied=cfg.occupied))
    return count_gates(circ, trotter_number=trotter_number, order=term_order(terms))


# --- sweeps ------------------------------------------------------------------

SWEEP_HEADER = (
    "axis",
    "value",
    "K",
    "n",
    "fidelity",
    "noise_enabled",
    "success_analytic",
    "ci68_low",
    "ci68_high",
    "success_mc",
    "mc_stderr",
    "mc_runs",
    "mc_agrees",
    "seed",
)

DEFAULT_SWEEP_VALUES = {
    "n": tuple(range(1, 32, 2)),
    "bits": (5, 10, 15, 20, 25, 30, 35, 40),
    "fidelity": tuple(round(0.1 * i, 1) for i in range(1, 10)),
}


def fidelity_register(blocks, fidelity: float) -> np.ndarray:
    """cos(theta)|lambda0> + sin(theta)|lambda1> of the (1,6) block with cos^2 = F."""
    lo, hi = diagonalize_2x2(blocks.H16)
    theta = math.acos(math.sqrt(fidelity))
    return math.cos(theta) * lo.amplitudes + math.sin(theta) * hi.amplitudes


def _sweep_point(cfg: RunConfig, blocks, axis: str, value, index: int) -> dict[str, Any]:
    bits, samples, fid = cfg.bits, cfg.samples, cfg.fidelity
    if axis == "n":
        samples = int(value)
    elif axis == "bits":
        bits = int(value)
    else:
        fid = float(value)
    icfg = cfg.ipea_config(bits=bits, samples=samples)
    target = diagonalize_2x2(blocks.H16)[0].energy
    register = fidelity_register(blocks, fid)
    rep = ipea_success(blocks.H16, register, target, icfg, seed=cfg.seed)
    accepted = set(accepted_phases(energy_to_phase(target, icfg.time_step), bits))
    hits = 0
    for run in range(cfg.mc_runs):
        est = ipea_run(blocks.H16, register, icfg, rng=np.random.default_rng([cfg.seed, index, run]))
        hits += est.bits in accepted
    mc = hits / cfg.mc_runs if cfg.mc_runs else float("nan")
    se = math.sqrt(max(rep.total * (1 - rep.total), 0.0) / cfg.mc_runs) if cfg.mc_runs else float("nan")
    lo, hi = rep.confidence_interval
    # the MC estimate carries its own binomial noise on top of the interval
    agrees = bool(cfg.mc_runs) and (lo - 3 * se - 1e-12 <= mc <= hi + 3 * se + 1e-12)
    return {
        "axis": axis,
        "value": value,
        "K": bits,
        "n": samples,
        "fidelity": fid,
        "noise_enabled": cfg.noise.active,
        "success_analytic": rep.total,
        "ci68_low": lo,
        "ci68_high": hi,
        "success_mc": mc,
        "mc_stderr": se,
        "mc_runs": cfg.mc_runs,
        "mc_agrees": agrees,
        "seed": cfg.seed,
    }


def run_sweep(cfg: RunConfig) -> list[dict[str, Any]]:
    """Success probability along one axis: sample count, bit count or register fidelity."""
    _, _, mo = electronic_structure(cfg.r)
    blocks = build_blocks(mo)
    values = cfg.values or DEFAULT_SWEEP_VALUES[cfg.axis]
    if cfg.axis == "n" and any(int(v) % 2 == 0 for v in values):
        raise ConfigError("sample counts on the n axis must be odd")
    return [_sweep_point(cfg, blocks, cfg.axis, v, i) for i, v in enumerate(values)]


def with_seed(cfg: RunConfig, seed: int | None) -> RunConfig:
    return cfg if seed is None else replace(cfg, seed=seed)
