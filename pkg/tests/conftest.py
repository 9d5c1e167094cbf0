import numpy as np
import pytest

from qpechem.ci import build_blocks
from qpechem.integrals import compute_ao_integrals, run_rhf, transform_to_mo
from qpechem.secondquant import build_h2_hamiltonian

R_EQ = 1.3886


@pytest.fixture(scope="session")
def ao_eq():
    return compute_ao_integrals(R_EQ)


@pytest.fixture(scope="session")
def scf_eq(ao_eq):
    return run_rhf(ao_eq)


@pytest.fixture(scope="session")
def mo_eq(ao_eq, scf_eq):
    return transform_to_mo(ao_eq, scf_eq)


@pytest.fixture(scope="session")
def blocks_eq(mo_eq):
    return build_blocks(mo_eq)


@pytest.fixture(scope="session")
def terms_eq(mo_eq):
    return build_h2_hamiltonian(mo_eq)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


_CRITERIA: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def criterion():
    """Record one PASS/FAIL line per acceptance criterion."""

    def record(number: int, ok: bool, detail: str):
        _CRITERIA[number] = (bool(ok), detail)
        print(f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}")
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        ok, detail = _CRITERIA[n]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}")
