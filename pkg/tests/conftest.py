import numpy as np
import pytest
from scipy.stats import unitary_group


def random_pure(d, rng):
    v = rng.normal(size=d * d) + 1j * rng.normal(size=d * d)
    return v / np.linalg.norm(v)


def random_density(d, rng, rank=None):
    rank = d * d if rank is None else rank
    g = rng.normal(size=(d * d, rank)) + 1j * rng.normal(size=(d * d, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_unitary(d, rng):
    return unitary_group.rvs(d, random_state=rng)


def random_local(d, rng):
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return v / np.linalg.norm(v)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES = []


def record_criterion(label, passed, detail=""):
    ACCEPTANCE_LINES.append(f"[{'PASS' if passed else 'FAIL'}] {label}{': ' + detail if detail else ''}")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
