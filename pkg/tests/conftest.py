import numpy as np
import pytest
from hypothesis import settings

from fourphoton.fock import four_photon_state

settings.register_profile("default", deadline=None, max_examples=100)
settings.load_profile("default")

ACCEPTANCE_RESULTS: dict[int, tuple[str, bool]] = {}


@pytest.fixture(scope="session")
def psi():
    return four_photon_state()


@pytest.fixture
def rng():
    return np.random.default_rng(20011016)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_RESULTS):
        text, ok = ACCEPTANCE_RESULTS[n]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {n}. {text}")
