import warnings

import numpy as np
import pytest

from sblkit import MatrixSpec, make_problem

# criterion number -> list of (ok, detail); filled by test_acceptance
ACCEPTANCE: dict[int, list[tuple[bool, str]]] = {}


def record(criterion: int, ok: bool, detail: str) -> None:
    ACCEPTANCE.setdefault(criterion, []).append((bool(ok), detail))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for crit in sorted(ACCEPTANCE):
        entries = ACCEPTANCE[crit]
        status = "PASS" if all(ok for ok, _ in entries) else "FAIL"
        detail = "; ".join(d for _, d in entries)
        terminalreporter.write_line(f"[{status}] criterion {crit}: {detail}")


@pytest.fixture(autouse=True)
def _quiet_runtime_warnings():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        yield


@pytest.fixture
def rng():
    return np.random.default_rng(20191014)


@pytest.fixture(scope="session")
def iid_problem():
    return make_problem(MatrixSpec("iid_gaussian", 400, 500), rho=0.1, snr_db=60.0, seed=7)


@pytest.fixture(scope="session")
def small_problem():
    return make_problem(MatrixSpec("iid_gaussian", 40, 50), rho=0.2, snr_db=40.0, seed=3)
