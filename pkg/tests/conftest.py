import numpy as np
import pytest

from ampsure.synthetic import image_set


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def images64():
    return image_set(4, 64, seed=5)


@pytest.fixture(scope="session")
def images32():
    return image_set(2, 32, seed=3)


_ACCEPTANCE = {}


@pytest.fixture
def acceptance():
    """``record(criterion, ok, detail)`` collects one outcome for the summary."""

    def record(criterion, ok, detail):
        _ACCEPTANCE.setdefault(criterion, []).append((bool(ok), detail))
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for crit in sorted(_ACCEPTANCE):
        parts = _ACCEPTANCE[crit]
        status = "PASS" if all(ok for ok, _ in parts) else "FAIL"
        terminalreporter.write_line(f"criterion {crit}: {status}  " + "; ".join(d for _, d in parts))
