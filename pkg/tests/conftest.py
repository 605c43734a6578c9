import numpy as np
import pytest

from drboot.regression import NoiseSpec, linear_beta, ols_fit, pinned_dataset


@pytest.fixture(scope="session")
def beta10():
    return linear_beta(10)


@pytest.fixture(scope="session")
def pinned_data(beta10):
    """n=100, p=10 Gaussian design, uniform[-1,1] noise, beta_hat[9] pinned to 0.006."""
    return pinned_dataset(100, 10, beta10, NoiseSpec(), 42, 9, 0.006)


@pytest.fixture(scope="session")
def pinned_fit(pinned_data):
    return ols_fit(pinned_data)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance_report(request):
    """Append one PASS/FAIL line per criterion; printed again in the run summary."""

    def report(criterion: str, passed: bool, detail: str) -> None:
        line = f"[{'PASS' if passed else 'FAIL'}] {criterion}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)

    return report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
