import sys
from fractions import Fraction

import pytest

from atwood.kowalevski import leading_balance, expand


@pytest.fixture(scope="session")
def integrable_balance():
    return next(b for b in leading_balance(3) if b.family == "integrable")


@pytest.fixture(scope="session")
def kr34_balance():
    return next(b for b in leading_balance(14) if b.family == "q2")


@pytest.fixture(scope="session")
def integrable_solution(integrable_balance):
    """Symbolic integrable expansion, shared across tests."""
    params = integrable_balance.machine_params()
    return expand(integrable_balance, params, 24), params


@pytest.fixture(scope="session")
def kr34_solution(kr34_balance):
    """Symbolic (3,4) expansion, shared across tests."""
    params = kr34_balance.machine_params()
    return expand(kr34_balance, params, 24), params


def pytest_runtest_logreport(report):
    # one visible pass/fail line per acceptance criterion
    if report.when == "call" and "test_acceptance" in report.nodeid:
        name = report.nodeid.split("::")[-1]
        outcome = "PASS" if report.passed else "FAIL"
        print(f"\nACCEPTANCE {name}: {outcome}", file=sys.stderr)
