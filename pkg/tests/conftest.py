import math

import pytest

from sparse_goldbach.residue_system import system_for_basis
from sparse_goldbach.restricted_primes import weighted_window


def naive_is_prime(n: int) -> bool:
    if n < 2:
        return False
    return all(n % d for d in range(2, math.isqrt(n) + 1))


def naive_lambda(n: int) -> float:
    """Trial-division von Mangoldt."""
    for p in range(2, n + 1):
        if n % p == 0:
            while n % p == 0:
                n //= p
            return math.log(p) if n == 1 else 0.0
    return 0.0


@pytest.fixture(scope="session")
def sys2():
    return system_for_basis([2])


@pytest.fixture(scope="session")
def sys6():
    return system_for_basis([2, 3])


@pytest.fixture(scope="session")
def sys30():
    return system_for_basis([2, 3, 5])


@pytest.fixture(scope="session")
def window10(sys2):
    return weighted_window(sys2, 10)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
