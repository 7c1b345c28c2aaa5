import numpy as np
import pytest

from nilsoliton import SkewTuple, build_algebra

J = np.array([[0.0, 1.0], [-1.0, 0.0]])

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def heisenberg():
    return build_algebra(SkewTuple.from_matrices([J]))


def random_orthogonal(rng, k):
    Q, R = np.linalg.qr(rng.standard_normal((k, k)))
    return Q * np.sign(np.diag(R))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
