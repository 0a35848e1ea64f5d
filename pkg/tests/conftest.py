import numpy as np
import pytest

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]])
SZ = np.diag([1.0 + 0j, -1.0])


def random_operator(gen, n):
    return gen.standard_normal((n, n)) + 1j * gen.standard_normal((n, n))


def ket(d, i):
    v = np.zeros(d, dtype=complex)
    v[i] = 1.0
    return v


def unit(d, i, j):
    m = np.zeros((d, d), dtype=complex)
    m[i, j] = 1.0
    return m


def no_partial_traces(gen, d):
    """Random operator on C^d (x) C^d with Tr_1 O = Tr_2 O = 0."""
    x = random_operator(gen, d * d)
    t = x.reshape(d, d, d, d)
    tr2 = np.einsum("ijkj->ik", t)
    x = x - np.kron(tr2, np.eye(d)) / d
    tr1 = np.einsum("ijik->jk", x.reshape(d, d, d, d))
    return x - np.kron(np.eye(d), tr1) / d


@pytest.fixture
def gen():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES = []


def record(criterion, passed, detail):
    ACCEPTANCE_LINES.append(f"{'PASS' if passed else 'FAIL'}  [{criterion}] {detail}")
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
