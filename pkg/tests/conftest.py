import numpy as np
import pytest

from holoee import circuits

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion covered by the test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or rep.when not in ("setup", "call"):
        return
    number, title = marker.args
    ok = _CRITERIA.get(number, (title, True))[1] and not rep.failed
    _CRITERIA[number] = (title, ok)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for number in sorted(_CRITERIA):
        title, ok = _CRITERIA[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {title}")


@pytest.fixture(scope="session")
def perfect_graph():
    return circuits.search_perfect_graph(6)


@pytest.fixture(scope="session")
def perfect_state(perfect_graph):
    return circuits.run(circuits.graph_state_circuit(perfect_graph))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_density(rng, n, rank=None):
    d = 1 << n
    rank = rank or d
    g = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho)


def random_state(rng, n):
    psi = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    return psi / np.linalg.norm(psi)


def random_clifford_circuit(rng, n, depth):
    gates = []
    for _ in range(depth):
        kind = rng.choice(["H", "S", "X", "Z", "CZ", "CZ"])
        if kind == "CZ" and n > 1:
            a, b = rng.choice(n, size=2, replace=False)
            gates.append(circuits.Gate("CZ", (int(a), int(b))))
        elif kind != "CZ":
            gates.append(circuits.Gate(str(kind), (int(rng.integers(n)),)))
    return circuits.Circuit(n, tuple(gates))


def ghz(n):
    psi = np.zeros(1 << n, dtype=complex)
    psi[0] = psi[-1] = 1 / np.sqrt(2)
    return psi


def assert_density_close(a, b, atol):
    assert np.max(np.abs(np.asarray(a) - np.asarray(b))) <= atol

