import itertools
import time

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from holoee import circuits, qmath, stabilizer as stab
from holoee.circuits import Gate, Graph
from holoee.errors import ContractionError, ValidationError
from holoee.stabilizer import StabilizerTableau

from conftest import random_clifford_circuit


def tableau_of(circuit):
    t = StabilizerTableau.zero_state(circuit.n_qubits)
    for g in circuit.gates:
        t = stab.apply_clifford(t, g)
    return t


def overlap(a, b):
    return abs(np.vdot(a, b))


def test_from_graph_examples(perfect_graph, perfect_state):
    assert stab.from_graph(Graph(1)).to_strings() == ["+X"]
    assert stab.from_graph(Graph(2, ((0, 1),))).to_strings() == ["+XZ", "+ZX"]
    psi = stab.to_statevector(stab.from_graph(perfect_graph))
    assert abs(overlap(psi, perfect_state) - 1) < 1e-9


@pytest.mark.parametrize("start,gate,expected", [
    (["+Z"], Gate("H", (0,)), ["+X"]),
    (["+XI"], Gate("CZ", (0, 1)), ["+XZ"]),
    (["+X"], Gate("S", (0,)), ["+Y"]),
    (["+Y"], Gate("S", (0,)), ["-X"]),
    (["+Y"], Gate("H", (0,)), ["-Y"]),
    (["+Z"], Gate("X", (0,)), ["-Z"]),
    (["+X"], Gate("Z", (0,)), ["-X"]),
    (["+XY"], Gate("CZ", (0, 1)), ["-YX"]),
])
def test_conjugation_rules(start, gate, expected):
    t = StabilizerTableau.from_strings(start)
    assert stab.apply_clifford(t, gate).to_strings() == expected


def test_non_clifford_rejected():
    with pytest.raises(ValueError):
        stab.apply_clifford(StabilizerTableau.zero_state(1), Gate("RX", (0,), 0.1))


def test_pauli_product_signs():
    x, y, z = (stab.parse_pauli(s) for s in "XYZ")
    assert stab.pauli_product(x, x) == (0, 0, 0)
    xz, zx = stab.parse_pauli("XZ"), stab.parse_pauli("ZX")
    assert stab.format_pauli(stab.pauli_product(xz, zx), 2) == "+YY"
    with pytest.raises(ValidationError):
        stab.pauli_product(x, z)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 6))
def test_tableau_matches_dense_circuit(seed, n):
    rng = np.random.default_rng(seed)
    c = random_clifford_circuit(rng, n, 4 * n)
    t = tableau_of(c)
    t.check()
    assert abs(overlap(stab.to_statevector(t), circuits.run(c)) - 1) < 1e-9


def test_entropy_examples(perfect_graph):
    assert stab.entanglement_entropy(stab.bell_pair(), [0]) == 1
    t = stab.from_graph(perfect_graph)
    assert all(stab.entanglement_entropy(t, a) == 3 for a in itertools.combinations(range(6), 3))


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_entropy_matches_dense_and_complement(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 9))
    c = random_clifford_circuit(rng, n, 5 * n)
    t = tableau_of(c)
    psi = circuits.run(c)
    for _ in range(5):
        region = [q for q in range(n) if rng.random() < 0.5]
        comp = [q for q in range(n) if q not in region]
        s = stab.entanglement_entropy(t, region)
        dense = qmath.von_neumann_entropy(qmath.partial_trace(psi, region)) if region else 0.0
        assert abs(s - dense) < 1e-9
        assert s == stab.entanglement_entropy(t, comp)


def test_entropy_invariant_under_relabeling(rng):
    c = random_clifford_circuit(rng, 7, 40)
    t = tableau_of(c)
    order = list(rng.permutation(7))
    tp = stab.permute(t, order)
    for _ in range(10):
        region = [q for q in range(7) if rng.random() < 0.5]
        # new qubit i is old qubit order[i]
        assert stab.entanglement_entropy(tp, region) == stab.entanglement_entropy(t, [order[i] for i in region])


def test_entanglement_swapping():
    t = stab.tensor(stab.bell_pair(), stab.bell_pair())
    out = stab.postselect_bell(t, 1, 2)
    assert out.n_qubits == 2
    assert sorted(stab.canonicalize(out).to_strings()) == ["+XX", "+ZZ"]


def test_bell_pair_on_itself():
    out = stab.postselect_bell(stab.bell_pair(), 0, 1)
    assert out.n_qubits == 0 and out.rows == ()


def test_postselect_zero_probability():
    # |01> is orthogonal to the Bell state: ZZ = -1 deterministically
    t = StabilizerTableau.from_strings(["+ZI", "-IZ"])
    with pytest.raises(ContractionError) as info:
        stab.postselect_bell(t, 0, 1)
    assert info.value.link == (0, 1)


def test_postselect_perfect_tensor_with_link(perfect_graph):
    t = stab.tensor(stab.from_graph(perfect_graph), stab.bell_pair())
    out = stab.postselect_bell(t, 5, 6)
    out.check()
    # five remaining legs plus the far end of the link
    assert out.n_qubits == 6
    assert all(stab.entanglement_entropy(out, [q]) == 1 for q in range(6))
    # dense cross-check: <Bell|_(5,6) applied to psi (x) Bell leaves psi on 0..4 plus qubit 7
    psi = np.kron(circuits.graph_state(perfect_graph), np.array([1, 0, 0, 1]) / np.sqrt(2))
    m = psi.reshape(32, 2, 2, 2)
    proj = (m[:, 0, 0, :] + m[:, 1, 1, :]).reshape(-1)
    proj /= np.linalg.norm(proj)
    assert abs(overlap(stab.to_statevector(out), proj) - 1) < 1e-9


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_postselect_matches_dense_projection(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(3, 8))
    c = random_clifford_circuit(rng, n, 5 * n)
    t = tableau_of(c)
    a, b = (int(v) for v in rng.choice(n, 2, replace=False))
    psi = circuits.run(c).reshape([2] * n)
    proj = (np.take(np.take(psi, 0, a), 0, b - (b > a)) + np.take(np.take(psi, 1, a), 1, b - (b > a))).reshape(-1)
    norm = np.linalg.norm(proj)
    if norm < 1e-9:
        with pytest.raises(ContractionError):
            stab.postselect_bell(t, a, b)
        return
    out = stab.postselect_bell(t, a, b)
    out.check()
    assert abs(overlap(stab.to_statevector(out), proj / norm) - 1) < 1e-9


@pytest.mark.parametrize("rows", [
    ["+XI", "+ZI"],  # anticommuting
    ["+ZI", "+ZI"],  # dependent
    ["+ZI", "-ZI"],  # generates -1
    ["+Z", "-X"],  # too many rows for one qubit
])
def test_check_detects_broken_tableaus(rows):
    with pytest.raises(ValidationError):
        StabilizerTableau.from_strings(rows).check()


def test_dump_is_canonical(perfect_graph):
    t = stab.from_graph(perfect_graph)
    shuffled = StabilizerTableau(6, tuple(reversed(t.rows)))
    assert t.dump() == shuffled.dump()
    assert all(line[0] in "+-" and len(line) == 7 for line in t.dump().splitlines())


def test_forty_qubit_entropy_is_fast(rng):
    c = random_clifford_circuit(rng, 40, 400)
    t = tableau_of(c)
    region = list(range(20))
    start = time.perf_counter()
    for _ in range(10):
        stab.entanglement_entropy(t, region)
    assert (time.perf_counter() - start) / 10 < 0.01
