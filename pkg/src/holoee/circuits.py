"""Gate-level circuits, graph-state preparation and perfect-tensor certification."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Optional

import numpy as np

from . import qmath
from .errors import HoloError, ValidationError

SINGLE_QUBIT_KINDS = ("H", "S", "X", "Z", "RX", "RY", "RZ")
TWO_QUBIT_KINDS = ("CZ",)
ROTATION_KINDS = ("RX", "RY", "RZ")

_FIXED = {
    "H": np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2),
    "S": np.array([[1, 0], [0, 1j]], dtype=complex),
    "X": qmath.PAULI["X"],
    "Z": qmath.PAULI["Z"],
}


@dataclass(frozen=True)
class Gate:
    """One gate. Rotations follow ``R_A(theta) = exp(-i theta sigma_A / 2)``."""

    kind: str
    targets: tuple
    angle: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(int(t) for t in self.targets))
        if self.kind in TWO_QUBIT_KINDS:
            if len(self.targets) != 2 or self.targets[0] == self.targets[1]:
                raise ValidationError(f"{self.kind} needs two distinct targets, got {self.targets}")
        elif self.kind in SINGLE_QUBIT_KINDS:
            if len(self.targets) != 1:
                raise ValidationError(f"{self.kind} needs one target, got {self.targets}")
        else:
            raise ValidationError(f"unknown gate kind {self.kind!r}")
        if (self.kind in ROTATION_KINDS) != (self.angle is not None):
            raise ValidationError(f"angle given/missing for {self.kind}")

    def matrix(self) -> np.ndarray:
        """Unitary on the gate's own targets (2x2 or 4x4)."""
        if self.kind == "CZ":
            return np.diag([1, 1, 1, -1]).astype(complex)
        if self.kind in ROTATION_KINDS:
            sigma = qmath.PAULI[self.kind[1]]
            half = self.angle / 2
            return np.cos(half) * np.eye(2) - 1j * np.sin(half) * sigma
        return _FIXED[self.kind]

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "targets": list(self.targets)}
        if self.angle is not None:
            d["angle"] = self.angle
        return d

    @classmethod
    def from_dict(cls, d) -> "Gate":
        return cls(d["kind"], tuple(d["targets"]), d.get("angle"))


@dataclass(frozen=True)
class Circuit:
    n_qubits: int
    gates: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        for g in self.gates:
            if any(not 0 <= t < self.n_qubits for t in g.targets):
                raise ValidationError(f"gate {g} acts outside {self.n_qubits} qubits")

    def to_dict(self) -> dict:
        return {"n_qubits": self.n_qubits, "gates": [g.to_dict() for g in self.gates]}

    @classmethod
    def from_dict(cls, d) -> "Circuit":
        return cls(d["n_qubits"], tuple(Gate.from_dict(g) for g in d["gates"]))


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph; edges are stored sorted as ``(low, high)`` pairs."""

    n_vertices: int
    edges: tuple = field(default=())

    def __post_init__(self):
        norm = set()
        for a, b in self.edges:
            a, b = int(a), int(b)
            if a == b:
                raise ValidationError(f"self-loop on vertex {a}")
            if not (0 <= a < self.n_vertices and 0 <= b < self.n_vertices):
                raise ValidationError(f"edge ({a}, {b}) out of range")
            e = (min(a, b), max(a, b))
            if e in norm:
                raise ValidationError(f"duplicate edge {e}")
            norm.add(e)
        object.__setattr__(self, "edges", tuple(sorted(norm)))

    def adjacency(self) -> np.ndarray:
        a = np.zeros((self.n_vertices, self.n_vertices), dtype=np.uint8)
        for i, j in self.edges:
            a[i, j] = a[j, i] = 1
        return a

    def neighbors(self, v: int) -> list[int]:
        return sorted({b for a, b in self.edges if a == v} | {a for a, b in self.edges if b == v})

    @classmethod
    def circulant(cls, n: int, offsets: Iterable[int]) -> "Graph":
        edges = {(min(i, (i + o) % n), max(i, (i + o) % n)) for i in range(n) for o in offsets}
        return cls(n, tuple(edges))

    @classmethod
    def star(cls, n: int) -> "Graph":
        return cls(n, tuple((0, i) for i in range(1, n)))


def apply_gate(psi: np.ndarray, gate: Gate, n: int) -> np.ndarray:
    t = psi.reshape([2] * n)
    k = len(gate.targets)
    u = gate.matrix().reshape([2] * (2 * k))
    # contract gate input axes with the target axes, then restore axis order
    out = np.tensordot(u, t, axes=(list(range(k, 2 * k)), list(gate.targets)))
    rest = [q for q in range(n) if q not in gate.targets]
    order = list(gate.targets) + rest
    return np.moveaxis(out, list(range(n)), order).reshape(-1)


def run(circuit: Circuit, initial=None) -> np.ndarray:
    """Apply the circuit to ``initial`` (default ``|0...0>``)."""
    n = circuit.n_qubits
    if initial is None:
        psi = qmath.basis_state([0] * n)
    else:
        psi = qmath.as_state(initial)
        if psi.shape[0] != 1 << n:
            raise ValueError(f"state has {qmath.num_qubits(psi.shape[0])} qubits, circuit has {n}")
    for g in circuit.gates:
        psi = apply_gate(psi, g, n)
    return psi


def graph_state_circuit(g: Graph) -> Circuit:
    """Hadamard on every vertex, then one CZ per edge in lexicographic order."""
    gates = [Gate("H", (v,)) for v in range(g.n_vertices)]
    gates += [Gate("CZ", e) for e in g.edges]
    return Circuit(g.n_vertices, tuple(gates))


def graph_state(g: Graph) -> np.ndarray:
    """Graph state from the closed form ``(-1)**(x.A.x / 2) / sqrt(2**n)``."""
    n = g.n_vertices
    idx = np.arange(1 << n)
    bits = (idx[:, None] >> (n - 1 - np.arange(n))) & 1
    parity = np.zeros(1 << n, dtype=np.int64)
    for a, b in g.edges:
        parity ^= bits[:, a] & bits[:, b]
    return (1 - 2 * parity).astype(complex) / np.sqrt(1 << n)


@dataclass
class PerfectTensorReport:
    is_perfect: bool
    worst_deviation: float
    failing_subset: Optional[tuple] = None

    def to_dict(self) -> dict:
        return {
            "is_perfect": self.is_perfect,
            "worst_deviation": self.worst_deviation,
            "failing_subset": list(self.failing_subset) if self.failing_subset else None,
        }


PERFECT_TOL = 1e-9


def is_perfect_tensor(state, tol: float = PERFECT_TOL) -> PerfectTensorReport:
    """Check that all 20 three-qubit reductions of a 6-qubit state equal I/8."""
    psi = qmath.as_state(state)
    if psi.shape[0] != 64:
        raise ValueError("perfect-tensor check is defined for 6 qubits only")
    target = np.eye(8) / 8
    worst, worst_subset = 0.0, None
    for subset in itertools.combinations(range(6), 3):
        dev = float(np.max(np.abs(qmath.partial_trace(psi, subset) - target)))
        if dev > worst:
            worst, worst_subset = dev, subset
    ok = worst <= tol
    return PerfectTensorReport(ok, worst, None if ok else worst_subset)


def sufficiency_of_triples(state, tol: float = PERFECT_TOL) -> dict:
    """Per-k verdict: are all k-qubit reductions maximally mixed, for k = 1, 2, 3?"""
    psi = qmath.as_state(state)
    if psi.shape[0] != 64:
        raise ValueError("defined for 6 qubits only")
    out = {}
    for k in (1, 2, 3):
        target = np.eye(1 << k) / (1 << k)
        out[k] = all(
            np.max(np.abs(qmath.partial_trace(psi, s) - target)) <= tol
            for s in itertools.combinations(range(6), k)
        )
    return out


def _gf2_rank(rows: list[int]) -> int:
    basis: list[int] = []
    for v in rows:
        for b in basis:
            v = min(v, v ^ b)
        if v:
            basis.append(v)
    return len(basis)


def _graph_passes_rank_test(adj: np.ndarray) -> bool:
    # entropy of a graph-state region S is rank_GF2 of the S x complement block
    n = adj.shape[0]
    for s in itertools.combinations(range(n), n // 2):
        rest = [q for q in range(n) if q not in s]
        rows = [int("".join(str(x) for x in adj[i, rest]), 2) for i in s]
        if _gf2_rank(rows) != n // 2:
            return False
    return True


def circulant_offset_sets(n: int) -> list[tuple]:
    """Offset sets in search order: by size, then lexicographically."""
    offs = range(1, n // 2 + 1)
    return [c for r in range(1, len(offs) + 1) for c in itertools.combinations(offs, r)]


@lru_cache(maxsize=None)
def search_perfect_graph(n: int = 6) -> Graph:
    """Deterministically find a graph whose graph state is a perfect tensor.

    Circulant graphs are tried first (offset sets by size, then lexicographic);
    if none qualifies, every graph on ``n`` vertices is scanned and the
    lexicographically smallest sorted edge list wins.
    """
    if n != 6:
        raise ValueError("only n = 6 is supported")
    for offsets in circulant_offset_sets(n):
        g = Graph.circulant(n, offsets)
        if is_perfect_tensor(run(graph_state_circuit(g))).is_perfect:
            return g
    all_edges = list(itertools.combinations(range(n), 2))
    best = None
    for mask in range(1 << len(all_edges)):
        g = Graph(n, tuple(e for i, e in enumerate(all_edges) if mask >> i & 1))
        if best is not None and g.edges >= best.edges:
            continue
        if _graph_passes_rank_test(g.adjacency()) and is_perfect_tensor(graph_state(g)).is_perfect:
            best = g
    if best is None:
        raise HoloError("no perfect graph state found on 6 vertices")
    return best


GRAPH_FIXTURES = {
    "ghz-like-fixture": Graph.star(6),
    "circulant-1-2": Graph.circulant(6, (1, 2)),
}


def resolve_graph(name: Optional[str]) -> Graph:
    if name in (None, "searched"):
        return search_perfect_graph(6)
    try:
        return GRAPH_FIXTURES[name]
    except KeyError:
        raise ValueError(f"unknown graph {name!r}; choose from searched, {', '.join(GRAPH_FIXTURES)}") from None


def perfect_tensor_state() -> np.ndarray:
    return run(graph_state_circuit(search_perfect_graph(6)))
