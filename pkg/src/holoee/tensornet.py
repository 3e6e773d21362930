"""Perfect-tensor networks and their contraction into boundary states.

A network is a list of rank-6 nodes, a list of internal links joining two node
legs through a Bell pair, and an ordered list of dangling legs. Position ``i``
in ``dangling`` is boundary qubit ``i``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from . import qmath, stabilizer
from .circuits import Graph, graph_state, search_perfect_graph
from .errors import ContractionError, UnsupportedScaleError, ValidationError

LEGS = 6
SCHEMA_VERSION = 1
DENSE_QUBIT_CAP = 14


@dataclass(frozen=True, eq=False)
class Node:
    """A rank-6 tensor: either a graph-state spec or an explicit 6-qubit state."""

    graph: Optional[Graph] = None
    state: Optional[np.ndarray] = None

    def dense(self) -> np.ndarray:
        if self.graph is not None:
            return graph_state(self.graph)
        return qmath.as_state(self.state)

    def tableau(self) -> stabilizer.StabilizerTableau:
        if self.graph is None:
            raise ValueError("explicit-state nodes have no stabilizer description; use the dense backend")
        return stabilizer.from_graph(self.graph)


@dataclass(frozen=True, eq=False)
class TensorNetwork:
    nodes: tuple
    links: tuple = ()
    dangling: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "links", tuple((tuple(a), tuple(b)) for a, b in self.links))
        object.__setattr__(self, "dangling", tuple(tuple(d) for d in self.dangling))

    @property
    def n_boundary(self) -> int:
        return len(self.dangling)

    def to_dict(self) -> dict:
        nodes = []
        for i, node in enumerate(self.nodes):
            if node.graph is not None:
                nodes.append({"id": i, "graph": [list(e) for e in node.graph.edges]})
            else:
                amps = qmath.as_state(node.state)
                nodes.append({"id": i, "state": [[float(a.real), float(a.imag)] for a in amps]})
        return {
            "version": SCHEMA_VERSION,
            "nodes": nodes,
            "links": [[list(a), list(b)] for a, b in self.links],
            "dangling": [list(d) for d in self.dangling],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TensorNetwork":
        if not isinstance(d, dict):
            raise ValidationError("network description must be a JSON object")
        if d.get("version") != SCHEMA_VERSION:
            raise ValidationError(f"unsupported network schema version {d.get('version')!r}")
        nodes = []
        for i, nd in enumerate(d["nodes"]):
            if nd.get("id", i) != i:
                raise ValidationError(f"node ids must be 0..N-1 in order, got {nd.get('id')} at {i}")
            if "graph" in nd:
                nodes.append(Node(graph=Graph(LEGS, tuple(tuple(e) for e in nd["graph"]))))
            elif "state" in nd:
                nodes.append(Node(state=np.array([complex(re, im) for re, im in nd["state"]])))
            else:
                raise ValidationError(f"node {i} has neither 'graph' nor 'state'")
        return cls(tuple(nodes), tuple(d.get("links", ())), tuple(d.get("dangling", ())))


def load_network(path) -> TensorNetwork:
    return TensorNetwork.from_dict(json.loads(Path(path).read_text()))


def save_network(tn: TensorNetwork, path) -> None:
    Path(path).write_text(json.dumps(tn.to_dict(), indent=1) + "\n")


def validate(tn: TensorNetwork) -> list[str]:
    """All invariant violations of ``tn``; an empty list means the network is valid."""
    problems = []
    n = len(tn.nodes)
    for i, node in enumerate(tn.nodes):
        if (node.graph is None) == (node.state is None):
            problems.append(f"node {i}: exactly one of graph/state must be given")
        elif node.graph is not None and node.graph.n_vertices != LEGS:
            problems.append(f"node {i}: graph has {node.graph.n_vertices} vertices, expected {LEGS}")
        elif node.state is not None and np.asarray(node.state).shape != (1 << LEGS,):
            problems.append(f"node {i}: state must have {1 << LEGS} amplitudes")
    uses: dict = {}
    for k, (a, b) in enumerate(tn.links):
        if a == b:
            problems.append(f"link {k}: self-link on leg {a}")
        for end in (a, b):
            uses.setdefault(end, []).append(f"link {k}")
    for j, d in enumerate(tn.dangling):
        uses.setdefault(d, []).append(f"dangling {j}")
    for (node, leg), where in sorted(uses.items()):
        if not (0 <= node < n and 0 <= leg < LEGS):
            problems.append(f"leg ({node}, {leg}) does not exist")
        elif len(where) > 1:
            problems.append(f"leg ({node}, {leg}) multiply used: {', '.join(where)}")
    for node in range(n):
        for leg in range(LEGS):
            if (node, leg) not in uses:
                problems.append(f"leg ({node}, {leg}) is neither linked nor dangling")
    return problems


def require_valid(tn: TensorNetwork) -> None:
    problems = validate(tn)
    if problems:
        raise ValidationError("invalid tensor network: " + "; ".join(problems))


def check_region(tn: TensorNetwork, region: Iterable[int]) -> list[int]:
    region = [int(r) for r in region]
    if len(set(region)) != len(region):
        raise ValueError(f"duplicate boundary index in {region}")
    for r in region:
        if not 0 <= r < tn.n_boundary:
            raise ValueError(f"boundary index {r} out of range (B = {tn.n_boundary})")
    return region


def build_hexagonal_tn(layers: int, graph: Optional[Graph] = None) -> TensorNetwork:
    """Single hexagon (``layers=0``) or a centre node ringed by six (``layers=1``).

    For ``layers=1`` node 0 is the centre; its leg ``k`` links to leg 0 of outer
    node ``k + 1``. Boundary legs run clockwise: legs 1..5 of outer node 1,
    then of outer node 2, and so on.
    """
    if layers < 0:
        raise ValueError("layers must be >= 0")
    if layers > 1:
        raise UnsupportedScaleError(f"layers={layers} is beyond desk scale (max 1)")
    g = graph if graph is not None else search_perfect_graph(6)
    if layers == 0:
        return TensorNetwork((Node(graph=g),), (), tuple((0, leg) for leg in range(LEGS)))
    nodes = tuple(Node(graph=g) for _ in range(7))
    links = tuple(((0, k), (k + 1, 0)) for k in range(6))
    dangling = tuple((k + 1, leg) for k in range(6) for leg in range(1, LEGS))
    return TensorNetwork(nodes, links, dangling)


def chain_tn(n_nodes: int = 2, graph: Optional[Graph] = None) -> TensorNetwork:
    """Nodes in a line, leg 5 of node ``i`` linked to leg 0 of node ``i + 1``."""
    g = graph if graph is not None else search_perfect_graph(6)
    nodes = tuple(Node(graph=g) for _ in range(n_nodes))
    links = tuple(((i, 5), (i + 1, 0)) for i in range(n_nodes - 1))
    linked = {e for link in links for e in link}
    dangling = tuple((i, leg) for i in range(n_nodes) for leg in range(LEGS) if (i, leg) not in linked)
    return TensorNetwork(nodes, links, dangling)


@dataclass
class DenseContraction:
    """Normalized boundary state plus the norm removed during contraction."""

    state: np.ndarray
    norm: float

    @property
    def raw(self) -> np.ndarray:
        return self.state * self.norm


ZERO_NORM_TOL = 1e-12


def contract_dense(tn: TensorNetwork) -> DenseContraction:
    """Apply ``<Bell|`` on every link's leg pair and return the boundary state."""
    require_valid(tn)
    total = LEGS * len(tn.nodes)
    if total > DENSE_QUBIT_CAP:
        raise UnsupportedScaleError(f"dense contraction of {total} qubits exceeds cap {DENSE_QUBIT_CAP}")
    psi = np.ones(1, dtype=complex)
    for node in tn.nodes:
        psi = np.kron(psi, node.dense())
    labels = [(i, leg) for i in range(len(tn.nodes)) for leg in range(LEGS)]
    t = psi.reshape([2] * total)
    for a, b in tn.links:
        ia, ib = labels.index(a), labels.index(b)
        t = np.trace(t, axis1=ia, axis2=ib) / np.sqrt(2)
        labels = [lab for lab in labels if lab not in (a, b)]
    order = [labels.index(d) for d in tn.dangling]
    vec = np.transpose(t, order).reshape(-1) if order else t.reshape(-1)
    norm = float(np.linalg.norm(vec))
    if norm < ZERO_NORM_TOL:
        raise ContractionError("contraction annihilated the state (zero norm)", link=tn.links[-1] if tn.links else None)
    return DenseContraction(vec / norm, norm)


def contract_stabilizer(tn: TensorNetwork) -> stabilizer.StabilizerTableau:
    """Stabilizer contraction: Bell link pairs are swapped into place by post-selection."""
    require_valid(tn)
    tab = stabilizer.tensor(*(node.tableau() for node in tn.nodes))
    labels: list = [(i, leg) for i in range(len(tn.nodes)) for leg in range(LEGS)]
    for k, (a, b) in enumerate(tn.links):
        tab = stabilizer.tensor(tab, stabilizer.bell_pair())
        labels += [("link", k, 0), ("link", k, 1)]
        try:
            for end, half in ((a, ("link", k, 0)), (b, ("link", k, 1))):
                tab = stabilizer.postselect_bell(tab, labels.index(end), labels.index(half))
                labels = [lab for lab in labels if lab not in (end, half)]
        except ContractionError as exc:
            raise ContractionError(f"link {k} {a}-{b}: {exc}", link=(a, b)) from exc
    return stabilizer.permute(tab, [labels.index(d) for d in tn.dangling])


BACKENDS = ("dense", "stabilizer")


def boundary_entropies(tn: TensorNetwork, regions: Sequence[Iterable[int]], backend: str = "stabilizer") -> list[float]:
    """Entropies (bits) of many boundary regions from a single contraction."""
    regions = [check_region(tn, r) for r in regions]
    if backend == "dense":
        psi = contract_dense(tn).state
        return [qmath.von_neumann_entropy(qmath.partial_trace(psi, r)) if r else 0.0 for r in regions]
    if backend == "stabilizer":
        tab = contract_stabilizer(tn)
        return [float(stabilizer.entanglement_entropy(tab, r)) for r in regions]
    raise ValueError(f"unknown backend {backend!r}; choose from {BACKENDS}")


def boundary_entropy(tn: TensorNetwork, region: Iterable[int], backend: str = "stabilizer") -> float:
    return boundary_entropies(tn, [region], backend)[0]


def renyi2_via_replica(tn: TensorNetwork, region: Iterable[int]) -> float:
    """Renyi-2 entropy from two copies of the raw contracted state.

    ``tr rho_A^2`` is the swap of the region between the copies, and both traces
    are taken on the unnormalized state so the prefactors cancel in the ratio.
    """
    region = check_region(tn, region)
    raw = contract_dense(tn).raw
    b = tn.n_boundary
    rest = [q for q in range(b) if q not in region]
    m = raw.reshape([2] * b).transpose(region + rest).reshape(1 << len(region), 1 << len(rest))
    tr1 = np.vdot(m, m).real
    tr2 = np.einsum("ab,cb,cd,ad->", m, m.conj(), m, m.conj(), optimize=True).real
    return float(-np.log2(tr2 / tr1**2)) + 0.0


def contiguous_regions(n: int) -> list[list[int]]:
    """All cyclic windows: every start position, lengths 1..n (n*n regions)."""
    return [[(s + i) % n for i in range(length)] for length in range(1, n + 1) for s in range(n)]
