"""Minimal cuts of tensor networks: unit-capacity max-flow plus a brute-force oracle.

The flow graph has one vertex per node and two terminals. Every internal link
is an undirected capacity-1 edge; every dangling leg is a capacity-1 edge from
the source (leg in the region) or to the sink (leg outside it). A cut may
sever dangling legs as well as links.
"""
from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass

from .errors import UnsupportedScaleError
from .tensornet import TensorNetwork, check_region, require_valid

BRUTE_FORCE_EDGE_CAP = 24


@dataclass(frozen=True)
class CutEdge:
    """``kind`` is ``"link"`` (index into tn.links) or ``"leg"`` (boundary position)."""

    kind: str
    index: int
    u: int
    v: int

    @property
    def id(self) -> str:
        return f"{self.kind}:{self.index}"

    @property
    def sort_key(self):
        return (0 if self.kind == "link" else 1, self.index)


@dataclass(frozen=True)
class CutProblem:
    n_vertices: int
    source: int
    sink: int
    edges: tuple


def build_cut_problem(tn: TensorNetwork, region) -> CutProblem:
    require_valid(tn)
    region = set(check_region(tn, region))
    n = len(tn.nodes)
    source, sink = n, n + 1
    edges = [CutEdge("link", k, a[0], b[0]) for k, (a, b) in enumerate(tn.links)]
    for j, (node, _leg) in enumerate(tn.dangling):
        edges.append(CutEdge("leg", j, source, node) if j in region else CutEdge("leg", j, node, sink))
    return CutProblem(n + 2, source, sink, tuple(edges))


@dataclass(frozen=True)
class MinCutResult:
    value: int
    cut_edges: tuple  # CutEdge, sorted

    def to_dict(self) -> dict:
        return {"value": self.value, "cut_edges": [e.id for e in self.cut_edges]}


class _FlowGraph:
    def __init__(self, n):
        self.adj = [[] for _ in range(n)]
        self.to, self.cap = [], []

    def add(self, u, v, cap_uv, cap_vu):
        self.adj[u].append(len(self.to))
        self.to.append(v)
        self.cap.append(cap_uv)
        self.adj[v].append(len(self.to))
        self.to.append(u)
        self.cap.append(cap_vu)

    def bfs(self, s):
        prev = {s: None}
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for a in self.adj[u]:
                w = self.to[a]
                if self.cap[a] > 0 and w not in prev:
                    prev[w] = a
                    queue.append(w)
        return prev

    def max_flow(self, s, t) -> int:
        flow = 0
        while True:
            prev = self.bfs(s)
            if t not in prev:
                return flow
            # unit capacities: every augmenting path carries exactly one unit
            w = t
            while w != s:
                a = prev[w]
                self.cap[a] -= 1
                self.cap[a ^ 1] += 1
                w = self.to[a ^ 1]
            flow += 1


def min_cut(tn: TensorNetwork, region) -> MinCutResult:
    """Minimum number of links/legs separating ``region`` from the rest of the boundary.

    The reported cut is the one closest to the source: its source side is the
    set of vertices reachable in the final residual graph.
    """
    prob = build_cut_problem(tn, region)
    fg = _FlowGraph(prob.n_vertices)
    for e in prob.edges:
        undirected = e.kind == "link"
        fg.add(e.u, e.v, 1, 1 if undirected else 0)
    value = fg.max_flow(prob.source, prob.sink)
    reach = set(fg.bfs(prob.source))
    cut = sorted((e for e in prob.edges if (e.u in reach) != (e.v in reach)), key=lambda e: e.sort_key)
    if len(cut) != value:
        raise AssertionError(f"max-flow {value} disagrees with residual cut size {len(cut)}")
    return MinCutResult(value, tuple(cut))


def _separated(prob: CutProblem, removed: set) -> bool:
    parent = list(range(prob.n_vertices))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i, e in enumerate(prob.edges):
        if i not in removed:
            parent[find(e.u)] = find(e.v)
    return find(prob.source) != find(prob.sink)


def enumerate_cuts_bruteforce(tn: TensorNetwork, region) -> int:
    """Smallest edge subset whose removal disconnects source from sink, by exhaustion."""
    prob = build_cut_problem(tn, region)
    m = len(prob.edges)
    if m > BRUTE_FORCE_EDGE_CAP:
        raise UnsupportedScaleError(f"{m} edges exceeds the brute-force cap of {BRUTE_FORCE_EDGE_CAP}")
    for size in range(m + 1):
        for subset in itertools.combinations(range(m), size):
            if _separated(prob, set(subset)):
                return size
    raise AssertionError("removing every edge must separate the terminals")
