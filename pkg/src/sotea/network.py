"""Undirected simple graphs over individuals, topology statistics, fits.

The graph is the locality structure of the structured EA variants.
Nodes are integer ids (never reused within a run); edges are unordered
pairs. All edit operations preserve simplicity (no loops, no parallel
edges) and symmetry.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Iterable, NamedTuple


class PopulationGraph:
    """Adjacency-set graph with the edit operations the EA rules need."""

    __slots__ = ("_adj",)

    def __init__(self, nodes: Iterable[int] = ()):
        self._adj: dict[int, set[int]] = {int(v): set() for v in nodes}

    # -- basic queries ------------------------------------------------

    def __contains__(self, node: int) -> bool:
        return node in self._adj

    def __len__(self) -> int:
        return len(self._adj)

    def nodes(self):
        return self._adj.keys()

    def neighbors(self, node: int) -> set[int]:
        """Live neighbor set; treat as read-only."""
        return self._adj[node]

    def degree(self, node: int) -> int:
        return len(self._adj[node])

    def edge_count(self) -> int:
        return sum(len(s) for s in self._adj.values()) // 2

    def has_edge(self, a: int, b: int) -> bool:
        return b in self._adj[a]

    def edges(self) -> list[tuple[int, int]]:
        """All edges as sorted (low, high) pairs, lexicographic order."""
        out = []
        for a in sorted(self._adj):
            for b in sorted(self._adj[a]):
                if a < b:
                    out.append((a, b))
        return out

    # -- edits ----------------------------------------------------------

    def add_node(self, node: int) -> None:
        if node in self._adj:
            raise ValueError(f"node {node} already present")
        self._adj[int(node)] = set()

    def remove_node(self, node: int) -> None:
        try:
            nbrs = self._adj.pop(node)
        except KeyError:
            raise KeyError(f"unknown node {node}") from None
        for x in nbrs:
            self._adj[x].discard(node)

    def add_edge(self, a: int, b: int) -> bool:
        """Add edge (a, b); False (no-op) when a == b or already present."""
        adj = self._adj
        if a not in adj or b not in adj:
            raise KeyError(f"unknown node in edge ({a}, {b})")
        if a == b or b in adj[a]:
            return False
        adj[a].add(b)
        adj[b].add(a)
        return True

    def remove_edge(self, a: int, b: int) -> bool:
        adj = self._adj
        if a not in adj or b not in adj:
            raise KeyError(f"unknown node in edge ({a}, {b})")
        if b not in adj[a]:
            return False
        adj[a].discard(b)
        adj[b].discard(a)
        return True

    def transfer_links(self, winner: int, loser: int) -> None:
        """Winner absorbs the loser's links, then the loser is removed.

        Every neighbor of the loser other than the winner gains an edge
        to the winner unless one already exists. The winner can end up
        isolated when the loser's only link was to the winner.
        """
        if winner == loser:
            raise ValueError("winner and loser must differ")
        adj = self._adj
        if winner not in adj or loser not in adj:
            raise KeyError(f"unknown node in transfer ({winner}, {loser})")
        for x in adj[loser]:
            if x != winner:
                self.add_edge(winner, x)
        self.remove_node(loser)

    def copy(self) -> "PopulationGraph":
        g = PopulationGraph()
        g._adj = {v: set(s) for v, s in self._adj.items()}
        return g

    def audit(self) -> None:
        """Raise AssertionError if simplicity or symmetry is violated."""
        for a, nbrs in self._adj.items():
            assert a not in nbrs, f"self-loop at {a}"
            for b in nbrs:
                assert b in self._adj, f"edge ({a}, {b}) to unknown node"
                assert a in self._adj[b], f"asymmetric edge ({a}, {b})"


def new_ring(m: int) -> PopulationGraph:
    """Cycle graph on nodes 0..m-1; every degree is exactly 2."""
    if m < 3:
        raise ValueError(f"a simple cycle needs at least 3 nodes, got {m}")
    g = PopulationGraph(range(m))
    for i in range(m):
        g.add_edge(i, (i + 1) % m)
    return g


@dataclass(frozen=True)
class NetworkStats:
    char_path_length: float  # NaN when no pair of nodes is connected
    degree_average: float
    degree_histogram: dict[int, int]
    component_count: int


def network_stats(g: PopulationGraph) -> NetworkStats:
    """BFS-based statistics.

    The characteristic path length averages shortest-path distances over
    connected ordered pairs only; the component count makes any
    disconnection visible instead of poisoning the average.
    """
    if len(g) == 0:
        raise ValueError("network_stats requires a non-empty graph")
    nodes = sorted(g.nodes())
    dist_sum = 0
    pair_count = 0
    for src in nodes:
        dist = {src: 0}
        queue = deque([src])
        while queue:
            v = queue.popleft()
            dv = dist[v]
            for w in g.neighbors(v):
                if w not in dist:
                    dist[w] = dv + 1
                    queue.append(w)
        dist_sum += sum(dist.values())
        pair_count += len(dist) - 1
    components = 0
    seen: set[int] = set()
    for src in nodes:
        if src in seen:
            continue
        components += 1
        seen.add(src)
        queue = deque([src])
        while queue:
            v = queue.popleft()
            for w in g.neighbors(v):
                if w not in seen:
                    seen.add(w)
                    queue.append(w)
    histogram: dict[int, int] = {}
    degree_total = 0
    for v in nodes:
        d = g.degree(v)
        degree_total += d
        histogram[d] = histogram.get(d, 0) + 1
    return NetworkStats(
        char_path_length=dist_sum / pair_count if pair_count else math.nan,
        degree_average=degree_total / len(nodes),
        degree_histogram=histogram,
        component_count=components,
    )


class LinearFit(NamedTuple):
    slope: float
    intercept: float
    r_squared: float


class ExponentialFit(NamedTuple):
    rate: float
    r_squared: float


def _ols(xs: list[float], ys: list[float]) -> LinearFit:
    n = len(xs)
    x_mean = sum(xs) / n
    y_mean = sum(ys) / n
    sxx = sum((x - x_mean) ** 2 for x in xs)
    sxy = sum((x - x_mean) * (y - y_mean) for x, y in zip(xs, ys))
    if sxx == 0.0:
        raise ValueError("degenerate fit: all x values identical")
    slope = sxy / sxx
    intercept = y_mean - slope * x_mean
    ss_tot = sum((y - y_mean) ** 2 for y in ys)
    ss_res = sum((y - (intercept + slope * x)) ** 2 for x, y in zip(xs, ys))
    # zero total variance means the constant fit is already perfect
    r_squared = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return LinearFit(slope, intercept, r_squared)


def fit_linear(points: Iterable[tuple[float, float]]) -> LinearFit:
    """Ordinary least squares of value against m."""
    pts = list(points)
    if len(pts) < 3:
        raise ValueError("need at least 3 points to fit")
    return _ols([float(m) for m, _ in pts], [float(v) for _, v in pts])


def fit_log_linear(points: Iterable[tuple[float, float]]) -> LinearFit:
    """Ordinary least squares of value against ln(m); m must be positive."""
    pts = list(points)
    if len(pts) < 3:
        raise ValueError("need at least 3 points to fit")
    if any(m <= 0 for m, _ in pts):
        raise ValueError("all m values must be positive")
    return _ols([math.log(m) for m, _ in pts], [float(v) for _, v in pts])


def fit_exponential(histogram: dict[int, int]) -> ExponentialFit:
    """Fit counts ~ c * exp(-rate * degree) in log space.

    Only bins with positive counts participate; at least 3 such bins are
    required. The returned r_squared is measured on ln(count).
    """
    bins = sorted((d, c) for d, c in histogram.items() if c > 0)
    if len(bins) < 3:
        raise ValueError("need at least 3 non-empty degree bins to fit")
    fit = _ols([float(d) for d, _ in bins], [math.log(c) for _, c in bins])
    return ExponentialFit(rate=-fit.slope, r_squared=fit.r_squared)
