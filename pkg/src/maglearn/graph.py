"""Mixed graphs (directed + bidirected edges) and the structure checks
used during separation: directed cycles, almost directed cycles, and
inducing paths.

Conventions used throughout the package:
  * vertices are dense 0-based indices; external files carry names
  * ``directed[j, k] == 1`` encodes the edge j -> k
  * ``bidirected`` is symmetric, ``bidirected[j, k] == 1`` encodes j <-> k
  * distance matrices store ``d + 1`` for "unreachable" so that all
    comparisons stay exact integer comparisons (a shortest directed path
    has at most d - 1 edges)
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field

import numpy as np

Edge = tuple[int, int]


def _as_edge_matrix(d: int, mat) -> np.ndarray:
    arr = np.asarray(mat, dtype=np.int8).copy()
    if arr.shape != (d, d):
        raise ValueError(f"expected a {d}x{d} matrix, got shape {arr.shape}")
    if not np.isin(arr, (0, 1)).all():
        raise ValueError("edge matrices must be 0/1 valued")
    return arr


@dataclass(frozen=True)
class MixedGraph:
    """Immutable mixed graph over ``d`` vertices.

    Invariants (checked unless ``validate=False``): zero diagonals, the
    bidirected matrix is symmetric, and no pair carries both a directed
    and a bidirected edge.  Detection routines tolerate graphs built
    with ``validate=False`` (useful for exercising them on raw inputs).
    """

    directed: np.ndarray
    bidirected: np.ndarray
    validate: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        d = int(np.asarray(self.directed).shape[0])
        directed = _as_edge_matrix(d, self.directed)
        bidirected = _as_edge_matrix(d, self.bidirected)
        if directed.diagonal().any() or bidirected.diagonal().any():
            raise ValueError("self-loops are not allowed")
        if not (bidirected == bidirected.T).all():
            raise ValueError("bidirected matrix must be symmetric")
        if self.validate and (directed + bidirected > 1).any():
            raise ValueError("a pair cannot have both a directed and a bidirected edge")
        directed.setflags(write=False)
        bidirected.setflags(write=False)
        object.__setattr__(self, "directed", directed)
        object.__setattr__(self, "bidirected", bidirected)

    @property
    def d(self) -> int:
        return self.directed.shape[0]

    @classmethod
    def empty(cls, d: int) -> "MixedGraph":
        return cls(np.zeros((d, d), dtype=np.int8), np.zeros((d, d), dtype=np.int8))

    @classmethod
    def from_edges(cls, d: int, directed=(), bidirected=(), validate: bool = True) -> "MixedGraph":
        e = np.zeros((d, d), dtype=np.int8)
        b = np.zeros((d, d), dtype=np.int8)
        for j, k in directed:
            e[j, k] = 1
        for j, k in bidirected:
            b[j, k] = 1
            b[k, j] = 1
        return cls(e, b, validate=validate)

    def directed_edges(self) -> list[Edge]:
        return [(int(j), int(k)) for j, k in zip(*np.nonzero(self.directed))]

    def bidirected_pairs(self) -> list[Edge]:
        """Unordered bidirected edges, each reported once as (j, k) with j < k."""
        js, ks = np.nonzero(np.triu(self.bidirected))
        return [(int(j), int(k)) for j, k in zip(js, ks)]

    def adjacent(self, j: int, k: int) -> bool:
        return bool(self.directed[j, k] or self.directed[k, j] or self.bidirected[j, k])

    def remove_edges(self, directed=(), bidirected=()) -> "MixedGraph":
        e = self.directed.copy()
        b = self.bidirected.copy()
        for j, k in directed:
            e[j, k] = 0
        for j, k in bidirected:
            b[j, k] = 0
            b[k, j] = 0
        return MixedGraph(e, b, validate=self.validate)

    def __eq__(self, other) -> bool:
        if not isinstance(other, MixedGraph):
            return NotImplemented
        return (self.directed == other.directed).all() and (self.bidirected == other.bidirected).all()

    def __hash__(self) -> int:
        return hash((self.directed.tobytes(), self.bidirected.tobytes()))

    def to_json_dict(self, names: list[str] | None = None) -> dict:
        names = list(names) if names is not None else [f"x{i}" for i in range(self.d)]
        if len(names) != self.d:
            raise ValueError("need one name per vertex")
        return {
            "d": self.d,
            "names": names,
            "directed": [list(e) for e in sorted(self.directed_edges())],
            "bidirected": [list(e) for e in sorted(self.bidirected_pairs())],
        }

    @classmethod
    def from_json_dict(cls, doc: dict) -> tuple["MixedGraph", list[str]]:
        g = cls.from_edges(int(doc["d"]), doc.get("directed", ()), doc.get("bidirected", ()))
        return g, list(doc["names"])

    def to_json(self, names=None) -> str:
        return json.dumps(self.to_json_dict(names), sort_keys=True)


@dataclass(frozen=True)
class AlmostDirectedCycle:
    """A bidirected edge {u, v} whose endpoints are also connected by a
    directed path; ``directed_edges`` collects every directed edge lying
    on some such path (both orientations when both are reachable)."""

    bidirected_edge: Edge  # normalized (u, v) with u < v
    directed_edges: frozenset[Edge]


@dataclass(frozen=True)
class InducingPathWitness:
    """A path of >= 2 bidirected edges whose inner vertices are each
    ancestors of one of the path's endpoints.  ``directed_edges`` holds
    the directed edges realizing those ancestor relationships."""

    path: tuple[int, ...]
    directed_edges: frozenset[Edge]

    @property
    def endpoints(self) -> Edge:
        a, b = self.path[0], self.path[-1]
        return (a, b) if a < b else (b, a)

    def bidirected_steps(self) -> list[Edge]:
        return [
            (min(u, v), max(u, v))
            for u, v in zip(self.path, self.path[1:])
        ]


def unreachable(d: int) -> int:
    """Sentinel distance for "no directed path"; strictly greater than any
    real path length."""
    return d + 1


def distance_matrix(graph: MixedGraph) -> np.ndarray:
    """All-pairs shortest directed-path lengths over the directed edges
    only, via Floyd-Warshall.  Entries equal ``unreachable(d)`` exactly
    when no path exists; the diagonal is zero.
    """
    d = graph.d
    inf = unreachable(d)
    dist = np.full((d, d), inf, dtype=np.int64)
    np.fill_diagonal(dist, 0)
    dist[graph.directed == 1] = 1
    for k in range(d):
        # min() keeps every entry <= inf, so sums in the temporary never
        # masquerade as real path lengths
        np.minimum(dist, dist[:, k : k + 1] + dist[k : k + 1, :], out=dist)
    dist.setflags(write=False)
    return dist


def _reachable(dist: np.ndarray, j: int, k: int) -> bool:
    return dist[j, k] <= dist.shape[0] - 1


def find_directed_cycles(graph: MixedGraph, limit: int | None = 1) -> list[frozenset[Edge]]:
    """Directed cycles found by DFS back-edge detection, at most one per
    back edge, up to ``limit`` (None = all back edges of one DFS sweep)."""
    d = graph.d
    succ = [np.nonzero(graph.directed[u])[0].tolist() for u in range(d)]
    color = [0] * d  # 0 white, 1 on stack, 2 done
    cycles: list[frozenset[Edge]] = []

    for root in range(d):
        if color[root] != 0:
            continue
        stack: list[tuple[int, int]] = [(root, 0)]
        path = [root]
        color[root] = 1
        while stack:
            u, i = stack[-1]
            if i < len(succ[u]):
                stack[-1] = (u, i + 1)
                v = succ[u][i]
                if color[v] == 1:
                    at = path.index(v)
                    cyc = path[at:] + [v]
                    cycles.append(frozenset(zip(cyc, cyc[1:])))
                    if limit is not None and len(cycles) >= limit:
                        return cycles
                elif color[v] == 0:
                    color[v] = 1
                    path.append(v)
                    stack.append((v, 0))
            else:
                stack.pop()
                path.pop()
                color[u] = 2
    return cycles


def find_directed_cycle(graph: MixedGraph) -> frozenset[Edge] | None:
    """Edge set of one directed cycle, or None if the directed part is acyclic."""
    cycles = find_directed_cycles(graph, limit=1)
    return cycles[0] if cycles else None


def trace_distance_matrix(dist: np.ndarray, graph: MixedGraph, j: int, k: int) -> frozenset[Edge]:
    """Directed edges lying on any directed route from ``j`` to ``k``.

    Pair-splitting walk over the distance matrix: a pair (u, v) with v
    reachable from u is split at every intermediate w that u reaches and
    that reaches v.  A visited set plus the exclusion w not in {u, v}
    guarantees termination; an edge u -> v is collected when its own pair
    is processed.  Returns the empty set when k is unreachable from j.
    """
    d = graph.d
    if not _reachable(dist, j, k):
        return frozenset()
    visited = {(j, k)}
    stack = [(j, k)]
    edges: set[Edge] = set()
    horizon = d - 1
    while stack:
        u, v = stack.pop()
        if graph.directed[u, v]:
            edges.add((u, v))
        for w in range(d):
            if w == u or w == v:
                continue
            if dist[u, w] <= horizon and dist[w, v] <= horizon:
                if graph.directed[u, w]:
                    edges.add((u, w))
                elif graph.directed[w, v]:
                    edges.add((w, v))
                for pair in ((u, w), (w, v)):
                    if pair not in visited:
                        visited.add(pair)
                        stack.append(pair)
    return frozenset(edges)


def find_almost_directed_cycles(graph: MixedGraph) -> list[AlmostDirectedCycle]:
    """One witness per unordered bidirected edge whose endpoints are
    connected by a directed path, in either orientation; the witness edge
    set is traced from the distance matrix for every reachable direction."""
    dist = distance_matrix(graph)
    witnesses = []
    for u, v in graph.bidirected_pairs():
        edges: set[Edge] = set()
        hit = False
        for a, b in ((u, v), (v, u)):
            if _reachable(dist, a, b):
                hit = True
                edges |= trace_distance_matrix(dist, graph, a, b)
        if hit:
            witnesses.append(AlmostDirectedCycle((u, v), frozenset(edges)))
    return witnesses


def found_inducing_path(dist: np.ndarray, graph: MixedGraph, path) -> frozenset[Edge]:
    """Directed edges realizing the ancestor relationships between the
    inner vertices of a bidirected path and the path's two endpoints."""
    first, last = path[0], path[-1]
    edges: set[Edge] = set()
    for j in path[1:-1]:
        edges |= trace_distance_matrix(dist, graph, j, first)
        edges |= trace_distance_matrix(dist, graph, j, last)
    return frozenset(edges)


def find_inducing_paths(
    graph: MixedGraph,
    require_nonadjacent_endpoints: bool = True,
    max_witnesses: int | None = None,
) -> list[InducingPathWitness]:
    """Depth-first search over bidirected edges for inducing paths.

    From every start vertex ``s`` the DFS extends simple bidirected paths
    while maintaining the set of endpoints still possible: stepping onto a
    vertex that is an ancestor of ``s`` changes nothing, any other vertex
    restricts the set to the vertices it reaches.  A path of at least two
    bidirected edges ending in a still-possible vertex is a witness.

    By default witnesses are only reported when the endpoints share no
    edge (only those violate maximality); set
    ``require_nonadjacent_endpoints=False`` to report every path the
    search visits.  Each witness is reported once even though the search
    sees it from both ends.
    """
    d = graph.d
    dist = distance_matrix(graph)
    neighbors = [np.nonzero(graph.bidirected[u])[0].tolist() for u in range(d)]
    reach_sets = [frozenset(np.nonzero(dist[v] <= d - 1)[0].tolist()) for v in range(d)]
    all_vertices = frozenset(range(d))

    witnesses: list[InducingPathWitness] = []
    seen: set[tuple[int, ...]] = set()

    def dfs(s: int, u: int, possible: frozenset[int], path: list[int]) -> bool:
        if not possible:
            return True
        if len(path) > 2 and u in possible:
            if not require_nonadjacent_endpoints or not graph.adjacent(s, u):
                key = min(tuple(path), tuple(reversed(path)))
                if key not in seen:
                    seen.add(key)
                    witnesses.append(
                        InducingPathWitness(tuple(path), found_inducing_path(dist, graph, path))
                    )
                    if max_witnesses is not None and len(witnesses) >= max_witnesses:
                        return False
        for v in neighbors[u]:
            if v in path:
                continue
            nxt = possible if _reachable(dist, v, s) else possible & reach_sets[v]
            if not dfs(s, v, nxt, path + [v]):
                return False
        return True

    for s in range(d):
        if not dfs(s, s, all_vertices, [s]):
            break
    return witnesses


@dataclass(frozen=True)
class MagCheck:
    """Outcome of the three structure checks; truthy iff all came back empty."""

    directed_cycles: tuple[frozenset[Edge], ...]
    almost_directed_cycles: tuple[AlmostDirectedCycle, ...]
    inducing_paths: tuple[InducingPathWitness, ...]

    @property
    def ok(self) -> bool:
        return not (self.directed_cycles or self.almost_directed_cycles or self.inducing_paths)

    def __bool__(self) -> bool:
        return self.ok


def is_mag(graph: MixedGraph, require_nonadjacent_endpoints: bool = True) -> MagCheck:
    """Check a mixed graph for directed cycles, almost directed cycles and
    inducing paths.  The inducing-path search only runs once the graph is
    free of both cycle kinds (its ancestor bookkeeping assumes that)."""
    cycles = tuple(find_directed_cycles(graph, limit=None))
    almost = tuple(find_almost_directed_cycles(graph))
    inducing: tuple[InducingPathWitness, ...] = ()
    if not cycles and not almost:
        inducing = tuple(
            find_inducing_paths(graph, require_nonadjacent_endpoints=require_nonadjacent_endpoints)
        )
    return MagCheck(cycles, almost, inducing)


def all_pair_state_graphs(d: int):
    """Iterate every mixed graph on ``d`` vertices in which each unordered
    pair is one of: no edge, j->k, k->j, j<->k (no bows by construction)."""
    pairs = list(itertools.combinations(range(d), 2))
    for states in itertools.product(range(4), repeat=len(pairs)):
        e = np.zeros((d, d), dtype=np.int8)
        b = np.zeros((d, d), dtype=np.int8)
        for (j, k), st in zip(pairs, states):
            if st == 1:
                e[j, k] = 1
            elif st == 2:
                e[k, j] = 1
            elif st == 3:
                b[j, k] = 1
                b[k, j] = 1
        yield MixedGraph(e, b)
