"""Brute-force ground truth for small graphs.

Everything here works straight from the definitions (ancestor sets,
m-separation over explicit simple paths, maximality by searching all
conditioning sets) so it can certify the algorithmic checks in
:mod:`maglearn.graph` and the branch-and-cut solver.  Costs are
exponential; the entry points guard their size limits.
"""
from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass

import numpy as np

from .graph import MixedGraph, all_pair_state_graphs
from .solver import ColumnFitCache, Instance, Solution, assemble_weights


def _proper_reach(directed: np.ndarray) -> np.ndarray:
    """Boolean matrix R with R[v, w] true iff a directed path (>= 1 edge)
    leads from v to w.  Repeated squaring, no shared code with the
    Floyd-Warshall routine it is used to certify."""
    reach = directed.astype(bool)
    d = reach.shape[0]
    steps = max(1, int(np.ceil(np.log2(max(d, 2)))))
    for _ in range(steps):
        reach = reach | (reach @ reach)
    return reach


def ancestor_sets(graph: MixedGraph) -> list[frozenset[int]]:
    """anc[v] = vertices with a directed path to v, including v itself."""
    reach = _proper_reach(graph.directed)
    return [frozenset(np.nonzero(reach[:, v])[0].tolist()) | {v} for v in range(graph.d)]


def is_ancestral_def(graph: MixedGraph) -> bool:
    """Definitional ancestrality: no vertex is an ancestor of a vertex
    that is its ancestor or spouse (covers directed and almost directed
    cycles in one statement)."""
    reach = _proper_reach(graph.directed)
    bi = graph.bidirected.astype(bool)
    return not ((reach | bi) & reach.T).any()


def _mixed_adjacency(graph: MixedGraph) -> list[list[tuple[int, bool, bool]]]:
    """Per-vertex edge list as (other, head_at_self, head_at_other); a pair
    carrying several edge kinds contributes one entry per kind."""
    d = graph.d
    adj: list[list[tuple[int, bool, bool]]] = [[] for _ in range(d)]
    for u in range(d):
        for v in range(d):
            if u == v:
                continue
            if graph.directed[u, v]:
                adj[u].append((v, False, True))
            if graph.directed[v, u]:
                adj[u].append((v, True, False))
            if graph.bidirected[u, v] and u < v:
                adj[u].append((v, True, True))
                adj[v].append((u, True, True))
    return adj


def m_separated(graph: MixedGraph, a: int, b: int, cond: frozenset[int] | set[int]) -> bool:
    """m-separation by exhaustive simple-path enumeration.

    A path is m-connecting given ``cond`` when every inner non-collider
    avoids ``cond`` and every inner collider is an ancestor of ``cond``.
    Returns True iff no m-connecting simple path from a to b exists.
    """
    cond = frozenset(cond)
    if a == b or a in cond or b in cond:
        raise ValueError("endpoints must be distinct and outside the conditioning set")
    anc = ancestor_sets(graph)
    anc_of_cond: set[int] = set()
    for c in cond:
        anc_of_cond |= anc[c]
    adj = _mixed_adjacency(graph)

    # stack entries: (vertex, arrowhead into vertex from the last edge, on-path set)
    stack: list[tuple[int, bool, frozenset[int]]] = []
    for v, _, head_v in adj[a]:
        if v == b:
            return False  # an edge between a and b is m-connecting for any cond
        stack.append((v, head_v, frozenset((a, v))))
    while stack:
        u, in_head, on_path = stack.pop()
        for v, head_u, head_v in adj[u]:
            if v in on_path:
                continue
            collider = in_head and head_u
            if collider:
                if u not in anc_of_cond:
                    continue
            elif u in cond:
                continue
            if v == b:
                return False
            stack.append((v, head_v, on_path | {v}))
    return True


def is_maximal_def(graph: MixedGraph) -> bool:
    """Definitional maximality: every nonadjacent pair admits some
    m-separating conditioning set.  Exhaustive over subsets, so only
    sensible for d <= 6."""
    d = graph.d
    if d > 6:
        raise ValueError("definitional maximality check is restricted to d <= 6")
    rest = list(range(d))
    for a, b in itertools.combinations(range(d), 2):
        if graph.adjacent(a, b):
            continue
        others = [v for v in rest if v != a and v != b]
        separated = False
        for r in range(len(others) + 1):
            for cond in itertools.combinations(others, r):
                if m_separated(graph, a, b, frozenset(cond)):
                    separated = True
                    break
            if separated:
                break
        if not separated:
            return False
    return True


@functools.lru_cache(maxsize=None)
def mag_census(d: int) -> tuple[MixedGraph, ...]:
    """Every maximal ancestral graph on d vertices (4 states per pair)."""
    if d > 4:
        raise ValueError("the exhaustive census is restricted to d <= 4")
    out = []
    for g in all_pair_state_graphs(d):
        if is_ancestral_def(g) and is_maximal_def(g):
            out.append(g)
    return tuple(out)


def _consistent_with_forbidden(graph: MixedGraph, forbidden: np.ndarray) -> bool:
    e = graph.directed.astype(bool)
    b = graph.bidirected.astype(bool)
    f = forbidden.astype(bool)
    return not ((e | e.T) & f).any() and not (b & ~f).any()


def enumerate_mags(d: int, forbidden: np.ndarray):
    """Stream all MAGs on d vertices whose edges respect the forbidden
    matrix: directed edges only where f = 0, bidirected only where f = 1."""
    if d > 4:
        raise ValueError("enumerate_mags is restricted to d <= 4")
    forbidden = np.asarray(forbidden)
    if forbidden.shape != (d, d):
        raise ValueError("forbidden matrix shape mismatch")
    for g in mag_census(d):
        if _consistent_with_forbidden(g, forbidden):
            yield g


@dataclass(frozen=True)
class ScoredStructure:
    graph: MixedGraph
    weights: np.ndarray
    objective: float


def oracle_optima(instance: Instance, tol: float = 1e-9) -> list[ScoredStructure]:
    """Score every feasible MAG by the per-column best fit plus the edge
    penalty and return all structures within ``tol`` of the minimum,
    best first, enumeration order breaking ties."""
    d = instance.d
    fits = ColumnFitCache(instance.x, instance.q, instance.weight_bound)
    scored: list[ScoredStructure] = []
    best = np.inf
    for g in enumerate_mags(d, instance.forbidden):
        loss = 0.0
        for j in range(d):
            support = tuple(
                int(k) for k in np.nonzero(g.directed[:, j] | g.bidirected[:, j])[0]
            )
            loss += fits.fit(j, support)[1]
        penalty = instance.lam * (
            int(g.directed.sum()) + int(g.bidirected.sum())
        )
        obj = loss + penalty
        scored.append(ScoredStructure(g, assemble_weights(g, fits), obj))
        best = min(best, obj)
    cutoff = best + tol * max(1.0, abs(best))
    optima = [s for s in scored if s.objective <= cutoff]
    optima.sort(key=lambda s: s.objective)
    return optima


def oracle_solve(instance: Instance) -> Solution:
    """Exhaustive minimizer over all feasible MAGs (d <= 4)."""
    optima = oracle_optima(instance)
    count = sum(1 for _ in enumerate_mags(instance.d, instance.forbidden))
    top = optima[0]
    return Solution(
        weights=top.weights,
        graph=top.graph,
        objective=top.objective,
        best_bound=top.objective,
        mip_gap=0.0,
        status="OPTIMAL",
        cuts_added={"cycle": 0, "almost": 0, "inducing": 0},
        nodes_explored=count,
    )
