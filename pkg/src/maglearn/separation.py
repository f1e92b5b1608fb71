"""Lazy linear cuts over the binary edge variables.

Each detected violation becomes one inequality of the form

    sum of e-terms + sum of b-terms - sum of guard b-terms <= rhs

with rhs = (#e-terms + #b-terms) - 1.  The generating graph always
attains rhs + 1, so the cut separates it; every maximal ancestral graph
on the same vertex set satisfies the cut.

The guard exists only on inducing-path cuts: a graph containing the
whole bidirected path plus all ancestor edges is still a valid MAG when
the path's endpoints are joined by a bidirected edge (the path then
connects an adjacent pair and maximality says nothing about it).
Subtracting that endpoint edge keeps the cut exact instead of cutting
those graphs off.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .graph import (
    AlmostDirectedCycle,
    Edge,
    InducingPathWitness,
    MixedGraph,
    find_almost_directed_cycles,
    find_directed_cycles,
    find_inducing_paths,
)


def _norm_pair(p: Edge) -> Edge:
    j, k = p
    return (j, k) if j < k else (k, j)


@dataclass(frozen=True)
class LazyCut:
    directed_terms: frozenset[Edge]
    bidirected_terms: frozenset[Edge]  # normalized (j, k) with j < k
    rhs: int
    family: str
    guard_bidirected: frozenset[Edge] = frozenset()

    def value_on(self, graph: MixedGraph) -> int:
        val = sum(int(graph.directed[j, k]) for j, k in self.directed_terms)
        val += sum(int(graph.bidirected[j, k]) for j, k in self.bidirected_terms)
        val -= sum(int(graph.bidirected[j, k]) for j, k in self.guard_bidirected)
        return val

    def violated_by(self, graph: MixedGraph) -> bool:
        return self.value_on(graph) > self.rhs

    def canonical_key(self):
        return (
            self.family,
            tuple(sorted(self.directed_terms)),
            tuple(sorted(self.bidirected_terms)),
            tuple(sorted(self.guard_bidirected)),
            self.rhs,
        )

    def to_json_dict(self) -> dict:
        doc = {
            "e": [list(t) for t in sorted(self.directed_terms)],
            "b": [list(t) for t in sorted(self.bidirected_terms)],
            "rhs": self.rhs,
            "family": self.family,
        }
        if self.guard_bidirected:
            doc["guard_b"] = [list(t) for t in sorted(self.guard_bidirected)]
        return doc


def cut_from_directed_cycle(cycle_edges) -> LazyCut:
    """sum of the cycle's edge variables <= cycle length - 1."""
    edges = frozenset(cycle_edges)
    if not edges:
        raise ValueError("a directed cycle has at least one edge")
    return LazyCut(edges, frozenset(), len(edges) - 1, "cycle")


def cut_from_almost_directed_cycle(witness: AlmostDirectedCycle) -> LazyCut:
    """b-term for the bidirected edge plus all traced directed edges,
    bounded by the number of directed edges."""
    if not witness.directed_edges:
        raise ValueError("an almost directed cycle needs at least one directed edge")
    return LazyCut(
        frozenset(witness.directed_edges),
        frozenset({_norm_pair(witness.bidirected_edge)}),
        len(witness.directed_edges),
        "almost",
    )


def cut_from_inducing_path(witness: InducingPathWitness, guard_endpoints: bool = True) -> LazyCut:
    """b-terms for the path's bidirected steps plus the ancestor edges,
    bounded by (#ancestor edges + #path steps - 1).  ``guard_endpoints``
    subtracts the endpoint bidirected edge (see module docstring); pass
    False only for witnesses whose endpoints are already adjacent."""
    steps = frozenset(witness.bidirected_steps())
    if len(steps) < 2:
        raise ValueError("an inducing path carries at least two bidirected edges")
    guard = frozenset({witness.endpoints}) if guard_endpoints else frozenset()
    return LazyCut(
        frozenset(witness.directed_edges),
        steps,
        len(witness.directed_edges) + len(steps) - 1,
        "inducing",
        guard,
    )


@dataclass(frozen=True)
class SeparationConfig:
    max_cycle_cuts: int = 1
    max_inducing_cuts: int | None = None  # defaults to d*d per round
    require_nonadjacent_endpoints: bool = True

    def inducing_limit(self, d: int) -> int:
        return self.max_inducing_cuts if self.max_inducing_cuts is not None else d * d


DEFAULT_CONFIG = SeparationConfig()


def separate(graph: MixedGraph, config: SeparationConfig = DEFAULT_CONFIG) -> list[LazyCut]:
    """Run the three detectors and return deduplicated cuts.

    Cycle and almost-directed-cycle detection always run; the
    inducing-path search is skipped while either finds something (it
    presumes a cycle-free graph).  Empty result means the graph is a
    maximal ancestral graph.
    """
    cuts: list[LazyCut] = []
    for cycle in find_directed_cycles(graph, limit=config.max_cycle_cuts):
        cuts.append(cut_from_directed_cycle(cycle))
    almost = find_almost_directed_cycles(graph)
    for witness in almost:
        cuts.append(cut_from_almost_directed_cycle(witness))
    if not cuts:
        for witness in find_inducing_paths(
            graph,
            require_nonadjacent_endpoints=config.require_nonadjacent_endpoints,
            max_witnesses=config.inducing_limit(graph.d),
        ):
            a, b = witness.endpoints
            cuts.append(cut_from_inducing_path(witness, guard_endpoints=not graph.adjacent(a, b)))
    deduped: dict = {}
    for cut in cuts:
        deduped.setdefault(cut.canonical_key(), cut)
    return list(deduped.values())
