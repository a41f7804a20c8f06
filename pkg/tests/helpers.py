"""Shared test oracles: exhaustive path enumeration, subset brute force,
and the seeded random-instance factory used by the cross-check suites.

Everything here is deliberately independent of the package's search code:
paths come from plain DFS enumeration and optima from subset enumeration.
"""

from __future__ import annotations

import random
from fractions import Fraction
from itertools import combinations

from cutlab.graphs import (
    EDGE,
    VERTEX,
    CutInstance,
    LengthBound,
    Multicut,
    WeightedGraph,
    shortest_path_length,
)


def all_simple_paths(g: WeightedGraph, s: str, t: str):
    """Yield (nodes, edges) for every simple s-t path, by DFS."""
    path_nodes = [s]
    path_edges: list[int] = []
    on_path = {s}

    def rec():
        v = path_nodes[-1]
        if v == t:
            yield list(path_nodes), list(path_edges)
            return
        for idx, nb in g.out_arcs(v):
            if nb in on_path:
                continue
            path_nodes.append(nb)
            path_edges.append(idx)
            on_path.add(nb)
            yield from rec()
            on_path.remove(nb)
            path_edges.pop()
            path_nodes.pop()

    yield from rec()


def path_length(g: WeightedGraph, edges) -> int:
    return sum(g.edges[i].length for i in edges)


def path_x_weight(g: WeightedGraph, nodes, edges, x, mode) -> Fraction:
    elements = nodes if mode == VERTEX else edges
    total = Fraction(0)
    for el in dict.fromkeys(elements):
        if g.element_weight(el) is not None:
            total += x.get(el, Fraction(0))
    return total


def brute_force_min_disconnect(g: WeightedGraph, s: str, t: str, mode: str):
    """Cheapest cuttable subset after which t is unreachable from s."""
    cuttable = g.cuttable_elements(mode)
    best = None
    for size in range(len(cuttable) + 1):
        for subset in combinations(cuttable, size):
            cost = sum(
                (g.element_weight(el) for el in subset), Fraction(0)
            )
            if best is not None and cost >= best[0]:
                continue
            if shortest_path_length(g, s, t, subset) is None:
                best = (cost, frozenset(subset))
    return best


def brute_force_min_feasible(inst: CutInstance, feasible) -> Fraction | None:
    """Cheapest cuttable subset passing the supplied feasibility check."""
    cuttable = inst.cuttable_elements()
    best = None
    for mask in range(1 << len(cuttable)):
        subset = [cuttable[i] for i in range(len(cuttable)) if mask >> i & 1]
        cost = sum((inst.graph.element_weight(el) for el in subset), Fraction(0))
        if best is not None and cost >= best:
            continue
        if feasible(subset):
            best = cost
    return best


def random_instance(
    rng: random.Random,
    problem_kind: str,
    mode: str,
    n_nodes: int = 6,
    extra_edges: int = 5,
    max_cuttable: int = 10,
) -> CutInstance:
    """Small random connected instance with at most ``max_cuttable``
    cuttable elements. All non-terminal elements of the chosen mode are
    cuttable so feasibility is guaranteed.
    """
    names = [f"n{i}" for i in range(n_nodes)]
    terminals = ["S", "T"] if problem_kind == "length_bound" else ["S", "T", "S2", "T2"]
    g = WeightedGraph()

    def rand_weight() -> Fraction:
        return Fraction(rng.randint(1, 8), rng.randint(1, 3))

    for term in terminals:
        g.add_node(term, None)
    for v in names:
        g.add_node(v, rand_weight() if mode == VERTEX else None)

    directed = problem_kind == "multicut"
    edge_budget = max_cuttable if mode == EDGE else n_nodes + extra_edges

    def add(a: str, b: str) -> None:
        g.add_edge(
            a,
            b,
            directed=directed,
            length=rng.randint(1, 3),
            weight=rand_weight() if mode == EDGE else None,
        )

    # a random backbone guarantees S reaches T through the interior
    chain = list(names)
    rng.shuffle(chain)
    add("S", chain[0])
    for a, b in zip(chain, chain[1:]):
        add(a, b)
    add(chain[-1], "T")
    used = n_nodes + 1

    if problem_kind == "multicut":
        pairs = [("S", "T")]
        if rng.random() < 0.7:
            pairs.append(("S2", "T2"))
            add("S2", rng.choice(names))
            add(rng.choice(names), "T2")
            used += 2
        problem = Multicut(tuple(pairs))
    else:
        problem = LengthBound("S", "T", rng.randint(2, 6))

    pool = terminals + names
    while used < edge_budget:
        a, b = rng.sample(pool, 2)
        if mode == VERTEX and a in terminals and b in terminals:
            continue  # would create an uncuttable path
        if directed and rng.random() < 0.5:
            a, b = b, a
        add(a, b)
        used += 1
    inst = CutInstance(graph=g, mode=mode, problem=problem)
    if mode == EDGE:
        assert len(inst.cuttable_elements()) <= max_cuttable
    return inst
