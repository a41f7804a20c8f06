"""Generators for the grid gap instance and the four hypercube tests,
plus the coordinate ("dictator") cuts used by their completeness checks.

All generators are deterministic: atom order is (*, 0, 1, ..., r-1)
(or (*, 1, ..., B) for the fire-containment test), grid vectors and
hypercube points are enumerated lexicographically, and node ids are
structured strings such as ``v[1,2]/[*,0]``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import CoordinateOutOfRange, ParamOutOfRange, SizeGuard, UnknownGenerator
from .graphs import (
    EDGE,
    VERTEX,
    CutInstance,
    CutSolution,
    LengthBound,
    Multicut,
    Rmfc,
    Schedule,
    WeightedGraph,
)
from .probspace import Atom, CorrelatedSpace, FiniteProbSpace, product_mass

DEFAULT_MAX_NODES = 200_000
DEFAULT_MAX_FIRE_DEPTH = 4

STAR = "*"


# -- probability spaces of the tests ---------------------------------------


def star_space(r: int, eps: Fraction) -> FiniteProbSpace:
    """Atoms (*, 0..r-1) with mass eps on * and (1-eps)/r elsewhere."""
    eps = Fraction(eps)
    atoms: list[Atom] = [STAR, *range(r)]
    mass = {STAR: eps}
    for i in range(r):
        mass[i] = (1 - eps) / r
    return FiniteProbSpace(atoms, mass)


def uniform_cycle_space(r: int) -> FiniteProbSpace:
    """Uniform atoms 0..r-1."""
    return FiniteProbSpace.uniform(list(range(r)))


def fire_space(big_b: int, eps: Fraction) -> FiniteProbSpace:
    """Atoms (*, 1..B) with mass eps on * and (1-eps)/B elsewhere."""
    eps = Fraction(eps)
    atoms: list[Atom] = [STAR, *range(1, big_b + 1)]
    mass = {STAR: eps}
    for i in range(1, big_b + 1):
        mass[i] = (1 - eps) / big_b
    return FiniteProbSpace(atoms, mass)


def edge_noise_space(r: int) -> CorrelatedSpace:
    """Successor pair (x, x+1 mod r), resampled independently w.p. 1/r.

    Both marginals are uniform on 0..r-1.
    """
    base = uniform_cycle_space(r)
    joint: dict[tuple[Atom, Atom], Fraction] = {}
    stay = (1 - Fraction(1, r)) * Fraction(1, r)
    noise = Fraction(1, r) * Fraction(1, r * r)
    for x in range(r):
        for y in range(r):
            joint[(x, y)] = noise + (stay if y == (x + 1) % r else 0)
    return CorrelatedSpace(base, base, joint)


def star_noise_space(r: int, eps: Fraction) -> CorrelatedSpace:
    """Successor pair (x, x+1 mod r), each side starred independently w.p. eps."""
    eps = Fraction(eps)
    base = star_space(r, eps)
    joint: dict[tuple[Atom, Atom], Fraction] = {}
    joint[(STAR, STAR)] = eps * eps
    for y in range(r):
        joint[(STAR, y)] = eps * (1 - eps) * Fraction(1, r)
    for x in range(r):
        joint[(x, STAR)] = (1 - eps) * eps * Fraction(1, r)
        for y in range(r):
            hit = Fraction(1, r) if y == (x + 1) % r else Fraction(0)
            joint[(x, y)] = (1 - eps) * (1 - eps) * hit
    return CorrelatedSpace(base, base, joint)


def fire_noise_space(big_b: int, eps: Fraction) -> CorrelatedSpace:
    """Equal pair (x, x), each side starred independently w.p. eps."""
    eps = Fraction(eps)
    base = fire_space(big_b, eps)
    joint: dict[tuple[Atom, Atom], Fraction] = {}
    joint[(STAR, STAR)] = eps * eps
    for y in range(1, big_b + 1):
        joint[(STAR, y)] = eps * (1 - eps) * Fraction(1, big_b)
    for x in range(1, big_b + 1):
        joint[(x, STAR)] = (1 - eps) * eps * Fraction(1, big_b)
        for y in range(1, big_b + 1):
            hit = Fraction(1, big_b) if y == x else Fraction(0)
            joint[(x, y)] = (1 - eps) * (1 - eps) * hit
    return CorrelatedSpace(base, base, joint)


# -- parameter records ------------------------------------------------------


@dataclass(frozen=True)
class DictParamsM:
    """Parameters of the multicut test: grid size r, pair count k,
    coordinate count R, star mass eps < 1/(2r)."""

    r: int
    k: int
    R: int
    eps: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(self, "eps", Fraction(self.eps))
        if self.r < 2 or self.k < 2 or self.R < 1:
            raise ParamOutOfRange("need r >= 2, k >= 2, R >= 1")
        if not 0 < self.eps < Fraction(1, 2 * self.r):
            raise ParamOutOfRange("need 0 < eps < 1/(2r)")


@dataclass(frozen=True)
class DictParamsE:
    """Parameters of the edge-cut length test: stretch a, layers b,
    alphabet r, coordinates R, with b >= r - 1."""

    a: int
    b: int
    r: int
    R: int

    def __post_init__(self) -> None:
        if self.a < 1 or self.b < 1 or self.r < 2 or self.R < 1:
            raise ParamOutOfRange("need a,b >= 1, r >= 2, R >= 1")
        if self.b < self.r - 1:
            raise ParamOutOfRange("need b >= r - 1")


@dataclass(frozen=True)
class DictParamsV:
    """Parameters of the vertex-cut length test."""

    a: int
    b: int
    r: int
    R: int
    eps: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(self, "eps", Fraction(self.eps))
        if self.a < 1 or self.b < 1 or self.r < 2 or self.R < 1:
            raise ParamOutOfRange("need a,b >= 1, r >= 2, R >= 1")
        if not 0 < self.eps < Fraction(1, 2 * self.r):
            raise ParamOutOfRange("need 0 < eps < 1/(2r)")
        if self.b < self.r - 2:
            raise ParamOutOfRange("need b >= r - 2")


@dataclass(frozen=True)
class DictParamsF:
    """Parameters of the fire-containment test: depth b, coordinates R,
    star mass eps < 1/(2B) where B = b! * sum_i b!/i."""

    b: int
    R: int
    eps: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(self, "eps", Fraction(self.eps))
        if self.b < 1 or self.R < 1:
            raise ParamOutOfRange("need b >= 1, R >= 1")
        if not 0 < self.eps < Fraction(1, 2 * self.big_b):
            raise ParamOutOfRange("need 0 < eps < 1/(2B)")

    @property
    def big_b(self) -> int:
        return fire_alphabet_size(self.b)


def harmonic(i: int) -> Fraction:
    return sum((Fraction(1, j) for j in range(1, i + 1)), Fraction(0))


def fire_alphabet_size(b: int) -> int:
    fact = math.factorial(b)
    return fact * sum(fact // i for i in range(1, b + 1))


def fire_thresholds(b: int) -> list[int]:
    """Cumulative day thresholds B_0 = 0 <= B_1 <= ... <= B_b = B.

    B_i = (H_i / H_b) * B is an integer by the choice of B.
    """
    big_b = fire_alphabet_size(b)
    h_b = harmonic(b)
    out = [0]
    for i in range(1, b + 1):
        val = harmonic(i) / h_b * big_b
        assert val.denominator == 1
        out.append(int(val))
    return out


# -- node id scheme ----------------------------------------------------------


def fmt_point(xs: Sequence[Atom]) -> str:
    return "[" + ",".join(str(a) for a in xs) + "]"


def grid_node_id(alpha: Sequence[int], x: Sequence[Atom] | None = None) -> str:
    if x is None:
        return f"v{fmt_point(alpha)}"
    return f"v{fmt_point(alpha)}/{fmt_point(x)}"


def layer_node_id(i: int, x: Sequence[Atom]) -> str:
    return f"v[{i}]/{fmt_point(x)}"


def parse_point(text: str) -> tuple[Atom, ...]:
    inner = text.strip()[1:-1]
    out: list[Atom] = []
    for tok in inner.split(","):
        out.append(STAR if tok == STAR else int(tok))
    return tuple(out)


def split_block_point(node_id: str) -> tuple[str, tuple[Atom, ...]]:
    """Split "prefixv[block]/[x]" into the block part and the point."""
    if "/" not in node_id:
        raise UnknownGenerator(f"node id {node_id!r} carries no hypercube point")
    block, point = node_id.rsplit("/", 1)
    return block, parse_point(point)


def _guard_nodes(count: int, max_nodes: int) -> None:
    if count > max_nodes:
        raise SizeGuard(f"instance would have {count} nodes (cap {max_nodes})")


# -- generators --------------------------------------------------------------


def build_saks_gap(r: int, k: int, *, max_nodes: int = DEFAULT_MAX_NODES) -> CutInstance:
    """Directed grid multicut instance with unit vertex weights.

    Nodes are the grid [r]^k plus k terminal pairs; s_i feeds the
    alpha_i = 1 slab, the alpha_i = r slab feeds t_i, and grid points at
    l-infinity distance 1 are joined both ways.
    """
    if r < 2 or k < 1:
        raise ParamOutOfRange("need r >= 2, k >= 1")
    _guard_nodes(r**k + 2 * k, max_nodes)
    g = WeightedGraph()
    pairs = []
    for i in range(1, k + 1):
        g.add_node(f"s{i}", None)
        g.add_node(f"t{i}", None)
        pairs.append((f"s{i}", f"t{i}"))
    alphas = list(itertools.product(range(1, r + 1), repeat=k))
    for alpha in alphas:
        g.add_node(grid_node_id(alpha), Fraction(1))
    for i in range(1, k + 1):
        for alpha in alphas:
            if alpha[i - 1] == 1:
                g.add_edge(f"s{i}", grid_node_id(alpha), directed=True)
            if alpha[i - 1] == r:
                g.add_edge(grid_node_id(alpha), f"t{i}", directed=True)
    for alpha in alphas:
        for beta in alphas:
            if alpha == beta:
                continue
            if all(abs(ai - bi) <= 1 for ai, bi in zip(alpha, beta)):
                g.add_edge(grid_node_id(alpha), grid_node_id(beta), directed=True)
    return CutInstance(
        graph=g,
        mode=VERTEX,
        problem=Multicut(tuple(pairs)),
        provenance={"generator": "saks", "params": {"r": r, "k": k}},
    )


def _step_compatible(x: Sequence[Atom], y: Sequence[Atom], r: int) -> bool:
    """Coordinatewise: star on either side, or increment mod r."""
    for xj, yj in zip(x, y):
        if xj == STAR or yj == STAR:
            continue
        if yj != (xj + 1) % r:
            return False
    return True


def _equal_compatible(x: Sequence[Atom], y: Sequence[Atom]) -> bool:
    for xj, yj in zip(x, y):
        if xj == STAR or yj == STAR:
            continue
        if yj != xj:
            return False
    return True


def build_dict_multicut(
    p: DictParamsM, *, max_nodes: int = DEFAULT_MAX_NODES
) -> CutInstance:
    """Multicut test: each grid point of the gap instance carries a
    hypercube over (*, 0..r-1)^R; grid moves must advance every hypercube
    coordinate by one (stars are wild)."""
    _guard_nodes(p.r**p.k * (p.r + 1) ** p.R + 2 * p.k, max_nodes)
    space = star_space(p.r, p.eps)
    points = list(itertools.product(space.atoms, repeat=p.R))
    alphas = list(itertools.product(range(1, p.r + 1), repeat=p.k))
    g = WeightedGraph()
    pairs = []
    for i in range(1, p.k + 1):
        g.add_node(f"s{i}", None)
        g.add_node(f"t{i}", None)
        pairs.append((f"s{i}", f"t{i}"))
    for alpha in alphas:
        for x in points:
            g.add_node(grid_node_id(alpha, x), product_mass(space, x))
    for i in range(1, p.k + 1):
        for alpha in alphas:
            if alpha[i - 1] == 1:
                for x in points:
                    g.add_edge(f"s{i}", grid_node_id(alpha, x), directed=True)
            if alpha[i - 1] == p.r:
                for x in points:
                    g.add_edge(grid_node_id(alpha, x), f"t{i}", directed=True)
    for alpha in alphas:
        for beta in alphas:
            if alpha == beta:
                continue
            if not all(abs(ai - bi) <= 1 for ai, bi in zip(alpha, beta)):
                continue
            for x in points:
                for y in points:
                    if _step_compatible(x, y, p.r):
                        g.add_edge(
                            grid_node_id(alpha, x),
                            grid_node_id(beta, y),
                            directed=True,
                        )
    return CutInstance(
        graph=g,
        mode=VERTEX,
        problem=Multicut(tuple(pairs)),
        provenance={
            "generator": "dict_multicut",
            "params": {"r": p.r, "k": p.k, "R": p.R, "eps": str(p.eps)},
            "dictator_cut": "nodes with x_q in {*, 0}",
        },
    )


def build_dict_edge(p: DictParamsE, *, max_nodes: int = DEFAULT_MAX_NODES) -> CutInstance:
    """Edge-cut length test: b+1 layers of hypercubes over (0..r-1)^R,
    uncuttable long edges of length a between equal points, and short
    unit edges weighted by the product successor noise."""
    _guard_nodes((p.b + 1) * p.r**p.R + 2, max_nodes)
    space = uniform_cycle_space(p.r)
    noise = edge_noise_space(p.r)
    points = list(itertools.product(space.atoms, repeat=p.R))
    g = WeightedGraph()
    g.add_node("s", None)
    g.add_node("t", None)
    for i in range(p.b + 1):
        for x in points:
            g.add_node(layer_node_id(i, x), None)
    for x in points:
        g.add_edge("s", layer_node_id(0, x), directed=False, length=1, weight=None)
        g.add_edge(layer_node_id(p.b, x), "t", directed=False, length=1, weight=None)
    for i in range(p.b):
        for x in points:
            g.add_edge(
                layer_node_id(i, x),
                layer_node_id(i + 1, x),
                directed=False,
                length=p.a,
                weight=None,
            )
        for x in points:
            for y in points:
                g.add_edge(
                    layer_node_id(i, x),
                    layer_node_id(i + 1, y),
                    directed=False,
                    length=1,
                    weight=noise.product_pair_mass(x, y),
                )
    bound = max(1, p.a * (p.b - p.r + 1))
    return CutInstance(
        graph=g,
        mode=EDGE,
        problem=LengthBound("s", "t", bound),
        provenance={
            "generator": "dict_edge",
            "params": {"a": p.a, "b": p.b, "r": p.r, "R": p.R},
            "dictator_cut": "short edges with y_q != x_q+1 mod r, or (x_q,y_q) = (0,1)",
        },
    )


def build_dict_vertex(
    p: DictParamsV, *, max_nodes: int = DEFAULT_MAX_NODES
) -> CutInstance:
    """Vertex-cut length test: layers over (*, 0..r-1)^R joined by unit
    edges between successor-compatible points, long skip edges of length
    (j-i)a, and terminal edges whose lengths grow with the layer index."""
    _guard_nodes((p.b + 1) * (p.r + 1) ** p.R + 2, max_nodes)
    space = star_space(p.r, p.eps)
    points = list(itertools.product(space.atoms, repeat=p.R))
    g = WeightedGraph()
    g.add_node("s", None)
    g.add_node("t", None)
    for i in range(p.b + 1):
        for x in points:
            g.add_node(layer_node_id(i, x), product_mass(space, x))
    for i in range(p.b + 1):
        for x in points:
            g.add_edge(
                "s", layer_node_id(i, x), directed=False, length=p.a * i + 1, weight=None
            )
            g.add_edge(
                layer_node_id(i, x),
                "t",
                directed=False,
                length=(p.b - i) * p.a + 1,
                weight=None,
            )
    for i in range(p.b):
        for x in points:
            for y in points:
                if _step_compatible(x, y, p.r):
                    g.add_edge(
                        layer_node_id(i, x),
                        layer_node_id(i + 1, y),
                        directed=False,
                        length=1,
                        weight=None,
                    )
    for i in range(p.b + 1):
        for j in range(i + 2, p.b + 1):
            for x in points:
                for y in points:
                    if _step_compatible(x, y, p.r):
                        g.add_edge(
                            layer_node_id(i, x),
                            layer_node_id(j, y),
                            directed=False,
                            length=(j - i) * p.a,
                            weight=None,
                        )
    bound = max(1, p.a * (p.b - p.r + 2))
    return CutInstance(
        graph=g,
        mode=VERTEX,
        problem=LengthBound("s", "t", bound),
        provenance={
            "generator": "dict_vertex",
            "params": {"a": p.a, "b": p.b, "r": p.r, "R": p.R, "eps": str(p.eps)},
            "dictator_cut": "nodes with x_q in {*, 0}",
        },
    )


def build_dict_rmfc(
    p: DictParamsF,
    *,
    max_nodes: int = DEFAULT_MAX_NODES,
    max_depth: int = DEFAULT_MAX_FIRE_DEPTH,
) -> CutInstance:
    """Fire-containment test: layers 1..b over (*, 1..B)^R, edges between
    equal-or-star compatible points, layer i weighted by factor i."""
    if p.b > max_depth:
        raise SizeGuard(f"b = {p.b} exceeds depth cap {max_depth}")
    big_b = p.big_b
    _guard_nodes(p.b * (big_b + 1) ** p.R + 2, max_nodes)
    space = fire_space(big_b, p.eps)
    points = list(itertools.product(space.atoms, repeat=p.R))
    g = WeightedGraph()
    g.add_node("s", None)
    g.add_node("t", None)
    for i in range(1, p.b + 1):
        for x in points:
            g.add_node(layer_node_id(i, x), i * product_mass(space, x))
    for x in points:
        g.add_edge("s", layer_node_id(1, x), directed=False)
        g.add_edge(layer_node_id(p.b, x), "t", directed=False)
    for i in range(1, p.b):
        for x in points:
            for y in points:
                if _equal_compatible(x, y):
                    g.add_edge(
                        layer_node_id(i, x), layer_node_id(i + 1, y), directed=False
                    )
    return CutInstance(
        graph=g,
        mode=VERTEX,
        problem=Rmfc("s", frozenset({"t"})),
        provenance={
            "generator": "dict_rmfc",
            "params": {"b": p.b, "R": p.R, "eps": str(p.eps)},
            "dictator_cut": "day i saves nodes with x_q = * or B_(i-1) < x_q <= B_i",
        },
    )


GENERATORS = {
    "saks": build_saks_gap,
    "dict_multicut": build_dict_multicut,
    "dict_edge": build_dict_edge,
    "dict_vertex": build_dict_vertex,
    "dict_rmfc": build_dict_rmfc,
}


def params_from_dict(kind: str, d) -> "DictParamsM | DictParamsE | DictParamsV | DictParamsF":
    """Rebuild a parameter record from an instance's provenance dict."""
    if kind == "dict_multicut":
        return DictParamsM(
            int(d["r"]), int(d["k"]), int(d["R"]), Fraction(str(d["eps"]))
        )
    if kind == "dict_edge":
        return DictParamsE(int(d["a"]), int(d["b"]), int(d["r"]), int(d["R"]))
    if kind == "dict_vertex":
        return DictParamsV(
            int(d["a"]), int(d["b"]), int(d["r"]), int(d["R"]), Fraction(str(d["eps"]))
        )
    if kind == "dict_rmfc":
        return DictParamsF(int(d["b"]), int(d["R"]), Fraction(str(d["eps"])))
    raise UnknownGenerator(f"unknown test kind {kind!r}")


# -- dictator cuts ------------------------------------------------------------


def dictator_cut(
    kind: str,
    params: DictParamsM | DictParamsE | DictParamsV | DictParamsF,
    q: int,
    instance: CutInstance | None = None,
) -> CutSolution | Schedule:
    """The coordinate-q cut of the given test, with exact rational cost.

    ``q`` is 0-based. For the edge test the elements are edge indices of
    the built instance; pass ``instance`` to reuse an existing build.
    """
    if not 0 <= q < params.R:
        raise CoordinateOutOfRange(f"q = {q} outside 0..{params.R - 1}")
    if kind == "dict_multicut":
        assert isinstance(params, DictParamsM)
        inst = instance if instance is not None else build_dict_multicut(params)
        return _vertex_star_zero_cut(inst, q)
    if kind == "dict_vertex":
        assert isinstance(params, DictParamsV)
        inst = instance if instance is not None else build_dict_vertex(params)
        return _vertex_star_zero_cut(inst, q)
    if kind == "dict_edge":
        assert isinstance(params, DictParamsE)
        inst = instance if instance is not None else build_dict_edge(params)
        return _edge_break_cut(inst, params, q)
    if kind == "dict_rmfc":
        assert isinstance(params, DictParamsF)
        inst = instance if instance is not None else build_dict_rmfc(params)
        return _fire_schedule(inst, params, q)
    raise UnknownGenerator(f"unknown test kind {kind!r}")


def _vertex_star_zero_cut(inst: CutInstance, q: int) -> CutSolution:
    # shared by the multicut and vertex length tests: x_q in {*, 0}
    elements = set()
    cost = Fraction(0)
    g = inst.graph
    terminals = set(inst.terminals())
    for v in g.nodes:
        if v in terminals:
            continue
        _, x = split_block_point(v)
        if x[q] in (STAR, 0):
            elements.add(v)
            cost += g.node_weight(v)
    return CutSolution(frozenset(elements), cost)


def _edge_break_cut(inst: CutInstance, p: DictParamsE, q: int) -> CutSolution:
    g = inst.graph
    elements: set[int] = set()
    cost = Fraction(0)
    points = list(itertools.product(range(p.r), repeat=p.R))
    for i in range(p.b):
        for x in points:
            for y in points:
                broken = y[q] != (x[q] + 1) % p.r or (x[q], y[q]) == (0, 1)
                if not broken:
                    continue
                hits = [
                    idx
                    for idx in g.find_edges(
                        layer_node_id(i, x), layer_node_id(i + 1, y), length=1
                    )
                    if g.edges[idx].weight is not None
                ]
                assert len(hits) == 1
                elements.add(hits[0])
                cost += g.edges[hits[0]].weight
    return CutSolution(frozenset(elements), cost)


def _fire_schedule(inst: CutInstance, p: DictParamsF, q: int) -> Schedule:
    g = inst.graph
    thresholds = fire_thresholds(p.b)
    days = []
    costs = []
    points = list(itertools.product(fire_space(p.big_b, p.eps).atoms, repeat=p.R))
    for i in range(1, p.b + 1):
        day = set()
        cost = Fraction(0)
        for x in points:
            xq = x[q]
            if xq == STAR or thresholds[i - 1] + 1 <= xq <= thresholds[i]:
                vid = layer_node_id(i, x)
                day.add(vid)
                cost += g.node_weight(vid)
        days.append(frozenset(day))
        costs.append(cost)
    return Schedule(tuple(days), tuple(costs))
