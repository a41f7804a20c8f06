"""Exact rational LP engine and the cutting-plane drivers for the
path-covering relaxations, producing integrality-gap reports.

Everything here is Fraction arithmetic end to end; gap reports are exact
enough to serve as frozen test fixtures.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping

from .errors import Infeasible, RowPoolExceeded, SizeGuard, Unbounded
from .graphs import (
    CutInstance,
    Element,
    LengthBound,
    Multicut,
    Path,
    constrained_min_weight_path,
    min_weight_path,
    rational_str,
)

ROW_POOL_CAP = 10_000
DFS_STEP_CAP = 2_000_000


@dataclass
class LPProblem:
    """min c.x subject to rows A x >= rhs and x >= 0, all rational."""

    var_order: list[Element]
    objective: dict[Element, Fraction]
    rows: list[dict[Element, Fraction]] = field(default_factory=list)
    rhs: list[Fraction] = field(default_factory=list)

    def add_row(self, coeffs: Mapping[Element, Fraction], rhs: Fraction) -> None:
        row = {v: Fraction(c) for v, c in coeffs.items() if c != 0}
        for v in row:
            if v not in self.objective:
                raise ValueError(f"row references undeclared variable {v!r}")
        self.rows.append(row)
        self.rhs.append(Fraction(rhs))


def simplex_solve(lp: LPProblem) -> tuple[Fraction, dict[Element, Fraction]]:
    """Exact optimum of the LP by two-phase primal simplex.

    Bland's pivoting rule (lowest eligible index enters, lowest-index
    basic variable breaks ratio ties) guarantees termination. Raises
    Infeasible or Unbounded accordingly.
    """
    n = len(lp.var_order)
    m = len(lp.rows)
    var_pos = {v: j for j, v in enumerate(lp.var_order)}
    cost = [Fraction(lp.objective[v]) for v in lp.var_order]
    if m == 0:
        if any(c < 0 for c in cost):
            raise Unbounded("negative cost with no constraints")
        return Fraction(0), {v: Fraction(0) for v in lp.var_order}

    # columns: structural | surplus | artificial; rows become equalities
    total = n + m + m
    table: list[list[Fraction]] = []
    basis: list[int] = []
    for i, row in enumerate(lp.rows):
        line = [Fraction(0)] * (total + 1)
        for v, c in row.items():
            line[var_pos[v]] = Fraction(c)
        line[n + i] = Fraction(-1)
        line[total] = Fraction(lp.rhs[i])
        if line[total] < 0:
            line = [-c for c in line]
        line[n + m + i] = Fraction(1)
        table.append(line)
        basis.append(n + m + i)

    def pivot(row: int, col: int) -> None:
        piv = table[row][col]
        table[row] = [c / piv for c in table[row]]
        for r in range(len(table)):
            if r != row and table[r][col] != 0:
                f = table[r][col]
                table[r] = [a - f * b for a, b in zip(table[r], table[row])]
        basis[row] = col

    def run(obj: list[Fraction], allowed: int) -> list[Fraction]:
        # reduced-cost row for the current basis; z[total] is -objective
        z = list(obj) + [Fraction(0)]
        for r in range(len(table)):
            cb = obj[basis[r]]
            if cb != 0:
                z = [a - cb * b for a, b in zip(z, table[r])]
        while True:
            enter = -1
            for j in range(allowed):
                if z[j] < 0:
                    enter = j
                    break
            if enter < 0:
                return z
            leave = -1
            best: Fraction | None = None
            for r in range(len(table)):
                if table[r][enter] > 0:
                    ratio = table[r][total] / table[r][enter]
                    if (
                        best is None
                        or ratio < best
                        or (ratio == best and basis[r] < basis[leave])
                    ):
                        best = ratio
                        leave = r
            if leave < 0:
                raise Unbounded("unbounded improving direction")
            pivot(leave, enter)
            f = z[enter]
            z = [a - f * b for a, b in zip(z, table[leave])]

    phase1 = [Fraction(0)] * (n + m) + [Fraction(1)] * m
    z1 = run(phase1, total)
    if -z1[total] > 0:
        raise Infeasible("phase-1 optimum positive")
    # pivot leftover artificials out; drop rows that are redundant
    for r in range(len(table) - 1, -1, -1):
        if basis[r] < n + m:
            continue
        assert table[r][total] == 0
        for j in range(n + m):
            if table[r][j] != 0:
                pivot(r, j)
                break
        else:
            del table[r]
            del basis[r]

    phase2 = cost + [Fraction(0)] * m + [Fraction(0)] * m
    run(phase2, n + m)

    solution = {v: Fraction(0) for v in lp.var_order}
    for r in range(len(table)):
        if basis[r] < n:
            solution[lp.var_order[basis[r]]] = table[r][total]
    value = sum(
        (lp.objective[v] * x for v, x in solution.items()), Fraction(0)
    )
    for row, rhs in zip(lp.rows, lp.rhs):
        lhs = sum((c * solution[v] for v, c in row.items()), Fraction(0))
        assert lhs >= rhs
    return value, solution


# -- independent no-violation check ----------------------------------------


def _dfs_has_cheap_path(
    inst: CutInstance,
    s: str,
    t: str,
    x: Mapping[Element, Fraction],
    bound: int | None,
    step_cap: int = DFS_STEP_CAP,
) -> bool:
    """Exhaustive simple-path search for mass < 1 (and length < bound).

    Independent of the Dijkstra/DP separation oracles; prunes branches
    whose accumulated mass reaches 1 or whose length reaches the bound.
    """
    g = inst.graph
    mode = inst.mode

    def el_mass(el: Element) -> Fraction:
        if g.element_weight(el) is None:
            return Fraction(0)
        return x.get(el, Fraction(0))

    steps = 0
    on_path: set[str] = set()

    def dfs(v: str, length: int, mass: Fraction) -> bool:
        nonlocal steps
        steps += 1
        if steps > step_cap:
            raise SizeGuard("path enumeration exceeded its step cap")
        if mass >= 1:
            return False
        if v == t:
            return True
        on_path.add(v)
        try:
            for idx, nb in g.out_arcs(v):
                if nb in on_path:
                    continue
                nl = length + g.edges[idx].length
                if bound is not None and nl >= bound:
                    continue
                step = el_mass(idx) if mode == "edge" else el_mass(nb)
                if dfs(nb, nl, mass + step):
                    return True
            return False
        finally:
            on_path.remove(v)

    start = el_mass(s) if mode == "vertex" else Fraction(0)
    return dfs(s, 0, start)


# -- cutting-plane drivers ---------------------------------------------------


def _covering_lp(
    inst: CutInstance,
    separate: Callable[[dict[Element, Fraction]], list[Path]],
    recheck: Callable[[dict[Element, Fraction]], bool],
    row_cap: int,
) -> tuple[Fraction, dict[Element, Fraction]]:
    variables = inst.cuttable_elements()
    lp = LPProblem(
        var_order=list(variables),
        objective={v: inst.graph.element_weight(v) for v in variables},
    )
    value = Fraction(0)
    solution = {v: Fraction(0) for v in variables}
    seen_rows: set[frozenset[Element]] = set()
    while True:
        violated = separate(solution)
        if not violated:
            assert not recheck(solution), "independent separation found a violation"
            return value, solution
        added = 0
        for path in violated:
            els = frozenset(path.elements(inst.mode, inst.graph))
            assert els, "a violated path must contain cuttable elements"
            mass = sum((solution.get(e, Fraction(0)) for e in els), Fraction(0))
            assert mass < 1, "separation returned a satisfied row"
            if els in seen_rows:
                continue
            seen_rows.add(els)
            if len(lp.rows) >= row_cap:
                raise RowPoolExceeded(f"row pool exceeded {row_cap}")
            lp.add_row({e: Fraction(1) for e in els}, Fraction(1))
            added += 1
        assert added, "separation made no progress"
        new_value, solution = simplex_solve(lp)
        assert new_value >= value, "LP value decreased after adding rows"
        value = new_value


def multicut_lp(
    inst: CutInstance, *, row_cap: int = ROW_POOL_CAP
) -> tuple[Fraction, dict[Element, Fraction]]:
    """Optimal fractional covering of every terminal-pair path.

    Separation runs Dijkstra under the current solution for each pair and
    adds any path of mass below one; the final pass is re-checked by an
    independent exhaustive search.
    """
    assert isinstance(inst.problem, Multicut)
    from .solvers import _check_infeasible

    _check_infeasible(inst)
    pairs = inst.problem.pairs

    def separate(x: dict[Element, Fraction]) -> list[Path]:
        out = []
        for s, t in pairs:
            found = min_weight_path(inst.graph, s, t, x, inst.mode)
            if found is not None and found[1] < 1:
                out.append(found[0])
        return out

    def recheck(x: dict[Element, Fraction]) -> bool:
        return any(
            _dfs_has_cheap_path(inst, s, t, x, None) for s, t in pairs
        )

    return _covering_lp(inst, separate, recheck, row_cap)


def short_path_cover_lp(
    inst: CutInstance, bound: int | None = None, *, row_cap: int = ROW_POOL_CAP
) -> tuple[Fraction, dict[Element, Fraction]]:
    """Optimal fractional covering of every s-t path shorter than the bound."""
    assert isinstance(inst.problem, LengthBound)
    use = inst.problem.bound if bound is None else bound
    from .solvers import _check_infeasible

    _check_infeasible(inst, use)
    s, t = inst.problem.source, inst.problem.sink

    def separate(x: dict[Element, Fraction]) -> list[Path]:
        found = constrained_min_weight_path(inst.graph, s, t, x, use, inst.mode)
        if found is not None and found[1] < 1:
            return [found[0]]
        return []

    def recheck(x: dict[Element, Fraction]) -> bool:
        return _dfs_has_cheap_path(inst, s, t, x, use)

    return _covering_lp(inst, separate, recheck, row_cap)


# -- gap reports ---------------------------------------------------------------


@dataclass
class GapReport:
    """Exact integral optimum versus LP optimum, with their ratio."""

    lp_value: Fraction
    integral_value: Fraction
    gap: Fraction
    params: dict

    def to_json(self) -> dict:
        return {
            "lp_value": rational_str(self.lp_value),
            "integral_value": rational_str(self.integral_value),
            "gap": rational_str(self.gap),
            "params": self.params,
        }

    def csv_cells(self) -> list[str]:
        return [
            rational_str(self.lp_value),
            rational_str(self.integral_value),
            rational_str(self.gap),
        ]


def gap_report(
    inst: CutInstance,
    exact_solver: Callable[[CutInstance], object] | None = None,
    lp_solver: Callable[[CutInstance], tuple[Fraction, dict]] | None = None,
    params: dict | None = None,
) -> GapReport:
    """Run the exact solver and the LP, check integral >= LP, emit the ratio."""
    from . import solvers

    if exact_solver is None:
        exact_solver = (
            solvers.exact_min_multicut
            if isinstance(inst.problem, Multicut)
            else solvers.exact_min_length_bounded_cut
        )
    if lp_solver is None:
        lp_solver = (
            multicut_lp if isinstance(inst.problem, Multicut) else short_path_cover_lp
        )
    integral = exact_solver(inst).cost
    lp_value, _ = lp_solver(inst)
    assert integral >= lp_value
    gap = integral / lp_value if lp_value > 0 else Fraction(1)
    return GapReport(lp_value, integral, gap, params or {})
