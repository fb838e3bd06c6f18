"""Exact solver for the per-epoch assignment LP.

The LP routes every open bug to a developer class or to postponement and
every available developer to a bug or to idleness:

    min  sum c[d,b] y[d,b] + sum f[b] p[b] + sum g[d] h[d]
    s.t. sum_b y[d,b] + h[d] = avail[d]      (developer rows)
         sum_d y[d,b] + p[b] = open[b]       (bug rows)
         y, p, h >= 0

The constraint matrix is totally unimodular, so the LP has integral optima.
We solve it as a balanced transportation problem (developer classes plus a
virtual postpone source versus bug attributes plus a virtual idle sink) with
the classical tree simplex, using Bland's rule for anti-cycling.  Node
potentials give exact dual prices for both constraint families, which is what
the value-function trainer consumes.

``brute_force_solve`` enumerates all feasible integral plans on tiny
instances and serves as the independent optimality oracle in the tests.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Mapping

from .domain import (
    ArcCostError,
    BugAttr,
    DecisionPlan,
    DevAttr,
    InstanceTooLargeError,
    SystemState,
)

# Reduced costs below -PIVOT_EPS trigger a pivot; at termination every
# non-basic arc therefore satisfies complementary slackness to PIVOT_EPS,
# an order of magnitude tighter than the 1e-9 the tests demand.
PIVOT_EPS = 1e-10
_MAX_PIVOTS = 100_000


@dataclass(frozen=True)
class ArcCosts:
    """Objective coefficients for one epoch's LP."""

    assign: Mapping[tuple[DevAttr, BugAttr], float]
    postpone: Mapping[BugAttr, float]
    idle: Mapping[DevAttr, float]


@dataclass(frozen=True)
class SolverResult:
    plan: DecisionPlan
    objective: float
    dev_duals: Mapping[DevAttr, float]
    bug_duals: Mapping[BugAttr, float]


def plan_cost(plan: DecisionPlan, costs: ArcCosts) -> float:
    """Price a plan under arbitrary arc costs (decision-independent)."""
    total = 0.0
    for b, p in sorted(plan.postpone.items()):
        total += costs.postpone[b] * p
    for (d, b), y in sorted(plan.assign.items()):
        total += costs.assign[(d, b)] * y
    for d, h in sorted(plan.idle.items()):
        total += costs.idle[d] * h
    return total


def solve(state: SystemState, costs: ArcCosts) -> SolverResult:
    """Optimal integral plan plus dual prices for both constraint families.

    Tie-breaking is deterministic in the sorted order of attribute keys, so
    repeated solves of the same instance return the same plan.
    """
    devs = sorted(state.available_devs().items())
    bugs = sorted(state.open_bugs().items())

    for d, _ in devs:
        for b, _ in bugs:
            if (d, b) not in costs.assign:
                raise ArcCostError(f"missing assignment cost for {(d, b)}")
        if d not in costs.idle:
            raise ArcCostError(f"missing idle cost for {d}")
    for b, _ in bugs:
        if b not in costs.postpone:
            raise ArcCostError(f"missing postponement cost for {b}")

    if not devs and not bugs:
        return SolverResult(
            plan=DecisionPlan(assign={}, postpone={}, idle={}),
            objective=0.0,
            dev_duals={},
            bug_duals={},
        )
    if not bugs:
        idle = {d: n for d, n in devs}
        plan = DecisionPlan(assign={}, postpone={}, idle=idle)
        return SolverResult(
            plan=plan,
            objective=plan_cost(plan, costs),
            dev_duals={d: costs.idle[d] for d, _ in devs},
            bug_duals={},
        )
    if not devs:
        postpone = {b: m for b, m in bugs}
        plan = DecisionPlan(assign={}, postpone=postpone, idle={})
        return SolverResult(
            plan=plan,
            objective=plan_cost(plan, costs),
            dev_duals={},
            bug_duals={b: costs.postpone[b] for b, _ in bugs},
        )

    n_dev = len(devs)
    n_bug = len(bugs)
    total_devs = sum(n for _, n in devs)
    total_bugs = sum(m for _, m in bugs)

    # Rows: developer classes then the postpone source.
    # Columns: bug attributes then the idle sink.
    rows = n_dev + 1
    cols = n_bug + 1
    supply = [n for _, n in devs] + [total_bugs]
    demand = [m for _, m in bugs] + [total_devs]
    cost = [[0.0] * cols for _ in range(rows)]
    for i, (d, _) in enumerate(devs):
        for j, (b, _) in enumerate(bugs):
            cost[i][j] = costs.assign[(d, b)]
        cost[i][n_bug] = costs.idle[d]
    for j, (b, _) in enumerate(bugs):
        cost[n_dev][j] = costs.postpone[b]
    cost[n_dev][n_bug] = 0.0

    flow, basis = _initial_basis(supply, demand, cost)
    basis = _tree_simplex(cost, flow, basis, rows, cols)

    # Potentials of the balanced reformulation map onto duals of the original
    # two constraint families; u[postpone] + v[idle] = 0 holds whenever any
    # assignment flows, which is exactly when tightness of the y-arcs matters.
    u, v = _potentials(cost, basis, rows, cols)
    dev_duals = {devs[i][0]: u[i] + v[n_bug] for i in range(n_dev)}
    bug_duals = {bugs[j][0]: u[n_dev] + v[j] for j in range(n_bug)}

    assign: dict[tuple[DevAttr, BugAttr], int] = {}
    postpone: dict[BugAttr, int] = {}
    idle: dict[DevAttr, int] = {}
    for i in range(n_dev):
        for j in range(n_bug):
            if flow[i][j] > 0:
                assign[(devs[i][0], bugs[j][0])] = flow[i][j]
        if flow[i][n_bug] > 0:
            idle[devs[i][0]] = flow[i][n_bug]
    for j in range(n_bug):
        if flow[n_dev][j] > 0:
            postpone[bugs[j][0]] = flow[n_dev][j]

    plan = DecisionPlan(assign=assign, postpone=postpone, idle=idle)
    return SolverResult(
        plan=plan,
        objective=plan_cost(plan, costs),
        dev_duals=dev_duals,
        bug_duals=bug_duals,
    )


def _initial_basis(supply, demand, cost):
    """Greedy minimum-cost start: repeatedly saturate the cheapest open cell.

    Produces a spanning-tree basis of exactly rows+cols-1 cells (degenerate
    zero-flow cells included), which the simplex then improves.
    """
    rows, cols = len(supply), len(demand)
    s = list(supply)
    d = list(demand)
    row_open = [True] * rows
    col_open = [True] * cols
    flow = [[0] * cols for _ in range(rows)]
    basis: list[tuple[int, int]] = []
    open_rows = rows
    open_cols = cols
    while open_rows > 0 and open_cols > 0:
        best = None
        for i in range(rows):
            if not row_open[i]:
                continue
            ci = cost[i]
            for j in range(cols):
                if col_open[j] and (best is None or ci[j] < best[0]):
                    best = (ci[j], i, j)
        _, i, j = best
        q = min(s[i], d[j])
        flow[i][j] = q
        basis.append((i, j))
        s[i] -= q
        d[j] -= q
        if s[i] == 0 and (open_rows > 1 or open_cols == 1):
            row_open[i] = False
            open_rows -= 1
        elif d[j] == 0:
            col_open[j] = False
            open_cols -= 1
    return flow, basis


def _potentials(cost, basis, rows, cols):
    """Node potentials from the basis tree: u[i] + v[j] = cost[i][j] on
    basic cells, anchored at u[0] = 0."""
    adj_row = [[] for _ in range(rows)]
    adj_col = [[] for _ in range(cols)]
    for (i, j) in basis:
        adj_row[i].append(j)
        adj_col[j].append(i)
    u = [None] * rows
    v = [None] * cols
    u[0] = 0.0
    stack = [("r", 0)]
    while stack:
        kind, k = stack.pop()
        if kind == "r":
            for j in adj_row[k]:
                if v[j] is None:
                    v[j] = cost[k][j] - u[k]
                    stack.append(("c", j))
        else:
            for i in adj_col[k]:
                if u[i] is None:
                    u[i] = cost[i][k] - v[k]
                    stack.append(("r", i))
    return u, v


def _find_cycle(basis_set, rows, cols, enter):
    """Unique cycle closed by the entering cell in the basis tree, returned
    as the cell sequence starting with the entering cell."""
    adj_row = [[] for _ in range(rows)]
    adj_col = [[] for _ in range(cols)]
    for (i, j) in basis_set:
        adj_row[i].append(j)
        adj_col[j].append(i)
    ei, ej = enter
    # Path from column node ej to row node ei through the tree.
    parent: dict[tuple[str, int], tuple[str, int]] = {("c", ej): ("c", ej)}
    stack = [("c", ej)]
    while stack:
        kind, k = stack.pop()
        if (kind, k) == ("r", ei):
            break
        if kind == "c":
            for i in adj_col[k]:
                if ("r", i) not in parent:
                    parent[("r", i)] = ("c", k)
                    stack.append(("r", i))
        else:
            for j in adj_row[k]:
                if ("c", j) not in parent:
                    parent[("c", j)] = ("r", k)
                    stack.append(("c", j))
    path_nodes = [("r", ei)]
    while path_nodes[-1] != ("c", ej):
        path_nodes.append(parent[path_nodes[-1]])
    cells = [enter]
    for a, b in zip(path_nodes, path_nodes[1:]):
        if a[0] == "r":
            cells.append((a[1], b[1]))
        else:
            cells.append((b[1], a[1]))
    return cells


def _tree_simplex(cost, flow, basis, rows, cols):
    """Pivot until no arc prices favorably; returns the final basis set.

    Entering arc: first (row-major) with reduced cost below -PIVOT_EPS.
    Leaving arc: lexicographically first among the minimum-flow givers.
    Index-based selection on both sides is Bland's rule, so no cycling.
    """
    basis_set = set(basis)
    for _ in range(_MAX_PIVOTS):
        u, v = _potentials(cost, basis_set, rows, cols)
        enter = None
        for i in range(rows):
            ci = cost[i]
            ui = u[i]
            for j in range(cols):
                if (i, j) not in basis_set and ci[j] - ui - v[j] < -PIVOT_EPS:
                    enter = (i, j)
                    break
            if enter:
                break
        if enter is None:
            return basis_set
        cycle = _find_cycle(basis_set, rows, cols, enter)
        # Entering cell gains flow; cells alternate sign around the cycle.
        givers = cycle[1::2]
        theta = min(flow[i][j] for i, j in givers)
        leave = min((ij for ij in givers if flow[ij[0]][ij[1]] == theta))
        for k, (i, j) in enumerate(cycle):
            if k % 2 == 0:
                flow[i][j] += theta
            else:
                flow[i][j] -= theta
        basis_set.discard(leave)
        basis_set.add(enter)
    raise AssertionError("transportation simplex failed to terminate")  # pragma: no cover


def enumerate_plans(state: SystemState) -> Iterator[DecisionPlan]:
    """All feasible integral plans for a state, in deterministic order."""
    devs = sorted(state.available_devs().items())
    bugs = sorted(state.open_bugs().items())
    dev_attrs = [d for d, _ in devs]
    caps = [n for _, n in devs]

    def distributions(units: int, caps_left: list[int]) -> Iterator[list[int]]:
        # Ways to split `units` among the developer classes (rest postponed).
        if not caps_left:
            yield []
            return
        for take in range(min(units, caps_left[0]) + 1):
            for rest in distributions(units - take, caps_left[1:]):
                yield [take] + rest

    def rec(idx: int, caps_left: list[int], assign, postpone):
        if idx == len(bugs):
            idle = {
                dev_attrs[i]: caps_left[i]
                for i in range(len(dev_attrs))
                if caps_left[i] > 0
            }
            yield DecisionPlan(
                assign=dict(assign), postpone=dict(postpone), idle=idle
            )
            return
        battr, m = bugs[idx]
        for split in distributions(m, caps_left):
            taken = sum(split)
            new_caps = [caps_left[i] - split[i] for i in range(len(split))]
            added = {}
            for i, y in enumerate(split):
                if y > 0:
                    added[(dev_attrs[i], battr)] = y
            post = dict(postpone)
            if m - taken > 0:
                post[battr] = m - taken
            yield from rec(idx + 1, new_caps, {**assign, **added}, post)

    yield from rec(0, caps, {}, {})


def brute_force_solve(state: SystemState, costs: ArcCosts) -> SolverResult:
    """Exhaustive minimum over all feasible plans; the test oracle.

    Only defined on instances with at most 8 open bugs and 8 available
    developers.  Duals are not produced.
    """
    if state.total_bugs > 8 or sum(state.available_devs().values()) > 8:
        raise InstanceTooLargeError(
            "brute force capped at 8 bugs and 8 available developers"
        )
    best_plan = None
    best_cost = None
    for plan in enumerate_plans(state):
        c = plan_cost(plan, costs)
        if best_cost is None or c < best_cost:
            best_cost = c
            best_plan = plan
    return SolverResult(
        plan=best_plan, objective=best_cost, dev_duals={}, bug_duals={}
    )
