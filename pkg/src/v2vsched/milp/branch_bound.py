"""LP-based best-first branch and bound for mixed-boolean linear programs.

Beyond the textbook loop (best bound first, most-fractional branching) the
solver defends against the numerical sensitivity of big-M rows: every integral
candidate is re-checked against the original rows with error-free summation
(exact for rows supported on boolean columns), and a candidate that fails the
re-check is not discarded silently; the search branches on an unfixed boolean
of a violated row, or prunes the node once the violated row is fully pinned
and provably broken.  Incumbents therefore never carry falsely-claimed rows,
while bound-based pruning stays sound because LP values only ever overestimate
what a subtree can achieve.
"""

from __future__ import annotations

import heapq
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .model import (
    BOOLEAN,
    GAP_LIMIT,
    INFEASIBLE,
    ITERATION_LIMIT,
    LE,
    GE,
    MilpModel,
    MilpSolution,
    OPTIMAL,
    UNBOUNDED,
    row_violation,
)
from .simplex import SimplexOptions, SimplexResult, solve_lp_arrays


@dataclass
class MilpLimits:
    """Search budgets.  Node budgets keep runs bit-reproducible; the optional
    wall-clock limit trades that away and is off by default."""

    max_nodes: int = 200_000
    abs_gap: float = 1e-6
    int_tol: float = 1e-6
    time_limit: float | None = None


@dataclass
class _Node:
    parent: "_Node | None"
    fix: tuple[int, float] | None  # (column, pinned value)
    depth: int
    bound_est: float
    warm: tuple[np.ndarray, np.ndarray] | None = None

    def bounds(self, lb0: np.ndarray, ub0: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        lb, ub = lb0.copy(), ub0.copy()
        node = self
        while node is not None:
            if node.fix is not None:
                j, v = node.fix
                lb[j] = ub[j] = v
            node = node.parent
        return lb, ub


def solve_lp(
    model: MilpModel,
    options: SimplexOptions | None = None,
    start: tuple[np.ndarray, np.ndarray] | None = None,
) -> MilpSolution:
    """LP relaxation of the model (boolean columns relaxed to their [0,1] box)."""
    arr = model.arrays()
    res = solve_lp_arrays(
        arr.a, arr.rel, arr.rhs, arr.c, arr.lb, arr.ub, arr.sense, options, start
    )
    sgn = 1.0 if arr.sense == "max" else -1.0
    if res.status == OPTIMAL:
        return MilpSolution(
            status=OPTIMAL, values=res.x, objective=res.obj, duals=res.duals, bound=res.obj
        )
    bound = math.inf * sgn if res.status != INFEASIBLE else -math.inf * sgn
    return MilpSolution(status=res.status, values=None, objective=math.nan, duals=None, bound=bound)


def _fully_pinned_violation(row, lb, ub, is_bool) -> bool:
    """True when every column of `row` is pinned and the pinned point breaks it.

    Only called for rows supported entirely on boolean columns, where the
    fixed-point residual is exact.
    """
    vals = np.empty(len(row.idx))
    for k, j in enumerate(row.idx):
        if lb[j] != ub[j] or not is_bool[j]:
            return False
        vals[k] = lb[j]
    acts = [float(a) * float(v) for a, v in zip(row.coef, vals)]
    resid = math.fsum(acts) - row.rhs
    noise = 4.0 * 2.0**-53 * (math.fsum(abs(t) for t in acts) + abs(row.rhs))
    if row.rel == LE:
        return resid > noise
    if row.rel == GE:
        return resid < -noise
    return abs(resid) > noise


def solve_milp(
    model: MilpModel,
    limits: MilpLimits | None = None,
    options: SimplexOptions | None = None,
) -> MilpSolution:
    """Exact branch-and-bound solve; returns incumbent and proven bound on budget stop."""
    limits = limits or MilpLimits()
    options = options or SimplexOptions()
    arr = model.arrays()
    sgn = 1.0 if arr.sense == "max" else -1.0
    c_int = arr.c if arr.sense == "max" else -arr.c  # internal max objective
    is_bool = arr.is_bool
    bool_cols = np.where(is_bool)[0]
    lb0, ub0 = arr.lb.copy(), arr.ub.copy()

    def lp(lb, ub, start):
        # booleans pinned at 1 are substituted into the right-hand side; this
        # cancels big-M terms out of the row arithmetic, so the slack
        # tolerances of deep nodes follow the physical scale of what remains
        ones = np.where(is_bool & (lb == ub) & (ub == 1.0))[0]
        if len(ones):
            rhs_node = arr.rhs - arr.a[:, ones].sum(axis=1)
            lb2, ub2 = lb.copy(), ub.copy()
            lb2[ones] = 0.0
            ub2[ones] = 0.0
        else:
            rhs_node, lb2, ub2 = arr.rhs, lb, ub
        res = solve_lp_arrays(arr.a, arr.rel, rhs_node, c_int, lb2, ub2, "max", options, start)
        if res.status == OPTIMAL and len(ones):
            res.x[ones] = 1.0
            res.obj += float(c_int[ones].sum())
        return res

    deadline = None if limits.time_limit is None else time.monotonic() + limits.time_limit
    root = _Node(parent=None, fix=None, depth=0, bound_est=math.inf)
    res = lp(lb0, ub0, None)
    if res.status == INFEASIBLE:
        return MilpSolution(status=INFEASIBLE, bound=-math.inf * sgn)
    if res.status == UNBOUNDED:
        return MilpSolution(status=UNBOUNDED, bound=math.inf * sgn)
    if res.status == ITERATION_LIMIT:
        return MilpSolution(status=ITERATION_LIMIT)
    root.bound_est = res.obj

    heap: list[tuple[float, int, int, _Node, SimplexResult | None]] = []
    seq = 0

    def push(node: _Node, pre: SimplexResult | None = None):
        nonlocal seq
        heapq.heappush(heap, (-node.bound_est, -node.depth, seq, node, pre))
        seq += 1

    push(root, res)

    incumbent: np.ndarray | None = None
    inc_obj = -math.inf
    nodes = 0
    unresolved = 0
    unresolved_bound = -math.inf
    budget_hit = False
    best_open = -math.inf

    while heap:
        if nodes >= limits.max_nodes:
            budget_hit = True
            break
        if deadline is not None and nodes % 256 == 0 and time.monotonic() > deadline:
            budget_hit = True
            break
        neg_bound, _, _, node, pre = heapq.heappop(heap)
        if -neg_bound <= inc_obj + limits.abs_gap:
            # best-first order: everything left is no better
            heap.clear()
            break
        lb, ub = node.bounds(lb0, ub0)
        if pre is not None:
            res = pre
        else:
            res = lp(lb, ub, node.warm)
            if res.status == ITERATION_LIMIT and node.warm is not None:
                res = lp(lb, ub, None)
        nodes += 1
        if res.status == INFEASIBLE:
            continue
        if res.status in (ITERATION_LIMIT, UNBOUNDED):
            # UNBOUNDED below the root cannot normally happen (bounds only
            # tighten); treat both as nodes we failed to resolve.
            unresolved += 1
            unresolved_bound = max(unresolved_bound, node.bound_est)
            continue
        bound = min(res.obj, node.bound_est)
        if bound <= inc_obj + limits.abs_gap:
            continue
        x = res.x
        warm = (res.vstat, res.basis)
        frac = np.abs(x[bool_cols] - np.round(x[bool_cols]))
        frac[lb[bool_cols] == ub[bool_cols]] = 0.0
        if frac.size and frac.max() > limits.int_tol:
            local = int(np.argmax(frac))  # argmax returns the first max: lowest index tie-break
            j = int(bool_cols[local])
            for v in (0.0, 1.0):
                push(_Node(parent=node, fix=(j, v), depth=node.depth + 1, bound_est=bound, warm=warm))
            continue
        # integral candidate: round booleans exactly, keep continuous values
        cand = x.copy()
        cand[bool_cols] = np.round(cand[bool_cols])
        violations = []
        for r, row in enumerate(model.constraints):
            v = row_violation(row, cand, is_bool, options.feas_tol)
            if v > 0:
                violations.append(r)
        if not violations:
            obj_cand = float(c_int @ cand)
            if obj_cand > inc_obj + 1e-12:
                inc_obj = obj_cand
                incumbent = cand
            continue
        # candidate fails the exact re-check: split on a boolean of the first
        # violated row; a row with no free boolean left is provably broken
        row = model.constraints[violations[0]]
        free = [int(j) for j in row.idx if is_bool[j] and lb[j] < ub[j]]
        if not free:
            continue
        j = free[0]
        for v in (0.0, 1.0):
            child = _Node(parent=node, fix=(j, v), depth=node.depth + 1, bound_est=bound, warm=warm)
            clb, cub = child.bounds(lb0, ub0)
            if _fully_pinned_violation(row, clb, cub, is_bool):
                continue
            push(child)

    if heap:
        best_open = max(best_open, max(-h[0] for h in heap))
    best_open = max(best_open, unresolved_bound)
    proven = not heap and not budget_hit and unresolved == 0

    if incumbent is not None:
        internal_obj = float(c_int @ incumbent)
        obj = internal_obj if arr.sense == "max" else -internal_obj
        internal_bound = internal_obj if proven else max(best_open, inc_obj)
        return MilpSolution(
            status=OPTIMAL if proven else GAP_LIMIT,
            values=incumbent,
            objective=obj,
            bound=internal_bound if arr.sense == "max" else -internal_bound,
        )
    if proven:
        return MilpSolution(status=INFEASIBLE, bound=-math.inf * sgn)
    return MilpSolution(status=GAP_LIMIT, bound=best_open if arr.sense == "max" else -best_open)
