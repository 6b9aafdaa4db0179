"""Independent brute-force oracles used by the test suite.

These deliberately avoid the solver code paths they check: schedules are
enumerated outright and scored through the physical link model, LP optima come
from basic-solution enumeration, and power questions fall back to grid search.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from v2vsched.linkmodel import PowerAllocation, Schedule, evaluate
from v2vsched.scenario import Scenario


def per_slot_patterns(scenario: Scenario, p_bar_col: np.ndarray) -> list[np.ndarray]:
    """All feasible one-timeslot 0/1 grids (N x F) under the power budget.

    p_bar_col is the per-vehicle fixed power for this timeslot; the budget
    sum_f p_bar * x <= p_max caps how many slots each vehicle may use.
    """
    n, f = scenario.n, scenario.f
    p_max = scenario.params.p_max
    per_vue: list[list[tuple[int, ...]]] = []
    for i in range(n):
        if p_bar_col[i] <= 0:
            budget = f
        else:
            budget = int(math.floor(p_max / p_bar_col[i] + 1e-9))
        rows = [
            bits
            for bits in itertools.product((0, 1), repeat=f)
            if sum(bits) <= budget
        ]
        per_vue.append(rows)
    patterns = []
    for combo in itertools.product(*per_vue):
        patterns.append(np.array(combo, dtype=bool))
    return patterns


def best_schedule_bruteforce(
    scenario: Scenario,
    p_bar: np.ndarray,
    non_overlap: bool = False,
    max_one_rb: bool = False,
    half_duplex: bool = False,
) -> tuple[int, Schedule]:
    """Exhaustive optimum of the fixed-power scheduling problem.

    Enumerates per-timeslot patterns once each (interference never crosses
    timeslots), then maximizes the union of per-slot link successes over all
    pattern assignments.
    """
    n, f, t_n = scenario.n, scenario.f, scenario.t
    links = scenario.links
    link_index = {lk: a for a, lk in enumerate(links)}
    per_t_patterns: list[list[np.ndarray]] = []
    per_t_masks: list[list[int]] = []
    for t in range(t_n):
        pats = per_slot_patterns(scenario, p_bar[:, t])
        if max_one_rb:
            pats = [p for p in pats if (p.sum(axis=1) <= 1).all()]
        if non_overlap:
            pats = [p for p in pats if (p.sum(axis=0) <= 1).all()]
        masks = []
        for pat in pats:
            x = pat[:, :, None]
            p = np.where(x, p_bar[:, None, t : t + 1], 0.0)
            out = evaluate(
                scenario, Schedule(x=x), PowerAllocation(p=p), half_duplex=half_duplex
            )
            bits = 0
            for a, lk in enumerate(links):
                if out.z[lk]:
                    bits |= 1 << a
            masks.append(bits)
        per_t_patterns.append(pats)
        per_t_masks.append(masks)
    best_val = -1
    best_choice = None
    for choice in itertools.product(*[range(len(p)) for p in per_t_patterns]):
        bits = 0
        for t, c in enumerate(choice):
            bits |= per_t_masks[t][c]
        val = bin(bits).count("1")
        if val > best_val:
            best_val = val
            best_choice = choice
    x = np.zeros((n, f, t_n), dtype=bool)
    for t, c in enumerate(best_choice):
        x[:, :, t] = per_t_patterns[t][c]
    return best_val, Schedule(x=x)


def lp_vertex_oracle(a, rel, rhs, c, lb, ub) -> tuple[bool, float]:
    """Best objective over all basic solutions of [A | I] (bounded columns at bounds)."""
    m, n = a.shape
    slack_lb = np.zeros(m)
    slack_ub = np.zeros(m)
    for i, r in enumerate(rel):
        if r == "<=":
            slack_lb[i], slack_ub[i] = 0.0, math.inf
        elif r == ">=":
            slack_lb[i], slack_ub[i] = -math.inf, 0.0
    a_full = np.hstack([a, np.eye(m)])
    lo = np.concatenate([lb, slack_lb])
    up = np.concatenate([ub, slack_ub])
    ntot = n + m
    best = -math.inf
    feasible = False
    for basis in itertools.combinations(range(ntot), m):
        bmat = a_full[:, basis]
        if abs(np.linalg.det(bmat)) < 1e-10:
            continue
        nb = [j for j in range(ntot) if j not in basis]
        choices = []
        for j in nb:
            opts = []
            if math.isfinite(lo[j]):
                opts.append(lo[j])
            if math.isfinite(up[j]) and up[j] != lo[j]:
                opts.append(up[j])
            choices.append(opts or [0.0])
        for assign in itertools.product(*choices):
            xn = np.array(assign)
            xb = np.linalg.solve(bmat, rhs - a_full[:, nb] @ xn)
            bidx = list(basis)
            if (xb < lo[bidx] - 1e-9).any() or (xb > up[bidx] + 1e-9).any():
                continue
            feasible = True
            x = np.zeros(ntot)
            x[bidx] = xb
            x[nb] = xn
            best = max(best, float(c @ x[:n]))
    return feasible, best


def best_power_pair_grid(scenario: Scenario, schedule: Schedule, steps: int = 200) -> int:
    """Two-vehicle power grid search: best link count over a steps x steps grid."""
    p_max = scenario.params.p_max
    grid = np.linspace(0.0, p_max, steps)
    x = schedule.x
    slots = [tuple(np.argwhere(x[i]).ravel()) for i in range(2)]
    best = 0
    for p0 in grid:
        for p1 in grid:
            p = np.zeros_like(x, dtype=float)
            if slots[0]:
                p[0, slots[0][0], slots[0][1]] = p0
            if slots[1]:
                p[1, slots[1][0], slots[1][1]] = p1
            xs = x & (p > 0)
            out = evaluate(scenario, Schedule(x=xs), PowerAllocation(p=np.where(xs, p, 0.0)))
            best = max(best, out.objective)
    return best
