"""Column generation for joint scheduling and power control over many timeslots.

Each column is one single-timeslot power matrix together with the link set it
physically supports.  A small LP (the master) chooses a fractional mix of at
most T columns to cover as many links as possible; its duals price a new
column through an exact single-timeslot solve with dual-weighted link values.
Generation stops when no column has positive reduced value, and the T highest
master weights pick the final timeslot assignment.

Every column's link set is re-derived through the physical oracle before it
enters the pool, and the reported objective always comes from a final
physical evaluation, so the procedure may be suboptimal but never misreports.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .formulations import JOINT, POWER_EPS, VariantFlags, build_joint, decode_solution
from .linkmodel import LinkOutcome, PowerAllocation, Schedule, evaluate
from .milp import GE, LE, MilpLimits, MilpModel, OPTIMAL, GAP_LIMIT, SimplexOptions, solve_lp, solve_milp
from .scenario import Scenario

_RC_TOL = 1e-9


@dataclass
class ColumnPool:
    """Ordered single-timeslot candidates: power matrices and their validated link sets."""

    powers: list[np.ndarray] = field(default_factory=list)
    links: list[np.ndarray] = field(default_factory=list)

    @property
    def count(self) -> int:
        return len(self.powers)

    def add(self, p: np.ndarray, z: np.ndarray) -> None:
        self.powers.append(np.asarray(p, dtype=float))
        self.links.append(np.asarray(z, dtype=bool))

    def contains(self, p: np.ndarray) -> bool:
        return any(np.array_equal(p, q) for q in self.powers)


@dataclass
class MasterState:
    """Master LP optimum: column weights, relaxed link indicators, duals."""

    w: np.ndarray
    z_prime: np.ndarray  # (N, N), zero off the intended links
    link_duals: np.ndarray  # (N, N) >= 0, zero off the intended links
    slot_dual: float
    objective: float


@dataclass
class ColgenBudgets:
    max_iterations: int = 50
    pricing_limits: MilpLimits = field(default_factory=lambda: MilpLimits(max_nodes=200_000, abs_gap=1e-9))
    lp_options: SimplexOptions = field(default_factory=SimplexOptions)


@dataclass
class ColgenResult:
    schedule: Schedule
    powers: PowerAllocation
    outcome: LinkOutcome
    master: MasterState
    pool: ColumnPool
    trace: list[tuple[int, int, float, float]]  # (iteration, pool size, master obj, reduced value)
    converged: bool


def solve_master(
    pool: ColumnPool, t_total: int, scenario: Scenario, options: SimplexOptions | None = None
) -> MasterState:
    """LP relaxation of the column-selection problem, with duals for pricing.

    Link rows are written as  sum_q Z~q[i,j] w_q - Z'[i,j] >= 0, so their raw
    duals are non-positive under the max sense; they are returned negated so
    that pricing weights are non-negative, matching the cardinality row's dual.
    """
    if pool.count < 1:
        raise ValidationError("master needs at least one column")
    n = scenario.n
    model = MilpModel("max", name="master")
    w_cols = [model.add_var(f"w{q}", lb=0.0, ub=1.0) for q in range(pool.count)]
    links = scenario.links
    z_cols = {lk: model.add_var(f"Zp[{lk[0]},{lk[1]}]", lb=0.0, ub=1.0, obj=1.0) for lk in links}
    link_rows = {}
    for (i, j) in links:
        terms = [(w_cols[q], float(pool.links[q][i, j])) for q in range(pool.count)]
        terms.append((z_cols[(i, j)], -1.0))
        link_rows[(i, j)] = model.add_constr(terms, GE, 0.0, name=f"cover[{i},{j}]")
    card_row = model.add_constr([(c, 1.0) for c in w_cols], LE, float(t_total), name="slots")
    sol = solve_lp(model, options)
    if sol.status != OPTIMAL:
        raise ValidationError(f"master LP did not solve: {sol.status}")
    w = np.array([sol.values[c] for c in w_cols])
    z_prime = np.zeros((n, n))
    link_duals = np.zeros((n, n))
    for (i, j) in links:
        z_prime[i, j] = sol.values[z_cols[(i, j)]]
        link_duals[i, j] = max(0.0, -sol.duals[link_rows[(i, j)]])
    slot_dual = max(0.0, float(sol.duals[card_row]))
    return MasterState(
        w=w, z_prime=z_prime, link_duals=link_duals, slot_dual=slot_dual,
        objective=sol.objective,
    )


@dataclass
class PricingResult:
    powers: np.ndarray  # (N, F)
    links: np.ndarray  # (N, N) physically validated
    reduced_value: float
    status: str


def solve_pricing(
    scenario: Scenario,
    link_duals: np.ndarray,
    slot_dual: float,
    limits: MilpLimits | None = None,
    options: SimplexOptions | None = None,
) -> PricingResult:
    """Exact single-timeslot solve with the dual-weighted link objective.

    The returned link matrix is re-derived through the physical oracle; the
    reduced value is computed on those validated links, so a numerically
    optimistic solver claim cannot enter the pool.
    """
    if (link_duals < 0).any() or slot_dual < 0:
        raise ValidationError("pricing weights must be non-negative")
    view = scenario.single_timeslot()
    # scaled SINR rows keep the threshold at O(1) so the LP can actually
    # steer the continuous powers; claims are still physically re-validated
    flags = VariantFlags(mode=JOINT, scale_rows=True)
    model, vmap = build_joint(view, flags)
    model.set_objective(
        {col: float(link_duals[i, j]) for (i, j), col in vmap.z_col.items()}
    )
    sol = solve_milp(model, limits or MilpLimits(max_nodes=200_000, abs_gap=1e-9), options)
    if sol.values is None:
        return PricingResult(
            powers=np.zeros((scenario.n, scenario.f)),
            links=np.zeros((scenario.n, scenario.n), dtype=bool),
            reduced_value=-slot_dual,
            status=sol.status,
        )
    schedule, powers = decode_solution(view, flags, vmap, sol.values)
    outcome = evaluate(view, schedule, powers)
    value = float(sum(link_duals[i, j] * outcome.z[i, j] for (i, j) in scenario.links))
    return PricingResult(
        powers=powers.p[:, :, 0],
        links=outcome.z.copy(),
        reduced_value=value - slot_dual,
        status=sol.status,
    )


def run_colgen(
    scenario: Scenario,
    t_total: int | None = None,
    budgets: ColgenBudgets | None = None,
) -> ColgenResult:
    """Generate columns until none prices positive, then pick one per timeslot."""
    budgets = budgets or ColgenBudgets()
    t_total = scenario.t if t_total is None else t_total
    if t_total < 1:
        raise ValidationError("need at least one timeslot")
    n, f = scenario.n, scenario.f
    pool = ColumnPool()
    pool.add(np.zeros((n, f)), np.zeros((n, n), dtype=bool))
    trace: list[tuple[int, int, float, float]] = []
    converged = False
    master = solve_master(pool, t_total, scenario, budgets.lp_options)
    prev_duals: tuple[bytes, float] | None = None
    for it in range(budgets.max_iterations):
        priced = solve_pricing(
            scenario, master.link_duals, master.slot_dual,
            budgets.pricing_limits, budgets.lp_options,
        )
        trace.append((it, pool.count, master.objective, priced.reduced_value))
        if priced.reduced_value <= _RC_TOL:
            converged = True
            break
        if priced.status not in (OPTIMAL, GAP_LIMIT):
            break
        if pool.contains(priced.powers):
            # the pricing point already exists; no progress is possible
            break
        pool.add(priced.powers, priced.links)
        master = solve_master(pool, t_total, scenario, budgets.lp_options)
        duals_key = (master.link_duals.tobytes(), master.slot_dual)
        if prev_duals is not None and duals_key == prev_duals:
            break
        prev_duals = duals_key

    # pick the T best columns by master weight (ties by column index)
    w = master.w.copy()
    x = np.zeros((n, f, t_total), dtype=bool)
    p = np.zeros((n, f, t_total))
    for t in range(t_total):
        q_star = int(np.argmax(w))
        p[:, :, t] = pool.powers[q_star]
        w[q_star] = 0.0
    x = p > POWER_EPS
    p = np.where(x, p, 0.0)
    schedule = Schedule(x=x)
    powers = PowerAllocation(p=p)
    eval_scenario = scenario if scenario.t == t_total else None
    if eval_scenario is None:
        from dataclasses import replace

        eval_scenario = replace(scenario, t=t_total)
    outcome = evaluate(eval_scenario, schedule, powers)
    return ColgenResult(
        schedule=schedule, powers=powers, outcome=outcome, master=master,
        pool=pool, trace=trace, converged=converged,
    )


def trace_csv(trace) -> str:
    """Convergence trace as CSV (iteration, pool size, master objective, reduced value)."""
    lines = ["iteration,poolSize,masterObjective,reducedValue"]
    for it, q, obj, rc in trace:
        lines.append(f"{it},{q},{obj!r},{rc!r}")
    return "\n".join(lines) + "\n"
