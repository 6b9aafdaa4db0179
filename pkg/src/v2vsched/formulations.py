"""Optimization models for joint/separate scheduling and power control.

Builders translate a :class:`~v2vsched.scenario.Scenario` into a
:class:`~v2vsched.milp.MilpModel` for the link-count maximization problem and
its variants: joint scheduling + power control (mixed-boolean), scheduling
under fixed per-timeslot powers (pure boolean), power control under a fixed
schedule, non-overlapping and one-block-per-timeslot restrictions, half
duplex, and the max-min fair objective.

The success indicator Y[i,j,f,t] is tied to the SINR inequality through the
standard big-M device with M = gamma_t * (N * p_max + sigma2), which is large
enough to deactivate the row for any feasible power tensor.  Two valid
strengthenings are applied by default (both provably preserve the integer
optimum and can be switched off):

- ``link_y_to_x``: Y[i,j,f,t] <= X[i,f,t].  A link cannot succeed on a block
  its transmitter does not use; with exact arithmetic this is implied, but as
  an explicit row it keeps LP relaxations and downstream claim-checking sane.
- ``fix_noise_dead``: links whose budget cannot clear the threshold even with
  zero interference (p_max * H < gamma_t * sigma2, with a conservative margin)
  get their Y columns pinned to zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ContractViolation, ValidationError
from .linkmodel import PowerAllocation, Schedule
from .milp import BOOLEAN, CONTINUOUS, GE, LE, MilpModel
from .scenario import Scenario

JOINT = "joint"
SCHEDULING_ONLY = "schedulingOnly"
POWER_ONLY = "powerOnly"

SUM_LINKS = "sumLinks"
MAX_MIN = "maxMin"

# below this many mW a power value counts as "not transmitting" when a
# schedule is recovered from a continuous power solution
POWER_EPS = 1e-9


@dataclass(frozen=True)
class VariantFlags:
    """Which problem variant to build; see the module docstring."""

    mode: str = JOINT
    non_overlap: bool = False
    max_one_rb: bool = False
    half_duplex: bool = False
    objective: str = SUM_LINKS
    fixed_powers: np.ndarray | None = None  # (N, T) mW, schedulingOnly
    fixed_schedule: Schedule | None = None  # powerOnly
    drop_x: bool = False  # joint overlapping power control without X columns
    link_y_to_x: bool = True
    fix_noise_dead: bool = True
    scale_rows: bool = False  # emit SINR rows scaled by 1/(gamma_t*sigma2)

    def __post_init__(self) -> None:
        if self.mode not in (JOINT, SCHEDULING_ONLY, POWER_ONLY):
            raise ValidationError(f"unknown mode {self.mode!r}")
        if self.objective not in (SUM_LINKS, MAX_MIN):
            raise ValidationError(f"unknown objective {self.objective!r}")
        if self.mode == SCHEDULING_ONLY and self.fixed_powers is None:
            raise ValidationError("schedulingOnly requires fixed_powers")
        if self.mode == POWER_ONLY and self.fixed_schedule is None:
            raise ValidationError("powerOnly requires fixed_schedule")
        if self.drop_x:
            if self.mode != JOINT:
                raise ValidationError("drop_x only applies to the joint mode")
            if self.non_overlap or self.max_one_rb or self.half_duplex:
                raise ValidationError("drop_x is incompatible with X-dependent variants")


@dataclass
class VariableMap:
    """Column/row lookup tables for one built model."""

    p_col: dict[tuple[int, int, int], int] = field(default_factory=dict)
    x_col: dict[tuple[int, int, int], int] = field(default_factory=dict)
    y_col: dict[tuple[int, int, int, int], int] = field(default_factory=dict)
    z_col: dict[tuple[int, int], int] = field(default_factory=dict)
    l_col: int | None = None
    sinr_row: dict[tuple[int, int, int, int], int] = field(default_factory=dict)


def big_m(scenario: Scenario) -> float:
    """Deactivation constant for the SINR rows: gamma_t * (N * p_max + sigma2)."""
    p = scenario.params
    return p.gamma_t * (scenario.n * p.p_max + p.sigma2)


def noise_dead_links(scenario: Scenario) -> set[tuple[int, int]]:
    """Intended links that cannot clear the threshold even interference-free.

    Conservative margin: a link is declared dead only when its full-power
    budget is below the threshold by more than a relative 1e-9, so float
    rounding can never retire an achievable link.
    """
    p = scenario.params
    need = p.gamma_t * p.sigma2
    return {
        (i, j)
        for (i, j) in scenario.links
        if p.p_max * scenario.gains[i, j] < need * (1.0 - 1e-9)
    }


def _sinr_terms_joint(scenario: Scenario, vmap: VariableMap, i: int, j: int, f: int, t: int):
    """Coefficient terms of the SINR row on the P columns (joint/power modes)."""
    gamma = scenario.params.gamma_t
    terms = [(vmap.p_col[(i, f, t)], scenario.gains[i, j])]
    for k in range(scenario.n):
        if k == i:
            continue
        hkj = scenario.gains[k, j]
        for fp in range(scenario.f):
            lam = scenario.acir.lookup(abs(fp - f))
            coef = -gamma * lam * hkj
            if coef != 0.0 and (k, fp, t) in vmap.p_col:
                terms.append((vmap.p_col[(k, fp, t)], coef))
    return terms


def _sinr_terms_sched(
    scenario: Scenario, vmap: VariableMap, p_bar: np.ndarray, i: int, j: int, f: int, t: int
):
    """SINR row terms on the X columns after the substitution P = p_bar * X."""
    gamma = scenario.params.gamma_t
    terms = [(vmap.x_col[(i, f, t)], p_bar[i, t] * scenario.gains[i, j])]
    for k in range(scenario.n):
        if k == i:
            continue
        hkj = scenario.gains[k, j]
        for fp in range(scenario.f):
            lam = scenario.acir.lookup(abs(fp - f))
            coef = -gamma * lam * p_bar[k, t] * hkj
            if coef != 0.0:
                terms.append((vmap.x_col[(k, fp, t)], coef))
    return terms


def _add_common_columns(
    model: MilpModel,
    scenario: Scenario,
    flags: VariantFlags,
    with_p: bool,
    with_x: bool,
    y_blocks,
) -> VariableMap:
    vmap = VariableMap()
    n, f_n, t_n = scenario.n, scenario.f, scenario.t
    p_max = scenario.params.p_max
    if with_p:
        for i in range(n):
            for f in range(f_n):
                for t in range(t_n):
                    vmap.p_col[(i, f, t)] = model.add_var(
                        f"P[{i},{f},{t}]", CONTINUOUS, lb=0.0, ub=p_max
                    )
    if with_x:
        for i in range(n):
            for f in range(f_n):
                for t in range(t_n):
                    vmap.x_col[(i, f, t)] = model.add_var(f"X[{i},{f},{t}]", BOOLEAN, 0.0, 1.0)
    dead = noise_dead_links(scenario) if flags.fix_noise_dead else set()
    for (i, j) in scenario.links:
        for (f, t) in y_blocks(i):
            ub = 0.0 if (i, j) in dead else 1.0
            vmap.y_col[(i, j, f, t)] = model.add_var(f"Y[{i},{j},{f},{t}]", BOOLEAN, 0.0, ub)
    for (i, j) in scenario.links:
        vmap.z_col[(i, j)] = model.add_var(f"Z[{i},{j}]", CONTINUOUS, 0.0, 1.0)
    return vmap


def _add_z_rows(model: MilpModel, scenario: Scenario, vmap: VariableMap) -> int:
    count = 0
    for (i, j) in scenario.links:
        terms = [(vmap.z_col[(i, j)], 1.0)]
        terms += [
            (col, -1.0)
            for (ii, jj, f, t), col in vmap.y_col.items()
            if ii == i and jj == j
        ]
        model.add_constr(terms, LE, 0.0, name=f"zlink[{i},{j}]")
        count += 1
    return count


def _set_sum_links_objective(model: MilpModel, scenario: Scenario, vmap: VariableMap) -> None:
    model.set_objective({vmap.z_col[(i, j)]: 1.0 for (i, j) in scenario.links})


def _add_variant_rows(model: MilpModel, scenario: Scenario, flags: VariantFlags, vmap: VariableMap) -> dict:
    n, f_n, t_n = scenario.n, scenario.f, scenario.t
    counts = {"non_overlap": 0, "max_one_rb": 0, "half_duplex": 0, "y_le_x": 0}
    if flags.non_overlap:
        for f in range(f_n):
            for t in range(t_n):
                model.add_constr(
                    [(vmap.x_col[(i, f, t)], 1.0) for i in range(n)], LE, 1.0,
                    name=f"noovl[{f},{t}]",
                )
                counts["non_overlap"] += 1
    if flags.max_one_rb:
        for i in range(n):
            for t in range(t_n):
                model.add_constr(
                    [(vmap.x_col[(i, f, t)], 1.0) for f in range(f_n)], LE, 1.0,
                    name=f"onerb[{i},{t}]",
                )
                counts["max_one_rb"] += 1
    if flags.half_duplex:
        for (i, j, f, t), ycol in sorted(vmap.y_col.items(), key=lambda kv: kv[1]):
            for fp in range(f_n):
                model.add_constr(
                    [(ycol, 1.0), (vmap.x_col[(j, fp, t)], 1.0)], LE, 1.0,
                    name=f"hdx[{i},{j},{f},{fp},{t}]",
                )
                counts["half_duplex"] += 1
    if flags.link_y_to_x and vmap.x_col:
        for (i, j, f, t), ycol in sorted(vmap.y_col.items(), key=lambda kv: kv[1]):
            model.add_constr(
                [(ycol, 1.0), (vmap.x_col[(i, f, t)], -1.0)], LE, 0.0,
                name=f"ylex[{i},{j},{f},{t}]",
            )
            counts["y_le_x"] += 1
    return counts


def build_joint(scenario: Scenario, flags: VariantFlags) -> tuple[MilpModel, VariableMap]:
    """Joint scheduling and power control as a mixed-boolean linear program."""
    if flags.mode != JOINT:
        raise ValidationError("build_joint requires mode=joint")
    n, f_n, t_n = scenario.n, scenario.f, scenario.t
    p_max = scenario.params.p_max
    gamma = scenario.params.gamma_t
    sigma2 = scenario.params.sigma2
    eta = big_m(scenario)
    if not math.isfinite(eta):
        raise ValidationError("deactivation constant overflow; check parameters")
    model = MilpModel("max", name="joint")
    with_x = not flags.drop_x
    vmap = _add_common_columns(
        model, scenario, flags, with_p=True, with_x=with_x,
        y_blocks=lambda i: [(f, t) for f in range(f_n) for t in range(t_n)],
    )
    scale = 1.0 / (gamma * sigma2) if flags.scale_rows else 1.0
    links = scenario.links
    for (i, j) in links:
        for f in range(f_n):
            for t in range(t_n):
                terms = _sinr_terms_joint(scenario, vmap, i, j, f, t)
                terms.append((vmap.y_col[(i, j, f, t)], -eta))
                if scale != 1.0:
                    terms = [(c, a * scale) for (c, a) in terms]
                row = model.add_constr(
                    terms, GE, (gamma * sigma2 - eta) * scale, name=f"sinr[{i},{j},{f},{t}]"
                )
                vmap.sinr_row[(i, j, f, t)] = row
    for i in range(n):
        for t in range(t_n):
            model.add_constr(
                [(vmap.p_col[(i, f, t)], 1.0) for f in range(f_n)], LE, p_max,
                name=f"pbudget[{i},{t}]",
            )
    if with_x:
        for i in range(n):
            for f in range(f_n):
                for t in range(t_n):
                    model.add_constr(
                        [(vmap.p_col[(i, f, t)], 1.0), (vmap.x_col[(i, f, t)], -p_max)],
                        LE, 0.0, name=f"plink[{i},{f},{t}]",
                    )
    counts = _add_variant_rows(model, scenario, flags, vmap)
    _add_z_rows(model, scenario, vmap)
    _set_sum_links_objective(model, scenario, vmap)
    expected = (
        len(links) * f_n * t_n  # SINR
        + n * t_n  # power budgets
        + (n * f_n * t_n if with_x else 0)  # P-X linking
        + len(links)  # Z-Y linking
        + sum(counts.values())
    )
    assert model.num_constraints == expected, "row count drifted from the closed form"
    if flags.objective == MAX_MIN:
        apply_maxmin(model, vmap, scenario)
    return model, vmap


def build_scheduling(scenario: Scenario, flags: VariantFlags) -> tuple[MilpModel, VariableMap]:
    """Scheduling under known per-timeslot powers: a pure boolean program.

    Substituting P[i,f,t] = fixed_powers[i,t] * X[i,f,t] eliminates the power
    columns; the power budget becomes a row on X and the SINR rows gain
    gain-weighted X coefficients.  ``emit_sinr_rows=False`` (see
    :func:`build_scheduling_relaxed`) is used by the cutting-plane method.
    """
    return _build_scheduling(scenario, flags, emit_sinr=True)


def build_scheduling_relaxed(scenario: Scenario, flags: VariantFlags) -> tuple[MilpModel, VariableMap]:
    """Scheduling model with the sensitive SINR rows left out entirely."""
    return _build_scheduling(scenario, flags, emit_sinr=False)


def _build_scheduling(scenario: Scenario, flags: VariantFlags, emit_sinr: bool):
    if flags.mode != SCHEDULING_ONLY:
        raise ValidationError("build_scheduling requires mode=schedulingOnly")
    p_bar = np.asarray(flags.fixed_powers, dtype=float)
    n, f_n, t_n = scenario.n, scenario.f, scenario.t
    if p_bar.shape != (n, t_n):
        raise ValidationError(f"fixed_powers must be ({n}, {t_n})")
    p_max = scenario.params.p_max
    if (p_bar < 0).any() or (p_bar > p_max * (1 + 1e-12)).any():
        raise ValidationError("fixed powers must lie in [0, p_max]")
    gamma = scenario.params.gamma_t
    sigma2 = scenario.params.sigma2
    eta = big_m(scenario)
    model = MilpModel("max", name="scheduling")
    vmap = _add_common_columns(
        model, scenario, flags, with_p=False, with_x=True,
        y_blocks=lambda i: [(f, t) for f in range(f_n) for t in range(t_n)],
    )
    scale = 1.0 / (gamma * sigma2) if flags.scale_rows else 1.0
    links = scenario.links
    if emit_sinr:
        for (i, j) in links:
            for f in range(f_n):
                for t in range(t_n):
                    terms = _sinr_terms_sched(scenario, vmap, p_bar, i, j, f, t)
                    terms.append((vmap.y_col[(i, j, f, t)], -eta))
                    if scale != 1.0:
                        terms = [(c, a * scale) for (c, a) in terms]
                    row = model.add_constr(
                        terms, GE, (gamma * sigma2 - eta) * scale,
                        name=f"sinr[{i},{j},{f},{t}]",
                    )
                    vmap.sinr_row[(i, j, f, t)] = row
    for i in range(n):
        for t in range(t_n):
            model.add_constr(
                [(vmap.x_col[(i, f, t)], p_bar[i, t]) for f in range(f_n)], LE, p_max,
                name=f"pbudget[{i},{t}]",
            )
    counts = _add_variant_rows(model, scenario, flags, vmap)
    _add_z_rows(model, scenario, vmap)
    _set_sum_links_objective(model, scenario, vmap)
    expected = (
        (len(links) * f_n * t_n if emit_sinr else 0)
        + n * t_n
        + len(links)
        + sum(counts.values())
    )
    assert model.num_constraints == expected, "row count drifted from the closed form"
    if flags.objective == MAX_MIN:
        apply_maxmin(model, vmap, scenario)
    return model, vmap


def build_power(scenario: Scenario, flags: VariantFlags) -> tuple[MilpModel, VariableMap]:
    """Power control under a fixed schedule (mixed-boolean: Y stays boolean).

    SINR rows are emitted only for the scheduled blocks of each link's
    transmitter; Y columns exist only there, so unscheduled blocks can never
    be claimed.
    """
    if flags.mode != POWER_ONLY:
        raise ValidationError("build_power requires mode=powerOnly")
    schedule = flags.fixed_schedule
    x = schedule.x
    n, f_n, t_n = scenario.n, scenario.f, scenario.t
    if x.shape != (n, f_n, t_n):
        raise ValidationError("fixed schedule shape does not match the scenario")
    if flags.non_overlap:
        schedule.check_non_overlap()
    if flags.max_one_rb:
        schedule.check_max_one_rb()
    p_max = scenario.params.p_max
    gamma = scenario.params.gamma_t
    sigma2 = scenario.params.sigma2
    eta = big_m(scenario)
    model = MilpModel("max", name="power")
    vmap = _add_common_columns(
        model, scenario, flags, with_p=True, with_x=False,
        y_blocks=lambda i: [
            (f, t) for f in range(f_n) for t in range(t_n) if x[i, f, t]
        ],
    )
    # unscheduled blocks cannot carry power
    for (i, f, t), col in vmap.p_col.items():
        if not x[i, f, t]:
            model.fix_var(col, 0.0)
    if flags.half_duplex:
        # the schedule is known, so half duplex reduces to data: a receiver
        # that transmits anywhere in a timeslot cannot be reached during it
        transmitting = x.any(axis=1)
        for (i, j, f, t), col in vmap.y_col.items():
            if transmitting[j, t]:
                model.fix_var(col, 0.0)
    scale = 1.0 / (gamma * sigma2) if flags.scale_rows else 1.0
    links = scenario.links
    sinr_count = 0
    for (i, j) in links:
        for f in range(f_n):
            for t in range(t_n):
                if not x[i, f, t]:
                    continue
                terms = _sinr_terms_joint(scenario, vmap, i, j, f, t)
                terms.append((vmap.y_col[(i, j, f, t)], -eta))
                if scale != 1.0:
                    terms = [(c, a * scale) for (c, a) in terms]
                row = model.add_constr(
                    terms, GE, (gamma * sigma2 - eta) * scale, name=f"sinr[{i},{j},{f},{t}]"
                )
                vmap.sinr_row[(i, j, f, t)] = row
                sinr_count += 1
    for i in range(n):
        for t in range(t_n):
            model.add_constr(
                [(vmap.p_col[(i, f, t)], 1.0) for f in range(f_n)], LE, p_max,
                name=f"pbudget[{i},{t}]",
            )
    _add_z_rows(model, scenario, vmap)
    _set_sum_links_objective(model, scenario, vmap)
    expected = sinr_count + n * t_n + len(links)
    assert model.num_constraints == expected, "row count drifted from the closed form"
    if flags.objective == MAX_MIN:
        apply_maxmin(model, vmap, scenario)
    return model, vmap


def apply_maxmin(model: MilpModel, vmap: VariableMap, scenario: Scenario) -> MilpModel:
    """Swap the objective for max-min fairness: maximize the worst per-vehicle count."""
    cap = max((len(r) for r in scenario.receivers), default=0)
    lcol = model.add_var("Lmin", CONTINUOUS, 0.0, float(cap))
    vmap.l_col = lcol
    for i in range(scenario.n):
        terms = [(vmap.z_col[(i, j)], 1.0) for j in scenario.receivers[i]]
        terms.append((lcol, -1.0))
        model.add_constr(terms, GE, 0.0, name=f"fair[{i}]")
    model.set_objective({lcol: 1.0})
    return model


def decode_solution(
    scenario: Scenario,
    flags: VariantFlags,
    vmap: VariableMap,
    values: np.ndarray,
) -> tuple[Schedule, PowerAllocation]:
    """Turn solver column values into a physical (schedule, powers) pair."""
    n, f_n, t_n = scenario.n, scenario.f, scenario.t
    p_max = scenario.params.p_max
    x = np.zeros((n, f_n, t_n), dtype=bool)
    p = np.zeros((n, f_n, t_n))
    if flags.mode == SCHEDULING_ONLY:
        p_bar = np.asarray(flags.fixed_powers, dtype=float)
        for (i, f, t), col in vmap.x_col.items():
            x[i, f, t] = values[col] > 0.5
        p = np.where(x, p_bar[:, None, :], 0.0)
    elif flags.mode == POWER_ONLY:
        for (i, f, t), col in vmap.p_col.items():
            p[i, f, t] = max(0.0, min(values[col], p_max))
        x = flags.fixed_schedule.x & (p > POWER_EPS)
        p = np.where(x, p, 0.0)
    else:
        for (i, f, t), col in vmap.p_col.items():
            p[i, f, t] = max(0.0, min(values[col], p_max))
        if flags.drop_x:
            x = p > POWER_EPS
        else:
            for (i, f, t), col in vmap.x_col.items():
                x[i, f, t] = values[col] > 0.5
        p = np.where(x, p, 0.0)
    # clear LP-level noise in the per-timeslot budgets
    totals = p.sum(axis=1, keepdims=True)
    over = totals > p_max
    if over.any():
        scale = np.where(over, p_max / np.maximum(totals, POWER_EPS), 1.0)
        p = p * scale
    return Schedule(x=x), PowerAllocation(p=p)
