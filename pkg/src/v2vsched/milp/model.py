"""Generic mixed-Boolean linear program container and solution record.

The model is a plain column/row store: variables carry a kind (continuous or
boolean) and bounds, constraints are sparse coefficient rows with a relation
and right-hand side, and the objective is a sparse coefficient vector with a
sense.  Solvers consume the dense snapshot produced by :meth:`MilpModel.arrays`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from ..errors import ValidationError

CONTINUOUS = "continuous"
BOOLEAN = "boolean"

LE, GE, EQ = "<=", ">=", "="
_RELATIONS = (LE, GE, EQ)

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
GAP_LIMIT = "gap-limit"
ITERATION_LIMIT = "iteration-limit"


@dataclass
class Variable:
    name: str
    kind: str
    lb: float
    ub: float


@dataclass
class Constraint:
    name: str
    idx: np.ndarray
    coef: np.ndarray
    rel: str
    rhs: float


@dataclass(frozen=True)
class ModelArrays:
    """Dense snapshot of a model, in a fixed column order."""

    a: np.ndarray  # (m, n) row coefficients
    rel: list[str]
    rhs: np.ndarray
    c: np.ndarray
    lb: np.ndarray
    ub: np.ndarray
    is_bool: np.ndarray
    sense: str


class MilpModel:
    """Mutable builder for a linear model with boolean and continuous columns."""

    def __init__(self, sense: str = "max", name: str = "model"):
        if sense not in ("max", "min"):
            raise ValidationError(f"sense must be 'max' or 'min', got {sense!r}")
        self.sense = sense
        self.name = name
        self.variables: list[Variable] = []
        self.constraints: list[Constraint] = []
        self.objective: dict[int, float] = {}
        self._names: dict[str, int] = {}

    # -- construction ----------------------------------------------------

    @property
    def num_vars(self) -> int:
        return len(self.variables)

    @property
    def num_constraints(self) -> int:
        return len(self.constraints)

    def add_var(
        self,
        name: str,
        kind: str = CONTINUOUS,
        lb: float = 0.0,
        ub: float = math.inf,
        obj: float = 0.0,
    ) -> int:
        if kind not in (CONTINUOUS, BOOLEAN):
            raise ValidationError(f"unknown variable kind {kind!r}")
        if kind == BOOLEAN:
            if lb < 0.0 or ub > 1.0:
                raise ValidationError("boolean variables must stay within [0, 1]")
        if math.isnan(lb) or math.isnan(ub) or lb > ub:
            raise ValidationError(f"bad bounds [{lb}, {ub}] for {name!r}")
        if name in self._names:
            raise ValidationError(f"duplicate variable name {name!r}")
        idx = len(self.variables)
        self.variables.append(Variable(name=name, kind=kind, lb=float(lb), ub=float(ub)))
        self._names[name] = idx
        if obj:
            self.objective[idx] = float(obj)
        return idx

    def add_constr(self, terms, rel: str, rhs: float, name: str = "") -> int:
        if rel not in _RELATIONS:
            raise ValidationError(f"unknown relation {rel!r}")
        seen: dict[int, float] = {}
        for j, a in terms:
            if not 0 <= j < len(self.variables):
                raise ValidationError(f"constraint references undeclared column {j}")
            a = float(a)
            if not math.isfinite(a):
                raise ValidationError("constraint coefficients must be finite")
            seen[j] = seen.get(j, 0.0) + a
        if not math.isfinite(rhs):
            raise ValidationError("right-hand side must be finite")
        idx = np.fromiter(seen.keys(), dtype=np.int64, count=len(seen))
        order = np.argsort(idx, kind="stable")
        row = Constraint(
            name=name or f"r{len(self.constraints)}",
            idx=idx[order],
            coef=np.fromiter(seen.values(), dtype=float, count=len(seen))[order],
            rel=rel,
            rhs=float(rhs),
        )
        self.constraints.append(row)
        return len(self.constraints) - 1

    def set_objective(self, coeffs: dict[int, float]) -> None:
        for j, v in coeffs.items():
            if not math.isfinite(v):
                raise ValidationError("objective coefficients must be finite")
        self.objective = {int(j): float(v) for j, v in coeffs.items()}

    def fix_var(self, j: int, value: float) -> None:
        """Pin a column to a single value (bounds collapse)."""
        var = self.variables[j]
        if value < var.lb - 1e-12 or value > var.ub + 1e-12:
            raise ValidationError(f"cannot fix {var.name!r} to {value} outside its bounds")
        var.lb = var.ub = float(value)

    # -- snapshots ---------------------------------------------------------

    def arrays(self) -> ModelArrays:
        n, m = self.num_vars, self.num_constraints
        a = np.zeros((m, n))
        rhs = np.empty(m)
        rel = []
        for r, row in enumerate(self.constraints):
            a[r, row.idx] = row.coef
            rhs[r] = row.rhs
            rel.append(row.rel)
        c = np.zeros(n)
        for j, v in self.objective.items():
            c[j] = v
        lb = np.array([v.lb for v in self.variables]) if n else np.zeros(0)
        ub = np.array([v.ub for v in self.variables]) if n else np.zeros(0)
        is_bool = np.array([v.kind == BOOLEAN for v in self.variables], dtype=bool)
        return ModelArrays(a=a, rel=rel, rhs=rhs, c=c, lb=lb, ub=ub, is_bool=is_bool, sense=self.sense)

    def objective_value(self, values: np.ndarray) -> float:
        return float(sum(v * values[j] for j, v in sorted(self.objective.items())))


@dataclass
class MilpSolution:
    """Solver output: status, primal values, objective, row duals, proven bound."""

    status: str
    values: np.ndarray | None = None
    objective: float = math.nan
    duals: np.ndarray | None = None
    bound: float = math.nan

    @property
    def ok(self) -> bool:
        return self.status == OPTIMAL


# -- exact feasibility checking -------------------------------------------
#
# Candidate incumbents are re-checked against the original rows before being
# accepted.  For rows supported entirely on boolean columns the products
# coefficient * {0.0, 1.0} are exact and math.fsum rounds their sum correctly,
# so the residual's sign is exact; no tolerance is applied.  Mixed rows carry
# LP-level noise in their continuous values and are judged at feas_tol scaled
# by the row magnitude.  This keeps big-M rows honest even when their
# coefficients span fifteen orders of magnitude.


def _row_activity_fsum(row: Constraint, values: np.ndarray) -> tuple[float, float]:
    terms = [float(a) * float(values[j]) for j, a in zip(row.idx, row.coef)]
    scale = math.fsum(abs(t) for t in terms) + abs(row.rhs)
    return math.fsum(terms), scale


def _row_activity_exact(row: Constraint, values: np.ndarray) -> Fraction:
    total = Fraction(0)
    for j, a in zip(row.idx, row.coef):
        total += Fraction(float(a)) * Fraction(float(values[j]))
    return total - Fraction(row.rhs)


def row_violation(
    row: Constraint,
    values: np.ndarray,
    bool_mask: np.ndarray,
    feas_tol: float,
) -> float:
    """Positive amount by which `values` violates `row`; 0 when satisfied.

    The residual is computed with an error-free sum, so the only uncertainty
    comes from (a) a few ulps of representation noise at the row's magnitude
    and (b) LP-level noise in continuous values, charged per term as
    feas_tol * |a_j| * max(1, |x_j|).  Boolean terms contribute exactly
    (coefficient times an exact 0.0/1.0), so a big-M coefficient sitting on a
    boolean column cannot poison the tolerance: claims on big-M rows are
    judged at the physical scale of their remaining terms.
    """
    activity, scale = _row_activity_fsum(row, values)
    resid = activity - row.rhs
    if not math.isfinite(resid):
        resid = float(_row_activity_exact(row, values))
    noise = 4.0 * 2.0**-53 * scale
    for j, a in zip(row.idx, row.coef):
        if not bool_mask[j]:
            noise += feas_tol * abs(float(a)) * max(1.0, abs(float(values[j])))
    if row.rel == LE:
        return max(0.0, resid - noise)
    if row.rel == GE:
        return max(0.0, -resid - noise)
    return max(0.0, abs(resid) - noise)


def check_point(
    model: MilpModel,
    values: np.ndarray,
    feas_tol: float,
) -> list[tuple[int, float]]:
    """All (row index, violation) pairs where `values` breaks a constraint."""
    arrays_bool = np.array([v.kind == BOOLEAN for v in model.variables], dtype=bool)
    out = []
    for r, row in enumerate(model.constraints):
        v = row_violation(row, values, arrays_bool, feas_tol)
        if v > 0:
            out.append((r, v))
    return out
