"""Bounded-variable primal simplex with dual extraction.

The solver works on the equality form  A x + s = b  where each row's slack
carries the relation ([0, inf) for <=, (-inf, 0] for >=, [0, 0] for =).  It
runs a single tableau-free loop: while any basic variable violates its bounds
it prices with the standard piecewise-linear infeasibility gradient (phase 1),
otherwise with the true objective (phase 2).  Entering variables are chosen by
the largest reduced cost; after a run of degenerate steps the rule falls back
to Bland's lowest-index rule, which cannot cycle.  The basis inverse is kept
as a dense matrix with product-form updates and periodic refactorization.

No warm-start data is required, but a (status, basis) pair from a previous
solve of a related problem can be supplied and typically re-solves in a
handful of pivots; branch-and-bound relies on this.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import EQ, GE, INFEASIBLE, ITERATION_LIMIT, LE, OPTIMAL, UNBOUNDED

BASIC = 0
AT_LOWER = 1
AT_UPPER = 2
FREE = 3


@dataclass
class SimplexOptions:
    """Tolerances and guards; defaults match the package-wide conventions."""

    feas_tol: float = 1e-7
    dual_tol: float = 1e-6
    pivot_tol: float = 1e-9
    max_iters: int = 50000
    bland_after: int = 40
    refactor_every: int = 64
    scale: bool = False


@dataclass
class SimplexResult:
    status: str
    x: np.ndarray | None  # structural values, original sense
    obj: float  # original-sense objective (nan unless optimal)
    duals: np.ndarray | None  # row duals, original sense
    basis: np.ndarray | None
    vstat: np.ndarray | None
    iterations: int


def _row_scales(a: np.ndarray) -> np.ndarray:
    """Power-of-two factors bringing each row's largest coefficient near 1."""
    if a.size == 0:
        return np.ones(a.shape[0])
    mx = np.abs(a).max(axis=1)
    mx[mx == 0] = 1.0
    return 2.0 ** (-np.round(np.log2(mx)))


class _Simplex:
    def __init__(
        self,
        a: np.ndarray,
        rel: list[str],
        rhs: np.ndarray,
        c: np.ndarray,
        lb: np.ndarray,
        ub: np.ndarray,
        sense: str,
        options: SimplexOptions,
    ):
        self.opt = options
        self.m, self.n = a.shape
        self.sense = sense
        self.row_scale = _row_scales(a) if options.scale else np.ones(self.m)
        self.A = a * self.row_scale[:, None] if options.scale else a.copy()
        self.b = rhs * self.row_scale if options.scale else rhs.astype(float).copy()
        ntot = self.n + self.m
        self.ntot = ntot
        self.c = np.zeros(ntot)
        self.c[: self.n] = c if sense == "max" else -c
        slack_lb = np.empty(self.m)
        slack_ub = np.empty(self.m)
        for r, rl in enumerate(rel):
            if rl == LE:
                slack_lb[r], slack_ub[r] = 0.0, math.inf
            elif rl == GE:
                slack_lb[r], slack_ub[r] = -math.inf, 0.0
            else:
                slack_lb[r], slack_ub[r] = 0.0, 0.0
        self.lb = np.concatenate([lb, slack_lb])
        self.ub = np.concatenate([ub, slack_ub])
        mag = np.maximum(
            np.where(np.isfinite(self.lb), np.abs(self.lb), 0.0),
            np.where(np.isfinite(self.ub), np.abs(self.ub), 0.0),
        )
        self.ftol = options.feas_tol * np.maximum(1.0, mag)
        # a slack lives at the scale of its row, which can be many orders of
        # magnitude away from 1; its feasibility tolerance must follow, or
        # tiny-coefficient rows are judged blindly and huge-coefficient rows
        # become impossible to satisfy within arithmetic noise
        if self.m:
            colmag = mag[: self.n]  # pinned columns contribute their pinned value
            row_scale = np.maximum(
                np.abs(self.b), (np.abs(self.A) * colmag[None, :]).max(axis=1, initial=0.0)
            )
            self.ftol[self.n :] = options.feas_tol * np.maximum(row_scale, 1e-300)
        self.stat = np.empty(ntot, dtype=np.int8)
        self.basis = np.empty(self.m, dtype=np.int64)
        self.Binv = np.empty((self.m, self.m))
        self.x = np.zeros(ntot)
        self.iterations = 0
        self._pivots_since_refactor = 0
        self._degenerate_streak = 0

    # -- column access ----------------------------------------------------

    def _col(self, j: int) -> np.ndarray:
        if j < self.n:
            return self.A[:, j]
        e = np.zeros(self.m)
        e[j - self.n] = 1.0
        return e

    def _ftran(self, j: int) -> np.ndarray:
        if j < self.n:
            return self.Binv @ self.A[:, j]
        return self.Binv[:, j - self.n].copy()

    # -- basis management ---------------------------------------------------

    def cold_start(self) -> None:
        self.stat[:] = AT_LOWER
        finite_lb = np.isfinite(self.lb)
        finite_ub = np.isfinite(self.ub)
        self.stat[~finite_lb & finite_ub] = AT_UPPER
        self.stat[~finite_lb & ~finite_ub] = FREE
        self.basis = np.arange(self.n, self.ntot, dtype=np.int64)
        self.stat[self.n :] = BASIC
        self.Binv = np.eye(self.m)
        self._set_nonbasic_values()
        self._recompute_basics()
        self._pivots_since_refactor = 0

    def warm_start(self, vstat: np.ndarray, basis: np.ndarray) -> bool:
        if vstat.shape != (self.ntot,) or basis.shape != (self.m,):
            return False
        if len(np.unique(basis)) != self.m or (vstat[basis] != BASIC).any():
            return False
        if int((vstat == BASIC).sum()) != self.m:
            return False
        self.stat = vstat.astype(np.int8).copy()
        self.basis = basis.astype(np.int64).copy()
        # nonbasic statuses may point at bounds that are infinite after a
        # bound override; repair them
        for s, repl in ((AT_LOWER, AT_UPPER), (AT_UPPER, AT_LOWER)):
            arr = self.lb if s == AT_LOWER else self.ub
            bad = (self.stat == s) & ~np.isfinite(arr)
            for j in np.where(bad)[0]:
                other = self.ub[j] if s == AT_LOWER else self.lb[j]
                self.stat[j] = repl if math.isfinite(other) else FREE
        if not self._refactor():
            return False
        self._set_nonbasic_values()
        self._recompute_basics()
        return True

    def _refactor(self) -> bool:
        bmat = np.empty((self.m, self.m))
        for i, j in enumerate(self.basis):
            bmat[:, i] = self._col(j)
        try:
            self.Binv = np.linalg.solve(bmat, np.eye(self.m))
        except np.linalg.LinAlgError:
            return False
        if not np.isfinite(self.Binv).all():
            return False
        self._pivots_since_refactor = 0
        return True

    def _set_nonbasic_values(self) -> None:
        nb_lo = self.stat == AT_LOWER
        nb_up = self.stat == AT_UPPER
        self.x[nb_lo] = self.lb[nb_lo]
        self.x[nb_up] = self.ub[nb_up]
        self.x[self.stat == FREE] = 0.0

    def _recompute_basics(self) -> None:
        x_struct = np.where(self.stat[: self.n] != BASIC, self.x[: self.n], 0.0)
        r = self.b - self.A @ x_struct
        r -= np.where(self.stat[self.n :] != BASIC, self.x[self.n :], 0.0)
        self.x[self.basis] = self.Binv @ r

    # -- pricing ------------------------------------------------------------

    def _infeasibility(self) -> tuple[np.ndarray, np.ndarray, float]:
        xb = self.x[self.basis]
        lo, up, tol = self.lb[self.basis], self.ub[self.basis], self.ftol[self.basis]
        below = np.where(xb < lo - tol, lo - xb, 0.0)
        above = np.where(xb > up + tol, xb - up, 0.0)
        return below, above, float(below.sum() + above.sum())

    def _reduced_costs(self, cb: np.ndarray, phase1: bool) -> tuple[np.ndarray, np.ndarray]:
        y = cb @ self.Binv
        rc = np.empty(self.ntot)
        if phase1:
            rc[: self.n] = -(y @ self.A)
        else:
            rc[: self.n] = self.c[: self.n] - y @ self.A
        rc[self.n :] = -y
        return y, rc

    def _choose_entering(self, rc: np.ndarray, bland: bool) -> int:
        dtol = self.opt.dual_tol
        fixed = self.lb == self.ub
        up_ok = (self.stat == AT_LOWER) & (rc > dtol)
        dn_ok = (self.stat == AT_UPPER) & (rc < -dtol)
        fr_ok = (self.stat == FREE) & (np.abs(rc) > dtol)
        eligible = (up_ok | dn_ok | fr_ok) & ~fixed
        if not eligible.any():
            return -1
        idx = np.where(eligible)[0]
        if bland:
            return int(idx[0])
        return int(idx[np.argmax(np.abs(rc[idx]))])

    # -- ratio tests ----------------------------------------------------------

    def _ratio_phase2(self, sigma: float, d: np.ndarray, e: int):
        ptol = self.opt.pivot_tol
        delta = -sigma * d
        xb = self.x[self.basis]
        lo, up = self.lb[self.basis], self.ub[self.basis]
        t = np.full(self.m, math.inf)
        at_up = np.zeros(self.m, dtype=bool)
        up_mask = (delta > ptol) & np.isfinite(up)
        if up_mask.any():
            room = np.maximum(up[up_mask] - xb[up_mask], 0.0)
            t[up_mask] = room / delta[up_mask]
            at_up[up_mask] = True
        dn_mask = (delta < -ptol) & np.isfinite(lo)
        if dn_mask.any():
            room = np.maximum(xb[dn_mask] - lo[dn_mask], 0.0)
            t[dn_mask] = room / (-delta[dn_mask])
        span = self.ub[e] - self.lb[e]
        t_bound = span if math.isfinite(span) else math.inf
        t_min = t.min() if self.m else math.inf
        if t_bound <= t_min:
            if math.isinf(t_bound):
                return "unbounded", 0.0, -1, False
            return "flip", t_bound, -1, False
        # lowest leaving column index among exact ties keeps Bland's rule valid
        ties = np.where(t <= t_min)[0]
        pos = int(ties[np.argmin(self.basis[ties])])
        return "pivot", float(t_min), pos, bool(at_up[pos])

    def _ratio_phase1(self, sigma: float, d: np.ndarray, e: int, below: np.ndarray, above: np.ndarray):
        ptol = self.opt.pivot_tol
        delta = -sigma * d
        xb = self.x[self.basis]
        lo, up = self.lb[self.basis], self.ub[self.basis]
        t = np.full(self.m, math.inf)
        at_up = np.zeros(self.m, dtype=bool)
        infeas_lo = below > 0
        infeas_up = above > 0
        feas = ~infeas_lo & ~infeas_up
        moving_up = delta > ptol
        moving_dn = delta < -ptol
        # infeasible-below, moving up: blocks on reaching its lower bound
        mask = infeas_lo & moving_up
        t[mask] = (lo[mask] - xb[mask]) / delta[mask]
        # infeasible-above, moving down: blocks on reaching its upper bound
        mask = infeas_up & moving_dn
        t[mask] = (up[mask] - xb[mask]) / delta[mask]
        at_up |= mask
        # feasible basics block at whichever bound they approach
        mask = feas & moving_up & np.isfinite(up)
        t[mask] = np.maximum(up[mask] - xb[mask], 0.0) / delta[mask]
        at_up |= mask
        mask = feas & moving_dn & np.isfinite(lo)
        t[mask] = np.maximum(xb[mask] - lo[mask], 0.0) / (-delta[mask])
        span = self.ub[e] - self.lb[e]
        t_bound = span if math.isfinite(span) else math.inf
        t_min = t.min() if self.m else math.inf
        if t_bound <= t_min:
            if math.isinf(t_bound):
                return "stall", 0.0, -1, False
            return "flip", t_bound, -1, False
        if math.isinf(t_min):
            return "stall", 0.0, -1, False
        ties = np.where(t <= t_min)[0]
        pos = int(ties[np.argmin(self.basis[ties])])
        return "pivot", float(t_min), pos, bool(at_up[pos])

    # -- updates -----------------------------------------------------------

    def _apply_flip(self, e: int, sigma: float, t: float, d: np.ndarray) -> None:
        self.x[self.basis] -= sigma * t * d
        if sigma > 0:
            self.stat[e] = AT_UPPER
            self.x[e] = self.ub[e]
        else:
            self.stat[e] = AT_LOWER
            self.x[e] = self.lb[e]

    def _apply_pivot(
        self, e: int, sigma: float, t: float, d: np.ndarray, pos: int, leave_at_up: bool
    ) -> None:
        leave = self.basis[pos]
        self.x[self.basis] -= sigma * t * d
        self.x[e] = self.x[e] + sigma * t
        # leaving variable exits exactly at the bound the ratio test blocked on
        if leave_at_up:
            self.stat[leave] = AT_UPPER
            self.x[leave] = self.ub[leave]
        else:
            self.stat[leave] = AT_LOWER
            self.x[leave] = self.lb[leave]
        self.basis[pos] = e
        self.stat[e] = BASIC
        piv = d[pos]
        piv_row = self.Binv[pos] / piv
        d_masked = d.copy()
        d_masked[pos] = 0.0
        self.Binv -= np.outer(d_masked, piv_row)
        self.Binv[pos] = piv_row
        self._pivots_since_refactor += 1

    # -- driver -----------------------------------------------------------

    def run(self) -> str:
        while True:
            if self.iterations >= self.opt.max_iters:
                return ITERATION_LIMIT
            if self._pivots_since_refactor >= self.opt.refactor_every:
                if not self._refactor():
                    self.cold_start()
                self._recompute_basics()
            below, above, g = self._infeasibility()
            phase1 = g > 0.0
            if phase1:
                cb = np.sign(below) - np.sign(above)
            else:
                cb = self.c[self.basis]
            _, rc = self._reduced_costs(cb, phase1)
            bland = self._degenerate_streak >= self.opt.bland_after
            e = self._choose_entering(rc, bland)
            if e < 0:
                if phase1:
                    return INFEASIBLE
                return OPTIMAL
            sigma = 1.0
            if self.stat[e] == AT_UPPER or (self.stat[e] == FREE and rc[e] < 0):
                sigma = -1.0
            d = self._ftran(e)
            if phase1:
                action, t, pos, leave_at_up = self._ratio_phase1(sigma, d, e, below, above)
                if action == "stall":
                    # numerical breakdown: refactor and retry once per iteration
                    if self._pivots_since_refactor > 0:
                        self._refactor()
                        self._recompute_basics()
                        self.iterations += 1
                        continue
                    return ITERATION_LIMIT
            else:
                action, t, pos, leave_at_up = self._ratio_phase2(sigma, d, e)
                if action == "unbounded":
                    return UNBOUNDED
            self.iterations += 1
            self._degenerate_streak = 0 if t > self.opt.pivot_tol else self._degenerate_streak + 1
            if action == "flip":
                self._apply_flip(e, sigma, t, d)
            else:
                self._apply_pivot(e, sigma, t, d, pos, leave_at_up)

    # -- reporting ----------------------------------------------------------

    def duals(self) -> np.ndarray:
        y = self.c[self.basis] @ self.Binv
        y = y * self.row_scale
        return y if self.sense == "max" else -y

    def structural_x(self) -> np.ndarray:
        x = self.x[: self.n].copy()
        lo, up = self.lb[: self.n], self.ub[: self.n]
        tol = self.ftol[: self.n]
        snap_lo = np.isfinite(lo) & (np.abs(x - lo) <= tol)
        snap_up = np.isfinite(up) & (np.abs(x - up) <= tol)
        x[snap_lo] = lo[snap_lo]
        x[snap_up] = up[snap_up]
        return x


def solve_lp_arrays(
    a: np.ndarray,
    rel: list[str],
    rhs: np.ndarray,
    c: np.ndarray,
    lb: np.ndarray,
    ub: np.ndarray,
    sense: str = "max",
    options: SimplexOptions | None = None,
    start: tuple[np.ndarray, np.ndarray] | None = None,
) -> SimplexResult:
    """Solve one LP given dense arrays; `start` is an optional (vstat, basis) pair."""
    options = options or SimplexOptions()
    sx = _Simplex(a, rel, rhs, c, lb, ub, sense, options)
    started = False
    if start is not None:
        started = sx.warm_start(start[0].copy(), start[1].copy())
    if not started:
        sx.cold_start()
    status = sx.run()
    if status != OPTIMAL:
        return SimplexResult(
            status=status, x=None, obj=math.nan, duals=None, basis=None, vstat=None,
            iterations=sx.iterations,
        )
    # refresh the factorization so the reported point and duals are crisp
    sx._refactor()
    sx._recompute_basics()
    x = sx.structural_x()
    obj_internal = float(sx.c[: sx.n] @ x)
    return SimplexResult(
        status=OPTIMAL,
        x=x,
        obj=obj_internal if sense == "max" else -obj_internal,
        duals=sx.duals(),
        basis=sx.basis.copy(),
        vstat=sx.stat.copy(),
        iterations=sx.iterations,
    )
