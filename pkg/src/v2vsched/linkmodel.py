"""Ground-truth physical evaluation of schedules and power allocations.

Everything here is defined directly on the radio model: per-resource-block
SINR, per-block and per-link success, and the summary metrics.  Solvers are
never trusted for these quantities; any solver-claimed success matrix must be
re-derived through :func:`evaluate`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractViolation, ValidationError
from .scenario import Scenario

# Relative slack for schedule/power consistency checks.  The physical success
# test itself applies no tolerance: a link holds iff SINR >= gamma_t in plain
# double precision.
_CONSISTENCY_RTOL = 1e-7


@dataclass(frozen=True)
class Schedule:
    """Boolean transmit grid x[i, f, t]: vehicle i transmits in slot f of timeslot t."""

    x: np.ndarray

    def __post_init__(self) -> None:
        x = np.asarray(self.x)
        if x.ndim != 3:
            raise ValidationError("schedule tensor must be N x F x T")
        if x.dtype != bool:
            if not np.isin(x, (0, 1)).all():
                raise ValidationError("schedule entries must be 0/1")
            x = x.astype(bool)
        x = np.ascontiguousarray(x)
        x.flags.writeable = False
        object.__setattr__(self, "x", x)

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.x.shape

    def check_non_overlap(self) -> None:
        """At most one transmitter per resource block."""
        if (self.x.sum(axis=0) > 1).any():
            raise ValidationError("schedule violates the non-overlap rule")

    def check_max_one_rb(self) -> None:
        """At most one frequency slot per vehicle per timeslot."""
        if (self.x.sum(axis=1) > 1).any():
            raise ValidationError("schedule violates the one-block-per-timeslot rule")


@dataclass(frozen=True)
class PowerAllocation:
    """Transmit powers p[i, f, t] in mW, same shape as the schedule."""

    p: np.ndarray

    def __post_init__(self) -> None:
        p = np.asarray(self.p, dtype=float)
        if p.ndim != 3:
            raise ValidationError("power tensor must be N x F x T")
        if (p < 0).any():
            raise ValidationError("powers must be non-negative")
        p = np.ascontiguousarray(p)
        p.flags.writeable = False
        object.__setattr__(self, "p", p)

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.p.shape


@dataclass(frozen=True)
class LinkOutcome:
    """Per-block successes y[i, j, f, t], per-link successes z[i, j], and their count."""

    y: np.ndarray
    z: np.ndarray
    objective: int

    def per_vue_counts(self, scenario: Scenario) -> np.ndarray:
        """Successful intended links per transmitting vehicle."""
        return np.array(
            [sum(int(self.z[i, j]) for j in scenario.receivers[i]) for i in range(scenario.n)]
        )


def _link_mask(scenario: Scenario) -> np.ndarray:
    mask = np.zeros((scenario.n, scenario.n), dtype=bool)
    for i, j in scenario.links:
        mask[i, j] = True
    return mask


def sinr_tensor(scenario: Scenario, powers: np.ndarray) -> np.ndarray:
    """SINR[i, j, f, t] for every transmitter/receiver pair and resource block.

    powers is an (N, F, T) tensor.  Interference at receiver j on slot f sums
    leakage from every other transmitter over all slots of the same timeslot,
    weighted by the ACIR profile; the gap-0 weight of 1 covers the co-channel
    case.  The stored zero diagonal of the gain matrix makes a receiver's own
    transmissions non-interfering (ideal full duplex).
    """
    n, f, t = powers.shape
    w = scenario.acir.weights(f)
    h = scenario.gains
    sig = scenario.params.sigma2
    # leak[k, g, s] = power k leaks into slot g during timeslot s
    leak = np.einsum("kfs,fg->kgs", powers, w)
    # total[j, g, s] = sum_k leak[k, g, s] * H[k, j]
    total = np.einsum("kgs,kj->jgs", leak, h)
    # interference excludes the observed transmitter i entirely (all its slots)
    interf = total[None, :, :, :] - h.T[:, :, None, None] * leak[:, None, :, :]
    signal = powers[:, None, :, :] * h[:, :, None, None]
    return signal / (sig + interf)


def sinr(
    scenario: Scenario, powers: PowerAllocation, i: int, j: int, f: int, t: int
) -> float:
    """SINR of link (i, j) in resource block (f, t) under the given powers."""
    return float(sinr_tensor(scenario, powers.p)[i, j, f, t])


def _check_consistency(scenario: Scenario, schedule: Schedule, powers: PowerAllocation) -> None:
    x, p = schedule.x, powers.p
    if x.shape != p.shape:
        raise ContractViolation(f"shape mismatch: schedule {x.shape} vs powers {p.shape}")
    if x.shape[0] != scenario.n:
        raise ContractViolation("schedule does not match the scenario's vehicle count")
    p_max = scenario.params.p_max
    slack = _CONSISTENCY_RTOL * p_max
    if (p[~x] > 0).any():
        raise ContractViolation("positive power on an unscheduled resource block")
    if (p > p_max + slack).any():
        raise ContractViolation("per-block power exceeds the transmit cap")
    if (p.sum(axis=1) > p_max + slack).any():
        raise ContractViolation("per-timeslot power budget exceeded")


def evaluate(
    scenario: Scenario,
    schedule: Schedule,
    powers: PowerAllocation,
    half_duplex: bool = False,
) -> LinkOutcome:
    """Physical success of every intended link: the oracle for all solvers.

    y[i, j, f, t] is 1 iff i transmits in (f, t) and the SINR at j clears the
    threshold (ties count as success); z[i, j] is 1 iff any block succeeds.
    With half_duplex=True a vehicle that transmits anywhere in a timeslot
    cannot receive during it.
    """
    _check_consistency(scenario, schedule, powers)
    gamma = scenario.params.gamma_t
    x, p = schedule.x, powers.p
    ratio = sinr_tensor(scenario, p)
    y = x[:, None, :, :] & (ratio >= gamma)
    y &= _link_mask(scenario)[:, :, None, None]
    if half_duplex:
        transmitting = x.any(axis=1)  # (N, T)
        y &= ~transmitting.T[None, :, None, :]
    z = y.any(axis=(2, 3))
    objective = int(z.sum())
    return LinkOutcome(y=y, z=z, objective=objective)


@dataclass(frozen=True)
class MetricTable:
    """Per-realization and aggregate link-count metrics for one scheme.

    z_i has one row per realization and one column per vehicle; z_bar_i is its
    per-vehicle mean and z_bar the mean of z_bar_i over vehicles.
    """

    z_i: np.ndarray
    z_bar_i: np.ndarray
    z_bar: float

    def cdf(self, support: np.ndarray) -> np.ndarray:
        """Empirical CDF of the per-vehicle counts over the given support grid."""
        samples = self.z_i.reshape(-1)
        return np.array([(samples <= v).mean() for v in support])


def metrics(outcomes, scenario: Scenario) -> MetricTable:
    """Aggregate a list of outcomes (one per Monte-Carlo realization)."""
    outcomes = list(outcomes)
    if not outcomes:
        raise ValidationError("need at least one outcome to aggregate")
    z_i = np.stack([o.per_vue_counts(scenario) for o in outcomes]).astype(float)
    z_bar_i = z_i.mean(axis=0)
    return MetricTable(z_i=z_i, z_bar_i=z_bar_i, z_bar=float(z_bar_i.mean()))
