"""Convoy scenario generation: geometry, channel gains, ACIR mask, receiver sets.

A scenario bundles everything the optimizers and the physical link model need:
vehicle positions on a line, the N x N matrix of linear channel power gains,
the adjacent-channel interference ratio (ACIR) profile, the per-vehicle sets of
intended receivers, and the radio parameters.  All power/gain arithmetic is
kept in linear units (mW and dimensionless ratios); dB appears only at the I/O
boundary.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import GeometryError, ValidationError

SCENARIO_FORMAT = "v2vsched-scenario"
SCENARIO_VERSION = 1


def db_to_linear(value_db: float) -> float:
    """Convert a dB ratio to a linear ratio."""
    return 10.0 ** (value_db / 10.0)


def linear_to_db(value: float) -> float:
    """Convert a linear ratio to dB."""
    return 10.0 * np.log10(value)


def dbm_to_mw(value_dbm: float) -> float:
    """Convert a dBm power to mW."""
    return 10.0 ** (value_dbm / 10.0)


def mw_to_dbm(value_mw: float) -> float:
    """Convert a mW power to dBm."""
    return 10.0 * np.log10(value_mw)


@dataclass(frozen=True)
class RadioParams:
    """Radio-layer constants for one experiment.

    gamma_t is the linear SINR success threshold, sigma2 the per-resource-block
    noise power in mW, and p_max the per-vehicle per-timeslot transmit power cap
    in mW.  The remaining fields parameterize the highway pathloss model
    (reference loss pl0_db at distance d0, exponent pl_exp, lognormal shadowing
    with std shadow_std_db, and pen_loss_db of attenuation per vehicle
    obstructing the line of sight) and the convoy geometry (mean gap d_avg,
    minimum gap d_min, both in meters).
    """

    gamma_t: float
    sigma2: float
    p_max: float
    pl0_db: float = 63.3
    pl_exp: float = 1.77
    d0: float = 10.0
    shadow_std_db: float = 3.1
    pen_loss_db: float = 10.0
    d_avg: float = 48.6
    d_min: float = 10.0

    def __post_init__(self) -> None:
        if not self.gamma_t > 0:
            raise ValidationError(f"gamma_t must be positive, got {self.gamma_t}")
        if not self.sigma2 > 0:
            raise ValidationError(f"sigma2 must be positive, got {self.sigma2}")
        if not self.p_max > 0:
            raise ValidationError(f"p_max must be positive, got {self.p_max}")
        if not self.pl_exp > 0:
            raise ValidationError(f"pl_exp must be positive, got {self.pl_exp}")
        if not self.d_avg > self.d_min > 0:
            raise ValidationError(
                f"need d_avg > d_min > 0, got d_avg={self.d_avg}, d_min={self.d_min}"
            )
        if self.shadow_std_db < 0:
            raise ValidationError("shadow_std_db must be non-negative")

    @classmethod
    def highway_default(cls, **overrides) -> "RadioParams":
        """Measurement-based highway defaults: 5 dB threshold, -95.2 dBm noise, 24 dBm cap."""
        base = dict(
            gamma_t=db_to_linear(5.0),
            sigma2=dbm_to_mw(-95.2),
            p_max=dbm_to_mw(24.0),
        )
        base.update(overrides)
        return cls(**base)


@dataclass(frozen=True)
class AcirProfile:
    """Adjacent-channel interference ratios indexed by frequency-slot gap.

    values[r] is the linear fraction of a transmitter's power received r slots
    away; values[0] must be 1 so that a zero gap reproduces plain co-channel
    interference.  Gaps past the stored vector fall back to tail_value.
    """

    values: tuple[float, ...]
    tail_value: float

    def __post_init__(self) -> None:
        if len(self.values) == 0:
            raise ValidationError("ACIR profile needs at least the gap-0 entry")
        if self.values[0] != 1.0:
            raise ValidationError("ACIR at gap 0 must be exactly 1 (co-channel)")
        for v in self.values:
            if not 0.0 <= v <= 1.0:
                raise ValidationError(f"ACIR values must lie in [0, 1], got {v}")
        if not 0.0 <= self.tail_value <= 1.0:
            raise ValidationError(f"ACIR tail must lie in [0, 1], got {self.tail_value}")

    @classmethod
    def standard_mask(cls) -> "AcirProfile":
        """The standard emission mask: 1, 10^-3 for gaps 1..4, 10^-4.5 beyond."""
        return cls(values=(1.0, 1e-3, 1e-3, 1e-3, 1e-3), tail_value=10.0 ** -4.5)

    @classmethod
    def disabled_aci(cls) -> "AcirProfile":
        """Co-channel only: zero leakage into every non-zero gap."""
        return cls(values=(1.0,), tail_value=0.0)

    def lookup(self, gap: int) -> float:
        """Linear interference ratio for a frequency-slot gap of `gap`."""
        if gap < 0:
            raise ValidationError(f"gap must be non-negative, got {gap}")
        if gap < len(self.values):
            return self.values[gap]
        return self.tail_value

    def weights(self, n_slots: int) -> np.ndarray:
        """(F, F) matrix W[f', f] = ratio leaking from slot f' into slot f."""
        gaps = np.abs(np.arange(n_slots)[:, None] - np.arange(n_slots)[None, :])
        table = np.array(
            [self.lookup(g) for g in range(n_slots)] if n_slots else [], dtype=float
        )
        return table[gaps]

    def is_non_increasing(self) -> bool:
        """True when leakage never grows with gap (needed by cover-based cuts)."""
        seq = list(self.values) + [self.tail_value]
        return all(a >= b for a, b in zip(seq, seq[1:]))


def acir_lookup(profile: AcirProfile, gap: int) -> float:
    """Linear ACIR for a slot gap; gaps beyond the stored mask use the tail value."""
    return profile.lookup(gap)


@dataclass(frozen=True)
class Scenario:
    """Immutable convoy instance: geometry, gains, mask, receiver sets, radio params.

    gains[i][j] is the linear channel power gain from transmitter i to receiver
    j; the diagonal is stored as 0 and never read as a link (a vehicle is not
    its own receiver, and a receiver's own transmissions do not interfere with
    its reception in the full-duplex baseline).
    """

    n: int
    f: int
    t: int
    positions: np.ndarray
    gains: np.ndarray
    acir: AcirProfile
    receivers: tuple[tuple[int, ...], ...]
    params: RadioParams
    seed: int | None = None

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValidationError("need at least one vehicle")
        if self.f < 1 or self.t < 1:
            raise ValidationError("need at least one frequency slot and one timeslot")
        pos = np.asarray(self.positions, dtype=float)
        gains = np.asarray(self.gains, dtype=float)
        if pos.shape != (self.n,):
            raise ValidationError(f"positions must have shape ({self.n},)")
        if gains.shape != (self.n, self.n):
            raise ValidationError(f"gains must have shape ({self.n}, {self.n})")
        off = ~np.eye(self.n, dtype=bool)
        if self.n > 1 and not np.all(gains[off] > 0):
            raise ValidationError("off-diagonal channel gains must be strictly positive")
        if len(self.receivers) != self.n:
            raise ValidationError("need one receiver set per vehicle")
        for i, rec in enumerate(self.receivers):
            if i in rec:
                raise ValidationError(f"vehicle {i} cannot be its own receiver")
            if any(not 0 <= j < self.n for j in rec):
                raise ValidationError(f"receiver index out of range in set of vehicle {i}")
            if len(set(rec)) != len(rec):
                raise ValidationError(f"duplicate receiver in set of vehicle {i}")
        pos.flags.writeable = False
        gains.flags.writeable = False
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "gains", gains)
        object.__setattr__(self, "receivers", tuple(tuple(r) for r in self.receivers))

    @property
    def links(self) -> tuple[tuple[int, int], ...]:
        """All intended (transmitter, receiver) pairs, in deterministic order."""
        return tuple((i, j) for i in range(self.n) for j in self.receivers[i])

    def single_timeslot(self) -> "Scenario":
        """One-timeslot view sharing geometry, gains and receiver sets."""
        if self.t == 1:
            return self
        return replace(self, t=1)

    def with_receivers(self, receivers) -> "Scenario":
        """Copy with explicitly chosen receiver sets (toy and crafted instances)."""
        return replace(self, receivers=tuple(tuple(r) for r in receivers))

    # -- serialization ---------------------------------------------------

    def serialize(self) -> str:
        """Lossless key/value + matrix text form (floats via repr round-trip)."""
        p = self.params
        lines = [
            f"{SCENARIO_FORMAT} {SCENARIO_VERSION}",
            f"n {self.n}",
            f"f {self.f}",
            f"t {self.t}",
            f"seed {'none' if self.seed is None else self.seed}",
            "params "
            + " ".join(
                repr(v)
                for v in (
                    p.gamma_t,
                    p.sigma2,
                    p.p_max,
                    p.pl0_db,
                    p.pl_exp,
                    p.d0,
                    p.shadow_std_db,
                    p.pen_loss_db,
                    p.d_avg,
                    p.d_min,
                )
            ),
            "acir " + " ".join(repr(v) for v in self.acir.values),
            f"acir_tail {self.acir.tail_value!r}",
            "positions " + " ".join(repr(float(v)) for v in self.positions),
        ]
        for i in range(self.n):
            lines.append(f"gains {i} " + " ".join(repr(float(v)) for v in self.gains[i]))
        for i in range(self.n):
            lines.append(f"receivers {i} " + " ".join(str(j) for j in self.receivers[i]))
        return "\n".join(lines) + "\n"

    @classmethod
    def deserialize(cls, text: str) -> "Scenario":
        fields: dict[str, list[str]] = {}
        gain_rows: dict[int, list[float]] = {}
        recv_rows: dict[int, tuple[int, ...]] = {}
        lines = [ln for ln in text.splitlines() if ln.strip()]
        header = lines[0].split()
        if header[0] != SCENARIO_FORMAT:
            raise ValidationError(f"not a scenario document: {lines[0]!r}")
        if int(header[1]) != SCENARIO_VERSION:
            raise ValidationError(f"unsupported scenario version {header[1]}")
        for ln in lines[1:]:
            key, *rest = ln.split()
            if key == "gains":
                gain_rows[int(rest[0])] = [float(v) for v in rest[1:]]
            elif key == "receivers":
                recv_rows[int(rest[0])] = tuple(int(v) for v in rest[1:])
            else:
                fields[key] = rest
        n = int(fields["n"][0])
        pvals = [float(v) for v in fields["params"]]
        params = RadioParams(*pvals)
        acir = AcirProfile(
            values=tuple(float(v) for v in fields["acir"]),
            tail_value=float(fields["acir_tail"][0]),
        )
        seed_tok = fields["seed"][0]
        return cls(
            n=n,
            f=int(fields["f"][0]),
            t=int(fields["t"][0]),
            positions=np.array([float(v) for v in fields["positions"]]),
            gains=np.array([gain_rows[i] for i in range(n)]),
            acir=acir,
            receivers=tuple(recv_rows[i] for i in range(n)),
            params=params,
            seed=None if seed_tok == "none" else int(seed_tok),
        )


def generate_positions(n: int, params: RadioParams, seed) -> np.ndarray:
    """Convoy coordinates: vehicle 0 at the origin, shifted-exponential gaps.

    Each inter-vehicle gap is d_min plus an exponential draw with mean
    d_avg - d_min, so gaps are at least d_min and average d_avg.
    """
    if n < 1:
        raise ValidationError("n must be at least 1")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    if n == 1:
        return np.zeros(1)
    gaps = params.d_min + rng.exponential(params.d_avg - params.d_min, size=n - 1)
    return np.concatenate([[0.0], np.cumsum(gaps)])


def channel_gain(
    dist: float, obstructions: int, params: RadioParams, shadow_db: float = 0.0
) -> float:
    """Linear channel power gain over `dist` meters with `obstructions` blockers.

    Pathloss is pl0_db + 10*pl_exp*log10(dist/d0) plus pen_loss_db per blocking
    vehicle plus the supplied shadowing term, all in dB.
    """
    if dist <= 0:
        raise GeometryError(f"distance must be positive, got {dist}")
    loss_db = (
        params.pl0_db
        + 10.0 * params.pl_exp * np.log10(dist / params.d0)
        + shadow_db
        + obstructions * params.pen_loss_db
    )
    return 10.0 ** (-loss_db / 10.0)


def nearest_receiver_sets(
    positions: np.ndarray, n_links: int
) -> tuple[tuple[int, ...], ...]:
    """Per-vehicle sets of the n_links nearest other vehicles (distance, then index)."""
    n = len(positions)
    out = []
    for i in range(n):
        others = sorted(
            (j for j in range(n) if j != i),
            key=lambda j: (abs(positions[j] - positions[i]), j),
        )
        out.append(tuple(sorted(others[:n_links])))
    return tuple(out)


def build_scenario(
    n: int,
    f: int,
    t: int,
    params: RadioParams | None = None,
    acir: AcirProfile | None = None,
    seed: int = 0,
    reciprocal_shadowing: bool = True,
) -> Scenario:
    """Generate a reproducible convoy scenario.

    Obstruction counts come from convoy ordering (vehicles strictly between the
    endpoints); shadowing is drawn once per unordered pair by default so the
    gain matrix is symmetric, or independently per direction when
    reciprocal_shadowing is False.  Receiver sets are the min(n-1, f*t-1)
    nearest vehicles.
    """
    if n < 2:
        raise ValidationError("build_scenario needs at least two vehicles")
    params = params or RadioParams.highway_default()
    acir = acir or AcirProfile.standard_mask()
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    positions = generate_positions(n, params, rng)
    gains = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            dist = positions[j] - positions[i]
            obstructions = j - i - 1
            if reciprocal_shadowing:
                shadow = rng.normal(0.0, params.shadow_std_db)
                g = channel_gain(dist, obstructions, params, shadow)
                gains[i, j] = gains[j, i] = g
            else:
                s_fwd = rng.normal(0.0, params.shadow_std_db)
                s_bwd = rng.normal(0.0, params.shadow_std_db)
                gains[i, j] = channel_gain(dist, obstructions, params, s_fwd)
                gains[j, i] = channel_gain(dist, obstructions, params, s_bwd)
    receivers = nearest_receiver_sets(positions, min(n - 1, f * t - 1))
    return Scenario(
        n=n,
        f=f,
        t=t,
        positions=positions,
        gains=gains,
        acir=acir,
        receivers=receivers,
        params=params,
        seed=seed,
    )


def scenario_from_positions(
    positions,
    f: int,
    t: int,
    params: RadioParams | None = None,
    acir: AcirProfile | None = None,
    shadow_db: np.ndarray | None = None,
    receivers=None,
) -> Scenario:
    """Deterministic scenario from explicit convoy coordinates (crafted instances).

    Positions must be strictly increasing; shadow_db, if given, is a symmetric
    per-pair dB offset matrix (zeros by default).
    """
    positions = np.asarray(positions, dtype=float)
    n = len(positions)
    if n >= 2 and not np.all(np.diff(positions) > 0):
        raise GeometryError("positions must be strictly increasing along the convoy")
    params = params or RadioParams.highway_default()
    acir = acir or AcirProfile.standard_mask()
    gains = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            s = 0.0 if shadow_db is None else float(shadow_db[i, j])
            g = channel_gain(positions[j] - positions[i], j - i - 1, params, s)
            gains[i, j] = gains[j, i] = g
    if receivers is None:
        receivers = nearest_receiver_sets(positions, min(n - 1, f * t - 1))
    return Scenario(
        n=n,
        f=f,
        t=t,
        positions=positions,
        gains=gains,
        acir=acir,
        receivers=tuple(tuple(r) for r in receivers),
        params=params,
        seed=None,
    )
