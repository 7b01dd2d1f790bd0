"""Storage arbitrage against a known price vector.

The unit problem is a small LP: split the meter-side action into charge and
discharge streams, track the state of charge through a one-way efficiency,
and maximize the value of energy sold minus energy bought.  With unit
efficiency, unlimited rates and zero initial charge this reduces exactly to
maximizing pi^T s over the set of schedules whose running withdrawals stay
inside [0, capacity].
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import simplex
from .scenario import as_price_vector

POWERWALL_CAPACITY_KWH = 6.4
POWERWALL_RATE_KW = 3.3
POWERWALL_EFFICIENCY = 0.96

_ZERO_TOL = 1e-11


@dataclass(frozen=True)
class StorageSpec:
    """Physical parameters of one storage unit.

    ``capacity_kwh`` bounds the state of charge; ``efficiency`` applies one
    way on each of charge and discharge; rates are meter-side kW limits and
    may be infinite.
    """

    capacity_kwh: float
    charge_rate_kw: float = math.inf
    discharge_rate_kw: float = math.inf
    efficiency: float = 1.0
    initial_charge_kwh: float = 0.0
    period_hours: float = 1.0

    def __post_init__(self):
        if not (self.capacity_kwh >= 0.0 and math.isfinite(self.capacity_kwh)):
            raise ValueError(f"capacity_kwh must be finite and >= 0, got {self.capacity_kwh}")
        if not (self.charge_rate_kw > 0.0 and self.discharge_rate_kw > 0.0):
            raise ValueError("rates must be positive (may be infinite)")
        if not (0.0 < self.efficiency <= 1.0):
            raise ValueError(f"efficiency must be in (0, 1], got {self.efficiency}")
        if not (0.0 <= self.initial_charge_kwh <= self.capacity_kwh):
            raise ValueError("initial charge must lie in [0, capacity]")
        if not (self.period_hours > 0.0 and math.isfinite(self.period_hours)):
            raise ValueError("period_hours must be finite and positive")


def idealized(capacity_kwh: float) -> StorageSpec:
    """Lossless, rate-unlimited unit starting empty."""
    return StorageSpec(capacity_kwh=capacity_kwh)


def powerwall() -> StorageSpec:
    return StorageSpec(
        capacity_kwh=POWERWALL_CAPACITY_KWH,
        charge_rate_kw=POWERWALL_RATE_KW,
        discharge_rate_kw=POWERWALL_RATE_KW,
        efficiency=POWERWALL_EFFICIENCY,
    )


@dataclass(frozen=True)
class StorageSchedule:
    """One unit's optimal response to a price vector.

    ``meter_energy`` is the net meter-side energy per period, kWh,
    positive for discharge; ``state_of_charge`` has length N+1 and starts
    at the initial charge.  Only the value is contract-bearing: when the LP
    optimum is degenerate the schedule is one optimal vertex among several.
    """

    meter_energy: np.ndarray
    charge: np.ndarray
    discharge: np.ndarray
    state_of_charge: np.ndarray
    value: float


def _caps(spec: StorageSpec, n: int) -> tuple[np.ndarray, np.ndarray]:
    # Infinite rates are replaced by one-period fill/drain caps, an exact
    # reformulation at unit efficiency (a period cannot usefully move more
    # than the capacity).
    h = spec.period_hours
    eta = spec.efficiency
    c_cap = spec.charge_rate_kw * h
    d_cap = spec.discharge_rate_kw * h
    if not math.isfinite(c_cap):
        c_cap = spec.capacity_kwh / eta
    if not math.isfinite(d_cap):
        d_cap = spec.capacity_kwh * eta
    return np.full(n, c_cap), np.full(n, d_cap)


@lru_cache(maxsize=1024)
def _solve(spec: StorageSpec, price_bytes: bytes, n: int) -> StorageSchedule:
    prices = np.frombuffer(price_bytes, dtype=float)
    theta = spec.capacity_kwh
    eta = spec.efficiency
    soc0 = spec.initial_charge_kwh

    if theta <= 0.0:
        zero = np.zeros(n)
        zero.setflags(write=False)
        soc = np.zeros(n + 1)
        soc.setflags(write=False)
        return StorageSchedule(zero, zero, zero, soc, 0.0)

    c_cap, d_cap = _caps(spec, n)
    # variables x = (charge_1..N, discharge_1..N)
    obj = np.concatenate([-prices, prices])
    lower = np.tri(n)  # prefix-sum operator
    soc_step = np.hstack([eta * lower, -lower / eta])
    G = np.vstack(
        [
            soc_step,  # soc_k - soc0 <= theta - soc0
            -soc_step,  # soc0 - soc_k <= soc0
            np.hstack([np.eye(n), np.zeros((n, n))]),
            np.hstack([np.zeros((n, n)), np.eye(n)]),
        ]
    )
    h = np.concatenate([np.full(n, theta - soc0), np.full(n, soc0), c_cap, d_cap])
    x, value = simplex.maximize(obj, G, h)

    charge = np.where(np.abs(x[:n]) < _ZERO_TOL, 0.0, x[:n])
    discharge = np.where(np.abs(x[n:]) < _ZERO_TOL, 0.0, x[n:])
    meter = discharge - charge
    soc = np.concatenate([[soc0], soc0 + np.cumsum(eta * charge - discharge / eta)])
    if soc.min() < -1e-7 or soc.max() > theta + 1e-7:
        raise ArithmeticError("storage LP produced an out-of-bounds state of charge")
    soc = np.clip(soc, 0.0, theta)
    for arr in (charge, discharge, meter, soc):
        arr.setflags(write=False)
    return StorageSchedule(meter, charge, discharge, soc, value)


def arbitrage_value(spec: StorageSpec, prices) -> tuple[float, StorageSchedule]:
    """Optimal arbitrage value of one unit and an achieving schedule.

    The zero schedule is always feasible, so the value is never negative
    when the unit starts empty.
    """
    prices = as_price_vector(prices)
    schedule = _solve(spec, prices.tobytes(), prices.size)
    return schedule.value, schedule


def fleet_value(specs, prices) -> float:
    """Total arbitrage value of a collection of units at common prices."""
    prices = as_price_vector(prices)
    return math.fsum(arbitrage_value(spec, prices)[0] for spec in specs)


def rate_caps(spec: StorageSpec, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-period charge and discharge energy caps, capacity-capped if unrated."""
    return _caps(spec, n)
