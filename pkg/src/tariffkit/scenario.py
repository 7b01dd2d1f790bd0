"""Finite weighted scenario sets over wholesale prices and local demand states.

Every expectation in the tariff formulas is an exact probability-weighted sum
over one of these sets, so the structural identities checked by the test suite
hold to floating-point accuracy rather than Monte Carlo accuracy.

Conventions
-----------
* prices are in $/kWh, energies in kWh, money in $.
* ``disturbances`` are per-customer demand shifts, one N-vector per class
  (all customers in a class are identical copies).
* ``renewable_customer`` is the class-aggregate behind-the-meter renewable
  output in kWh (installations come in discrete units allocated to classes).
* ``renewable_retailer`` is the retailer-side renewable output in kWh.
* ``solar_unit`` optionally carries the per-kW-of-capacity solar profile the
  renewable columns were built from, so capacity sweeps can rescale a set
  without re-ingesting data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import cached_property
from typing import Callable, Sequence

import numpy as np

PROBABILITY_TOL = 1e-12


def as_price_vector(values, horizon: int | None = None) -> np.ndarray:
    """Validate ``values`` as a finite 1-D price vector in $/kWh.

    Negative entries are allowed (wholesale prices can clear below zero);
    non-finite entries and empty vectors are not.
    """
    arr = np.array(values, dtype=float)
    if arr.ndim != 1:
        raise ValueError(f"price vector must be 1-D, got shape {arr.shape}")
    if arr.size == 0:
        raise ValueError("price vector must have at least one period")
    if not np.all(np.isfinite(arr)):
        raise ValueError("price vector contains non-finite entries")
    if horizon is not None and arr.size != horizon:
        raise ValueError(f"price vector has {arr.size} periods, expected {horizon}")
    arr.setflags(write=False)
    return arr


def _frozen(values, shape: tuple[int, ...], name: str, nonneg: bool = False) -> np.ndarray:
    arr = np.array(values, dtype=float)
    if arr.shape != shape:
        raise ValueError(f"{name} has shape {arr.shape}, expected {shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    if nonneg and np.any(arr < 0.0):
        raise ValueError(f"{name} must be non-negative")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Scenario:
    """One joint realization of the global state (prices, local demand states).

    probability : weight in [0, 1]
    prices : (N,) wholesale prices, $/kWh
    disturbances : (C, N) per-customer additive demand shifts, kWh
    renewable_customer : (C, N) class-aggregate behind-the-meter output, kWh
    renewable_retailer : (N,) retailer-side renewable output, kWh
    solar_unit : optional (N,) per-kW solar profile, kWh/kW
    """

    probability: float
    prices: np.ndarray
    disturbances: np.ndarray
    renewable_customer: np.ndarray
    renewable_retailer: np.ndarray
    solar_unit: np.ndarray | None = None

    def __post_init__(self):
        if not (0.0 <= self.probability <= 1.0) or not math.isfinite(self.probability):
            raise ValueError(f"scenario probability {self.probability} outside [0, 1]")
        prices = as_price_vector(self.prices)
        n = prices.size
        dist = np.atleast_2d(np.array(self.disturbances, dtype=float))
        c = dist.shape[0]
        object.__setattr__(self, "prices", prices)
        object.__setattr__(self, "disturbances", _frozen(dist, (c, n), "disturbances"))
        object.__setattr__(
            self,
            "renewable_customer",
            _frozen(self.renewable_customer, (c, n), "renewable_customer", nonneg=True),
        )
        object.__setattr__(
            self,
            "renewable_retailer",
            _frozen(self.renewable_retailer, (n,), "renewable_retailer", nonneg=True),
        )
        if self.solar_unit is not None:
            object.__setattr__(
                self, "solar_unit", _frozen(self.solar_unit, (n,), "solar_unit", nonneg=True)
            )

    @property
    def horizon(self) -> int:
        return self.prices.size

    @property
    def n_classes(self) -> int:
        return self.disturbances.shape[0]

    def local_state_key(self) -> bytes:
        """Bitwise identity of the local (non-price) state block."""
        parts = [
            self.disturbances.tobytes(),
            self.renewable_customer.tobytes(),
            self.renewable_retailer.tobytes(),
        ]
        if self.solar_unit is not None:
            parts.append(self.solar_unit.tobytes())
        return b"".join(parts)


def make_scenario(
    probability: float,
    prices,
    disturbances=None,
    renewable_customer=None,
    renewable_retailer=None,
    solar_unit=None,
    n_classes: int = 1,
) -> Scenario:
    """Build a Scenario, zero-filling any omitted field."""
    prices = as_price_vector(prices)
    n = prices.size
    if disturbances is not None:
        disturbances = np.atleast_2d(np.array(disturbances, dtype=float))
        n_classes = disturbances.shape[0]
    else:
        disturbances = np.zeros((n_classes, n))
    if renewable_customer is None:
        renewable_customer = np.zeros((n_classes, n))
    if renewable_retailer is None:
        renewable_retailer = np.zeros(n)
    return Scenario(
        probability=float(probability),
        prices=prices,
        disturbances=disturbances,
        renewable_customer=renewable_customer,
        renewable_retailer=renewable_retailer,
        solar_unit=solar_unit,
    )


@dataclass(frozen=True)
class ScenarioSet:
    """Immutable weighted collection of scenarios on a common horizon.

    Probabilities must sum to 1 within ``PROBABILITY_TOL``; a violation is a
    construction error, never silently renormalized.  ``independent`` marks
    sets whose price block is statistically independent of the local state
    block by construction (see :func:`split_marginals`).
    """

    scenarios: tuple[Scenario, ...]
    independent: bool = False

    def __post_init__(self):
        scenarios = tuple(self.scenarios)
        if not scenarios:
            raise ValueError("scenario set must contain at least one scenario")
        n = scenarios[0].horizon
        c = scenarios[0].n_classes
        has_unit = scenarios[0].solar_unit is not None
        for k, s in enumerate(scenarios):
            if s.horizon != n:
                raise ValueError(f"scenario {k} horizon {s.horizon} != {n}")
            if s.n_classes != c:
                raise ValueError(f"scenario {k} has {s.n_classes} classes, expected {c}")
            if (s.solar_unit is not None) != has_unit:
                raise ValueError("solar_unit must be present on all scenarios or none")
        total = math.fsum(s.probability for s in scenarios)
        if abs(total - 1.0) > PROBABILITY_TOL:
            raise ValueError(f"scenario probabilities sum to {total!r}, not 1")
        object.__setattr__(self, "scenarios", scenarios)

    def __len__(self) -> int:
        return len(self.scenarios)

    def __iter__(self):
        return iter(self.scenarios)

    @property
    def horizon(self) -> int:
        return self.scenarios[0].horizon

    @property
    def n_classes(self) -> int:
        return self.scenarios[0].n_classes

    # Stacked views used by the vectorized settlement paths.

    @cached_property
    def probabilities(self) -> np.ndarray:
        arr = np.array([s.probability for s in self.scenarios])
        arr.setflags(write=False)
        return arr

    @cached_property
    def price_matrix(self) -> np.ndarray:
        arr = np.stack([s.prices for s in self.scenarios])
        arr.setflags(write=False)
        return arr

    @cached_property
    def disturbance_tensor(self) -> np.ndarray:
        arr = np.stack([s.disturbances for s in self.scenarios])
        arr.setflags(write=False)
        return arr

    @cached_property
    def customer_renewable_tensor(self) -> np.ndarray:
        arr = np.stack([s.renewable_customer for s in self.scenarios])
        arr.setflags(write=False)
        return arr

    @cached_property
    def retailer_renewable_matrix(self) -> np.ndarray:
        arr = np.stack([s.renewable_retailer for s in self.scenarios])
        arr.setflags(write=False)
        return arr

    @property
    def has_solar_unit(self) -> bool:
        return self.scenarios[0].solar_unit is not None


def from_prices(price_vectors: Sequence, probabilities=None, n_classes: int = 1) -> ScenarioSet:
    """Scenario set with only price uncertainty (zero local states)."""
    k = len(price_vectors)
    if probabilities is None:
        probabilities = [1.0 / k] * k
    scenarios = [
        make_scenario(p, v, n_classes=n_classes) for p, v in zip(probabilities, price_vectors)
    ]
    return ScenarioSet(tuple(scenarios))


def expect_price(scenario_set: ScenarioSet) -> np.ndarray:
    """Probability-weighted mean price vector, $/kWh."""
    mean = scenario_set.probabilities @ scenario_set.price_matrix
    mean.setflags(write=False)
    return mean


def expect_vector(scenario_set: ScenarioSet, select: Callable[[Scenario], np.ndarray]) -> np.ndarray:
    """Probability-weighted mean of an arbitrary per-scenario vector field."""
    acc = None
    for s in scenario_set:
        v = s.probability * np.asarray(select(s), dtype=float)
        acc = v if acc is None else acc + v
    return acc


def expect_scalar(scenario_set: ScenarioSet, select: Callable[[Scenario], float]) -> float:
    """Probability-weighted mean of a per-scenario scalar field."""
    return math.fsum(s.probability * float(select(s)) for s in scenario_set)


def cov_trace(
    scenario_set: ScenarioSet,
    select_a: Callable[[Scenario], np.ndarray],
    select_b: Callable[[Scenario], np.ndarray],
) -> float:
    """Sum over periods of the population covariance of two vector fields.

    Computed in centered form: sum_t E[(a_t - E a_t)(b_t - E b_t)] under the
    scenario weights.
    """
    mean_a = expect_vector(scenario_set, select_a)
    mean_b = expect_vector(scenario_set, select_b)
    total = 0.0
    for s in scenario_set:
        da = np.asarray(select_a(s), dtype=float) - mean_a
        db = np.asarray(select_b(s), dtype=float) - mean_b
        total += s.probability * float(da @ db)
    return total


def split_marginals(scenario_set: ScenarioSet) -> ScenarioSet:
    """Product-of-marginals reconstruction of a scenario set.

    Identifies the support of the price block and of the local-state block by
    bitwise equality, accumulates marginal weights, and returns the product
    distribution (price support x local support) with ``independent=True``.
    Idempotent on sets that are already products.
    """
    price_support: dict[bytes, tuple[float, Scenario]] = {}
    local_support: dict[bytes, tuple[float, Scenario]] = {}
    for s in scenario_set:
        pk = s.prices.tobytes()
        weight, rep = price_support.get(pk, (0.0, s))
        price_support[pk] = (weight + s.probability, rep)
        lk = s.local_state_key()
        weight, rep = local_support.get(lk, (0.0, s))
        local_support[lk] = (weight + s.probability, rep)

    scenarios = []
    for p_price, price_rep in price_support.values():
        for p_local, local_rep in local_support.values():
            scenarios.append(
                Scenario(
                    probability=p_price * p_local,
                    prices=price_rep.prices,
                    disturbances=local_rep.disturbances,
                    renewable_customer=local_rep.renewable_customer,
                    renewable_retailer=local_rep.renewable_retailer,
                    solar_unit=local_rep.solar_unit,
                )
            )
    return ScenarioSet(tuple(scenarios), independent=True)


def with_pv_capacity(
    scenario_set: ScenarioSet,
    customer_kw=None,
    retailer_kw: float = 0.0,
) -> ScenarioSet:
    """Rebuild renewable columns from the per-kW solar profile.

    ``customer_kw`` is a per-class capacity vector (kW); ``retailer_kw`` a
    scalar capacity.  Requires ``solar_unit`` on the set.
    """
    if not scenario_set.has_solar_unit:
        raise ValueError("scenario set has no solar_unit profile to scale")
    c = scenario_set.n_classes
    if customer_kw is None:
        customer_kw = np.zeros(c)
    customer_kw = np.asarray(customer_kw, dtype=float)
    if customer_kw.shape != (c,):
        raise ValueError(f"customer_kw has shape {customer_kw.shape}, expected ({c},)")
    if np.any(customer_kw < 0.0) or retailer_kw < 0.0:
        raise ValueError("PV capacities must be non-negative")
    scenarios = []
    for s in scenario_set:
        scenarios.append(
            replace(
                s,
                renewable_customer=np.outer(customer_kw, s.solar_unit),
                renewable_retailer=retailer_kw * s.solar_unit,
            )
        )
    return ScenarioSet(tuple(scenarios), independent=scenario_set.independent)
