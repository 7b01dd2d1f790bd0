"""Revenue-adequate two-part tariff design under scenario uncertainty.

The retailer recovers a fixed cost F from M customers through an ex-ante
tariff T(q) = A + pi^T q, with expected revenue pinned to F (revenue
adequacy) and prices chosen to maximize expected consumer surplus.  The
surplus-maximizing volumetric price equals the expected wholesale price,
with a covariance correction to the connection charge A; distributed
resources shift A but never the prices.

Accounting in this module is the closed-form expectation path (per-scenario
aggregation of analytic margins and surpluses).  The welfare module
re-derives every quantity by simulating settlement; the two paths share the
demand and storage primitives but not the accounting code, and the test
suite holds them to each other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import demand as dm
from . import storage as st
from .scenario import ScenarioSet, as_price_vector, cov_trace, expect_price

MODE_NONE = "none"
MODE_DECENTRALIZED = "decentralized"
MODE_CENTRALIZED = "centralized"
MODES = (MODE_NONE, MODE_DECENTRALIZED, MODE_CENTRALIZED)

OPTIMAL_TWO_PART = "optimal-two-part"
FLAT_FIXED_A = "flat-fixed-A"
FLAT_ZERO_A = "flat-zero-A"
DYNAMIC_FIXED_A = "dynamic-fixed-A"
DYNAMIC_ZERO_A = "dynamic-zero-A"
FAMILY_KINDS = (OPTIMAL_TWO_PART, FLAT_FIXED_A, FLAT_ZERO_A, DYNAMIC_FIXED_A, DYNAMIC_ZERO_A)

# dual-route agreement required of the two connection-charge computations
A_AGREEMENT_RTOL = 1e-8
# settled-revenue residual accepted when solving a family for E[rs] = F
ADEQUACY_RTOL = 1e-9

_REVENUE_MAX_T = 0.5


class TariffError(Exception):
    """Base class for tariff-design failures."""


class ModelAssumptionError(TariffError):
    """Expected demand is not strictly price-monotone."""


class RevenueAdequacyError(TariffError):
    """The two connection-charge routes disagree beyond tolerance."""


class InfeasibleFamilyError(TariffError):
    """No member of the family attains the required expected revenue."""

    def __init__(self, message: str, attainable_max: float):
        super().__init__(message)
        self.attainable_max = attainable_max


@dataclass(frozen=True)
class TwoPartTariff:
    """Ex-ante tariff: connection charge A ($/customer) plus prices ($/kWh)."""

    connection_charge: float
    prices: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "prices", as_price_vector(self.prices))
        if not math.isfinite(self.connection_charge):
            raise ValueError("connection charge must be finite")

    @property
    def horizon(self) -> int:
        return self.prices.size

    def is_flat(self, tol: float = 0.0) -> bool:
        return bool(np.ptp(self.prices) <= tol)


def flat_tariff(connection_charge: float, price: float, horizon: int) -> TwoPartTariff:
    return TwoPartTariff(connection_charge, np.full(horizon, float(price)))


@dataclass(frozen=True)
class TariffFamily:
    """A restricted tariff menu to optimize over.

    ``optimal-two-part`` frees both A and the price vector; the flat and
    dynamic kinds pin A (to ``fixed_connection_charge`` or zero) and search
    prices only.
    """

    kind: str
    fixed_connection_charge: float | None = None

    def __post_init__(self):
        if self.kind not in FAMILY_KINDS:
            raise ValueError(f"unknown family kind {self.kind!r}")
        if self.kind in (FLAT_FIXED_A, DYNAMIC_FIXED_A):
            if self.fixed_connection_charge is None:
                raise ValueError(f"{self.kind} requires fixed_connection_charge")
        elif self.fixed_connection_charge is not None:
            raise ValueError(f"{self.kind} does not take fixed_connection_charge")

    @property
    def connection_charge(self) -> float:
        """The pinned A for non-optimal kinds."""
        if self.kind in (FLAT_ZERO_A, DYNAMIC_ZERO_A):
            return 0.0
        if self.fixed_connection_charge is None:
            raise ValueError("optimal-two-part has no pinned connection charge")
        return float(self.fixed_connection_charge)

    @property
    def is_flat(self) -> bool:
        return self.kind in (FLAT_FIXED_A, FLAT_ZERO_A)


@dataclass(frozen=True)
class IntegrationCase:
    """How distributed resources participate in settlement.

    ``decentralized``: customers own the resources behind the meter and are
    billed on net withdrawals; renewable profiles come from the scenario
    set's customer columns, storage responds to the tariff prices.
    ``centralized``: the retailer owns the resources; customers are billed
    on gross consumption, the retailer nets the scenario set's retailer
    renewable column and a storage fleet committed ex ante against the
    expected price.  Unit counts may be fractional (fleet value is exactly
    linear in the count).
    """

    mode: str = MODE_NONE
    customer_storage: st.StorageSpec | None = None
    customer_storage_units: np.ndarray | None = None
    retailer_storage: st.StorageSpec | None = None
    retailer_storage_units: float = 0.0

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown integration mode {self.mode!r}")
        if (self.customer_storage is None) != (self.customer_storage_units is None):
            raise ValueError("customer storage spec and unit counts must be given together")
        if self.customer_storage_units is not None:
            units = np.atleast_1d(np.asarray(self.customer_storage_units, dtype=float))
            if np.any(units < 0.0) or not np.all(np.isfinite(units)):
                raise ValueError("customer storage unit counts must be finite and >= 0")
            units.setflags(write=False)
            object.__setattr__(self, "customer_storage_units", units)
        if self.retailer_storage_units < 0.0:
            raise ValueError("retailer storage unit count must be >= 0")
        if self.mode != MODE_DECENTRALIZED and self.customer_storage is not None:
            raise ValueError(f"customer storage requires decentralized mode, not {self.mode!r}")
        if self.mode != MODE_CENTRALIZED and (
            self.retailer_storage is not None or self.retailer_storage_units > 0.0
        ):
            raise ValueError(f"retailer storage requires centralized mode, not {self.mode!r}")

    @property
    def uses_customer_der(self) -> bool:
        return self.mode == MODE_DECENTRALIZED

    @property
    def uses_retailer_der(self) -> bool:
        return self.mode == MODE_CENTRALIZED


def no_der() -> IntegrationCase:
    return IntegrationCase()


def decentralized_case(storage_spec: st.StorageSpec | None = None, storage_units=None) -> IntegrationCase:
    return IntegrationCase(
        mode=MODE_DECENTRALIZED,
        customer_storage=storage_spec,
        customer_storage_units=storage_units,
    )


def centralized_case(storage_spec: st.StorageSpec | None = None, storage_units: float = 0.0) -> IntegrationCase:
    return IntegrationCase(
        mode=MODE_CENTRALIZED,
        retailer_storage=storage_spec,
        retailer_storage_units=float(storage_units),
    )


# ---------------------------------------------------------------------------
# fleet responses


def customer_fleet_meter(case: IntegrationCase, n_classes: int, prices) -> np.ndarray:
    """Per-class meter-side storage energy (C, N) at the given prices."""
    prices = as_price_vector(prices)
    if not case.uses_customer_der or case.customer_storage is None:
        return np.zeros((n_classes, prices.size))
    units = case.customer_storage_units
    if units.size != n_classes:
        raise ValueError(f"storage units for {units.size} classes, model has {n_classes}")
    _, schedule = st.arbitrage_value(case.customer_storage, prices)
    return np.outer(units, schedule.meter_energy)


def customer_fleet_value(case: IntegrationCase, prices) -> float:
    """Total arbitrage value of the customer fleet at the given prices."""
    if not case.uses_customer_der or case.customer_storage is None:
        return 0.0
    value, _ = st.arbitrage_value(case.customer_storage, as_price_vector(prices))
    return float(case.customer_storage_units.sum()) * value


def retailer_commitment(case: IntegrationCase, mean_prices) -> np.ndarray:
    """Retailer fleet schedule committed ex ante against the expected price."""
    mean_prices = as_price_vector(mean_prices)
    if not case.uses_retailer_der or case.retailer_storage is None or case.retailer_storage_units == 0.0:
        return np.zeros(mean_prices.size)
    _, schedule = st.arbitrage_value(case.retailer_storage, mean_prices)
    return case.retailer_storage_units * schedule.meter_energy


def retailer_fleet_value(case: IntegrationCase, mean_prices) -> float:
    if not case.uses_retailer_der or case.retailer_storage is None:
        return 0.0
    value, _ = st.arbitrage_value(case.retailer_storage, as_price_vector(mean_prices))
    return case.retailer_storage_units * value


def retailer_renewable_value(case: IntegrationCase, scenario_set: ScenarioSet) -> float:
    """E[lambda^T r_retailer] over the set (zero unless centralized)."""
    if not case.uses_retailer_der:
        return 0.0
    return math.fsum(
        s.probability * float(s.prices @ s.renewable_retailer) for s in scenario_set
    )


def retailer_der_offset(case: IntegrationCase, scenario_set: ScenarioSet) -> float:
    """Expected-revenue contribution of retailer-integrated resources."""
    if not case.uses_retailer_der:
        return 0.0
    mean = expect_price(scenario_set)
    return retailer_renewable_value(case, scenario_set) + retailer_fleet_value(case, mean)


# ---------------------------------------------------------------------------
# expectation accounting (closed-form path)


def _net_demand_by_scenario(
    prices: np.ndarray,
    model: dm.DemandModel,
    scenario_set: ScenarioSet,
    case: IntegrationCase,
) -> np.ndarray:
    """Metered aggregate demand (S, N): gross minus behind-the-meter resources."""
    gross = (
        model.sigma_total * (model.base - model.slope @ prices)[None, :]
        + np.einsum("c,scn->sn", model.class_counts, scenario_set.disturbance_tensor)
    )
    if case.uses_customer_der:
        gross = gross - scenario_set.customer_renewable_tensor.sum(axis=1)
        gross = gross - customer_fleet_meter(case, model.n_classes, prices).sum(axis=0)[None, :]
    return gross


def expected_margin(prices, model: dm.DemandModel, scenario_set: ScenarioSet, case: IntegrationCase) -> float:
    """E[(pi - lambda)^T d(pi, xi)] over the set, $ per day."""
    prices = as_price_vector(prices, model.horizon)
    net = _net_demand_by_scenario(prices, model, scenario_set, case)
    gaps = prices[None, :] - scenario_set.price_matrix
    return float(scenario_set.probabilities @ np.einsum("sn,sn->s", gaps, net))


def expected_retailer_surplus(
    tariff: TwoPartTariff,
    model: dm.DemandModel,
    scenario_set: ScenarioSet,
    case: IntegrationCase,
) -> float:
    """Expected retailer surplus of a tariff, $ per day (closed-form path)."""
    margin = expected_margin(tariff.prices, model, scenario_set, case)
    return model.customers * tariff.connection_charge + margin + retailer_der_offset(case, scenario_set)


def expected_consumer_surplus(
    tariff: TwoPartTariff,
    model: dm.DemandModel,
    scenario_set: ScenarioSet,
    case: IntegrationCase,
) -> float:
    """Expected consumer surplus of a tariff, $ per day (closed-form path).

    Uses the quadratic identity S(D) - pi^T D = v^T B^{-1} v / (2 sigma)
    + sigma pi^T B pi / 2 - pi^T v with v = sigma b0 + w, instead of
    evaluating S at the consumption bundle (the welfare module does the
    latter; the two are held to each other by the tests).
    """
    pi = as_price_vector(tariff.prices, model.horizon)
    dist = scenario_set.disturbance_tensor  # (S, C, N)
    v = model.sigma[None, :, None] * model.base[None, None, :] + dist
    binv_v = np.einsum("nm,scm->scn", model.slope_inverse, v)
    quad_v = np.einsum("scn,scn->sc", v, binv_v)
    pi_b_pi = float(pi @ (model.slope @ pi))
    net_benefit = (
        quad_v / (2.0 * model.sigma[None, :])
        + 0.5 * pi_b_pi * model.sigma[None, :]
        - np.einsum("n,scn->sc", pi, v)
    )  # (S, C) per-customer
    per_scenario = net_benefit @ model.class_counts
    cs = float(scenario_set.probabilities @ per_scenario)
    cs -= model.customers * tariff.connection_charge
    if case.uses_customer_der:
        renewable_credit = np.einsum(
            "s,sn,n->", scenario_set.probabilities,
            scenario_set.customer_renewable_tensor.sum(axis=1), pi,
        )
        fleet = customer_fleet_meter(case, model.n_classes, pi).sum(axis=0)
        cs += float(renewable_credit) + float(pi @ fleet)
    return cs


# ---------------------------------------------------------------------------
# optimal two-part tariffs


def _require_assumption1(model: dm.DemandModel, scenario_set: ScenarioSet) -> None:
    report = dm.validate_assumption1(model, scenario_set)
    if not report.passed:
        raise ModelAssumptionError(
            f"expected demand is not strictly monotone (max sym eig {report.eig_max})"
        )


def connection_charge_for(
    prices,
    model: dm.DemandModel,
    scenario_set: ScenarioSet,
    case: IntegrationCase,
    fixed_cost: float,
) -> float:
    """Connection charge making the tariff revenue adequate at given prices.

    Solves M A + E[(pi - lambda)^T d] + offsets = F for A; exact because
    expected revenue is linear in A.
    """
    prices = as_price_vector(prices, model.horizon)
    margin = expected_margin(prices, model, scenario_set, case)
    return (fixed_cost - margin - retailer_der_offset(case, scenario_set)) / model.customers


def _gross_aggregate_selector(model: dm.DemandModel, prices: np.ndarray):
    fixed = model.sigma_total * (model.base - model.slope @ prices)

    def select(s):
        return fixed + model.class_counts @ s.disturbances

    return select


def optimal_decentralized(
    model: dm.DemandModel,
    scenario_set: ScenarioSet,
    case: IntegrationCase,
    fixed_cost: float,
) -> TwoPartTariff:
    """Surplus-maximizing revenue-adequate tariff, resources behind the meter.

    Prices equal the expected wholesale price.  The connection charge is
    computed twice: the covariance closed form

        A = (F + tr cov(lambda, D_agg) - tr cov(lambda, r_customer)) / M

    and the generic revenue-adequacy solve; disagreement beyond
    ``A_AGREEMENT_RTOL`` raises :class:`RevenueAdequacyError`.
    """
    if case.mode == MODE_CENTRALIZED:
        raise ValueError("use optimal_centralized for retailer-integrated resources")
    _require_assumption1(model, scenario_set)
    pi = expect_price(scenario_set)

    demand_cov = cov_trace(scenario_set, _gross_aggregate_selector(model, pi), lambda s: s.prices)
    a_star = (fixed_cost + demand_cov) / model.customers
    if case.uses_customer_der:
        renewable_cov = cov_trace(
            scenario_set, lambda s: s.renewable_customer.sum(axis=0), lambda s: s.prices
        )
        a_closed = a_star - renewable_cov / model.customers
    else:
        a_closed = a_star

    a_generic = connection_charge_for(pi, model, scenario_set, case, fixed_cost)
    scale = max(1.0, abs(a_closed), abs(a_generic))
    if abs(a_closed - a_generic) > A_AGREEMENT_RTOL * scale:
        raise RevenueAdequacyError(
            f"connection-charge routes disagree: closed form {a_closed!r}, generic {a_generic!r}"
        )
    return TwoPartTariff(a_generic, pi)


def optimal_centralized(
    model: dm.DemandModel,
    scenario_set: ScenarioSet,
    case: IntegrationCase,
    fixed_cost: float,
    *,
    damping: float = 0.5,
    tol: float = 1e-10,
    max_iterations: int = 100,
) -> TwoPartTariff:
    """Surplus-maximizing revenue-adequate tariff, retailer-integrated resources.

    Prices solve pi = lam_bar + E[grad D]^{-1} E[grad D (lambda - lam_bar)]
    by damped fixed-point iteration; for this demand family the price
    Jacobian is state-independent, so the correction vanishes and the
    iteration terminates at the expected price after one step.  The
    resources enter only the connection charge:

        A = A* - (fleet value at lam_bar + E[lambda^T r_retailer]) / M.
    """
    if case.mode != MODE_CENTRALIZED:
        raise ValueError("optimal_centralized requires a centralized integration case")
    _require_assumption1(model, scenario_set)
    lam_bar = expect_price(scenario_set)

    # E[grad D] = -sigma_total B is state-independent here, so the correction
    # E[grad D (lambda - lam_bar)] = grad D E[lambda - lam_bar] vanishes
    # identically and the fixed point is the expected price itself.
    if model.jacobian_state_independent:
        pi = lam_bar
    else:
        jacobian = -model.sigma_total * model.slope
        jac_inv = np.linalg.inv(jacobian)
        deviations = scenario_set.price_matrix - lam_bar[None, :]
        mean_jac_dev = jacobian @ (scenario_set.probabilities @ deviations)
        pi = lam_bar.copy()
        for _ in range(max_iterations):
            target = lam_bar + jac_inv @ mean_jac_dev
            pi_next = (1.0 - damping) * pi + damping * target
            if np.max(np.abs(pi_next - pi)) < tol:
                pi = pi_next
                break
            pi = pi_next
        else:
            raise ArithmeticError("centralized price fixed point did not converge")

    margin = expected_margin(pi, model, scenario_set, case)
    a_star = (fixed_cost - margin) / model.customers
    offset = retailer_der_offset(case, scenario_set)
    a_closed = a_star - offset / model.customers

    a_generic = connection_charge_for(pi, model, scenario_set, case, fixed_cost)
    scale = max(1.0, abs(a_closed), abs(a_generic))
    if abs(a_closed - a_generic) > A_AGREEMENT_RTOL * scale:
        raise RevenueAdequacyError(
            f"connection-charge routes disagree: closed form {a_closed!r}, generic {a_generic!r}"
        )
    return TwoPartTariff(a_generic, pi)


def optimal_two_part(
    model: dm.DemandModel,
    scenario_set: ScenarioSet,
    case: IntegrationCase,
    fixed_cost: float,
) -> TwoPartTariff:
    if case.mode == MODE_CENTRALIZED:
        return optimal_centralized(model, scenario_set, case, fixed_cost)
    return optimal_decentralized(model, scenario_set, case, fixed_cost)


# ---------------------------------------------------------------------------
# restricted families


@dataclass(frozen=True)
class FamilyReport:
    """Solution record for one family optimization.

    ``flat_roots`` carries both revenue-adequate flat prices (low, high)
    when the family is flat and both exist; ``multiplier_t`` is the scalar
    search parameter for dynamic kinds (prices are t * choke + (1-t) *
    expected price); ``residual`` is the settled-revenue error at the
    returned tariff.
    """

    tariff: TwoPartTariff
    kind: str
    flat_roots: tuple[float, float] | None = None
    root_surpluses: tuple[float, float] | None = None
    multiplier_t: float | None = None
    residual: float = 0.0
    notes: tuple[str, ...] = ()


def _flat_quadratic(
    model: dm.DemandModel,
    scenario_set: ScenarioSet,
    case: IntegrationCase,
    connection_charge: float,
    frozen_fleet: np.ndarray,
) -> tuple[float, float, float]:
    """Coefficients of E[rs](p) = a2 p^2 + a1 p + a0 for a flat price p.

    The customer storage response is frozen at ``frozen_fleet`` (the total
    meter-side fleet vector); for flat positive prices an initially empty
    unit never cycles, so the freeze is exact there.
    """
    one = np.ones(model.horizon)
    b_one = model.slope @ one
    s_tot = model.sigma_total
    probs = scenario_set.probabilities
    lam = scenario_set.price_matrix

    g = np.einsum("c,scn->sn", model.class_counts, scenario_set.disturbance_tensor)
    if case.uses_customer_der:
        g = g - scenario_set.customer_renewable_tensor.sum(axis=1) - frozen_fleet[None, :]
    base_term = s_tot * model.base[None, :] + g  # (S, N)

    a2 = -s_tot * float(one @ b_one)
    a1 = float(probs @ (base_term @ one)) + s_tot * float(probs @ (lam @ b_one))
    a0 = -float(probs @ np.einsum("sn,sn->s", lam, base_term))
    a0 += model.customers * connection_charge + retailer_der_offset(case, scenario_set)
    return a2, a1, a0


def _solve_flat(
    family: TariffFamily,
    model: dm.DemandModel,
    scenario_set: ScenarioSet,
    case: IntegrationCase,
    fixed_cost: float,
) -> FamilyReport:
    charge = family.connection_charge
    n = model.horizon
    fleet = np.zeros(n)
    roots = None
    for _ in range(10):
        a2, a1, a0 = _flat_quadratic(model, scenario_set, case, charge, fleet)
        disc = a1 * a1 - 4.0 * a2 * (a0 - fixed_cost)
        if disc < 0.0:
            attainable = a0 - a1 * a1 / (4.0 * a2)
            raise InfeasibleFamilyError(
                f"flat family cannot attain expected revenue {fixed_cost!r}; "
                f"maximum attainable is {attainable!r}",
                attainable_max=attainable,
            )
        sq = math.sqrt(disc)
        # a2 < 0: the smaller root is (-a1 + sq) / (2 a2)
        lo = (-a1 + sq) / (2.0 * a2)
        hi = (-a1 - sq) / (2.0 * a2)
        new_roots = (lo, hi)
        if roots is not None and max(
            abs(new_roots[0] - roots[0]), abs(new_roots[1] - roots[1])
        ) < 1e-13 * max(1.0, abs(new_roots[0])):
            roots = new_roots
            break
        roots = new_roots
        new_fleet = customer_fleet_meter(case, model.n_classes, np.full(n, roots[0])).sum(axis=0)
        if np.array_equal(new_fleet, fleet):
            break
        fleet = new_fleet

    candidates = [flat_tariff(charge, p, n) for p in roots]
    surpluses = [
        expected_consumer_surplus(t, model, scenario_set, case) for t in candidates
    ]
    best = int(np.argmax(surpluses))
    tariff = candidates[best]
    residual = expected_retailer_surplus(tariff, model, scenario_set, case) - fixed_cost
    if abs(residual) > ADEQUACY_RTOL * max(1.0, abs(fixed_cost)):
        raise RevenueAdequacyError(
            f"flat-family revenue residual {residual!r} exceeds tolerance"
        )
    notes = []
    if tariff.connection_charge < 0.0:
        notes.append("negative connection charge")
    return FamilyReport(
        tariff=tariff,
        kind=family.kind,
        flat_roots=roots,
        root_surpluses=(surpluses[0], surpluses[1]),
        residual=residual,
        notes=tuple(notes),
    )


def _choke_prices(
    model: dm.DemandModel,
    scenario_set: ScenarioSet,
    case: IntegrationCase,
    frozen_fleet: np.ndarray,
) -> np.ndarray:
    """Price vector at which expected net demand vanishes (frozen storage)."""
    probs = scenario_set.probabilities
    k = np.einsum(
        "s,sn->n", probs, np.einsum("c,scn->sn", model.class_counts, scenario_set.disturbance_tensor)
    )
    if case.uses_customer_der:
        k = k - np.einsum("s,sn->n", probs, scenario_set.customer_renewable_tensor.sum(axis=1))
        k = k - frozen_fleet
    return np.linalg.solve(model.slope, model.base + k / model.sigma_total)


def _solve_dynamic(
    family: TariffFamily,
    model: dm.DemandModel,
    scenario_set: ScenarioSet,
    case: IntegrationCase,
    fixed_cost: float,
) -> FamilyReport:
    """Ramsey prices for a pinned connection charge.

    The first-order conditions put the optimum on the line
    pi(t) = t * choke + (1 - t) * lam_bar, where choke is the expected
    net-demand choke price; settled revenue is quadratic in t and increasing
    up to its maximum at t = 1/2, so a monotone bisection on t against the
    exact settled revenue finds the revenue-adequate member.  Customer
    storage schedules are re-solved at every probe and the choke point is
    refreshed in an outer loop until the fleet response is self-consistent.
    """
    charge = family.connection_charge
    lam_bar = expect_price(scenario_set)
    n = model.horizon

    def settled(pi: np.ndarray) -> float:
        return expected_retailer_surplus(TwoPartTariff(charge, pi), model, scenario_set, case)

    fleet = customer_fleet_meter(case, model.n_classes, lam_bar).sum(axis=0)
    t_star = 0.0
    for _ in range(20):
        choke = _choke_prices(model, scenario_set, case, fleet)

        def price_at(t: float) -> np.ndarray:
            return t * choke + (1.0 - t) * lam_bar

        rs_max = settled(price_at(_REVENUE_MAX_T))
        if fixed_cost > rs_max + ADEQUACY_RTOL * max(1.0, abs(fixed_cost)):
            raise InfeasibleFamilyError(
                f"dynamic family cannot attain expected revenue {fixed_cost!r}; "
                f"maximum attainable is {rs_max!r}",
                attainable_max=rs_max,
            )
        t_lo, t_hi = 0.0, _REVENUE_MAX_T
        rs_lo = settled(price_at(t_lo))
        step = 0.5
        while rs_lo > fixed_cost:
            t_lo -= step
            step *= 2.0
            if t_lo < -1e6:
                raise ArithmeticError("dynamic-family bracket expansion failed")
            rs_lo = settled(price_at(t_lo))
        for _ in range(200):
            mid = 0.5 * (t_lo + t_hi)
            if mid == t_lo or mid == t_hi:
                break
            if settled(price_at(mid)) < fixed_cost:
                t_lo = mid
            else:
                t_hi = mid
        t_star = t_hi if abs(settled(price_at(t_hi)) - fixed_cost) <= abs(
            settled(price_at(t_lo)) - fixed_cost
        ) else t_lo
        pi_star = price_at(t_star)
        new_fleet = customer_fleet_meter(case, model.n_classes, pi_star).sum(axis=0)
        if np.array_equal(new_fleet, fleet):
            break
        fleet = new_fleet
    tariff = TwoPartTariff(charge, pi_star)
    residual = settled(pi_star) - fixed_cost
    if abs(residual) > ADEQUACY_RTOL * max(1.0, abs(fixed_cost)):
        raise RevenueAdequacyError(
            f"dynamic-family revenue residual {residual!r} exceeds tolerance"
        )
    notes = []
    if charge < 0.0:
        notes.append("negative connection charge")
    return FamilyReport(
        tariff=tariff, kind=family.kind, multiplier_t=t_star, residual=residual, notes=tuple(notes)
    )


def optimize_family_report(
    family: TariffFamily,
    model: dm.DemandModel,
    scenario_set: ScenarioSet,
    case: IntegrationCase,
    fixed_cost: float,
) -> FamilyReport:
    """Solve one family for E[rs] = F; returns the solution with diagnostics."""
    _require_assumption1(model, scenario_set)
    if family.kind == OPTIMAL_TWO_PART:
        tariff = optimal_two_part(model, scenario_set, case, fixed_cost)
        residual = expected_retailer_surplus(tariff, model, scenario_set, case) - fixed_cost
        notes = ("negative connection charge",) if tariff.connection_charge < 0.0 else ()
        return FamilyReport(tariff=tariff, kind=family.kind, residual=residual, notes=notes)
    if family.is_flat:
        return _solve_flat(family, model, scenario_set, case, fixed_cost)
    return _solve_dynamic(family, model, scenario_set, case, fixed_cost)


def optimize_family(
    family: TariffFamily,
    model: dm.DemandModel,
    scenario_set: ScenarioSet,
    case: IntegrationCase,
    fixed_cost: float,
) -> TwoPartTariff:
    """Consumer-surplus-maximizing member of a family at expected revenue F."""
    return optimize_family_report(family, model, scenario_set, case, fixed_cost).tariff
