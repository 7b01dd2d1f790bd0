"""Welfare accounting by settlement simulation, and the study analyses.

``evaluate`` prices every scenario's bills, energy costs and benefits
explicitly and takes the probability-weighted sum; it shares the demand and
storage primitives with the tariff module but none of its closed-form
accounting, so the decomposition identities verified by
``welfare_identities`` are genuine cross-checks rather than restatements.

Analyses built on top: planner (ex-post efficient) upper bound, Pareto
fronts between consumer surplus and collected revenue, sweeps over
installed DER capacity, and the cross-subsidy comparison between
net-metered and separated settlement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import demand as dm
from . import storage as st
from . import tariff as tf
from .scenario import ScenarioSet, as_price_vector, cov_trace, expect_price, with_pv_capacity

IDENTITY_RTOL = 1e-8


@dataclass(frozen=True)
class SurplusReport:
    """Expected surpluses of one tariff under one integration case, $ per day.

    ``social_welfare`` is always the computed sum cs + rs.  Diagnostics:
    ``negative_demand_pairs`` counts (scenario, class) pairs whose unclamped
    demand went negative in some period (never clamped, only reported).
    """

    consumer_surplus: float
    retailer_surplus: float
    social_welfare: float
    per_class_consumer_surplus: np.ndarray
    expected_revenue: float
    expected_energy_cost: float
    customer_fleet_value: float
    retailer_fleet_value: float
    customer_renewable_value: float
    retailer_renewable_value: float
    negative_demand_pairs: int


def evaluate(
    tariff: tf.TwoPartTariff,
    model: dm.DemandModel,
    scenario_set: ScenarioSet,
    case: tf.IntegrationCase,
) -> SurplusReport:
    """Simulate settlement of a tariff scenario by scenario.

    Respects the integration case: decentralized cases net the customer
    renewable columns and the tariff-responsive storage fleet behind the
    meter; centralized cases bill gross consumption while the retailer nets
    its renewable column and a fleet committed against the expected price.
    Columns not selected by the case are ignored.
    """
    pi = as_price_vector(tariff.prices, model.horizon)
    charge = tariff.connection_charge
    counts = model.class_counts
    n_classes = model.n_classes

    fleet_meter = tf.customer_fleet_meter(case, n_classes, pi)  # (C, N), zeros unless dec
    mean_prices = expect_price(scenario_set)
    retailer_meter = tf.retailer_commitment(case, mean_prices)  # (N,), zeros unless cen

    rs_terms = []
    revenue_terms = []
    cost_terms = []
    cust_ren_terms = []
    ret_ren_terms = []
    per_class = [[] for _ in range(n_classes)]
    negative_pairs = 0

    for s in scenario_set:
        p = s.probability
        lam = s.prices
        payments_total = 0.0
        gross_total = np.zeros(model.horizon)
        net_total = np.zeros(model.horizon)
        for i in range(n_classes):
            q_pc = dm.demand(model, i, pi, s.disturbances[i])
            if q_pc.min() < 0.0:
                negative_pairs += 1
            benefit_pc = dm.gross_benefit(model, i, q_pc, s.disturbances[i])
            net_class = counts[i] * q_pc
            if case.uses_customer_der:
                net_class = net_class - s.renewable_customer[i] - fleet_meter[i]
            pay_class = counts[i] * charge + float(pi @ net_class)
            cs_class = counts[i] * benefit_pc - pay_class
            per_class[i].append(p * cs_class)
            payments_total += pay_class
            gross_total += counts[i] * q_pc
            net_total += net_class
        if case.uses_retailer_der:
            served = gross_total - s.renewable_retailer - retailer_meter
        else:
            served = net_total
        cost = float(lam @ served)
        rs_terms.append(p * (payments_total - cost))
        revenue_terms.append(p * payments_total)
        cost_terms.append(p * cost)
        if case.uses_customer_der:
            cust_ren_terms.append(p * float(lam @ s.renewable_customer.sum(axis=0)))
        if case.uses_retailer_der:
            ret_ren_terms.append(p * float(lam @ s.renewable_retailer))

    per_class_cs = np.array([math.fsum(terms) for terms in per_class])
    consumer_surplus = float(per_class_cs.sum())
    retailer_surplus = math.fsum(rs_terms)
    return SurplusReport(
        consumer_surplus=consumer_surplus,
        retailer_surplus=retailer_surplus,
        social_welfare=consumer_surplus + retailer_surplus,
        per_class_consumer_surplus=per_class_cs,
        expected_revenue=math.fsum(revenue_terms),
        expected_energy_cost=math.fsum(cost_terms),
        customer_fleet_value=tf.customer_fleet_value(case, pi),
        retailer_fleet_value=tf.retailer_fleet_value(case, mean_prices),
        customer_renewable_value=math.fsum(cust_ren_terms) if cust_ren_terms else 0.0,
        retailer_renewable_value=math.fsum(ret_ren_terms) if ret_ren_terms else 0.0,
        negative_demand_pairs=negative_pairs,
    )


def efficient_welfare(model: dm.DemandModel, scenario_set: ScenarioSet) -> float:
    """Expected welfare of pricing consumption at the expected wholesale price.

    sw*_0 = sum_i M_i E[S_i(D_i(lam_bar, w)) - lambda^T D_i(lam_bar, w)];
    the benchmark all DER welfare gains are measured against.
    """
    lam_bar = expect_price(scenario_set)
    terms = []
    for s in scenario_set:
        for i in range(model.n_classes):
            q_pc = dm.demand(model, i, lam_bar, s.disturbances[i])
            value = dm.gross_benefit(model, i, q_pc, s.disturbances[i]) - float(s.prices @ q_pc)
            terms.append(s.probability * model.class_counts[i] * value)
    return math.fsum(terms)


def customer_renewable_value(scenario_set: ScenarioSet) -> float:
    """E[lambda^T sum_i r_i] over the set."""
    return math.fsum(
        s.probability * float(s.prices @ s.renewable_customer.sum(axis=0))
        for s in scenario_set
    )


@dataclass(frozen=True)
class IdentityReport:
    """Cross-check of the optimal tariff's welfare against closed forms.

    ``welfare_gain_identity`` compares simulated sw(T*) with
    sw*_0 + DER bonus (fleet value at the expected price plus the expected
    renewable energy value); ``lump_sum`` checks that moving F moves cs and
    rs one for one and leaves sw unchanged.
    """

    tariff: tf.TwoPartTariff
    social_welfare: float
    identity_value: float
    identity_rel_error: float
    consumer_surplus: float
    consumer_identity_value: float
    consumer_identity_rel_error: float
    lump_sum_sw_error: float
    lump_sum_cs_error: float
    lump_sum_rs_error: float
    passed: bool


def welfare_identities(
    model: dm.DemandModel,
    scenario_set: ScenarioSet,
    case: tf.IntegrationCase,
    fixed_cost: float,
    *,
    delta: float | None = None,
) -> IdentityReport:
    """Verify the welfare decomposition of the optimal two-part tariff."""
    tariff = tf.optimal_two_part(model, scenario_set, case, fixed_cost)
    report = evaluate(tariff, model, scenario_set, case)
    sw0 = efficient_welfare(model, scenario_set)
    lam_bar = expect_price(scenario_set)

    if case.uses_customer_der:
        bonus = tf.customer_fleet_value(case, lam_bar) + customer_renewable_value(scenario_set)
    elif case.uses_retailer_der:
        bonus = tf.retailer_fleet_value(case, lam_bar) + tf.retailer_renewable_value(
            case, scenario_set
        )
    else:
        bonus = 0.0
    identity_value = sw0 + bonus
    scale = max(1.0, abs(identity_value), abs(report.social_welfare))
    identity_err = abs(report.social_welfare - identity_value) / scale

    cs_identity = identity_value - fixed_cost
    cs_scale = max(1.0, abs(cs_identity), abs(report.consumer_surplus))
    cs_err = abs(report.consumer_surplus - cs_identity) / cs_scale

    if delta is None:
        delta = 0.1 * max(1.0, abs(fixed_cost))
    shifted = tf.optimal_two_part(model, scenario_set, case, fixed_cost + delta)
    shifted_report = evaluate(shifted, model, scenario_set, case)
    sw_err = abs(shifted_report.social_welfare - report.social_welfare) / scale
    cs_shift_err = abs(
        (shifted_report.consumer_surplus - report.consumer_surplus) + delta
    ) / scale
    rs_shift_err = abs(
        (shifted_report.retailer_surplus - report.retailer_surplus) - delta
    ) / scale

    passed = all(
        err <= IDENTITY_RTOL
        for err in (identity_err, cs_err, sw_err, cs_shift_err, rs_shift_err)
    )
    return IdentityReport(
        tariff=tariff,
        social_welfare=report.social_welfare,
        identity_value=identity_value,
        identity_rel_error=identity_err,
        consumer_surplus=report.consumer_surplus,
        consumer_identity_value=cs_identity,
        consumer_identity_rel_error=cs_err,
        lump_sum_sw_error=sw_err,
        lump_sum_cs_error=cs_shift_err,
        lump_sum_rs_error=rs_shift_err,
        passed=passed,
    )


def planner_bound(
    model: dm.DemandModel,
    scenario_set: ScenarioSet,
    case: tf.IntegrationCase,
) -> float:
    """Expected welfare of the ex-post efficient planner (upper bound).

    The planner observes each customer's local state and prices consumption
    at the conditional expected wholesale price E[lambda | w_i]; flexible
    resources are likewise operated against the conditional expectation.
    When prices and local states are independent every conditional
    expectation collapses to the expected price and the bound is attained
    by the optimal decentralized tariff.
    """
    if case.mode == tf.MODE_CENTRALIZED:
        raise ValueError("planner bound is defined for customer-side integration")
    counts = model.class_counts
    use_der = case.uses_customer_der
    total = 0.0
    for i in range(model.n_classes):
        groups: dict[bytes, list] = {}
        for s in scenario_set:
            key = s.disturbances[i].tobytes()
            if use_der:
                key += s.renewable_customer[i].tobytes()
            groups.setdefault(key, []).append(s)
        class_terms = []
        for members in groups.values():
            weight = math.fsum(m.probability for m in members)
            if weight == 0.0:
                continue
            lam_cond = sum(m.probability * m.prices for m in members) / weight
            w_i = members[0].disturbances[i]
            q_pc = dm.demand(model, i, lam_cond, w_i)
            value = dm.gross_benefit(model, i, q_pc, w_i) - float(lam_cond @ q_pc)
            class_terms.append(weight * counts[i] * value)
            if use_der and case.customer_storage is not None:
                unit_value, _ = st.arbitrage_value(case.customer_storage, lam_cond)
                class_terms.append(weight * case.customer_storage_units[i] * unit_value)
        total += math.fsum(class_terms)
    if use_der:
        total += customer_renewable_value(scenario_set)
    return total


# ---------------------------------------------------------------------------
# normalization anchors and the study analyses


@dataclass(frozen=True)
class BaseAnchors:
    """Frozen base-case quantities all gains are normalized against."""

    tariff: tf.TwoPartTariff
    revenue: float
    consumer_surplus: float
    retailer_surplus: float


def base_anchors(
    model: dm.DemandModel, scenario_set: ScenarioSet, nominal_tariff: tf.TwoPartTariff
) -> BaseAnchors:
    """Evaluate the nominal tariff with no DERs and freeze the anchors."""
    report = evaluate(nominal_tariff, model, scenario_set, tf.no_der())
    return BaseAnchors(
        tariff=nominal_tariff,
        revenue=report.expected_revenue,
        consumer_surplus=report.consumer_surplus,
        retailer_surplus=report.retailer_surplus,
    )


@dataclass(frozen=True)
class ParetoPoint:
    fixed_cost: float
    cs_gain: float
    rs_gain: float
    tariff: tf.TwoPartTariff


@dataclass(frozen=True)
class ParetoFront:
    """Feasible points of one family plus records of skipped grid points."""

    family: tf.TariffFamily
    points: tuple[ParetoPoint, ...]
    infeasible: tuple[tuple[float, str], ...]


def pareto_front(
    family: tf.TariffFamily,
    model: dm.DemandModel,
    scenario_set: ScenarioSet,
    case: tf.IntegrationCase,
    fixed_cost_grid,
    anchors: BaseAnchors,
) -> ParetoFront:
    """Trade-off between consumer surplus and collected revenue.

    Each grid value of F is solved within the family; gains are
    (cs - cs_base) / revenue_base and (F - rs_base) / revenue_base.
    Infeasible grid points are recorded and skipped.
    """
    points = []
    infeasible = []
    for f in fixed_cost_grid:
        f = float(f)
        try:
            tariff = tf.optimize_family(family, model, scenario_set, case, f)
        except tf.InfeasibleFamilyError as exc:
            infeasible.append((f, str(exc)))
            continue
        report = evaluate(tariff, model, scenario_set, case)
        points.append(
            ParetoPoint(
                fixed_cost=f,
                cs_gain=(report.consumer_surplus - anchors.consumer_surplus) / anchors.revenue,
                rs_gain=(f - anchors.retailer_surplus) / anchors.revenue,
                tariff=tariff,
            )
        )
    return ParetoFront(family=family, points=tuple(points), infeasible=tuple(infeasible))


def allocate_pv(
    model: dm.DemandModel, capacity_kw: float, unit_kw: float = 5.0
) -> tuple[np.ndarray, np.ndarray]:
    """Assign PV systems to the largest consumers first, in whole units.

    Returns (per-class capacity kW, per-class owner counts).  Classes are
    filled in decreasing order of sigma, one unit per customer; when the
    capacity is not a whole number of units the last owner gets the
    fractional remainder, keeping the allocated total exact.
    """
    if capacity_kw < 0.0 or unit_kw <= 0.0:
        raise ValueError("capacity must be >= 0 and unit size positive")
    kw = np.zeros(model.n_classes)
    owners = np.zeros(model.n_classes)
    remaining_units = capacity_kw / unit_kw
    order = np.argsort(-model.sigma, kind="stable")
    for i in order:
        if remaining_units <= 0.0:
            break
        take = min(float(model.class_counts[i]), remaining_units)
        kw[i] = take * unit_kw
        owners[i] = math.ceil(take - 1e-12)
        remaining_units -= take
    if remaining_units > 1e-9:
        raise ValueError(
            f"PV capacity {capacity_kw} kW exceeds one unit per customer "
            f"({model.customers * unit_kw} kW)"
        )
    return kw, owners


@dataclass(frozen=True)
class SweepCell:
    """One (capacity, family) cell of a DER sweep."""

    capacity_kw: float
    family_kind: str
    feasible: bool
    cs_gain: float
    sw_gain: float
    connection_charge: float
    mean_price: float
    tariff: tf.TwoPartTariff | None = None
    reason: str = ""


def der_sweep(
    families,
    model: dm.DemandModel,
    scenario_set: ScenarioSet,
    mode: str,
    capacity_grid_kw,
    storage_ratio: float,
    fixed_cost: float,
    anchors: BaseAnchors,
    *,
    pv_unit_kw: float = 5.0,
    storage_unit: st.StorageSpec | None = None,
) -> list[SweepCell]:
    """Re-solve each family at each installed PV capacity and report gains.

    Storage is sized at ``storage_ratio`` kWh per kW of PV and integrated
    as (possibly fractional) counts of ``storage_unit``; decentralized
    fleets are spread over classes in proportion to allocated PV.
    """
    if mode not in (tf.MODE_DECENTRALIZED, tf.MODE_CENTRALIZED):
        raise ValueError(f"sweep mode must be decentralized or centralized, got {mode!r}")
    if storage_unit is None:
        storage_unit = st.powerwall()
    base_sw = anchors.consumer_surplus + anchors.retailer_surplus
    cells = []
    for capacity in capacity_grid_kw:
        capacity = float(capacity)
        storage_units_total = storage_ratio * capacity / storage_unit.capacity_kwh
        if mode == tf.MODE_DECENTRALIZED:
            kw, _ = allocate_pv(model, capacity, pv_unit_kw)
            share = kw / capacity if capacity > 0.0 else np.zeros(model.n_classes)
            case = tf.decentralized_case(storage_unit, storage_units_total * share)
            swept = with_pv_capacity(scenario_set, customer_kw=kw)
        else:
            case = tf.centralized_case(storage_unit, storage_units_total)
            swept = with_pv_capacity(scenario_set, retailer_kw=capacity)
        for family in families:
            try:
                tariff = tf.optimize_family(family, model, swept, case, fixed_cost)
            except tf.InfeasibleFamilyError as exc:
                cells.append(
                    SweepCell(
                        capacity_kw=capacity,
                        family_kind=family.kind,
                        feasible=False,
                        cs_gain=math.nan,
                        sw_gain=math.nan,
                        connection_charge=math.nan,
                        mean_price=math.nan,
                        reason=str(exc),
                    )
                )
                continue
            report = evaluate(tariff, model, swept, case)
            cells.append(
                SweepCell(
                    capacity_kw=capacity,
                    family_kind=family.kind,
                    feasible=True,
                    cs_gain=(report.consumer_surplus - anchors.consumer_surplus)
                    / anchors.revenue,
                    sw_gain=(report.social_welfare - base_sw) / anchors.revenue,
                    connection_charge=tariff.connection_charge,
                    mean_price=float(tariff.prices.mean()),
                    tariff=tariff,
                )
            )
    return cells


@dataclass(frozen=True)
class CrossSubsidyCell:
    """PV-owner settlement comparison at one installed capacity.

    ``subsidy_norm`` is (owner contribution under separated settlement
    minus owner contribution under net metering) / F: the share of the
    fixed cost shifted from PV owners onto other customers by net metering.
    Cells where either settlement's solve cannot reach F carry
    ``feasible=False``, a reason, and NaN figures.
    """

    capacity_kw: float
    owner_count: float
    contribution_net_metering: float
    contribution_separated: float
    subsidy_norm: float
    net_metering_tariff: tf.TwoPartTariff | None
    separated_tariff: tf.TwoPartTariff | None
    feasible: bool = True
    reason: str = ""


def _owner_contributions(
    tariff: tf.TwoPartTariff,
    model: dm.DemandModel,
    scenario_set: ScenarioSet,
    owner_kw: np.ndarray,
    owners: np.ndarray,
    separated: bool,
) -> float:
    """E[sum over PV owners of (payment - lambda^T physical net demand)].

    Under net metering owners are billed on q - r at the tariff prices;
    under separated settlement consumption pays the tariff prices while
    generation is credited at the expected wholesale price.
    """
    pi = tariff.prices
    lam_bar = expect_price(scenario_set)
    charge = tariff.connection_charge
    terms = []
    for s in scenario_set:
        for i in range(model.n_classes):
            if owners[i] == 0.0:
                continue
            q_pc = dm.demand(model, i, pi, s.disturbances[i])
            r_own = owner_kw[i] * s.solar_unit
            gross = owners[i] * q_pc
            physical = gross - r_own
            if separated:
                payment = owners[i] * charge + float(pi @ gross) - float(lam_bar @ r_own)
            else:
                payment = owners[i] * charge + float(pi @ physical)
            terms.append(s.probability * (payment - float(s.prices @ physical)))
    return math.fsum(terms)


def cross_subsidy(
    family: tf.TariffFamily,
    model: dm.DemandModel,
    scenario_set: ScenarioSet,
    capacity_grid_kw,
    fixed_cost: float,
    *,
    pv_unit_kw: float = 5.0,
) -> list[CrossSubsidyCell]:
    """Fixed-cost contribution shifted to non-owners by net metering.

    For each capacity, PV is allocated to the largest consumers and the
    family is solved twice at the same required revenue: once under net
    metering and once under separated settlement (consumption at the tariff
    prices, generation credited at the expected wholesale price).  Under
    separated settlement the customer response is unchanged while the
    generation credit enters expected revenue as the constant
    tr cov(lambda, r), so the counterpart solve is the no-DER solve at
    F - tr cov(lambda, r).
    """
    if not scenario_set.has_solar_unit:
        raise ValueError("cross-subsidy analysis needs the per-kW solar profile")
    cells = []
    for capacity in capacity_grid_kw:
        capacity = float(capacity)
        owner_kw, owners = allocate_pv(model, capacity, pv_unit_kw)
        swept = with_pv_capacity(scenario_set, customer_kw=owner_kw)
        nm_case = tf.IntegrationCase(mode=tf.MODE_DECENTRALIZED)
        try:
            nm_tariff = tf.optimize_family(family, model, swept, nm_case, fixed_cost)
            generation_cov = cov_trace(
                swept, lambda s: s.renewable_customer.sum(axis=0), lambda s: s.prices
            )
            sep_tariff = tf.optimize_family(
                family, model, swept, tf.no_der(), fixed_cost - generation_cov
            )
        except tf.InfeasibleFamilyError as exc:
            cells.append(
                CrossSubsidyCell(
                    capacity_kw=capacity,
                    owner_count=float(owners.sum()),
                    contribution_net_metering=math.nan,
                    contribution_separated=math.nan,
                    subsidy_norm=math.nan,
                    net_metering_tariff=None,
                    separated_tariff=None,
                    feasible=False,
                    reason=str(exc),
                )
            )
            continue

        contribution_nm = _owner_contributions(
            nm_tariff, model, swept, owner_kw, owners, separated=False
        )
        contribution_sep = _owner_contributions(
            sep_tariff, model, swept, owner_kw, owners, separated=True
        )
        cells.append(
            CrossSubsidyCell(
                capacity_kw=capacity,
                owner_count=float(owners.sum()),
                contribution_net_metering=contribution_nm,
                contribution_separated=contribution_sep,
                subsidy_norm=(contribution_sep - contribution_nm) / fixed_cost,
                net_metering_tariff=nm_tariff,
                separated_tariff=sep_tariff,
            )
        )
    return cells
