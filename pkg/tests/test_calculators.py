"""Numeric procedures: money arithmetic, banding heuristics, risk tests."""

import pytest

from feaso.calculators import (
    DECOMPOSE,
    EMBEDDED_OR_SIMPLE,
    MULTIPLE_OR_IMPRESSIVE,
    REGISTRY,
    SUITABLE,
    TOO_FAST,
    BenefitModel,
    CostModel,
    DomainError,
    PaybackResult,
    RiskItem,
    SoftwareItem,
    annual_recurring_cost,
    contingency_required,
    convert,
    coverage_effort_multiplier,
    development_cost,
    effort_months_with_overheads,
    expert_time_band,
    format_gbp,
    interface_effort_fraction,
    payback,
    payback_months,
    round_cost,
)


class TestMoney:
    def test_round_cost_halves_go_up(self):
        assert round_cost(8500.0) == 9000.0
        assert round_cost(8499.99) == 8000.0
        assert round_cost(500.0) == 1000.0
        assert round_cost(499.0) == 0.0
        assert round_cost(1500.0) == 2000.0
        assert round_cost(30000.0) == 30000.0
        assert round_cost(-8500.0) == -9000.0  # away from zero

    def test_format_gbp(self):
        assert format_gbp(9000.0) == "£9,000"
        assert format_gbp(1234567.0) == "£1,234,567"
        assert format_gbp(2.5) == "£2.50"

    def test_convert(self):
        assert convert(16000.0, "usd") == 7000.0
        assert convert(100.0, "GBP") == 100.0
        with pytest.raises(DomainError):
            convert(1.0, "chf")


class TestCostBenefit:
    def test_development_cost(self):
        assert development_cost(6.0, 50000.0, 5000.0, 0.0) == 30000.0
        assert development_cost(0.0, 50000.0) == 0.0
        with pytest.raises(DomainError):
            development_cost(-1.0, 50000.0)

    def test_annual_recurring_cost(self):
        assert annual_recurring_cost(7500.0, 1000.0) == 8500.0
        with pytest.raises(DomainError):
            annual_recurring_cost(-1.0, 0.0)

    def test_cost_model_with_foreign_software_and_replacement(self):
        model = CostModel(
            dev_effort_months=9.0,
            salary_rate=60000.0,
            software=(SoftwareItem("inference shell", 16000.0, "usd"),),
            hardware_cost=3000.0,
            hardware_replacement_years=3.0,
            kb_maintenance_annual=7500.0,
        )
        assert model.software_cost() == 7000.0
        assert model.initial_cost() == 55000.0
        assert model.annual_cost() == 8500.0

    def test_cost_model_validation(self):
        with pytest.raises(DomainError):
            CostModel(dev_effort_months=-1.0, salary_rate=50000.0)
        with pytest.raises(DomainError):
            CostModel(dev_effort_months=1.0, salary_rate=50000.0,
                      hardware_cost=100.0, hardware_replacement_years=0.5)

    def test_benefit_model(self):
        assert BenefitModel(100000.0, 40000.0).total_annual() == 140000.0
        with pytest.raises(DomainError):
            BenefitModel(staff_savings=-1.0)

    def test_payback_months(self):
        assert payback_months(30000.0, 140000.0, 5000.0) == pytest.approx(32.0 / 12.0)
        assert payback_months(0.0, 1000.0) == 0.0
        assert payback_months(30000.0, 5000.0, 5000.0) is None
        assert payback_months(30000.0, 4000.0, 5000.0) is None
        with pytest.raises(DomainError):
            payback_months(-1.0, 1.0)

    def test_payback_result_describe(self):
        assert PaybackResult(32.0 / 12.0).describe() == "2.67 months (≈3 months)"
        assert PaybackResult(1.1158).describe() == "1.12 months (≈1 month)"
        assert PaybackResult(0.0).describe() == "0.00 months (≈1 month)"
        never = PaybackResult(None)
        assert never.never
        assert never.describe() == "never (annual costs meet or exceed the benefit)"

    def test_payback_combines_models(self):
        cost = CostModel(6.0, 50000.0, (SoftwareItem("shell", 5000.0),),
                         kb_maintenance_annual=5000.0)
        result = payback(cost, BenefitModel(100000.0, 40000.0))
        assert result.months == pytest.approx(32.0 / 12.0)


class TestBands:
    def test_expert_time_band_edges(self):
        assert expert_time_band(2.0) == TOO_FAST
        assert expert_time_band(2.999) == TOO_FAST
        assert expert_time_band(3.0) == SUITABLE
        assert expert_time_band(45.0) == SUITABLE
        assert expert_time_band(60.0) == SUITABLE
        assert expert_time_band(60.001) == DECOMPOSE
        assert expert_time_band(90.0) == DECOMPOSE
        for bad in (0.0, -5.0):
            with pytest.raises(DomainError):
                expert_time_band(bad)

    def test_interface_effort_fraction(self):
        assert interface_effort_fraction(EMBEDDED_OR_SIMPLE) == (0.10, 0.15)
        assert interface_effort_fraction(MULTIPLE_OR_IMPRESSIVE) == (0.30, 0.50)
        with pytest.raises(DomainError):
            interface_effort_fraction("holographic")

    def test_coverage_multiplier_anchors_exact(self):
        assert coverage_effort_multiplier(0.8) == 1.0
        assert coverage_effort_multiplier(0.9) == 3.0
        assert coverage_effort_multiplier(1.0) == 5.0
        assert coverage_effort_multiplier(0.85) == 2.0

    def test_coverage_multiplier_monotone_and_bounded(self):
        prev = 0.0
        for i in range(201):
            c = 0.8 + 0.2 * i / 200
            m = coverage_effort_multiplier(c)
            assert prev <= m <= 5.0
            prev = m

    def test_coverage_multiplier_domain(self):
        for bad in (0.79, 1.01, 0.0, 2.0):
            with pytest.raises(DomainError):
                coverage_effort_multiplier(bad)

    def test_effort_with_overheads(self):
        assert effort_months_with_overheads(6.0) == 6.0
        scaled = effort_months_with_overheads(6.0, EMBEDDED_OR_SIMPLE, 0.8)
        assert scaled == pytest.approx(6.0 / 0.875)
        with pytest.raises(DomainError):
            effort_months_with_overheads(-1.0)


class TestRisk:
    def test_serious_needs_medium_on_both_axes(self):
        assert not RiskItem("r", "low", "high").serious
        assert not RiskItem("r", "high", "low").serious
        assert RiskItem("r", "medium", "medium").serious
        assert RiskItem("r", "medium", "high").serious
        assert RiskItem("r", "high", "high").serious

    def test_unknown_level_rejected(self):
        with pytest.raises(DomainError):
            RiskItem("r", "severe", "low")

    def test_contingency_threshold(self):
        serious = RiskItem("a", "medium", "medium")
        mild = RiskItem("b", "low", "high")
        assert contingency_required([serious, serious])
        assert not contingency_required([serious, mild])
        assert contingency_required([serious], threshold=1)
        assert contingency_required([], threshold=0)  # zero threshold is always met


class TestRegistry:
    def test_ids_are_stable(self):
        assert set(REGISTRY) == {
            "development_cost", "annual_cost", "payback_months", "expert_time_band",
            "interface_fraction", "coverage_multiplier", "contingency_required",
        }
        for cid, spec in REGISTRY.items():
            assert spec.id == cid

    def test_run_checks_arity(self):
        with pytest.raises(ValueError):
            REGISTRY["development_cost"].run([6.0, 50000.0])
        with pytest.raises(ValueError):
            REGISTRY["expert_time_band"].run([])
        with pytest.raises(ValueError):
            REGISTRY["contingency_required"].run(["low", "low", "medium"])  # odd pair

    def test_interface_fraction_midpoints(self):
        assert REGISTRY["interface_fraction"].run([EMBEDDED_OR_SIMPLE]) == 0.125
        assert REGISTRY["interface_fraction"].run([MULTIPLE_OR_IMPRESSIVE]) == 0.4

    def test_contingency_via_registry(self):
        levels = ["medium", "medium", "low", "high", "high", "medium"]
        assert REGISTRY["contingency_required"].run(levels) is True
        calm = ["low", "low", "low", "high", "medium", "low"]
        assert REGISTRY["contingency_required"].run(calm) is False

    def test_payback_never_is_none(self):
        assert REGISTRY["payback_months"].run([30000.0, 1000.0, 2000.0]) is None
