"""Deterministic procedures the inference engine can call through compute
bindings: project cost and payback arithmetic, the expert-task-time band,
interface and coverage effort scaling, and the risk contingency test.

Everything here is pure. Functions raise DomainError (a ValueError) for
inputs outside their modelled range; the engine turns that into a note on
the consultation instead of a fact.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from typing import Callable, Iterable, Mapping, Sequence


class DomainError(ValueError):
    """Input is outside the range a procedure models."""


# --- Money -------------------------------------------------------------------

GBP = "gbp"
DEFAULT_RATES: Mapping[str, float] = {GBP: 1.0, "usd": 0.4375}


def convert(amount: float, currency: str, rates: Mapping[str, float] = DEFAULT_RATES) -> float:
    """Convert to pounds using multiplier-to-base rates."""
    rate = rates.get(currency.lower())
    if rate is None:
        raise DomainError(f"no conversion rate for currency {currency!r}")
    return amount * rate


def round_cost(amount: float) -> float:
    """Round to the nearest thousand pounds, halves away from zero.

    Cost figures in reports carry spurious precision; a build estimate quoted
    to the pound reads as more certain than it is.
    """
    thousands = (Decimal(repr(amount)) / 1000).quantize(Decimal("1"), rounding=ROUND_HALF_UP)
    return float(thousands * 1000)


def format_gbp(amount: float) -> str:
    if float(amount).is_integer():
        return f"£{int(amount):,}"
    return f"£{amount:,.2f}"


# --- Cost and benefit models ---------------------------------------------------


@dataclass(frozen=True)
class SoftwareItem:
    description: str
    cost: float
    currency: str = GBP


@dataclass(frozen=True)
class CostModel:
    """Inputs for the build-cost and running-cost estimates.

    salary_rate is a fully loaded annual rate; effort is in person-months.
    hardware_replacement_years None means replacement is not modelled, which
    is distinct from a zero replacement cost.
    """

    dev_effort_months: float
    salary_rate: float
    software: tuple[SoftwareItem, ...] = ()
    hardware_cost: float = 0.0
    hardware_replacement_years: float | None = None
    kb_maintenance_annual: float = 0.0
    currency_rates: Mapping[str, float] = field(default_factory=lambda: dict(DEFAULT_RATES))

    def __post_init__(self) -> None:
        if self.dev_effort_months < 0:
            raise DomainError("development effort cannot be negative")
        if self.salary_rate < 0:
            raise DomainError("salary rate cannot be negative")
        if self.hardware_cost < 0:
            raise DomainError("hardware cost cannot be negative")
        if self.hardware_replacement_years is not None and self.hardware_replacement_years < 1:
            raise DomainError("hardware replacement period must be at least a year")
        if self.kb_maintenance_annual < 0:
            raise DomainError("maintenance cost cannot be negative")

    def software_cost(self) -> float:
        return sum(convert(item.cost, item.currency, self.currency_rates) for item in self.software)

    def initial_cost(self) -> float:
        return development_cost(
            self.dev_effort_months, self.salary_rate, self.software_cost(), self.hardware_cost
        )

    def annual_cost(self) -> float:
        replacement = 0.0
        if self.hardware_replacement_years is not None:
            replacement = self.hardware_cost / self.hardware_replacement_years
        return self.kb_maintenance_annual + replacement


@dataclass(frozen=True)
class BenefitModel:
    """Annual benefit streams, all in pounds per year."""

    staff_savings: float = 0.0
    quality_savings: float = 0.0
    other: float = 0.0

    def __post_init__(self) -> None:
        for v in (self.staff_savings, self.quality_savings, self.other):
            if v < 0:
                raise DomainError("benefit streams cannot be negative")

    def total_annual(self) -> float:
        return self.staff_savings + self.quality_savings + self.other


@dataclass(frozen=True)
class PaybackResult:
    """months is None when running costs meet or exceed the benefit."""

    months: float | None

    @property
    def never(self) -> bool:
        return self.months is None

    def describe(self) -> str:
        if self.months is None:
            return "never (annual costs meet or exceed the benefit)"
        approx = max(1, round(self.months))
        unit = "month" if approx == 1 else "months"
        return f"{self.months:.2f} months (≈{approx} {unit})"


def development_cost(
    effort_months: float, salary_rate: float, software_cost: float = 0.0, hardware_cost: float = 0.0
) -> float:
    """One-off build cost: loaded salary over the effort plus bought-in items."""
    for v in (effort_months, salary_rate, software_cost, hardware_cost):
        if v < 0:
            raise DomainError("cost inputs cannot be negative")
    return effort_months / 12.0 * salary_rate + software_cost + hardware_cost


def annual_recurring_cost(maintenance: float, hardware_annual: float = 0.0) -> float:
    if maintenance < 0 or hardware_annual < 0:
        raise DomainError("cost inputs cannot be negative")
    return maintenance + hardware_annual


def payback_months(initial_cost: float, annual_benefit: float, annual_cost: float = 0.0) -> float | None:
    """Months to recover the build cost from the net annual benefit.

    None when the net benefit is zero or negative: the system never pays
    for itself, which a report must not render as a large number.
    """
    if initial_cost < 0 or annual_benefit < 0 or annual_cost < 0:
        raise DomainError("payback inputs cannot be negative")
    net = annual_benefit - annual_cost
    if net <= 0:
        return None
    return 12.0 * initial_cost / net


def payback(cost: CostModel, benefit: BenefitModel) -> PaybackResult:
    return PaybackResult(payback_months(cost.initial_cost(), benefit.total_annual(), cost.annual_cost()))


# --- Task sizing ----------------------------------------------------------------

TOO_FAST = "too_fast"
SUITABLE = "suitable"
DECOMPOSE = "decompose"


def expert_time_band(minutes: float) -> str:
    """Band a task by how long the expert takes at it.

    Under a few minutes the skill is usually not articulable as rules; over
    an hour the task wants decomposing into subtasks first. The band edges
    are inclusive on the suitable side.
    """
    if minutes <= 0:
        raise DomainError("expert task time must be positive")
    if minutes < 3:
        return TOO_FAST
    if minutes <= 60:
        return SUITABLE
    return DECOMPOSE


EMBEDDED_OR_SIMPLE = "embedded_or_simple"
MULTIPLE_OR_IMPRESSIVE = "multiple_or_impressive"

_INTERFACE_BANDS = {
    EMBEDDED_OR_SIMPLE: (0.10, 0.15),
    MULTIPLE_OR_IMPRESSIVE: (0.30, 0.50),
}


def interface_effort_fraction(profile: str) -> tuple[float, float]:
    """Share of total build effort the user interface takes, as a band."""
    band = _INTERFACE_BANDS.get(profile)
    if band is None:
        raise DomainError(f"unknown interface profile {profile!r}")
    return band


def coverage_effort_multiplier(coverage: float) -> float:
    """Relative effort to reach a target fraction of case coverage.

    Calibrated so 0.8 costs the baseline effort and each extra percentage
    point of coverage above that costs a fifth of the baseline again:
    0.9 triples the effort and 1.0 quintuples it. Outside [0.8, 1.0] the
    model says nothing.
    """
    if not 0.8 <= coverage <= 1.0:
        raise DomainError("coverage must be between 0.8 and 1.0")
    # Decimal over the shortest repr keeps the anchors exact; plain float
    # arithmetic lands 1.0 on 4.999999999999999.
    return float((Decimal(repr(coverage)) - Decimal("0.8")) * 20 + 1)


# --- Risk ------------------------------------------------------------------------

LEVELS = ("low", "medium", "high")


def level_index(level: str) -> int:
    try:
        return LEVELS.index(level)
    except ValueError:
        raise DomainError(f"unknown risk level {level!r}; expected one of {', '.join(LEVELS)}") from None


@dataclass(frozen=True)
class RiskItem:
    label: str
    likelihood: str
    impact: str
    contingency: str | None = None

    def __post_init__(self) -> None:
        level_index(self.likelihood)
        level_index(self.impact)

    @property
    def serious(self) -> bool:
        return level_index(self.likelihood) >= 1 and level_index(self.impact) >= 1


def contingency_required(risks: Iterable[RiskItem], threshold: int = 2) -> bool:
    """True when enough risks are serious (at least medium on both axes)
    that the plan needs explicit fallbacks, not just awareness."""
    return sum(1 for r in risks if r.serious) >= threshold


# --- Registry ----------------------------------------------------------------------


@dataclass(frozen=True)
class CalculatorSpec:
    """Adapter between a compute binding and a procedure.

    run takes the bound input values positionally and returns the output
    value, or None when the procedure has no answer for a legal input
    (payback that never happens). Domain errors propagate as ValueError.
    """

    id: str
    func: Callable[..., object]
    input_type: str  # attribute type every input must have
    output_type: str  # attribute type of the target
    min_arity: int
    max_arity: int | None = None  # None means unbounded
    paired: bool = False  # inputs come in pairs (likelihood, impact)
    output_values: tuple[str, ...] = ()

    def run(self, values: Sequence[object]) -> object:
        n = len(values)
        if n < self.min_arity or (self.max_arity is not None and n > self.max_arity):
            raise ValueError(f"calculator {self.id!r} takes {self.arity_text()}, got {n}")
        if self.paired and n % 2 != 0:
            raise ValueError(f"calculator {self.id!r} takes {self.arity_text()}, got {n}")
        return self.func(*values)

    def arity_text(self) -> str:
        if self.paired:
            return f"at least {self.min_arity} inputs in (likelihood, impact) pairs"
        if self.max_arity == self.min_arity:
            n = self.min_arity
            return f"exactly {n} input{'s' if n != 1 else ''}"
        if self.max_arity is None:
            return f"at least {self.min_arity} inputs"
        return f"{self.min_arity} to {self.max_arity} inputs"


def _interface_fraction_mid(profile: str) -> float:
    lo, hi = interface_effort_fraction(profile)
    return (lo + hi) / 2.0


def _contingency_from_levels(*levels: str) -> bool:
    if len(levels) % 2 != 0:
        raise ValueError("risk levels must come in (likelihood, impact) pairs")
    pairs = zip(levels[0::2], levels[1::2])
    risks = [RiskItem(f"risk {i + 1}", lik, imp) for i, (lik, imp) in enumerate(pairs)]
    return contingency_required(risks)


REGISTRY: dict[str, CalculatorSpec] = {
    spec.id: spec
    for spec in (
        CalculatorSpec(
            "development_cost", development_cost, "number", "number", min_arity=4, max_arity=4
        ),
        CalculatorSpec(
            "annual_cost", annual_recurring_cost, "number", "number", min_arity=2, max_arity=2
        ),
        CalculatorSpec(
            "payback_months", payback_months, "number", "number", min_arity=3, max_arity=3
        ),
        CalculatorSpec(
            "expert_time_band", expert_time_band, "number", "enum",
            min_arity=1, max_arity=1, output_values=(TOO_FAST, SUITABLE, DECOMPOSE),
        ),
        CalculatorSpec(
            "interface_fraction", _interface_fraction_mid, "enum", "number",
            min_arity=1, max_arity=1,
        ),
        CalculatorSpec(
            "coverage_multiplier", coverage_effort_multiplier, "number", "number",
            min_arity=1, max_arity=1,
        ),
        CalculatorSpec(
            "contingency_required", _contingency_from_levels, "enum", "bool",
            min_arity=2, paired=True,
        ),
    )
}


def effort_months_with_overheads(
    base_effort_months: float,
    interface_profile: str | None = None,
    coverage: float | None = None,
) -> float:
    """Scale a core-build estimate by interface share and coverage target.

    The interface fraction f inflates effort by 1/(1-f) since the band is
    expressed as a share of the total; the coverage multiplier applies to
    the whole build.
    """
    if base_effort_months < 0:
        raise DomainError("effort cannot be negative")
    effort = base_effort_months
    if interface_profile is not None:
        f = _interface_fraction_mid(interface_profile)
        effort = effort / (1.0 - f)
    if coverage is not None:
        effort = effort * coverage_effort_multiplier(coverage)
    return effort


__all__ = [
    "DomainError",
    "GBP",
    "DEFAULT_RATES",
    "convert",
    "round_cost",
    "format_gbp",
    "SoftwareItem",
    "CostModel",
    "BenefitModel",
    "PaybackResult",
    "development_cost",
    "annual_recurring_cost",
    "payback_months",
    "payback",
    "TOO_FAST",
    "SUITABLE",
    "DECOMPOSE",
    "expert_time_band",
    "EMBEDDED_OR_SIMPLE",
    "MULTIPLE_OR_IMPRESSIVE",
    "interface_effort_fraction",
    "coverage_effort_multiplier",
    "LEVELS",
    "level_index",
    "RiskItem",
    "contingency_required",
    "CalculatorSpec",
    "REGISTRY",
    "effort_months_with_overheads",
]
