"""Discounted cash-flow valuation and the minimum stress-test suite.

Cash flows are indexed by annual period, so the twelve-month delay scenario
shifts every period exponent by one year while the initial outlay stays at
t=0. Net present value here is a comparative screening quantity, not a
point forecast; the stress suite exists to detect structural fragility of
an intended use, not to price it.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Mapping


class StressKind(enum.Enum):
    """The three scenarios every preliminary NPV must survive."""

    RENT_MINUS_10PCT = "rent_minus_10pct"
    OCCUPANCY_MINUS_10PCT = "occupancy_minus_10pct"
    DELAY_12_MONTHS = "delay_12_months"


#: Minimum stress suite, in the order scenarios are reported.
MINIMUM_STRESS_SUITE: tuple[StressKind, ...] = (
    StressKind.RENT_MINUS_10PCT,
    StressKind.OCCUPANCY_MINUS_10PCT,
    StressKind.DELAY_12_MONTHS,
)

_STRESS_HAIRCUT = 0.10


def _require_finite(value: float, name: str) -> float:
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise ValueError(f"{name} must be a number, got {type(value).__name__}")
    value = float(value)
    if not math.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value!r}")
    return value


@dataclass(frozen=True)
class CashFlowModel:
    """Initial investment plus dated net operating cash flows.

    ``rent_share`` and ``occupancy_share`` give the fraction of each period's
    cash flow that scales with rents and with occupancy. Both default to 1.0
    (fully proportional), which maximises stress impact and is therefore the
    conservative choice when the split is unknown.
    """

    initial_investment: float
    periods: tuple[tuple[int, float], ...]
    discount_rate: float
    rent_share: float = 1.0
    occupancy_share: float = 1.0

    def __post_init__(self) -> None:
        investment = _require_finite(self.initial_investment, "initial_investment")
        if investment < 0:
            raise ValueError("initial_investment must be >= 0")
        object.__setattr__(self, "initial_investment", investment)

        rate = _require_finite(self.discount_rate, "discount_rate")
        if rate < 0:
            raise ValueError("discount_rate must be >= 0")
        object.__setattr__(self, "discount_rate", rate)

        cleaned: list[tuple[int, float]] = []
        last_t = 0
        for entry in self.periods:
            try:
                t, cf = entry
            except (TypeError, ValueError):
                raise ValueError(f"period entry must be (year, cash_flow), got {entry!r}") from None
            if isinstance(t, bool) or not isinstance(t, int):
                raise ValueError(f"period index must be an integer year, got {t!r}")
            if t < 1:
                raise ValueError(f"period index must be >= 1, got {t}")
            if t <= last_t:
                raise ValueError("period indices must be strictly increasing")
            last_t = t
            cleaned.append((t, _require_finite(cf, f"cash flow at t={t}")))
        object.__setattr__(self, "periods", tuple(cleaned))

        for name in ("rent_share", "occupancy_share"):
            share = _require_finite(getattr(self, name), name)
            if not 0.0 <= share <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {share}")
            object.__setattr__(self, name, share)


@dataclass(frozen=True)
class TimeToIncome:
    """Months until stable income: permitting, works, and stabilisation."""

    permits_months: float
    works_months: float
    stabilization_months: float

    def __post_init__(self) -> None:
        for name in ("permits_months", "works_months", "stabilization_months"):
            value = _require_finite(getattr(self, name), name)
            if value < 0:
                raise ValueError(f"{name} must be >= 0")
            object.__setattr__(self, name, value)

    def total(self) -> float:
        return self.permits_months + self.works_months + self.stabilization_months


@dataclass(frozen=True)
class StressReport:
    """Base NPV, the three scenario NPVs, and the fragility verdict.

    ``fragile`` is true exactly when every scenario NPV is strictly negative.
    Per-scenario values are always carried so a stricter reviewer can treat
    any single negative outcome as a warning.
    """

    base_npv: float
    scenario_npvs: Mapping[StressKind, float]
    fragile: bool


def npv(model: CashFlowModel) -> float:
    """Present value of the period cash flows net of the initial investment."""
    rate = model.discount_rate
    total = 0.0
    for t, cf in model.periods:
        total += cf / (1.0 + rate) ** t
    return total - model.initial_investment


def apply_stress(model: CashFlowModel, kind: StressKind) -> CashFlowModel:
    """Return a new model with one stress scenario applied.

    Rent and occupancy stresses scale each cash flow by the share of income
    they touch; the delay stress pushes every period one year out while the
    initial investment stays at t=0.
    """
    if kind is StressKind.RENT_MINUS_10PCT:
        factor = 1.0 - _STRESS_HAIRCUT * model.rent_share
        periods = tuple((t, cf * factor) for t, cf in model.periods)
    elif kind is StressKind.OCCUPANCY_MINUS_10PCT:
        factor = 1.0 - _STRESS_HAIRCUT * model.occupancy_share
        periods = tuple((t, cf * factor) for t, cf in model.periods)
    elif kind is StressKind.DELAY_12_MONTHS:
        periods = tuple((t + 1, cf) for t, cf in model.periods)
    else:  # pragma: no cover - enum is closed
        raise ValueError(f"unknown stress scenario {kind!r}")
    return CashFlowModel(
        initial_investment=model.initial_investment,
        periods=periods,
        discount_rate=model.discount_rate,
        rent_share=model.rent_share,
        occupancy_share=model.occupancy_share,
    )


def stress_report(model: CashFlowModel) -> StressReport:
    """Run the full minimum stress suite and flag structural fragility."""
    scenario_npvs = {kind: npv(apply_stress(model, kind)) for kind in MINIMUM_STRESS_SUITE}
    fragile = all(value < 0.0 for value in scenario_npvs.values())
    return StressReport(base_npv=npv(model), scenario_npvs=scenario_npvs, fragile=fragile)
