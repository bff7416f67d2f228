import pytest

from usescreen import (
    INDICATORS,
    Asset,
    CashFlowModel,
    ContextClass,
    DegeneratePolicy,
    EvaluationSet,
    IntendedUse,
    NormalizationError,
    NormalizationSpec,
    Origin,
    RawIndicatorSet,
    build_pairs,
    normalize_benefit,
    normalize_penalty,
    resolve_scores,
)


class TestBenefit:
    def test_endpoints_and_midpoint(self):
        assert normalize_benefit([100, 250, 400]) == [1.0, 3.0, 5.0]

    def test_degenerate_neutral(self):
        assert normalize_benefit([7, 7, 7]) == [3.0, 3.0, 3.0]

    def test_degenerate_all_five(self):
        assert normalize_benefit([7, 7], DegeneratePolicy.ALL_5) == [5.0, 5.0]

    def test_hand_evaluated_interior_point(self):
        assert normalize_benefit([0, 10, 40]) == [1.0, 2.0, 5.0]

    def test_rejects_non_finite(self):
        with pytest.raises(NormalizationError, match="finite"):
            normalize_benefit([1.0, float("inf")])

    def test_rejects_empty(self):
        with pytest.raises(NormalizationError, match="empty"):
            normalize_benefit([])


class TestPenalty:
    def test_order_reverses(self):
        assert normalize_penalty([12, 24, 36]) == [5.0, 3.0, 1.0]

    def test_degenerate_neutral(self):
        assert normalize_penalty([5, 5]) == [3.0, 3.0]

    def test_hand_evaluated_interior_point(self):
        assert normalize_penalty([8, 10, 40]) == [5.0, 4.75, 1.0]


class TestNormalizationSpec:
    def test_apply_maps_ids_to_scores(self):
        spec = NormalizationSpec(
            orientation="penalty",
            degenerate_policy=DegeneratePolicy.NEUTRAL_3,
            source_values=(("a", 12.0), ("b", 24.0), ("c", 36.0)),
        )
        assert spec.apply() == {"a": 5.0, "b": 3.0, "c": 1.0}

    def test_rejects_unknown_orientation(self):
        with pytest.raises(NormalizationError):
            NormalizationSpec(
                orientation="both",
                degenerate_policy=DegeneratePolicy.NEUTRAL_3,
                source_values=(("a", 1.0),),
            )


def _set(elicited=None, raw=None, cash_flows=None, n=3):
    asset = Asset(id="a", name="a", gla_sqm=1000.0, context_class=ContextClass.DENSE_CENTRAL)
    uses = [IntendedUse(id=f"u{i}", label=f"use {i}") for i in range(n)]
    return EvaluationSet(
        pairs=build_pairs(asset, uses),
        elicited=elicited or {},
        raw=raw or {},
        cash_flows=cash_flows or {},
    )


def full_row(value=3.0, **overrides):
    row = {name: value for name in INDICATORS}
    row.update(overrides)
    return row


class TestResolveScores:
    def test_elicited_pass_through_is_idempotent(self):
        set_ = _set(elicited={f"u{i}": full_row(value=i + 1) for i in range(3)})
        vectors, records = resolve_scores(set_)
        assert vectors["u1"].npv == 2.0
        assert all(origin is Origin.ELICITED for origin in vectors["u0"].origins.values())
        assert all(record.source == "elicited" for record in records.values())
        again, _ = resolve_scores(set_)
        assert again == vectors

    def test_raw_npv_benefit_normalized(self):
        others = {name: 3.0 for name in INDICATORS if name != "npv"}
        set_ = _set(
            elicited={f"u{i}": dict(others) for i in range(3)},
            raw={
                "u0": RawIndicatorSet(npv_raw=100.0),
                "u1": RawIndicatorSet(npv_raw=250.0),
                "u2": RawIndicatorSet(npv_raw=400.0),
            },
        )
        vectors, records = resolve_scores(set_)
        assert [vectors[f"u{i}"].npv for i in range(3)] == [1.0, 3.0, 5.0]
        assert vectors["u0"].origins["npv"] is Origin.NORMALIZED
        assert vectors["u0"].origins["market_risk"] is Origin.ELICITED
        assert records["npv"].source == "raw"
        assert (records["npv"].minimum, records["npv"].maximum) == (100.0, 400.0)

    def test_raw_time_maps_longer_to_worse(self):
        others = {name: 3.0 for name in INDICATORS if name != "time_to_income"}
        set_ = _set(
            elicited={f"u{i}": dict(others) for i in range(3)},
            raw={
                "u0": RawIndicatorSet(time_to_income_months=12.0),
                "u1": RawIndicatorSet(time_to_income_months=24.0),
                "u2": RawIndicatorSet(time_to_income_months=36.0),
            },
        )
        vectors, _ = resolve_scores(set_)
        # penalty orientation: 36 months is the worst position, score 5
        assert [vectors[f"u{i}"].time_to_income for i in range(3)] == [1.0, 3.0, 5.0]

    def test_cash_flow_npv_source(self):
        others = {name: 2.0 for name in INDICATORS if name != "npv"}
        flows = {
            f"u{i}": CashFlowModel(
                initial_investment=100.0, periods=((1, cf),), discount_rate=0.0
            )
            for i, cf in enumerate([100.0, 200.0, 300.0])
        }
        set_ = _set(elicited={f"u{i}": dict(others) for i in range(3)}, cash_flows=flows)
        vectors, records = resolve_scores(set_)
        assert [vectors[f"u{i}"].npv for i in range(3)] == [1.0, 3.0, 5.0]
        assert records["npv"].source == "cash_flows"
        assert records["npv"].minimum == 0.0

    def test_degenerate_indicator_gets_neutral_scores(self):
        others = {name: 3.0 for name in INDICATORS if name != "npv"}
        set_ = _set(
            elicited={f"u{i}": dict(others) for i in range(3)},
            raw={f"u{i}": RawIndicatorSet(npv_raw=42.0) for i in range(3)},
        )
        vectors, _ = resolve_scores(set_)
        assert all(vectors[f"u{i}"].npv == 3.0 for i in range(3))

    def test_invalid_set_raises_with_violations(self):
        set_ = _set(elicited={"u0": full_row()}, n=2)
        with pytest.raises(NormalizationError, match="failed validation"):
            resolve_scores(set_)

    def test_singleton_set_degenerates_to_neutral(self):
        others = {name: 1.0 for name in INDICATORS if name != "npv"}
        set_ = _set(
            elicited={"u0": dict(others)},
            raw={"u0": RawIndicatorSet(npv_raw=500.0)},
            n=1,
        )
        vectors, _ = resolve_scores(set_)
        assert vectors["u0"].npv == 3.0
