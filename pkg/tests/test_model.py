import random

import pytest

from usescreen import (
    INDICATORS,
    PROFILE_PRESETS,
    Asset,
    CashFlowModel,
    ContextClass,
    DecisionProfile,
    EvaluationSet,
    IntendedUse,
    Origin,
    RawIndicatorSet,
    ReasonCode,
    ScoreVector,
    StopCode,
    build_pairs,
    validate_evaluation_set,
)


def asset(id="a1"):
    return Asset(id=id, name="asset", gla_sqm=2500.0, context_class=ContextClass.SEMI_CENTRAL)


def uses(n):
    return [IntendedUse(id=f"u{i}", label=f"use {i}") for i in range(n)]


def elicited_row(value=3.0):
    return {name: value for name in INDICATORS}


class TestScoreVector:
    def test_accepts_fractional_scores(self):
        vector = ScoreVector.elicited(
            npv=4.25, market_risk=1, operational_risk=5, technical_complexity=2.5,
            managerial_complexity=3, time_to_income=1.01,
        )
        assert vector.npv == 4.25
        assert vector.origins["npv"] is Origin.ELICITED

    @pytest.mark.parametrize("bad", [0.99, 5.01, -3, float("inf")])
    def test_rejects_out_of_range(self, bad):
        with pytest.raises(ValueError):
            ScoreVector.elicited(
                npv=bad, market_risk=3, operational_risk=3, technical_complexity=3,
                managerial_complexity=3, time_to_income=3,
            )

    def test_origins_must_cover_all_indicators(self):
        with pytest.raises(ValueError, match="origins"):
            ScoreVector(
                npv=3, market_risk=3, operational_risk=3, technical_complexity=3,
                managerial_complexity=3, time_to_income=3, origins={"npv": Origin.ELICITED},
            )


class TestDecisionProfile:
    def test_baseline_reproduces_reference_parameters(self):
        p = DecisionProfile.baseline()
        assert (p.alpha, p.beta, p.gamma, p.delta) == (0.5, 0.3, 0.4, 0.3)
        assert (p.w_value, p.w_risk, p.w_complexity) == (0.40, 0.30, 0.30)
        assert p.borderline_epsilon == 0.05

    def test_complexity_mix_must_sum_to_one(self):
        with pytest.raises(ValueError, match="must equal 1"):
            DecisionProfile(beta=0.3, gamma=0.3, delta=0.3)
        # within 1e-9 tolerance is fine
        DecisionProfile(beta=0.3, gamma=0.4, delta=0.3 + 5e-10)

    def test_rejects_negative_weights_and_bad_alpha(self):
        with pytest.raises(ValueError):
            DecisionProfile(w_value=-0.1)
        with pytest.raises(ValueError):
            DecisionProfile(alpha=1.5)

    def test_presets_are_valid_and_distinct(self):
        assert set(PROFILE_PRESETS) == {
            "baseline", "non-professional-owner", "opportunistic-investor", "institutional",
        }
        labels = {p.label for p in PROFILE_PRESETS.values()}
        assert len(labels) == len(PROFILE_PRESETS)


class TestRawIndicatorSet:
    def test_rejects_negative_proxies(self):
        with pytest.raises(ValueError):
            RawIndicatorSet(market_risk_proxy=-0.5)

    def test_npv_raw_may_be_negative(self):
        assert RawIndicatorSet(npv_raw=-250.0).npv_raw == -250.0

    def test_time_to_income_must_be_positive(self):
        with pytest.raises(ValueError):
            RawIndicatorSet(time_to_income_months=0.0)


class TestReasonCode:
    def test_detail_is_mandatory(self):
        with pytest.raises(ValueError):
            ReasonCode(code=StopCode.OPERATOR_GAP, detail="  ")


class TestValidateEvaluationSet:
    def test_fully_elicited_set_is_ok(self):
        a = asset()
        us = uses(4)
        set_ = EvaluationSet(
            pairs=build_pairs(a, us), elicited={u.id: elicited_row() for u in us}
        )
        assert validate_evaluation_set(set_).ok

    def test_cross_asset_pairs_flagged(self):
        pair_a = build_pairs(asset("a1"), uses(1))
        pair_b = build_pairs(asset("a2"), [IntendedUse(id="other", label="other")])
        set_ = EvaluationSet(
            pairs=pair_a + pair_b,
            elicited={"u0": elicited_row(), "other": elicited_row()},
        )
        report = validate_evaluation_set(set_)
        assert any("cross-asset" in v for v in report.violations)

    def test_partial_raw_coverage_flagged(self):
        a = asset()
        us = uses(3)
        set_ = EvaluationSet(
            pairs=build_pairs(a, us),
            elicited={u.id: elicited_row() for u in us},
            raw={"u0": RawIndicatorSet(npv_raw=100.0)},
        )
        report = validate_evaluation_set(set_)
        assert any("npv_raw present for 1 of 3" in v for v in report.violations)

    def test_duplicate_use_ids_flagged(self):
        a = asset()
        duplicated = [IntendedUse(id="dup", label="x"), IntendedUse(id="dup", label="y")]
        set_ = EvaluationSet(
            pairs=build_pairs(a, duplicated), elicited={"dup": elicited_row()}
        )
        report = validate_evaluation_set(set_)
        assert any("duplicate use id" in v for v in report.violations)

    def test_missing_indicator_source_flagged(self):
        a = asset()
        us = uses(2)
        partial = {name: 3.0 for name in INDICATORS if name != "market_risk"}
        set_ = EvaluationSet(pairs=build_pairs(a, us), elicited={u.id: partial for u in us})
        report = validate_evaluation_set(set_)
        assert any("no score source for indicator: market_risk" in v for v in report.violations)

    def test_conflicting_sources_flagged(self):
        a = asset()
        us = uses(2)
        set_ = EvaluationSet(
            pairs=build_pairs(a, us),
            elicited={u.id: elicited_row() for u in us},
            raw={u.id: RawIndicatorSet(npv_raw=10.0) for u in us},
        )
        report = validate_evaluation_set(set_)
        assert any("conflicting provenance: npv" in v for v in report.violations)

    def test_cash_flows_can_back_npv(self):
        a = asset()
        us = uses(2)
        flows = CashFlowModel(initial_investment=10.0, periods=((1, 20.0),), discount_rate=0.1)
        no_npv = {name: 3.0 for name in INDICATORS if name != "npv"}
        set_ = EvaluationSet(
            pairs=build_pairs(a, us),
            elicited={u.id: no_npv for u in us},
            cash_flows={u.id: flows for u in us},
        )
        assert validate_evaluation_set(set_).ok

    def test_order_independent_and_deterministic(self):
        a = asset()
        us = uses(5)
        sets = []
        for seed in range(3):
            shuffled = list(us)
            random.Random(seed).shuffle(shuffled)
            sets.append(
                EvaluationSet(
                    pairs=build_pairs(a, shuffled),
                    elicited={u.id: elicited_row() for u in us[:3]},  # deliberately partial
                )
            )
        reports = [validate_evaluation_set(s).violations for s in sets]
        assert reports[0] == reports[1] == reports[2]
