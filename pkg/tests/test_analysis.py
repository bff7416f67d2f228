import pytest

from usescreen import (
    INDICATORS,
    Asset,
    ContextClass,
    DecisionProfile,
    EvaluationSet,
    IntendedUse,
    SweepAxis,
    SweepSpec,
    build_pairs,
    evaluate_set,
    perturb_scores,
    weight_sweep,
)
from usescreen.analysis import SweepError

BASELINE = DecisionProfile.baseline()


def elicited_set(rows):
    asset = Asset(id="a", name="a", gla_sqm=900.0, context_class=ContextClass.DENSE_CENTRAL)
    uses = [IntendedUse(id=uid, label=uid) for uid in rows]
    return EvaluationSet(pairs=build_pairs(asset, uses), elicited=rows)


def spread_set():
    return elicited_set(
        {
            "alpha-use": {"npv": 5, "market_risk": 2, "operational_risk": 2,
                          "technical_complexity": 2, "managerial_complexity": 2,
                          "time_to_income": 2},
            "beta-use": {"npv": 4, "market_risk": 3, "operational_risk": 3,
                         "technical_complexity": 3, "managerial_complexity": 3,
                         "time_to_income": 2},
            "gamma-use": {"npv": 2, "market_risk": 4, "operational_risk": 5,
                          "technical_complexity": 4, "managerial_complexity": 5,
                          "time_to_income": 4},
        }
    )


class TestSweepSpec:
    def test_axis_values_include_endpoints(self):
        assert SweepAxis(start=0.1, stop=0.5, steps=5).values() == pytest.approx(
            [0.1, 0.2, 0.3, 0.4, 0.5]
        )

    def test_single_step_axis_is_start_only(self):
        assert SweepAxis(start=0.25, stop=0.9, steps=1).values() == [0.25]

    def test_rejects_zero_steps(self):
        with pytest.raises(SweepError):
            SweepAxis(start=0.1, stop=0.5, steps=0)

    def test_rejects_unknown_axis(self):
        with pytest.raises(SweepError, match="unknown sweep axes"):
            SweepSpec(axes={"epsilon": SweepAxis(0, 1, 2)}, profile=BASELINE)

    def test_points_are_cartesian_product_in_sorted_axis_order(self):
        spec = SweepSpec(
            axes={"w_risk": SweepAxis(0.1, 0.2, 2), "alpha": SweepAxis(0.0, 1.0, 2)},
            profile=BASELINE,
        )
        points = list(spec.points())
        assert points == [
            {"alpha": 0.0, "w_risk": 0.1},
            {"alpha": 0.0, "w_risk": 0.2},
            {"alpha": 1.0, "w_risk": 0.1},
            {"alpha": 1.0, "w_risk": 0.2},
        ]


class TestWeightSweep:
    def test_singleton_grid_equals_single_evaluation(self):
        set_ = spread_set()
        spec = SweepSpec(axes={}, profile=BASELINE)
        report = weight_sweep(set_, spec)
        results = evaluate_set(set_, BASELINE)
        assert report.evaluated_points == 1
        assert report.skipped_points == 0
        assert report.flips == ()
        for result in results:
            assert report.fractions[result.use_id][result.classification.value] == 1.0
        assert report.baseline_ranking == tuple(r.use_id for r in results)
        assert all(count == 0 for count in report.rank_reversals.values())

    def test_invalid_mix_points_are_skipped_and_counted(self):
        spec = SweepSpec(axes={"beta": SweepAxis(0.2, 0.4, 3)}, profile=BASELINE)
        report = weight_sweep(spread_set(), spec)
        # only beta=0.3 keeps beta+gamma+delta = 1
        assert report.evaluated_points == 1
        assert report.skipped_points == 2

    def test_all_points_invalid_is_an_empty_grid(self):
        spec = SweepSpec(axes={"beta": SweepAxis(0.5, 0.6, 2)}, profile=BASELINE)
        with pytest.raises(SweepError, match="empty grid"):
            weight_sweep(spread_set(), spec)

    def test_fractions_sum_to_one_per_use(self):
        spec = SweepSpec(
            axes={"w_risk": SweepAxis(0.1, 0.5, 5), "w_value": SweepAxis(0.3, 0.5, 3)},
            profile=BASELINE,
        )
        report = weight_sweep(spread_set(), spec)
        assert report.evaluated_points == 15
        for uid, fractions in report.fractions.items():
            assert sum(fractions.values()) == pytest.approx(1.0, abs=1e-12)

    def test_deterministic(self):
        spec = SweepSpec(axes={"w_risk": SweepAxis(0.1, 0.5, 5)}, profile=BASELINE)
        assert weight_sweep(spread_set(), spec) == weight_sweep(spread_set(), spec)

    def test_value_blind_profile_ranks_by_penalties_alone(self):
        blind = BASELINE.with_overrides(w_value=0.0)
        results = evaluate_set(spread_set(), blind)
        expected = sorted(
            results, key=lambda r: (r.overall_risk * 0.3 + r.overall_complexity * 0.3, r.use_id)
        )
        assert [r.use_id for r in results] == [r.use_id for r in expected]


class TestPerturbScores:
    def test_radius_zero_never_flips(self, office_set):
        report = perturb_scores(office_set, BASELINE, 0.0)
        assert report.flips == ()
        assert all(count == 0 for count in report.rank_reversals.values())

    def test_enumeration_size(self, office_set):
        report = perturb_scores(office_set, BASELINE, 1.0)
        assert report.evaluated_points == 4 * len(INDICATORS) * 2  # 48

    def test_deeply_negative_pair_never_flips_to_pass_at_small_radius(self):
        rows = {
            "doomed": {"npv": 1, "market_risk": 4, "operational_risk": 4,
                       "technical_complexity": 4, "managerial_complexity": 4,
                       "time_to_income": 4},
            "fine": {"npv": 5, "market_risk": 1, "operational_risk": 1,
                     "technical_complexity": 1, "managerial_complexity": 1,
                     "time_to_income": 1},
        }
        set_ = elicited_set(rows)
        baseline = {r.use_id: r for r in evaluate_set(set_, BASELINE)}
        assert baseline["doomed"].attractiveness == pytest.approx(-2.0, abs=1e-12)
        # |dA| <= max(w) * 0.1 = 0.04, far from crossing the -0.05 band edge
        report = perturb_scores(set_, BASELINE, 0.1)
        assert "doomed" not in report.flips

    def test_flip_detected_when_band_is_crossable(self):
        rows = {
            "edge": {"npv": 3, "market_risk": 3, "operational_risk": 3,
                     "technical_complexity": 3, "managerial_complexity": 3,
                     "time_to_income": 3},
            "other": {"npv": 4, "market_risk": 2, "operational_risk": 2,
                      "technical_complexity": 2, "managerial_complexity": 2,
                      "time_to_income": 2},
        }
        # A(edge) = -0.6 at baseline; the npv+2 perturbation lifts it to
        # 0.4*5 - 0.3*3 - 0.3*3 = +0.2 > epsilon, so a flip must be reported
        set_ = elicited_set(rows)
        report = perturb_scores(set_, BASELINE, 2.0)
        assert "edge" in report.flips
        vectors = {uid: dict(row) for uid, row in rows.items()}
        vectors["edge"]["npv"] = 5.0
        shifted = {r.use_id: r for r in evaluate_set(elicited_set(vectors), BASELINE)}
        assert shifted["edge"].attractiveness == pytest.approx(0.2, abs=1e-12)

    def test_rejects_negative_radius(self, office_set):
        with pytest.raises(SweepError):
            perturb_scores(office_set, BASELINE, -0.5)
