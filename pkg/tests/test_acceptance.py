"""Acceptance gate: one test per release criterion, at pinned tolerances.

The conftest hook prints an `ACCEPTANCE <test>: PASS/FAIL` line for every
test in this module. Property suites run 1000 generated cases each.
"""

import json
from dataclasses import replace
from fractions import Fraction

import pytest
from click.testing import CliRunner
from hypothesis import HealthCheck, assume, given, settings
from hypothesis import strategies as st

import requests

from usescreen import (
    INDICATORS,
    Asset,
    CashFlowModel,
    ContextClass,
    DecisionProfile,
    EvaluationSet,
    GateError,
    IntendedUse,
    ScreeningService,
    ServiceConfig,
    StressKind,
    SweepAxis,
    SweepSpec,
    aggregate_complexity,
    aggregate_risk,
    attractiveness,
    build_pairs,
    bundled_path,
    evaluate,
    evaluate_set,
    normalize_benefit,
    normalize_penalty,
    open_project,
    parse_worksheet,
    perturb_scores,
    serialize_worksheet,
    stress_report,
    weight_sweep,
)
from usescreen.analysis import StabilityReport
from usescreen.cli import main as cli_main
from usescreen.economics import TimeToIncome
from usescreen.model import RawIndicatorSet
from usescreen.stagegate import GATED_STAGES, STAGE_ORDER, Stage, Verdict, stage_checklist
from usescreen.worksheet import Worksheet, export_report

from conftest import OFFICE_ROWS

SUITE = settings(
    max_examples=1000,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.filter_too_much],
)

BASELINE = DecisionProfile.baseline()


# ---------------------------------------------------------------------------
# golden-matrix criteria


def test_reference_matrix_risk_column():
    """aggregate_risk at alpha=0.5 reproduces the reference R column exactly."""
    observed = [aggregate_risk(r_m, r_o, 0.5) for r_m, r_o in [(3, 5), (3, 4), (2, 2), (3, 2)]]
    for value, expected in zip(observed, [4.0, 3.5, 2.0, 2.5]):
        assert abs(value - expected) <= 1e-9


def test_reference_attractiveness_with_printed_complexity():
    """attractiveness(4, 4.0, 3.4) under baseline weights hits the printed -0.62."""
    assert abs(attractiveness(4, 4.0, 3.4, BASELINE) - (-0.62)) <= 1e-9


def test_reference_discrepancy_report(office_worksheet):
    """End-to-end evaluation emits recomputed C and A columns, each paired
    with the reference value, and flags every mismatching cell."""
    evaluation = evaluate(office_worksheet.evaluation_set(), office_worksheet.profile)
    doc = json.loads(export_report(office_worksheet, evaluation))
    cells = {
        (cell["use_id"], cell["column"]): cell
        for cell in doc["reference_comparison"]["cells"]
    }

    expected_c = dict(zip(OFFICE_ROWS, [3.5, 3.4, 2.9, 2.6]))
    expected_a = dict(zip(OFFICE_ROWS, [-0.65, -0.47, -0.27, -0.33]))
    printed_c = dict(zip(OFFICE_ROWS, [3.4, 3.6, 2.7, 2.4]))
    printed_a = dict(zip(OFFICE_ROWS, [-0.62, -0.73, 0.21, 0.33]))

    mismatching = [cell for cell in cells.values() if cell["mismatch"]]
    assert len(mismatching) >= 6  # every irreproducible cell is listed
    for uid in OFFICE_ROWS:
        c_cell = cells[(uid, "overall_complexity")]
        assert abs(c_cell["recomputed"] - expected_c[uid]) <= 1e-9
        assert c_cell["reference"] == printed_c[uid]
        assert c_cell["mismatch"]

        a_cell = cells[(uid, "attractiveness")]
        assert abs(a_cell["recomputed"] - expected_a[uid]) <= 1e-9
        assert a_cell["reference"] == printed_a[uid]
        assert a_cell["mismatch"]

        assert not cells[(uid, "overall_risk")]["mismatch"]


def test_office_screening_partition_under_both_pipelines(office_worksheet):
    """Bottom-two by attractiveness are coworking and mixed-use, top-two are
    multifamily and microliving, whether complexity is recomputed or taken
    from the reference matrix."""
    evaluation = evaluate(office_worksheet.evaluation_set(), office_worksheet.profile)
    recomputed_order = [r.use_id for r in evaluation.results]
    assert set(recomputed_order[:2]) == {"multifamily-btr", "microliving"}
    assert set(recomputed_order[-2:]) == {"urban-coworking", "light-mixed-use"}
    assert evaluation.shortlist == tuple(recomputed_order[:2])
    assert evaluation.excluded == tuple(recomputed_order[2:])

    printed_pipeline = {
        uid: attractiveness(
            evaluation.scores[uid].npv,
            evaluation.result_for(uid).overall_risk,
            office_worksheet.reference_rows[uid]["overall_complexity"],
            office_worksheet.profile,
        )
        for uid in OFFICE_ROWS
    }
    printed_order = sorted(printed_pipeline, key=lambda uid: -printed_pipeline[uid])
    assert set(printed_order[:2]) == {"multifamily-btr", "microliving"}
    assert set(printed_order[-2:]) == {"urban-coworking", "light-mixed-use"}


def test_stress_suite_identity_model():
    """The three mandated scenarios on the unit-NPV model, at 1e-6."""
    model = CashFlowModel(initial_investment=100.0, periods=((1, 110.0),), discount_rate=0.10)
    report = stress_report(model)
    assert abs(report.scenario_npvs[StressKind.RENT_MINUS_10PCT] - (-10.0)) <= 1e-6
    assert abs(report.scenario_npvs[StressKind.OCCUPANCY_MINUS_10PCT] - (-10.0)) <= 1e-6
    delay_expected = float(Fraction(110, 1) / Fraction(121, 100) - 100)  # -9.0909...
    assert abs(report.scenario_npvs[StressKind.DELAY_12_MONTHS] - delay_expected) <= 1e-6
    assert report.fragile is True


# ---------------------------------------------------------------------------
# property suites (1000 generated cases each)

score_st = st.floats(min_value=1.0, max_value=5.0, allow_nan=False)
unit_st = st.floats(min_value=0.0, max_value=1.0, allow_nan=False)


@st.composite
def profiles(draw, epsilon_max=0.5):
    mix = [draw(st.floats(0.01, 1.0)) for _ in range(3)]
    total = sum(mix)
    beta, gamma = mix[0] / total, mix[1] / total
    return DecisionProfile(
        alpha=draw(unit_st),
        beta=beta,
        gamma=gamma,
        delta=1.0 - beta - gamma,
        w_value=draw(unit_st),
        w_risk=draw(unit_st),
        w_complexity=draw(unit_st),
        borderline_epsilon=draw(st.floats(0.0, epsilon_max)),
    )


@st.composite
def score_rows(draw, min_uses=1, max_uses=5):
    n = draw(st.integers(min_uses, max_uses))
    return {
        f"u{i}": {name: draw(score_st) for name in INDICATORS} for i in range(n)
    }


def _elicited_set(rows):
    asset = Asset(id="a", name="a", gla_sqm=1000.0, context_class=ContextClass.SEMI_CENTRAL)
    uses = [IntendedUse(id=uid, label=uid) for uid in rows]
    return EvaluationSet(pairs=build_pairs(asset, uses), elicited=rows)


@SUITE
@given(
    values=st.lists(st.floats(-1000.0, 1000.0, allow_nan=False), min_size=1, max_size=10),
)
def test_property_normalization_range_anchoring_monotonicity(values):
    benefit = normalize_benefit(values)
    penalty = normalize_penalty(values)
    for scores in (benefit, penalty):
        assert all(1.0 - 1e-9 <= s <= 5.0 + 1e-9 for s in scores)
    if max(values) > min(values):
        assert min(benefit) == 1.0 and max(benefit) == 5.0
        assert min(penalty) == 1.0 and max(penalty) == 5.0
    for (x_i, b_i, p_i) in zip(values, benefit, penalty):
        for (x_j, b_j, p_j) in zip(values, benefit, penalty):
            if x_i <= x_j:
                assert b_i <= b_j
                assert p_i >= p_j


@SUITE
@given(
    values=st.lists(st.floats(-1000.0, 1000.0, allow_nan=False), min_size=1, max_size=8),
    a=st.floats(0.1, 100.0),
    b=st.floats(-1000.0, 1000.0, allow_nan=False),
)
def test_property_normalization_affine_invariance(values, a, b):
    spread = max(values) - min(values)
    assume(spread == 0.0 or spread >= 1e-3)
    transformed = [a * x + b for x in values]
    assume((max(transformed) - min(transformed) == 0.0) == (spread == 0.0))
    for original, shifted in zip(normalize_benefit(values), normalize_benefit(transformed)):
        assert abs(original - shifted) <= 1e-5
    for original, shifted in zip(normalize_penalty(values), normalize_penalty(transformed)):
        assert abs(original - shifted) <= 1e-5


@SUITE
@given(
    r_m=score_st, r_o=score_st, alpha=unit_st,
    c_t=score_st, c_g=score_st, t=score_st,
    profile=profiles(),
)
def test_property_convex_envelopes(r_m, r_o, alpha, c_t, c_g, t, profile):
    risk = aggregate_risk(r_m, r_o, alpha)
    assert min(r_m, r_o) - 1e-9 <= risk <= max(r_m, r_o) + 1e-9
    complexity = aggregate_complexity(c_t, c_g, t, profile.beta, profile.gamma, profile.delta)
    assert min(c_t, c_g, t) - 1e-9 <= complexity <= max(c_t, c_g, t) + 1e-9
    assert 1.0 - 1e-9 <= complexity <= 5.0 + 1e-9


@SUITE
@given(
    rows=score_rows(min_uses=2, max_uses=5),
    profile=profiles(),
    scale=st.floats(0.1, 10.0),
    bump=st.floats(-2.0, 2.0),
)
def test_property_attractiveness_linearity_and_scaling(rows, profile, scale, bump):
    set_ = _elicited_set(rows)
    results = {r.use_id: r for r in evaluate_set(set_, profile)}

    # affine in the value argument: a bump of d moves A by exactly w_value * d
    uid = next(iter(rows))
    base = results[uid]
    bumped_npv = min(5.0, max(1.0, base.scores.npv + bump))
    shifted = attractiveness(bumped_npv, base.overall_risk, base.overall_complexity, profile)
    expected_delta = profile.w_value * (bumped_npv - base.scores.npv)
    assert abs((shifted - base.attractiveness) - expected_delta) <= 1e-9 * (
        1.0 + abs(expected_delta)
    )

    # positive scaling of the weight vector preserves every strict comparison
    scaled_profile = replace(
        profile,
        w_value=profile.w_value * scale,
        w_risk=profile.w_risk * scale,
        w_complexity=profile.w_complexity * scale,
    )
    scaled = {r.use_id: r for r in evaluate_set(set_, scaled_profile)}
    for a_id in rows:
        assert abs(scaled[a_id].attractiveness - scale * results[a_id].attractiveness) <= 1e-9 * (
            1.0 + abs(scale * results[a_id].attractiveness)
        )
        for b_id in rows:
            if results[a_id].attractiveness - results[b_id].attractiveness > 1e-9:
                assert scaled[a_id].attractiveness > scaled[b_id].attractiveness
                assert scaled[a_id].rank < scaled[b_id].rank


@st.composite
def cash_flow_models(draw):
    n = draw(st.integers(1, 4))
    ts = sorted(draw(st.sets(st.integers(1, 12), min_size=n, max_size=n)))
    periods = tuple((t, draw(st.floats(0.0, 1e5))) for t in ts)
    return CashFlowModel(
        initial_investment=draw(st.floats(0.0, 1e5)),
        periods=periods,
        discount_rate=draw(st.floats(0.0, 0.5)),
        rent_share=draw(unit_st),
        occupancy_share=draw(unit_st),
    )


@SUITE
@given(model=cash_flow_models())
def test_property_stress_dominance_for_nonnegative_flows(model):
    report = stress_report(model)
    slack = 1e-6 * (1.0 + abs(report.base_npv))
    assert report.scenario_npvs[StressKind.RENT_MINUS_10PCT] <= report.base_npv + slack
    assert report.scenario_npvs[StressKind.OCCUPANCY_MINUS_10PCT] <= report.base_npv + slack
    assert report.scenario_npvs[StressKind.DELAY_12_MONTHS] <= report.base_npv + slack
    if model.rent_share > 0 and any(cf > 0 for _, cf in model.periods):
        assert report.scenario_npvs[StressKind.RENT_MINUS_10PCT] < report.base_npv + slack


_id_st = st.from_regex(r"[a-z][a-z0-9\-]{0,9}", fullmatch=True)
_text_st = st.text(
    alphabet=st.characters(min_codepoint=32, max_codepoint=0x2FFF, blacklist_characters="\x7f"),
    min_size=1,
    max_size=24,
).filter(lambda s: s.strip())


@st.composite
def worksheets(draw):
    n = draw(st.integers(1, 4))
    use_ids = draw(st.lists(_id_st, min_size=n, max_size=n, unique=True))
    asset = Asset(
        id=draw(_id_st),
        name=draw(_text_st),
        gla_sqm=draw(st.floats(10.0, 1e5)),
        context_class=draw(st.sampled_from(list(ContextClass))),
        notes=draw(st.one_of(st.just(""), _text_st)),
    )
    uses = tuple(
        IntendedUse(
            id=uid,
            label=draw(_text_st),
            format_class=draw(st.one_of(st.none(), st.just("Coworking"))),
        )
        for uid in use_ids
    )
    elicited = {}
    raw = {}
    cash_flows = {}
    tti = {}
    for uid in use_ids:
        if draw(st.booleans()):
            elicited[uid] = {
                name: draw(score_st)
                for name in INDICATORS
                if draw(st.integers(0, 3)) > 0
            }
        if draw(st.booleans()):
            raw[uid] = RawIndicatorSet(
                npv_raw=draw(st.one_of(st.none(), st.floats(-1e5, 1e5))),
                market_risk_proxy=draw(st.one_of(st.none(), st.floats(0.0, 1e4))),
                time_to_income_months=draw(st.one_of(st.none(), st.floats(1.0, 240.0))),
            )
        if draw(st.booleans()):
            cash_flows[uid] = draw(cash_flow_models())
        if draw(st.booleans()):
            tti[uid] = TimeToIncome(
                permits_months=draw(st.floats(0.0, 60.0)),
                works_months=draw(st.floats(0.0, 60.0)),
                stabilization_months=draw(st.floats(0.0, 60.0)),
            )
    reference_rows = None
    if draw(st.booleans()):
        reference_rows = {
            uid: {
                "overall_risk": draw(score_st),
                "overall_complexity": draw(score_st),
                "attractiveness": draw(st.floats(-3.0, 2.0)),
            }
            for uid in use_ids[: draw(st.integers(1, n))]
        }
    return Worksheet(
        asset=asset,
        uses=uses,
        profile=draw(profiles()),
        raw=raw,
        elicited=elicited,
        cash_flows=cash_flows,
        time_to_income=tti,
        reference_rows=reference_rows,
        notes=draw(st.one_of(st.just(""), _text_st)),
    )


@SUITE
@given(worksheet=worksheets())
def test_property_worksheet_round_trip(worksheet):
    assert parse_worksheet(serialize_worksheet(worksheet)) == worksheet


_gate_action = st.sampled_from(["ok", "fail", "wrong-stage"])


@SUITE
@given(actions=st.lists(_gate_action, max_size=8))
def test_property_stagegate_progress_and_stop_permanence(actions):
    asset = Asset(id="a", name="a", gla_sqm=500.0, context_class=ContextClass.SEMI_CENTRAL)
    project = open_project(asset, [IntendedUse(id="u0", label="u0")])
    ts = 0
    for action in actions:
        ts += 1
        stage = project.current_stage
        was_stopped = project.stopped
        history_before = len(project.gate_history)
        try:
            if action == "wrong-stage":
                wrong = next(s for s in STAGE_ORDER if s is not stage)
                project.record_gate(wrong, {c: True for c in stage_checklist(wrong)},
                                    timestamp=ts)
                assert False, "out-of-order record must be rejected"
            checklist = {c: True for c in stage_checklist(stage)}
            if action == "fail" and checklist:
                checklist[next(iter(checklist))] = False
            project.record_gate(stage, checklist, timestamp=ts)
        except GateError:
            assert was_stopped or action == "wrong-stage" or stage is Stage.DESIGN
            assert len(project.gate_history) == history_before  # rejected, not recorded

    # monotone progress: proceed stages strictly increase with no gaps
    proceeds = [r.stage for r in project.gate_history if r.verdict is Verdict.PROCEED]
    assert proceeds == list(STAGE_ORDER[: len(proceeds)])
    # at most one stop, and nothing after it
    verdicts = [r.verdict for r in project.gate_history]
    if Verdict.STOP in verdicts:
        assert verdicts.index(Verdict.STOP) == len(verdicts) - 1
        assert project.stopped
        with pytest.raises(GateError):
            project.record_gate(
                project.current_stage,
                {c: True for c in stage_checklist(project.current_stage)},
                timestamp=ts + 1,
            )
    # a design-stage project must have passed every gated stage
    if project.current_stage is Stage.DESIGN:
        assert set(GATED_STAGES) <= set(proceeds)


@SUITE
@given(
    rows=score_rows(min_uses=1, max_uses=4),
    profile=profiles(),
    radius=st.floats(0.0, 4.0),
    indicator=st.sampled_from(INDICATORS),
    direction=st.sampled_from([-1.0, 1.0]),
    which=st.integers(0, 3),
)
def test_property_perturbation_lipschitz_envelope(rows, profile, radius, indicator,
                                                  direction, which):
    set_ = _elicited_set(rows)
    uid = list(rows)[which % len(rows)]
    baseline = {r.use_id: r for r in evaluate_set(set_, profile)}
    shifted_value = min(5.0, max(1.0, rows[uid][indicator] + direction * radius))
    shifted_rows = {u: dict(scores) for u, scores in rows.items()}
    shifted_rows[uid][indicator] = shifted_value
    shifted = {r.use_id: r for r in evaluate_set(_elicited_set(shifted_rows), profile)}
    delta = abs(shifted[uid].attractiveness - baseline[uid].attractiveness)
    bound = max(profile.w_value, profile.w_risk, profile.w_complexity) * radius
    assert delta <= bound + 1e-9


# ---------------------------------------------------------------------------
# brute-force oracle equivalence


def _axis_values(start, stop, steps):
    if steps == 1:
        return [float(start)]
    step = (float(stop) - float(start)) / (steps - 1)
    return [float(start) + i * step for i in range(steps)]


def _oracle_stability(set_, profile, evaluations) -> StabilityReport:
    """Independent aggregation: diff each evaluation against the baseline."""
    baseline = evaluate_set(set_, profile)
    baseline_class = {r.use_id: r.classification for r in baseline}
    baseline_rank = {r.use_id: r.rank for r in baseline}
    uids = sorted(baseline_rank)
    counts = {uid: {"pass": 0, "borderline": 0, "exclude": 0} for uid in uids}
    flips = set()
    reversals = {f"{a}::{b}": 0 for i, a in enumerate(uids) for b in uids[i + 1:]}
    for results in evaluations:
        ranks = {}
        for result in results:
            counts[result.use_id][result.classification.value] += 1
            if result.classification is not baseline_class[result.use_id]:
                flips.add(result.use_id)
            ranks[result.use_id] = result.rank
        for i, a in enumerate(uids):
            for b in uids[i + 1:]:
                if (ranks[a] < ranks[b]) != (baseline_rank[a] < baseline_rank[b]):
                    reversals[f"{a}::{b}"] += 1
    evaluated = len(evaluations)
    return StabilityReport(
        evaluated_points=evaluated,
        skipped_points=0,
        counts=counts,
        fractions={
            uid: {name: count / evaluated for name, count in per.items()}
            for uid, per in counts.items()
        },
        flips=tuple(sorted(flips)),
        rank_reversals=reversals,
        baseline_ranking=tuple(r.use_id for r in baseline),
    )


def test_weight_sweep_matches_bruteforce_oracle(office_worksheet):
    set_ = office_worksheet.evaluation_set()
    profile = office_worksheet.profile
    axes = {
        "w_value": (0.3, 0.5, 5),
        "w_risk": (0.1, 0.5, 5),
        "w_complexity": (0.2, 0.4, 5),
    }
    spec = SweepSpec(
        axes={name: SweepAxis(*bounds) for name, bounds in axes.items()},
        profile=profile,
    )
    report = weight_sweep(set_, spec)

    evaluations = []
    for w_c in _axis_values(*axes["w_complexity"]):
        for w_r in _axis_values(*axes["w_risk"]):
            for w_v in _axis_values(*axes["w_value"]):
                point = replace(profile, w_value=w_v, w_risk=w_r, w_complexity=w_c)
                evaluations.append(evaluate_set(set_, point))
    assert len(evaluations) == 125
    oracle = _oracle_stability(set_, profile, evaluations)

    assert report.evaluated_points == 125
    assert report.skipped_points == 0
    assert report.counts == oracle.counts
    assert report.fractions == oracle.fractions
    assert report.flips == oracle.flips
    assert report.rank_reversals == oracle.rank_reversals
    assert report.baseline_ranking == oracle.baseline_ranking


def test_perturbation_matches_bruteforce_oracle(office_worksheet):
    set_ = office_worksheet.evaluation_set()
    profile = office_worksheet.profile
    radius = 1.0
    report = perturb_scores(set_, profile, radius)

    evaluations = []
    for uid in set_.use_ids():
        for indicator in INDICATORS:
            for direction in (-1.0, 1.0):
                rows = {u: dict(scores) for u, scores in set_.elicited.items()}
                rows[uid][indicator] = min(
                    5.0, max(1.0, rows[uid][indicator] + direction * radius)
                )
                evaluations.append(evaluate_set(_elicited_set_from(set_, rows), profile))
    assert len(evaluations) == 48
    oracle = _oracle_stability(set_, profile, evaluations)

    assert report.evaluated_points == 48
    assert report.counts == oracle.counts
    assert report.fractions == oracle.fractions
    assert report.flips == oracle.flips
    assert report.rank_reversals == oracle.rank_reversals


def _elicited_set_from(set_, rows):
    return EvaluationSet(pairs=set_.pairs, elicited=rows)


# ---------------------------------------------------------------------------
# interface parity


def test_cli_service_parity(tmp_path):
    worksheet_path = bundled_path("office_conversion.json")
    out = tmp_path / "cli-report.json"
    result = CliRunner().invoke(cli_main, ["evaluate", str(worksheet_path), "--out", str(out)])
    assert result.exit_code == 0, result.output
    cli_bytes = out.read_bytes()

    service = ScreeningService(ServiceConfig(port=0, store_dir=tmp_path / "store")).start()
    try:
        response = requests.post(
            f"http://{service.host}:{service.port}/evaluate",
            data=worksheet_path.read_bytes(),
        )
    finally:
        service.stop()
    assert response.status_code == 200
    assert response.content == cli_bytes
