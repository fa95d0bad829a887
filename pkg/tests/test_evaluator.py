from __future__ import annotations

import json

import pytest

from shopagent.errors import SchemaViolation
from shopagent.evaluator import (
    PairwiseJudgment,
    QualityScore,
    aggregate_and_delta,
    builtin_rubric,
    compute_e2e_score,
    judge_pairwise,
    judge_quality,
    load_rubric,
    run_quality_batch,
    write_eval_report,
)
from shopagent.llm import StubBackend, StubRule, StubScript


class CountingBackend:
    def __init__(self, inner):
        self.inner = inner
        self.tag = inner.tag
        self.calls = 0

    def complete_text(self, request):
        self.calls += 1
        return self.inner.complete_text(request)


def fixed_score_backend(score: int) -> StubBackend:
    return StubBackend(StubScript(default_response=json.dumps(
        {"score": score, "rationale": "scripted"})))


@pytest.fixture(scope="module")
def rubric():
    return builtin_rubric("hypothetical_quality")


# --- rubrics ---------------------------------------------------------------

def test_builtin_rubrics_load():
    for name in ("hypothetical_quality", "attribute_extraction",
                 "recommendation_quality"):
        rubric = builtin_rubric(name)
        assert rubric.text and rubric.rubric_id.startswith(f"{name}@")
        assert len(rubric.rubric_id.split("@")[1]) == 8


def test_rubric_id_tracks_content(tmp_path):
    path = tmp_path / "my_rubric.txt"
    path.write_text("five when perfect")
    first = load_rubric(path)
    path.write_text("five when flawless")
    second = load_rubric(path)
    assert first.rubric_id != second.rubric_id
    assert first.rubric_id.split("@")[0] == "my_rubric"


# --- judge_quality -----------------------------------------------------------

def test_fixed_five(rubric):
    score = judge_quality(("prompt", "output"), rubric, fixed_score_backend(5))
    assert score.value == 5 and score.rubric_id == rubric.rubric_id


def test_out_of_range_is_validation_error(rubric):
    with pytest.raises(SchemaViolation):
        judge_quality(("p", "o"), rubric, fixed_score_backend(7))


def test_quality_score_range_guard():
    with pytest.raises(ValueError):
        QualityScore(value=6, rubric_id="r", rationale="")


def test_scripted_batch_mean(rubric):
    # scripted per-item scores: rules keyed by the item payload
    scores = [2, 2, 3, 2, 3, 3, 2, 3, 2, 3]
    rules = [StubRule(contains=f"item-{i}", response=json.dumps(
        {"score": s, "rationale": ""})) for i, s in enumerate(scores)]
    backend = StubBackend(StubScript(rules=rules))
    items = [(f"item-{i}", f"output-{i}") for i in range(len(scores))]
    result = run_quality_batch(items, rubric, backend)
    assert len(result.scores) == 10 and not result.errors
    assert result.mean == pytest.approx(2.5)
    assert f"{result.mean:.2f}" == "2.50"


def test_batch_records_errors_and_continues(rubric):
    rules = [
        StubRule(contains="good", response=json.dumps({"score": 4, "rationale": ""})),
    ]
    backend = StubBackend(StubScript(rules=rules, default_response="garbage"))
    result = run_quality_batch([("good one", "x"), ("bad one", "y"),
                                ("good again", "z")], rubric, backend)
    assert len(result.scores) == 2
    assert len(result.errors) == 1 and result.errors[0][0] == 1


# --- judge_pairwise -----------------------------------------------------------

def test_identical_responses_tie_without_gateway():
    backend = CountingBackend(fixed_score_backend(0))
    judgment = judge_pairwise("p", "same", "same", backend)
    assert judgment.winner == "tie"
    assert backend.calls == 0


def test_position_bias_forced_to_tie():
    # always prefers whatever is listed first
    biased = StubBackend(StubScript(default_response=json.dumps(
        {"winner": "A", "rationale": "first sounds better"})))
    backend = CountingBackend(biased)
    judgment = judge_pairwise("p", "alpha", "beta", backend)
    assert judgment.winner == "tie"
    assert backend.calls == 2  # both orderings judged


def test_consistent_preference_survives_swap():
    long_response = "a much longer and more detailed response"
    script = StubScript(rules=[
        StubRule(contains=f"Response A:\n{long_response}",
                 response=json.dumps({"winner": "A", "rationale": "thorough"})),
        StubRule(contains=f"Response B:\n{long_response}",
                 response=json.dumps({"winner": "B", "rationale": "thorough"})),
    ])
    backend = StubBackend(script)
    judgment = judge_pairwise("p", "short", long_response, backend)
    assert judgment.winner == "B"
    swapped = judge_pairwise("p", long_response, "short", backend)
    assert swapped.winner == "A"  # same response wins regardless of position


def test_explicit_tie_from_judge():
    backend = StubBackend(StubScript(default_response=json.dumps(
        {"winner": "tie", "rationale": "equal"})))
    assert judge_pairwise("p", "x", "y", backend).winner == "tie"


def test_winner_field_validated():
    with pytest.raises(ValueError):
        PairwiseJudgment(prompt="p", response_a="a", response_b="b", winner="C")


# --- aggregate math -----------------------------------------------------------

def test_e2e_trivial_bounds():
    assert compute_e2e_score(0, 0, 0).aggregate == 0.0
    assert compute_e2e_score(5, 5, 5).aggregate == 5.0


def test_e2e_hand_computed():
    score = compute_e2e_score(2.49, 3.0, 3.6)
    assert score.aggregate == pytest.approx((2.49 + 3.0 + 3.6) / 3, abs=1e-9)
    assert score.aggregate == pytest.approx(3.03, abs=1e-9)


def test_e2e_out_of_range():
    with pytest.raises(ValueError):
        compute_e2e_score(5.1, 0, 0)


def test_integer_scores_give_two_decimal_mean_delta():
    candidate = [3] * 49 + [2] * 51   # mean 2.49
    baseline = [3] * 3 + [2] * 97     # mean 2.03
    delta = aggregate_and_delta(candidate, baseline)
    assert delta.mean_candidate == pytest.approx(2.49)
    assert delta.mean_baseline == pytest.approx(2.03)
    assert delta.percent_delta == pytest.approx(22.66, abs=0.01)
    assert delta.rendered_delta() == "+22.7%"


def test_identical_lists_zero_delta():
    delta = aggregate_and_delta([1, 2, 3], [3, 2, 1])
    assert delta.percent_delta == pytest.approx(0.0)
    assert delta.rendered_delta() == "+0.0%"


def test_down_delta():
    delta = aggregate_and_delta([1.26], [2.09])
    assert delta.percent_delta == pytest.approx(-39.7, abs=0.05)
    assert delta.rendered_delta() == "-39.7%"


def test_zero_baseline_is_undefined_marker():
    delta = aggregate_and_delta([1.0], [0.0])
    assert delta.percent_delta is None
    assert delta.rendered_delta() == "undefined"


def test_empty_lists_rejected():
    with pytest.raises(ValueError):
        aggregate_and_delta([], [1])


def test_eval_report_round_trip(tmp_path, rubric):
    backend = fixed_score_backend(3)
    candidate = run_quality_batch([("p1", "o1"), ("p2", "o2")], rubric, backend)
    baseline = run_quality_batch([("p1", "b1"), ("p2", "b2")], rubric,
                                 fixed_score_backend(2))
    out = tmp_path / "report.json"
    report = write_eval_report(out, rubric=rubric, candidate=candidate,
                               baseline=baseline)
    on_disk = json.loads(out.read_text())
    assert on_disk["rubric_id"] == rubric.rubric_id
    assert on_disk["per_item"] == [3, 3]
    assert on_disk["means"]["candidate"] == 3.0
    assert on_disk["delta_percent"] == pytest.approx(50.0)
    assert report["run_id"] == on_disk["run_id"]
