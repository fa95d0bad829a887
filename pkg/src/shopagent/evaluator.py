"""LLM-as-judge evaluation: rubric scoring, debiased pairwise judging,
three-component end-to-end scoring, and aggregate/delta arithmetic.

Per-item scores are integers 0..5; aggregates are real-valued means, so
"2.49 out of 5"-style figures fall out of integer rubric scores.  Pairwise
judging is position-debiased: every pair is judged twice with the
responses swapped, and disagreement between the two orderings is a tie.
All aggregate math is pure and independently checkable.
"""

from __future__ import annotations

import hashlib
import json
import logging
import statistics
import time
import uuid
from dataclasses import dataclass, field
from importlib.resources import files
from pathlib import Path
from typing import Optional, Sequence, Union

from .errors import ShopAgentError
from .llm import Backend, complete_chat
from .prompts import build_request

logger = logging.getLogger(__name__)

__all__ = [
    "Rubric",
    "QualityScore",
    "PairwiseJudgment",
    "E2EScore",
    "AggregateDelta",
    "load_rubric",
    "builtin_rubric",
    "judge_quality",
    "judge_pairwise",
    "run_quality_batch",
    "compute_e2e_score",
    "aggregate_and_delta",
    "write_eval_report",
]


@dataclass(frozen=True)
class Rubric:
    rubric_id: str  # filename + content hash, e.g. "hypothetical_quality@1a2b3c4d"
    text: str


def _rubric_from_text(name: str, text: str) -> Rubric:
    digest = hashlib.sha256(text.encode("utf-8")).hexdigest()[:8]
    return Rubric(rubric_id=f"{name}@{digest}", text=text)


def load_rubric(path: Union[str, Path]) -> Rubric:
    path = Path(path)
    return _rubric_from_text(path.stem, path.read_text(encoding="utf-8"))


def builtin_rubric(name: str) -> Rubric:
    """One of the rubrics shipped with the package (by bare name)."""
    resource = files("shopagent") / "rubrics" / f"{name}.txt"
    return _rubric_from_text(name, resource.read_text(encoding="utf-8"))


@dataclass(frozen=True)
class QualityScore:
    value: int
    rubric_id: str
    rationale: str

    def __post_init__(self) -> None:
        if not 0 <= self.value <= 5:
            raise ValueError(f"quality score must be 0..5, got {self.value}")


@dataclass(frozen=True)
class PairwiseJudgment:
    prompt: str
    response_a: str
    response_b: str
    winner: str  # "A" | "B" | "tie"
    rationale: str = ""
    judgment_id: str = ""

    def __post_init__(self) -> None:
        if self.winner not in ("A", "B", "tie"):
            raise ValueError(f"winner must be A, B or tie, got {self.winner!r}")


@dataclass(frozen=True)
class E2EScore:
    hypothetical_gen: float
    attr_extraction: float
    recommendation: float
    aggregate: float


def judge_quality(
    item: tuple[str, str],
    rubric: Rubric,
    gateway: Backend,
    *,
    model: str = "default",
) -> QualityScore:
    """One rubric-scored judgment; out-of-range scores are validation
    errors, never silently clamped."""
    prompt, output = item
    request = build_request("eval.quality", model=model, rubric=rubric.text,
                            prompt=prompt, output=output)
    response = complete_chat(gateway, request)
    return QualityScore(
        value=response.parsed["score"],
        rubric_id=rubric.rubric_id,
        rationale=response.parsed.get("rationale", ""),
    )


def _judge_once(prompt: str, first: str, second: str, gateway: Backend,
                model: str) -> tuple[str, str]:
    """Positional verdict for (first, second): "first" | "second" | "tie"."""
    request = build_request("eval.pairwise", model=model, prompt=prompt,
                            response_a=first, response_b=second)
    response = complete_chat(gateway, request)
    winner = response.parsed["winner"]
    rationale = response.parsed.get("rationale", "")
    positional = {"A": "first", "B": "second", "tie": "tie"}[winner]
    return positional, rationale


def judge_pairwise(
    prompt: str,
    a: str,
    b: str,
    gateway: Backend,
    *,
    model: str = "default",
) -> PairwiseJudgment:
    """Position-debiased comparison.

    Byte-identical responses tie without any gateway call.  Otherwise the
    pair is judged in both orders; the two verdicts must agree on the same
    response or the result is a tie.
    """
    judgment_id = uuid.uuid4().hex[:12]
    if a == b:
        return PairwiseJudgment(prompt=prompt, response_a=a, response_b=b,
                                winner="tie", rationale="identical responses",
                                judgment_id=judgment_id)

    forward, rationale = _judge_once(prompt, a, b, gateway, model)
    backward, _ = _judge_once(prompt, b, a, gateway, model)

    forward_winner = {"first": "A", "second": "B", "tie": "tie"}[forward]
    backward_winner = {"first": "B", "second": "A", "tie": "tie"}[backward]
    if forward_winner == backward_winner and forward_winner != "tie":
        winner = forward_winner
    else:
        winner = "tie"
        if forward_winner != backward_winner:
            rationale = f"orderings disagreed ({forward_winner} vs {backward_winner}); tie"
    return PairwiseJudgment(prompt=prompt, response_a=a, response_b=b,
                            winner=winner, rationale=rationale,
                            judgment_id=judgment_id)


@dataclass
class BatchResult:
    scores: list[QualityScore] = field(default_factory=list)
    errors: list[tuple[int, str]] = field(default_factory=list)  # (item index, reason)

    @property
    def mean(self) -> float:
        if not self.scores:
            raise ValueError("no successful scores to average")
        return statistics.fmean(score.value for score in self.scores)


def run_quality_batch(
    items: Sequence[tuple[str, str]],
    rubric: Rubric,
    gateway: Backend,
    *,
    model: str = "default",
) -> BatchResult:
    """Judge every item, recording failures and continuing."""
    result = BatchResult()
    for index, item in enumerate(items):
        try:
            result.scores.append(judge_quality(item, rubric, gateway, model=model))
        except (ShopAgentError, ValueError) as exc:
            logger.warning("item %d failed judging: %s", index, exc)
            result.errors.append((index, str(exc)))
    return result


def compute_e2e_score(
    hypothetical_gen: float,
    attr_extraction: float,
    recommendation: float,
) -> E2EScore:
    """Equal-weight mean of the three component means."""
    for name, value in (("hypothetical_gen", hypothetical_gen),
                        ("attr_extraction", attr_extraction),
                        ("recommendation", recommendation)):
        if not 0.0 <= value <= 5.0:
            raise ValueError(f"{name} mean must be in [0, 5], got {value}")
    return E2EScore(
        hypothetical_gen=hypothetical_gen,
        attr_extraction=attr_extraction,
        recommendation=recommendation,
        aggregate=(hypothetical_gen + attr_extraction + recommendation) / 3.0,
    )


@dataclass(frozen=True)
class AggregateDelta:
    mean_candidate: float
    mean_baseline: float
    percent_delta: Optional[float]  # None when the baseline mean is 0

    def rendered_delta(self) -> str:
        if self.percent_delta is None:
            return "undefined"
        return f"{self.percent_delta:+.1f}%"


def aggregate_and_delta(
    candidate_scores: Sequence[float],
    baseline_scores: Sequence[float],
) -> AggregateDelta:
    """Quality-convention delta: (candidate - baseline) / baseline * 100.

    Rounding to one decimal happens only at render time.
    """
    if not candidate_scores or not baseline_scores:
        raise ValueError("score lists must be non-empty")
    mean_candidate = statistics.fmean(candidate_scores)
    mean_baseline = statistics.fmean(baseline_scores)
    if mean_baseline == 0:
        delta = None
    else:
        delta = (mean_candidate - mean_baseline) / mean_baseline * 100.0
    return AggregateDelta(mean_candidate=mean_candidate,
                          mean_baseline=mean_baseline,
                          percent_delta=delta)


def write_eval_report(
    out_path: Union[str, Path],
    *,
    rubric: Rubric,
    candidate: BatchResult,
    baseline: Optional[BatchResult] = None,
) -> dict:
    """Persist an eval run as JSON and return the report dict."""
    report: dict = {
        "run_id": uuid.uuid4().hex[:12],
        "rubric_id": rubric.rubric_id,
        "timestamp": time.time(),
        "n_items": len(candidate.scores) + len(candidate.errors),
        "per_item": [score.value for score in candidate.scores],
        "errors": [{"index": i, "reason": reason} for i, reason in candidate.errors],
        "means": {"candidate": candidate.mean if candidate.scores else None},
    }
    if baseline is not None and baseline.scores and candidate.scores:
        delta = aggregate_and_delta(
            [s.value for s in candidate.scores],
            [s.value for s in baseline.scores],
        )
        report["means"]["baseline"] = delta.mean_baseline
        report["delta_percent"] = delta.percent_delta
    Path(out_path).write_text(json.dumps(report, indent=2), encoding="utf-8")
    return report
