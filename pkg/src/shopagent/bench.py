"""Per-stage latency instrumentation and comparative delta reporting.

Timings come from a monotonic clock, one per executed stage plus an
end-to-end figure.  Summaries use nearest-rank percentiles (the value at
1-based index ``ceil(p * n)`` of the sorted sample) because that rule is
unambiguous and trivially oracle-checkable.  Delta reports apply
"reduction is good" arithmetic to latency/cost metrics and "increase is
good" to quality metrics, and each row labels which convention it used.

GPU cost is a model, not a measurement: a config-supplied $/hour per
backend label times hours, clearly labeled in report metadata.
"""

from __future__ import annotations

import hashlib
import json
import math
import platform
import statistics
import time
import uuid
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Callable, Optional, Sequence, Union

__all__ = [
    "Stage",
    "StageTiming",
    "LatencyStats",
    "DeltaRow",
    "DeltaReport",
    "InstrumentedRun",
    "instrument_run",
    "summarize",
    "percent_delta",
    "compare",
    "CampaignConfig",
    "CampaignResult",
    "run_campaign",
    "render_report_markdown",
]

SUB_2S_TARGET_S = 2.0


class Stage(str, Enum):
    STAGE1 = "stage1_formulation"
    RETRIEVAL = "retrieval"
    RANKING = "ranking"
    EVALUATOR = "evaluator"
    E2E = "e2e"


@dataclass(frozen=True)
class StageTiming:
    stage: Stage
    duration_s: float
    trace_id: str = ""

    def __post_init__(self) -> None:
        if self.duration_s < 0:
            raise ValueError("duration must be >= 0")


@dataclass(frozen=True)
class LatencyStats:
    stage: Stage
    n: int
    mean_s: float
    p50_s: float
    p95_s: float
    max_s: float


@dataclass(frozen=True)
class DeltaRow:
    name: str
    baseline: float
    candidate: float
    percent_change: Optional[float]  # None when baseline is 0 (undefined)
    direction: str  # "reduction-good" or "increase-good"


@dataclass
class DeltaReport:
    rows: list[DeltaRow]
    metadata: dict[str, Any] = field(default_factory=dict)


@dataclass
class InstrumentedRun:
    timings: list[StageTiming]
    result: Any = None
    partial: bool = False
    error: Optional[str] = None
    trace_id: str = ""


def instrument_run(
    stages: Sequence[tuple[Stage, Callable[[Any], Any]]],
    initial: Any = None,
    *,
    clock: Callable[[], float] = time.monotonic,
    trace_id: Optional[str] = None,
) -> InstrumentedRun:
    """Run the stage callables in order, threading each result into the
    next, timing every stage plus the whole run.

    A stage failure still emits timings for the completed stages (plus the
    elapsed end-to-end time) and flags the run partial.
    """
    trace = trace_id or uuid.uuid4().hex
    timings: list[StageTiming] = []
    value = initial
    error: Optional[str] = None
    start = clock()
    for stage, fn in stages:
        stage_start = clock()
        try:
            value = fn(value)
        except Exception as exc:  # noqa: BLE001 - reported, not swallowed
            error = f"{stage.value}: {exc}"
            value = None
            break
        timings.append(StageTiming(stage=stage, duration_s=clock() - stage_start,
                                   trace_id=trace))
    timings.append(StageTiming(stage=Stage.E2E, duration_s=clock() - start,
                               trace_id=trace))
    return InstrumentedRun(
        timings=timings,
        result=value,
        partial=error is not None,
        error=error,
        trace_id=trace,
    )


def nearest_rank(sorted_values: Sequence[float], p: float) -> float:
    """Nearest-rank percentile over an ascending sample, p in (0, 100]."""
    if not sorted_values:
        raise ValueError("empty sample")
    if not 0 < p <= 100:
        raise ValueError("percentile must be in (0, 100]")
    rank = math.ceil(p / 100.0 * len(sorted_values))
    return sorted_values[rank - 1]


def summarize(timings: Sequence[StageTiming]) -> dict[Stage, LatencyStats]:
    """Deterministic per-stage stats; raises on an empty input."""
    if not timings:
        raise ValueError("no timings to summarize")
    by_stage: dict[Stage, list[float]] = {}
    for timing in timings:
        by_stage.setdefault(timing.stage, []).append(timing.duration_s)
    stats = {}
    for stage, durations in by_stage.items():
        ordered = sorted(durations)
        stats[stage] = LatencyStats(
            stage=stage,
            n=len(ordered),
            mean_s=statistics.fmean(ordered),
            p50_s=nearest_rank(ordered, 50),
            p95_s=nearest_rank(ordered, 95),
            max_s=ordered[-1],
        )
    return stats


def percent_delta(baseline: float, candidate: float, *, reduction_good: bool) -> Optional[float]:
    """Signed percent change; None when the baseline is 0 (undefined)."""
    if baseline == 0:
        return None
    if reduction_good:
        return (baseline - candidate) / baseline * 100.0
    return (candidate - baseline) / baseline * 100.0


def compare(
    baseline: dict[str, float],
    candidate: dict[str, float],
    *,
    quality_metrics: frozenset[str] = frozenset(),
    labels: Optional[dict[str, str]] = None,
) -> DeltaReport:
    """Row-per-metric delta report.

    Metric names present in ``quality_metrics`` use increase-is-good
    arithmetic; everything else (latencies, costs) uses reduction-is-good.
    Values are kept unrounded; rounding happens only at render time.
    """
    if set(baseline) != set(candidate):
        raise ValueError("baseline and candidate report different metric sets")
    rows = []
    for name in baseline:
        reduction_good = name not in quality_metrics
        rows.append(DeltaRow(
            name=name,
            baseline=baseline[name],
            candidate=candidate[name],
            percent_change=percent_delta(baseline[name], candidate[name],
                                         reduction_good=reduction_good),
            direction="reduction-good" if reduction_good else "increase-good",
        ))
    config_blob = json.dumps({"baseline": baseline, "candidate": candidate,
                              "quality_metrics": sorted(quality_metrics)},
                             sort_keys=True)
    return DeltaReport(
        rows=rows,
        metadata={
            "labels": labels or {},
            "timestamp": time.time(),
            "config_hash": hashlib.sha256(config_blob.encode()).hexdigest()[:16],
            "hardware_note": platform.platform(),
        },
    )


def gpu_cost(hours: float, rate_per_hour: float) -> float:
    return hours * rate_per_hour


@dataclass
class CampaignConfig:
    n_requests: int
    concurrency: int = 1
    workload: list[str] = field(default_factory=lambda: ["popular tech accessories"])
    raw_out: Optional[Union[str, Path]] = None
    baseline: Optional[dict[str, float]] = None
    label: str = "candidate"


@dataclass
class CampaignResult:
    runs: list[InstrumentedRun]
    stats: dict[Stage, LatencyStats]
    sub_2s: bool
    report: dict[str, Any]
    raw_path: Optional[Path] = None


def run_campaign(
    config: CampaignConfig,
    run_request: Callable[[str, str], InstrumentedRun],
) -> CampaignResult:
    """Fire ``n_requests`` at the pipeline at the configured concurrency.

    ``run_request(query, trace_id)`` performs one instrumented pipeline
    invocation.  Raw per-request timings are persisted as JSONL when
    ``raw_out`` is set; accounting is per-request so concurrency can never
    lose or duplicate trace ids.
    """
    if config.n_requests <= 0:
        raise ValueError("n_requests must be positive")
    if config.concurrency <= 0:
        raise ValueError("concurrency must be positive")

    jobs = [
        (config.workload[i % len(config.workload)], uuid.uuid4().hex)
        for i in range(config.n_requests)
    ]
    if config.concurrency == 1:
        runs = [run_request(query, trace) for query, trace in jobs]
    else:
        with ThreadPoolExecutor(max_workers=config.concurrency) as pool:
            runs = list(pool.map(lambda job: run_request(*job), jobs))

    all_timings = [t for run in runs for t in run.timings]
    stats = summarize(all_timings)
    e2e = stats.get(Stage.E2E)
    sub_2s = e2e is not None and e2e.p95_s < SUB_2S_TARGET_S

    report: dict[str, Any] = {
        "run_id": uuid.uuid4().hex[:12],
        "label": config.label,
        "n_requests": config.n_requests,
        "concurrency": config.concurrency,
        "partial_runs": sum(1 for run in runs if run.partial),
        "stats": {
            stage.value: {
                "n": s.n, "mean_s": s.mean_s, "p50_s": s.p50_s,
                "p95_s": s.p95_s, "max_s": s.max_s,
            }
            for stage, s in sorted(stats.items(), key=lambda kv: kv[0].value)
        },
        "sub_2s_target_met": sub_2s,
    }
    if config.baseline is not None and e2e is not None:
        candidate_metrics = {f"{stage.value}_p50_s": s.p50_s for stage, s in stats.items()}
        shared = {k: v for k, v in config.baseline.items() if k in candidate_metrics}
        if shared:
            delta = compare(shared, {k: candidate_metrics[k] for k in shared},
                            labels={"candidate": config.label})
            report["deltas"] = [
                {"name": row.name, "baseline": row.baseline, "candidate": row.candidate,
                 "percent_change": row.percent_change, "direction": row.direction}
                for row in delta.rows
            ]

    raw_path = None
    if config.raw_out is not None:
        raw_path = Path(config.raw_out)
        with open(raw_path, "w", encoding="utf-8") as fh:
            for run in runs:
                fh.write(json.dumps({
                    "trace_id": run.trace_id,
                    "partial": run.partial,
                    "timings": [
                        {"stage": t.stage.value, "duration_s": t.duration_s}
                        for t in run.timings
                    ],
                }) + "\n")

    return CampaignResult(runs=runs, stats=stats, sub_2s=sub_2s, report=report,
                          raw_path=raw_path)


def render_report_markdown(report: DeltaReport) -> str:
    """Human-readable table; percent changes rounded to 1 decimal here and
    only here."""
    lines = [
        "| metric | baseline | candidate | change | convention |",
        "| --- | --- | --- | --- | --- |",
    ]
    for row in report.rows:
        change = "undefined" if row.percent_change is None else f"{row.percent_change:+.1f}%"
        lines.append(
            f"| {row.name} | {row.baseline:g} | {row.candidate:g} | {change} | {row.direction} |"
        )
    return "\n".join(lines)
