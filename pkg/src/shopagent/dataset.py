"""Fine-tuning dataset exporters: SFT prompt-response pairs and DPO
preference pairs, with deterministic seeded splits.

Split sizing is exact-rational floor arithmetic (``floor(n * ratio)``
train rows, remainder to validation), so 10,000 rows at 70:30 always give
7,000/3,000.  Exports are pure functions of (input, seed, ratio):
re-running with the same seed is byte-identical.

DPO wire format is ``{"prompt", "chosen", "rejected"}``; the preference
ranks (0 for chosen, 1 for rejected) are encoded by field role.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence, TypeVar, Union

from .evaluator import PairwiseJudgment
from .query_pipeline import Stage1Output

__all__ = [
    "SftExample",
    "PreferencePair",
    "split_dataset",
    "export_sft",
    "export_dpo",
    "load_stage1_traces",
]

SCHEMA_VERSION = 1
DEFAULT_RATIO = (0.70, 0.30)

T = TypeVar("T")


@dataclass(frozen=True)
class SftExample:
    prompt: str
    response: str
    trace_id: Optional[str] = None

    def __post_init__(self) -> None:
        if not self.prompt or not self.response:
            raise ValueError("prompt and response must be non-empty")


@dataclass(frozen=True)
class PreferencePair:
    prompt: str
    chosen: str    # rank 0
    rejected: str  # rank 1
    source_judgment_id: str = ""

    def __post_init__(self) -> None:
        if self.chosen == self.rejected:
            raise ValueError("chosen and rejected must differ")


def split_dataset(
    rows: Sequence[T],
    ratio: tuple[float, float] = DEFAULT_RATIO,
    seed: int = 0,
) -> tuple[list[T], list[T]]:
    """Seeded Fisher-Yates shuffle (``random.Random(seed).shuffle``), then
    a floor-rule cut: train gets floor(n * train_ratio), validation the
    rest. The two halves partition the input exactly."""
    train_ratio, val_ratio = ratio
    if abs(train_ratio + val_ratio - 1.0) > 1e-9:
        raise ValueError("split ratio must sum to 1")
    shuffled = list(rows)
    random.Random(seed).shuffle(shuffled)
    # str() round-trips the literal (0.7 -> Fraction(7, 10)), keeping the
    # floor exact where binary floats would not (0.7 * 10000 < 7000).
    n_train = int(Fraction(str(train_ratio)) * len(shuffled))
    return shuffled[:n_train], shuffled[n_train:]


def _write_jsonl(path: Path, rows: list[dict]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, sort_keys=True) + "\n")


def _write_split(
    out_dir: Union[str, Path],
    rows: list[dict],
    *,
    seed: int,
    ratio: tuple[float, float],
    extra_counts: dict[str, int],
) -> dict:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    train, val = split_dataset(rows, ratio=ratio, seed=seed)
    _write_jsonl(out / "train.jsonl", train)
    _write_jsonl(out / "val.jsonl", val)
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "seed": seed,
        "ratio": {"train": ratio[0], "val": ratio[1]},
        "counts": {"total": len(rows), "train": len(train), "val": len(val),
                   **extra_counts},
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True),
                                       encoding="utf-8")
    return manifest


def export_sft(
    traces: Sequence[Stage1Output],
    out_dir: Union[str, Path],
    seed: int = 0,
    ratio: tuple[float, float] = DEFAULT_RATIO,
) -> dict:
    """Each successful trace becomes one prompt-response row: the rendered
    generation prompt and the hypotheticals serialized as JSON.  Malformed
    traces are skipped and counted in the manifest."""
    rows = []
    skipped = 0
    for trace in traces:
        if not trace.hyde_prompt or not trace.hypotheticals:
            skipped += 1
            continue
        rows.append({
            "prompt": trace.hyde_prompt,
            "response": json.dumps([h.to_dict() for h in trace.hypotheticals]),
            "trace_id": trace.trace_id,
        })
    return _write_split(out_dir, rows, seed=seed, ratio=ratio,
                        extra_counts={"skipped_malformed": skipped})


def export_dpo(
    judgments: Sequence[PairwiseJudgment],
    out_dir: Union[str, Path],
    seed: int = 0,
    ratio: tuple[float, float] = DEFAULT_RATIO,
) -> dict:
    """Winner becomes the chosen response, loser the rejected one; ties
    are skipped and counted."""
    rows = []
    skipped_ties = 0
    for judgment in judgments:
        if judgment.winner == "tie":
            skipped_ties += 1
            continue
        chosen, rejected = ((judgment.response_a, judgment.response_b)
                            if judgment.winner == "A"
                            else (judgment.response_b, judgment.response_a))
        rows.append({"prompt": judgment.prompt, "chosen": chosen, "rejected": rejected})
    return _write_split(out_dir, rows, seed=seed, ratio=ratio,
                        extra_counts={"skipped_ties": skipped_ties})


def load_stage1_traces(path: Union[str, Path]) -> list[Stage1Output]:
    """Read trace JSONL (as written by the search CLI's --trace-out) back
    into minimal Stage1Output objects for export."""
    from .bench import Stage, StageTiming
    from .query_pipeline import HypotheticalProduct, StructuredQuery

    traces = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        obj = json.loads(line)
        traces.append(Stage1Output(
            structured_query=StructuredQuery(),
            hypotheticals=[HypotheticalProduct(**h) for h in obj.get("hypotheticals", [])],
            timing=StageTiming(stage=Stage.STAGE1, duration_s=0.0),
            trace_id=obj.get("trace_id", ""),
            hyde_prompt=obj.get("hyde_prompt", ""),
        ))
    return traces
