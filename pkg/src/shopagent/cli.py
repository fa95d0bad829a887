"""Command-line interface: serve, ingest, search, chat, profile build,
bench run, eval run and dataset exporters."""

from __future__ import annotations

import json
import sys
from collections import defaultdict
from pathlib import Path

import click

from .service.config import AppConfig, load_config


@click.group()
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
              default=None, help="JSON config file (env vars override).")
@click.pass_context
def main(ctx: click.Context, config_path: str | None) -> None:
    """Grounded commerce search and recommendation agent."""
    ctx.obj = load_config(config_path)


def _build_state(config: AppConfig, catalog: str | None = None):
    from .service.state import build_state
    return build_state(config, catalog_source=catalog)


@main.command()
@click.option("--host", default=None)
@click.option("--port", type=int, default=None)
@click.option("--catalog", type=click.Path(exists=True), default=None)
@click.pass_obj
def serve(config: AppConfig, host: str | None, port: int | None,
          catalog: str | None) -> None:
    """Run the HTTP API server."""
    import uvicorn

    from .service.app import create_app

    state = _build_state(config, catalog)
    click.echo(f"catalog: {len(state.catalog)} products "
               f"(generation {state.catalog.generation}); backend: {state.gateway.tag}")
    uvicorn.run(create_app(state), host=host or config.host, port=port or config.port)


@main.command()
@click.argument("catalog_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--allow-unknown-keys", is_flag=True, default=False)
def ingest(catalog_file: str, allow_unknown_keys: bool) -> None:
    """Validate a catalog JSONL file and report accept/reject counts."""
    from .catalog import ingest_catalog

    handle, report = ingest_catalog(catalog_file, allow_unknown_keys=allow_unknown_keys)
    click.echo(f"accepted: {report.accepted}")
    click.echo(f"rejected: {len(report.rejected)}")
    for line_no, reason in report.rejected[:20]:
        click.echo(f"  line {line_no}: {reason}")
    if len(report.rejected) > 20:
        click.echo(f"  ... and {len(report.rejected) - 20} more")
    sys.exit(1 if report.rejected else 0)


@main.command()
@click.argument("query")
@click.option("--catalog", type=click.Path(exists=True), default=None)
@click.option("--profile-id", default=None)
@click.option("--k", type=int, default=None)
@click.option("--trace-out", type=click.Path(), default=None,
              help="Append the stage-1 trace as JSONL (for dataset export).")
@click.pass_obj
def search(config: AppConfig, query: str, catalog: str | None,
           profile_id: str | None, k: int | None, trace_out: str | None) -> None:
    """One-shot search through the full pipeline."""
    from .catalog import lookup
    from .service.orchestrator import run_search_pipeline

    state = _build_state(config, catalog)
    profile = state.profiles.get(profile_id) if profile_id else None
    run = run_search_pipeline(state, query, profile, k=k)
    if run.partial:
        raise click.ClickException(f"pipeline failed: {run.error}")

    stage1, _, ranked = run.result
    click.echo(f"trace: {stage1.trace_id}")
    for hyp in stage1.hypotheticals:
        click.echo(f"  hypothetical: {hyp.category} ({hyp.specific_item or hyp.generic_item})")
    for item in ranked.items:
        product = lookup(state.catalog, item.product_id)
        click.echo(f"{item.rank:>2}. [{item.product_id}] {product.title} "
                   f"${product.price} (score {item.fused_score:.3f})")
    for timing in run.timings:
        click.echo(f"  {timing.stage.value}: {timing.duration_s * 1000:.1f} ms")

    if trace_out:
        with open(trace_out, "a", encoding="utf-8") as fh:
            fh.write(json.dumps({
                "trace_id": stage1.trace_id,
                "hyde_prompt": stage1.hyde_prompt,
                "hypotheticals": [h.to_dict() for h in stage1.hypotheticals],
            }) + "\n")


@main.command()
@click.option("--catalog", type=click.Path(exists=True), default=None)
@click.pass_obj
def chat(config: AppConfig, catalog: str | None) -> None:
    """Interactive REPL against the agent (stub backend by default)."""
    from .service.orchestrator import handle_turn

    state = _build_state(config, catalog)
    session = state.sessions.create()
    click.echo(f"session {session.session_id} - type 'quit' to exit")
    while True:
        try:
            message = click.prompt("you", prompt_suffix="> ")
        except (EOFError, click.Abort):
            break
        if message.strip().lower() in {"quit", "exit"}:
            break
        if not message.strip():
            continue
        turn = handle_turn(session, message, state)
        click.echo(f"agent [{turn.intent}]> {turn.text}")
        for item in turn.products[:5]:
            click.echo(f"   {item.rank}. {item.product_id} (score {item.fused_score:.3f})")


@main.group()
def profile() -> None:
    """User-profile tools."""


@profile.command("build")
@click.option("--events", "events_path", type=click.Path(exists=True), required=True)
@click.option("--out", "out_path", type=click.Path(), required=True)
@click.option("--summaries/--no-summaries", default=False,
              help="Fill llm_summary via the configured backend.")
@click.pass_obj
def profile_build(config: AppConfig, events_path: str, out_path: str,
                  summaries: bool) -> None:
    """Build profiles from a purchase-history JSONL file."""
    from .personalization import build_profile, load_events, save_profiles
    from .service.state import make_gateway

    gateway = make_gateway(config) if summaries else None
    by_user = defaultdict(list)
    for event in load_events(events_path):
        by_user[event.user_id].append(event)
    profiles = [build_profile(events, gateway=gateway, model=config.model_tag)
                for _, events in sorted(by_user.items())]
    save_profiles(profiles, out_path)
    click.echo(f"built {len(profiles)} profiles -> {out_path}")


@main.group()
def bench() -> None:
    """Latency benchmarking."""


@bench.command("run")
@click.option("--n", "n_requests", type=int, default=50)
@click.option("--concurrency", type=int, default=1)
@click.option("--catalog", type=click.Path(exists=True), default=None)
@click.option("--workload", type=click.Path(exists=True), default=None,
              help="Text file with one query per line.")
@click.option("--baseline", type=click.Path(exists=True), default=None,
              help="JSON file of baseline metrics for the delta report.")
@click.option("--report-out", type=click.Path(), default=None)
@click.option("--raw-out", type=click.Path(), default=None)
@click.pass_obj
def bench_run(config: AppConfig, n_requests: int, concurrency: int,
              catalog: str | None, workload: str | None, baseline: str | None,
              report_out: str | None, raw_out: str | None) -> None:
    """Fire a campaign at the in-process pipeline and render the report."""
    from .bench import CampaignConfig, run_campaign
    from .service.orchestrator import run_search_pipeline

    state = _build_state(config, catalog)
    queries = ["popular tech accessories", "running shoes under $100",
               "camera for skiing", "kitchen upgrade ideas"]
    if workload:
        queries = [line.strip() for line in Path(workload).read_text().splitlines()
                   if line.strip()]

    def run_request(query: str, trace_id: str):
        return run_search_pipeline(state, query, trace_id=trace_id)

    campaign = CampaignConfig(
        n_requests=n_requests,
        concurrency=concurrency,
        workload=queries,
        raw_out=raw_out,
        baseline=json.loads(Path(baseline).read_text()) if baseline else None,
        label=config.model_tag,
    )
    result = run_campaign(campaign, run_request)

    report_path = Path(report_out) if report_out else (
        Path(config.reports_dir) / f"{result.report['run_id']}.json")
    report_path.parent.mkdir(parents=True, exist_ok=True)
    report_path.write_text(json.dumps(result.report, indent=2), encoding="utf-8")

    for stage, stats in sorted(result.stats.items(), key=lambda kv: kv[0].value):
        click.echo(f"{stage.value:>20}: n={stats.n} mean={stats.mean_s * 1000:.1f}ms "
                   f"p50={stats.p50_s * 1000:.1f}ms p95={stats.p95_s * 1000:.1f}ms")
    click.echo(f"sub-2s target met: {result.sub_2s}")
    click.echo(f"report: {report_path}")


@main.group(name="eval")
def eval_group() -> None:
    """LLM-as-judge evaluation."""


@eval_group.command("run")
@click.option("--candidate", type=click.Path(exists=True), required=True,
              help="JSONL of {prompt, output} items to judge.")
@click.option("--baseline", type=click.Path(exists=True), default=None)
@click.option("--rubric", "rubric_name", default="hypothetical_quality")
@click.option("--out", "out_path", type=click.Path(), default="eval_report.json")
@click.pass_obj
def eval_run(config: AppConfig, candidate: str, baseline: str | None,
             rubric_name: str, out_path: str) -> None:
    """Judge candidate outputs (and optionally a baseline) with a rubric."""
    from .evaluator import builtin_rubric, run_quality_batch, write_eval_report
    from .service.state import make_gateway

    def load_items(path: str):
        return [(row["prompt"], row["output"])
                for row in map(json.loads, Path(path).read_text().splitlines())
                if row]

    gateway = make_gateway(config)
    rubric = builtin_rubric(rubric_name)
    candidate_result = run_quality_batch(load_items(candidate), rubric, gateway,
                                         model=config.model_tag)
    baseline_result = None
    if baseline:
        baseline_result = run_quality_batch(load_items(baseline), rubric, gateway,
                                            model=config.model_tag)
    report = write_eval_report(out_path, rubric=rubric, candidate=candidate_result,
                               baseline=baseline_result)
    click.echo(json.dumps(report["means"], indent=2))
    if "delta_percent" in report:
        click.echo(f"delta: {report['delta_percent']:+.1f}%")
    click.echo(f"report: {out_path}")


@main.group()
def dataset() -> None:
    """Fine-tuning dataset exporters."""


@dataset.command("export-sft")
@click.option("--traces", type=click.Path(exists=True), required=True,
              help="JSONL traces written by `search --trace-out`.")
@click.option("--out", "out_dir", type=click.Path(), required=True)
@click.option("--seed", type=int, default=0)
@click.option("--ratio", type=float, default=0.70, help="Train fraction.")
def dataset_export_sft(traces: str, out_dir: str, seed: int, ratio: float) -> None:
    from .dataset import export_sft, load_stage1_traces

    manifest = export_sft(load_stage1_traces(traces), out_dir, seed=seed,
                          ratio=(ratio, round(1 - ratio, 10)))
    click.echo(json.dumps(manifest, indent=2))


@dataset.command("export-dpo")
@click.option("--judgments", type=click.Path(exists=True), required=True,
              help="JSONL of {prompt, response_a, response_b, winner} rows.")
@click.option("--out", "out_dir", type=click.Path(), required=True)
@click.option("--seed", type=int, default=0)
@click.option("--ratio", type=float, default=0.70, help="Train fraction.")
def dataset_export_dpo(judgments: str, out_dir: str, seed: int, ratio: float) -> None:
    from .dataset import export_dpo
    from .evaluator import PairwiseJudgment

    rows = []
    for line in Path(judgments).read_text().splitlines():
        if not line.strip():
            continue
        obj = json.loads(line)
        rows.append(PairwiseJudgment(
            prompt=obj["prompt"], response_a=obj["response_a"],
            response_b=obj["response_b"], winner=obj["winner"],
            rationale=obj.get("rationale", ""),
            judgment_id=obj.get("judgment_id", ""),
        ))
    manifest = export_dpo(rows, out_dir, seed=seed, ratio=(ratio, round(1 - ratio, 10)))
    click.echo(json.dumps(manifest, indent=2))


if __name__ == "__main__":
    main()
