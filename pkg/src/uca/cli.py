"""Command-line interface.

Commands: ingest, score, rules, stats, report, export, fixtures.
Exit codes: 0 success, 1 on IO/store/domain failures, 2 on parse failures.
Weights come from defaults, overridden by --config (JSON), overridden by
the individual weight flags.
"""

from __future__ import annotations

import dataclasses
import json
import sys
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import click

from . import fixtures as fixtures_mod
from . import report as report_mod
from . import scoring, stats
from .errors import (
    InvalidWeightsError,
    MissingRunsError,
    ParseError,
    UcaError,
    UnknownNodeError,
    UnknownToolError,
)
from .repository import AuditRun, Phase, Store, open_store
from .rules import default_rules, evaluate_rules, load_rules, load_snapshot, score_rules
from .scoring import AggregateScore, Tool, WeightConfig

TOOL_CHOICES = [tool.value for tool in Tool]


@dataclass
class AppContext:
    store_path: Path
    weights: WeightConfig
    fmt: str

    def open(self) -> Store:
        return open_store(self.store_path)


def _load_weights(config_path: Path | None, overrides: dict[str, float]) -> WeightConfig:
    mapping: dict[str, float] = {}
    if config_path is not None:
        try:
            data = json.loads(Path(config_path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise click.ClickException(f"cannot read config {config_path}: {exc}")
        if not isinstance(data, dict):
            raise click.ClickException(f"config {config_path} must be a JSON object")
        mapping.update(data)
    mapping.update(overrides)
    try:
        return WeightConfig.from_mapping(mapping)
    except InvalidWeightsError as exc:
        raise click.ClickException(str(exc))


def _now_iso() -> str:
    return datetime.now(timezone.utc).replace(microsecond=0).isoformat()


def _emit(ctx: AppContext, payload: dict, text: str) -> None:
    if ctx.fmt == "json":
        click.echo(json.dumps(payload, indent=2))
    else:
        click.echo(text)


@click.group()
@click.option("--store", "store_path", type=click.Path(path_type=Path),
              default=Path("uca.db"), show_default=True,
              help="Path to the SQLite store.")
@click.option("--config", "config_path", type=click.Path(path_type=Path, exists=True),
              default=None, help="JSON file overriding score weights.")
@click.option("--format", "fmt", type=click.Choice(["text", "json", "csv-dir"]),
              default="text", show_default=True, help="Output format.")
@click.option("--w-lynis", type=float, default=None, help="Override Lynis weight.")
@click.option("--w-openscap", type=float, default=None, help="Override OpenSCAP weight.")
@click.option("--w-aide", type=float, default=None, help="Override AIDE weight.")
@click.option("--w-custom", type=float, default=None, help="Override custom blend weight.")
@click.option("--aide-penalty", type=float, default=None,
              help="Override integrity points lost per changed entry.")
@click.pass_context
def main(ctx, store_path, config_path, fmt, w_lynis, w_openscap, w_aide, w_custom,
         aide_penalty):
    """Aggregate Linux security-audit outputs into unified compliance scores."""
    overrides = {
        key: value
        for key, value in {
            "w_lynis": w_lynis,
            "w_openscap": w_openscap,
            "w_aide": w_aide,
            "w_custom": w_custom,
            "aide_penalty_per_change": aide_penalty,
        }.items()
        if value is not None
    }
    ctx.obj = AppContext(
        store_path=store_path,
        weights=_load_weights(config_path, overrides),
        fmt=fmt,
    )


@main.command()
@click.argument("node")
@click.argument("tool", type=click.Choice(TOOL_CHOICES))
@click.argument("input_path", type=click.Path(path_type=Path))
@click.option("--iteration", type=int, default=0, show_default=True)
@click.option("--phase", type=click.Choice([p.value for p in Phase]),
              default=Phase.ITERATION.value, show_default=True)
@click.option("--runtime", "runtime_seconds", type=float, default=0.0,
              show_default=True, help="Tool runtime in seconds.")
@click.option("--timestamp", default=None, help="ISO-8601 timestamp; default now.")
@click.pass_obj
def ingest(app: AppContext, node, tool, input_path, iteration, phase,
           runtime_seconds, timestamp):
    """Parse one tool output file and record the run."""
    tool = Tool(tool)
    try:
        document = Path(input_path).read_text()
    except OSError as exc:
        click.echo(f"error: cannot read {input_path}: {exc}", err=True)
        sys.exit(1)
    try:
        raw, normalized = scoring.score_tool_document(
            tool, document, app.weights.aide_penalty_per_change
        )
    except ParseError as exc:
        click.echo(f"error: {input_path}: {exc}", err=True)
        sys.exit(2)
    run = AuditRun(
        node=node,
        tool=tool,
        timestamp=timestamp or _now_iso(),
        iteration=iteration,
        phase=Phase(phase),
        raw_score=raw,
        normalized_score=normalized,
        runtime_seconds=runtime_seconds,
    )
    try:
        with app.open() as store:
            run_id = store.record_audit_run(run)
    except UcaError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    _emit(app, {"id": run_id, "node": node, "tool": tool.value,
                "raw_score": round(raw, 2), "normalized_score": round(normalized, 2)},
          f"recorded run {run_id}: {node}/{tool.value} "
          f"raw={raw:.2f} normalized={normalized:.2f}")


@main.command()
@click.argument("node")
@click.option("--iteration", type=int, required=True)
@click.option("--rules", "rules_path", type=click.Path(path_type=Path, exists=True),
              default=None, help="Rules JSON; default built-in set when --snapshot given.")
@click.option("--snapshot", "snapshot_path", type=click.Path(path_type=Path, exists=True),
              default=None, help="Snapshot directory for custom-rule evaluation.")
@click.pass_obj
def score(app: AppContext, node, iteration, rules_path, snapshot_path):
    """Combine the three recorded tool runs into unified scores."""
    if rules_path is not None and snapshot_path is None:
        raise click.UsageError("--rules needs --snapshot to evaluate against")
    try:
        with app.open() as store:
            runs = store.runs_for(node, iteration)
            missing = [t.value for t in Tool if t.value not in runs]
            if missing:
                raise MissingRunsError(
                    f"{node} iteration {iteration}: missing runs for {', '.join(missing)}"
                )
            components = {t: runs[t.value].normalized_score for t in Tool}
            standard = scoring.compute_standard_uca(
                components[Tool.LYNIS], components[Tool.OPENSCAP],
                components[Tool.AIDE], app.weights,
            )
            custom = extended = None
            if snapshot_path is not None:
                ruleset = (load_rules(Path(rules_path).read_text())
                           if rules_path else default_rules())
                snapshot = load_snapshot(snapshot_path)
                results = evaluate_rules(ruleset, snapshot, iteration=iteration)
                # rule results belong to the scored node even if the snapshot
                # manifest names it differently
                results = [dataclasses.replace(r, node=node) for r in results]
                store.record_rules(ruleset)
                store.record_rule_results(results)
                custom = score_rules(results, ruleset)
                extended = scoring.compute_extended_uca(standard, custom, app.weights)
            agg = AggregateScore(
                node=node, iteration=iteration,
                lynis=components[Tool.LYNIS], openscap=components[Tool.OPENSCAP],
                aide=components[Tool.AIDE], standard_uca=standard,
                custom=custom, extended_uca=extended, timestamp=_now_iso(),
            )
            agg_id = store.record_aggregate(agg)
    except UcaError as exc:
        raise click.ClickException(str(exc))
    payload = {
        "id": agg_id, "node": node, "iteration": iteration,
        "lynis": round(agg.lynis, 2), "openscap": round(agg.openscap, 2),
        "aide": round(agg.aide, 2),
        "standard_uca": round(standard, 2),
        "custom": None if custom is None else round(custom, 2),
        "extended_uca": None if extended is None else round(extended, 2),
    }
    text = (f"{node} iteration {iteration}: standard_uca={standard:.2f}"
            + (f" custom={custom:.2f} extended_uca={extended:.2f}"
               if custom is not None else ""))
    _emit(app, payload, text)


@main.command("rules")
@click.option("--rules", "rules_path", type=click.Path(path_type=Path, exists=True),
              default=None, help="Rules JSON document; default built-in set.")
@click.option("--snapshot", "snapshot_path", type=click.Path(path_type=Path, exists=True),
              default=None, help="Snapshot directory to evaluate against.")
@click.option("--node", default=None, help="Node name; default from snapshot manifest.")
@click.option("--iteration", type=int, default=0, show_default=True)
@click.option("--record", is_flag=True, help="Record results into the store.")
@click.pass_obj
def rules_cmd(app: AppContext, rules_path, snapshot_path, node, iteration, record):
    """Show the rule set, or evaluate it against a snapshot."""
    try:
        ruleset = (load_rules(Path(rules_path).read_text())
                   if rules_path else default_rules())
        if snapshot_path is None:
            rows = [
                {"id": r.id, "name": r.name, "check_type": r.check_type.value,
                 "weight": r.weight}
                for r in ruleset.rules
            ]
            text = "\n".join(
                f"{r.id:<26} weight={r.weight:<3} {r.check_type.value:<17} {r.name}"
                for r in ruleset.rules
            ) + f"\ntotal weight: {ruleset.total_weight}"
            _emit(app, {"rules": rows, "total_weight": ruleset.total_weight}, text)
            return
        snapshot = load_snapshot(snapshot_path)
        if node is not None:
            snapshot.node = node
        results = evaluate_rules(ruleset, snapshot, iteration=iteration)
        pct = score_rules(results, ruleset)
        if record:
            with app.open() as store:
                store.record_rules(ruleset)
                store.record_rule_results(results)
    except UcaError as exc:
        raise click.ClickException(str(exc))
    passed = sum(1 for r in results if r.passed)
    payload = {
        "node": snapshot.node,
        "iteration": iteration,
        "passed": passed,
        "failed": len(results) - passed,
        "score_pct": round(pct, 2),
        "results": [
            {"rule_id": r.rule_id, "passed": r.passed, "evidence": r.evidence}
            for r in results
        ],
    }
    lines = [
        f"{'PASS' if r.passed else 'FAIL'}  {r.rule_id:<26} {r.evidence}"
        for r in results
    ]
    lines.append(f"{snapshot.node}: {passed} passed, {len(results) - passed} failed,"
                 f" score {pct:.2f}%")
    _emit(app, payload, "\n".join(lines))


@main.command("stats")
@click.argument("tool", type=click.Choice(TOOL_CHOICES))
@click.argument("node_a")
@click.argument("node_b")
@click.option("--welch", is_flag=True, help="Welch (unequal variance) variant.")
@click.pass_obj
def stats_cmd(app: AppContext, tool, node_a, node_b, welch):
    """Two-sample t-test of a tool's scores between two nodes (b - a)."""
    try:
        with app.open() as store:
            known_nodes = store.nodes()
            for name in (node_a, node_b):
                if name not in known_nodes:
                    raise UnknownNodeError(f"no runs recorded for node {name!r}")
            if tool not in store.tools():
                raise UnknownToolError(f"no runs recorded for tool {tool!r}")
            group_a = store.tool_scores(tool, node_a)
            group_b = store.tool_scores(tool, node_b)
        result = stats.pooled_t_test(group_a, group_b, welch=welch)
    except UcaError as exc:
        raise click.ClickException(str(exc))
    payload = {
        "tool": tool, "node_a": node_a, "node_b": node_b,
        "n_a": len(group_a), "n_b": len(group_b),
        "mean_diff": round(result.mean_diff, 4),
        "t": round(result.t, 4), "df": result.df,
        "p_two_tailed": round(result.p_two_tailed, 6),
        "cohens_d": round(result.d, 4),
        "welch": welch,
    }
    p_text = "<0.001" if result.p_two_tailed < 0.001 else f"{result.p_two_tailed:.3f}"
    text = (f"{tool}: {node_b} - {node_a}  diff={result.mean_diff:+.2f}"
            f"  t={result.t:.2f}  df={result.df:g}  p={p_text}  d={result.d:.2f}")
    _emit(app, payload, text)


@main.command()
@click.option("--out-dir", type=click.Path(path_type=Path), default=None,
              help="Directory for plot-data CSVs (and tables with csv-dir format).")
@click.pass_obj
def report(app: AppContext, out_dir):
    """Emit the four summary tables plus plot-data CSVs."""
    if app.fmt == "csv-dir" and out_dir is None:
        raise click.UsageError("--out-dir is required with --format csv-dir")
    try:
        with app.open() as store:
            bundle = report_mod.build_report(store)
            written: list[Path] = []
            if out_dir is not None:
                written += report_mod.write_plot_data(store, bundle, out_dir)
                if app.fmt == "csv-dir":
                    written += report_mod.write_csv_tables(bundle, out_dir)
    except UcaError as exc:
        raise click.ClickException(str(exc))
    if app.fmt == "json":
        click.echo(json.dumps(report_mod.bundle_to_dict(bundle), indent=2))
    elif app.fmt == "csv-dir":
        for path in sorted(written):
            click.echo(str(path))
    else:
        click.echo(report_mod.render_text(bundle))
        for path in sorted(written):
            click.echo(f"wrote {path}")


@main.command()
@click.option("--out-dir", type=click.Path(path_type=Path), required=True)
@click.pass_obj
def export(app: AppContext, out_dir):
    """Write audit_runs.csv and aggregate_scores.csv."""
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        with app.open() as store:
            audit_path = out_dir / "audit_runs.csv"
            agg_path = out_dir / "aggregate_scores.csv"
            audit_rows = store.export_audit_csv(audit_path)
            agg_rows = store.export_aggregate_csv(agg_path)
    except OSError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    except UcaError as exc:
        raise click.ClickException(str(exc))
    _emit(app, {"files": [
        {"path": str(audit_path), "rows": audit_rows},
        {"path": str(agg_path), "rows": agg_rows},
    ]}, f"{audit_path} ({audit_rows} rows)\n{agg_path} ({agg_rows} rows)")


@main.command()
@click.option("--out-dir", type=click.Path(path_type=Path), required=True)
@click.option("--seed", type=int, default=None, help="Override the spec seed.")
@click.option("--spec", "spec_path", type=click.Path(path_type=Path, exists=True),
              default=None, help="Corpus spec JSON; default reproduces the 108-run corpus.")
@click.pass_obj
def fixtures(app: AppContext, out_dir, seed, spec_path):
    """Generate a synthetic audit corpus and record it into the store."""
    try:
        if spec_path is not None:
            spec = fixtures_mod.CorpusSpec.from_dict(
                json.loads(Path(spec_path).read_text())
            )
        else:
            spec = fixtures_mod.CorpusSpec()
        if seed is not None:
            spec.seed = seed
        result = fixtures_mod.make_corpus(
            spec, out_dir, store_path=app.store_path, weights=app.weights
        )
    except json.JSONDecodeError as exc:
        raise click.ClickException(f"invalid spec JSON: {exc}")
    except (KeyError, TypeError, ValueError) as exc:
        raise click.ClickException(f"invalid spec document: {exc!r}")
    except OSError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    except UcaError as exc:
        raise click.ClickException(str(exc))
    _emit(app, {
        "corpus_dir": str(result.corpus_dir),
        "store": str(result.store_path),
        "runs": result.runs_recorded,
        "aggregates": result.aggregates_recorded,
        "rule_results": result.rule_results_recorded,
        "seed": spec.seed,
    }, (f"corpus at {result.corpus_dir} (seed {spec.seed}): "
        f"{result.runs_recorded} runs, {result.aggregates_recorded} aggregates, "
        f"{result.rule_results_recorded} rule results -> {result.store_path}"))


if __name__ == "__main__":
    main()
