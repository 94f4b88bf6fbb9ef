"""Decision-support report built from store contents.

Every number in the bundle is recomputed from raw store rows at build time;
nothing is cached between invocations, so re-running a report over the same
store is byte-identical. Rounding to two decimals happens here, at the
output boundary.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

from . import stats
from .errors import DegenerateSampleError, EmptyStoreError, UnknownRuleIdError
from .repository import RuntimeSummary, Store
from .rules import score_rules
from .scoring import Tool

__all__ = [
    "ReportBundle",
    "build_report",
    "render_text",
    "render_json",
    "bundle_to_dict",
    "write_csv_tables",
    "write_plot_data",
]

SCORE_METRICS = ("lynis", "openscap", "aide", "custom", "standard_uca", "extended_uca")


@dataclass
class SignificanceRow:
    tool: str
    mean_diff: float
    t: float
    df: float
    p_two_tailed: float
    d: float


@dataclass
class ReportBundle:
    nodes: list[str]
    # metric -> node -> mean (None when no data)
    score_table: dict[str, dict[str, float | None]]
    rule_table: list[dict]
    runtime: RuntimeSummary
    node_low: str | None
    node_high: str | None
    significance: list[SignificanceRow] = field(default_factory=list)


def _mean(values: list[float]) -> float | None:
    if not values:
        return None
    return stats.describe(values).mean


def build_report(store: Store) -> ReportBundle:
    """Recompute the four report tables from raw store rows."""
    if store.count_runs() == 0:
        raise EmptyStoreError("no audit runs recorded; ingest or generate a corpus first")

    aggregates = store.aggregates()
    per_node_standard: dict[str, list[float]] = {}
    per_node_extended: dict[str, list[float]] = {}
    per_node_custom: dict[str, list[float]] = {}
    for agg in aggregates:
        per_node_standard.setdefault(agg.node, []).append(agg.standard_uca)
        if agg.extended_uca is not None:
            per_node_extended.setdefault(agg.node, []).append(agg.extended_uca)
        if agg.custom is not None:
            per_node_custom.setdefault(agg.node, []).append(agg.custom)

    # Column order: weakest to strongest by mean standard score, so the
    # significance comparison (first vs last column) reads naturally.
    nodes = sorted(
        store.nodes(),
        key=lambda n: (
            _mean(per_node_standard.get(n, [])) is None,
            _mean(per_node_standard.get(n, [])) or 0.0,
            n,
        ),
    )

    score_table: dict[str, dict[str, float | None]] = {m: {} for m in SCORE_METRICS}
    for node in nodes:
        for tool in Tool:
            score_table[tool.value][node] = _mean(store.tool_scores(tool.value, node))
        score_table["custom"][node] = _mean(per_node_custom.get(node, []))
        score_table["standard_uca"][node] = _mean(per_node_standard.get(node, []))
        score_table["extended_uca"][node] = _mean(per_node_extended.get(node, []))

    ruleset = store.stored_rules()
    rule_table = []
    for node in nodes:
        results = store.rule_results(node)
        if not results:
            continue
        last_iteration = max(r.iteration for r in results)
        latest = [r for r in results if r.iteration == last_iteration]
        passed = sum(1 for r in latest if r.passed)
        score_pct = None
        if ruleset is not None:
            try:
                score_pct = score_rules(latest, ruleset)
            except UnknownRuleIdError:
                # results recorded against a rule set no longer stored
                score_pct = None
        rule_table.append({
            "node": node,
            "passed": passed,
            "failed": len(latest) - passed,
            "score_pct": score_pct,
        })

    node_low = node_high = None
    significance: list[SignificanceRow] = []
    ranked = [n for n in nodes if per_node_standard.get(n)]
    if len(ranked) >= 2:
        node_low, node_high = ranked[0], ranked[-1]
        for tool in Tool:
            low_scores = store.tool_scores(tool.value, node_low)
            high_scores = store.tool_scores(tool.value, node_high)
            if len(low_scores) < 2 or len(high_scores) < 2:
                continue
            try:
                result = stats.pooled_t_test(low_scores, high_scores)
            except DegenerateSampleError:
                continue
            significance.append(SignificanceRow(
                tool=tool.value,
                mean_diff=result.mean_diff,
                t=result.t,
                df=result.df,
                p_two_tailed=result.p_two_tailed,
                d=result.d,
            ))

    return ReportBundle(
        nodes=nodes,
        score_table=score_table,
        rule_table=rule_table,
        runtime=store.summarize_runtime(),
        node_low=node_low,
        node_high=node_high,
        significance=significance,
    )


def _fmt(value: float | None, width: int = 10) -> str:
    if value is None:
        return "-".rjust(width)
    return f"{value:.2f}".rjust(width)


def _fmt_p(p: float) -> str:
    return "<0.001" if p < 0.001 else f"{p:.3f}"


def render_text(bundle: ReportBundle) -> str:
    lines: list[str] = []
    lines.append("Average security scores by node")
    header = "  " + "metric".ljust(14) + "".join(n.rjust(12) for n in bundle.nodes)
    lines.append(header)
    for metric in SCORE_METRICS:
        row = "  " + metric.ljust(14)
        row += "".join(_fmt(bundle.score_table[metric].get(n), 12) for n in bundle.nodes)
        lines.append(row)
    lines.append("")

    lines.append("Custom rule results by node")
    lines.append("  " + "node".ljust(14) + "passed".rjust(8) + "failed".rjust(8) + "score%".rjust(10))
    if bundle.rule_table:
        for row in bundle.rule_table:
            lines.append(
                "  " + str(row["node"]).ljust(14)
                + str(row["passed"]).rjust(8) + str(row["failed"]).rjust(8)
                + _fmt(row["score_pct"])
            )
    else:
        lines.append("  (no rule results recorded)")
    lines.append("")

    lines.append("Tool runtime overhead")
    lines.append("  " + "tool".ljust(14) + "avg_s".rjust(10) + "total_s".rjust(12) + "runs".rjust(6))
    for tool, entry in bundle.runtime.per_tool.items():
        lines.append(
            "  " + tool.ljust(14) + _fmt(entry.average)
            + _fmt(entry.total, 12) + str(entry.count).rjust(6)
        )
    lines.append("  " + "total".ljust(14) + "".rjust(10) + _fmt(bundle.runtime.grand_total, 12))
    lines.append("")

    if bundle.significance:
        lines.append(f"Statistical significance ({bundle.node_low} vs {bundle.node_high})")
        lines.append(
            "  " + "tool".ljust(14) + "diff".rjust(8) + "t".rjust(8)
            + "df".rjust(6) + "p".rjust(8) + "d".rjust(8)
        )
        for row in bundle.significance:
            lines.append(
                "  " + row.tool.ljust(14)
                + f"{row.mean_diff:+.2f}".rjust(8)
                + f"{row.t:.2f}".rjust(8)
                + f"{row.df:.0f}".rjust(6)
                + _fmt_p(row.p_two_tailed).rjust(8)
                + f"{row.d:.2f}".rjust(8)
            )
    else:
        lines.append("Statistical significance: needs two nodes with repeated runs")
    lines.append("")
    return "\n".join(lines)


def _round(value: float | None, digits: int = 2) -> float | None:
    return None if value is None else round(value, digits)


def bundle_to_dict(bundle: ReportBundle) -> dict:
    return {
        "nodes": list(bundle.nodes),
        "scores": {
            metric: {node: _round(v) for node, v in per_node.items()}
            for metric, per_node in bundle.score_table.items()
        },
        "custom_rules": [
            {
                "node": row["node"],
                "passed": row["passed"],
                "failed": row["failed"],
                "score_pct": _round(row["score_pct"]),
            }
            for row in bundle.rule_table
        ],
        "runtime": {
            "per_tool": {
                tool: {
                    "average_seconds": _round(entry.average),
                    "total_seconds": _round(entry.total),
                    "runs": entry.count,
                }
                for tool, entry in bundle.runtime.per_tool.items()
            },
            "grand_total_seconds": _round(bundle.runtime.grand_total),
        },
        "significance": {
            "node_low": bundle.node_low,
            "node_high": bundle.node_high,
            "rows": [
                {
                    "tool": row.tool,
                    "mean_diff": _round(row.mean_diff),
                    "t": _round(row.t, 4),
                    "df": row.df,
                    "p_two_tailed": _round(row.p_two_tailed, 6),
                    "cohens_d": _round(row.d, 4),
                }
                for row in bundle.significance
            ],
        },
    }


def render_json(bundle: ReportBundle) -> str:
    return json.dumps(bundle_to_dict(bundle), indent=2) + "\n"


def _write_csv(path: Path, header: list[str], rows: list[list]) -> Path:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    return path


def write_csv_tables(bundle: ReportBundle, out_dir: Path) -> list[Path]:
    """The four report tables as CSV files."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    written.append(_write_csv(
        out_dir / "table_scores.csv",
        ["metric", *bundle.nodes],
        [
            [metric] + [
                "" if bundle.score_table[metric].get(n) is None
                else f"{bundle.score_table[metric][n]:.2f}"
                for n in bundle.nodes
            ]
            for metric in SCORE_METRICS
        ],
    ))
    written.append(_write_csv(
        out_dir / "table_custom_rules.csv",
        ["node", "passed", "failed", "score_pct"],
        [
            [r["node"], r["passed"], r["failed"],
             "" if r["score_pct"] is None else f"{r['score_pct']:.2f}"]
            for r in bundle.rule_table
        ],
    ))
    written.append(_write_csv(
        out_dir / "table_runtime.csv",
        ["tool", "avg_runtime_seconds", "total_runtime_seconds", "runs"],
        [
            [tool, f"{entry.average:.2f}", f"{entry.total:.2f}", entry.count]
            for tool, entry in bundle.runtime.per_tool.items()
        ] + [["total", "", f"{bundle.runtime.grand_total:.2f}", ""]],
    ))
    written.append(_write_csv(
        out_dir / "table_significance.csv",
        ["tool", "node_low", "node_high", "mean_diff", "t", "df", "p_two_tailed", "cohens_d"],
        [
            [row.tool, bundle.node_low, bundle.node_high, f"{row.mean_diff:.2f}",
             f"{row.t:.4f}", f"{row.df:g}", f"{row.p_two_tailed:.6f}", f"{row.d:.4f}"]
            for row in bundle.significance
        ],
    ))
    return written


def write_plot_data(store: Store, bundle: ReportBundle, out_dir: Path) -> list[Path]:
    """Plot-data CSVs, one per report figure."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    written.append(_write_csv(
        out_dir / "plot_scores_by_node.csv",
        ["node", "lynis", "openscap", "aide"],
        [
            [n] + [
                "" if bundle.score_table[t.value].get(n) is None
                else f"{bundle.score_table[t.value][n]:.2f}"
                for t in Tool
            ]
            for n in bundle.nodes
        ],
    ))
    progression_rows = []
    for run in store.audit_runs():
        progression_rows.append([
            run.node, run.tool.value, run.iteration, f"{run.normalized_score:.2f}",
        ])
    written.append(_write_csv(
        out_dir / "plot_score_progression.csv",
        ["node", "tool", "iteration", "normalized_score"],
        progression_rows,
    ))
    written.append(_write_csv(
        out_dir / "plot_uca_comparison.csv",
        ["node", "standard_uca", "extended_uca"],
        [
            [
                n,
                "" if bundle.score_table["standard_uca"].get(n) is None
                else f"{bundle.score_table['standard_uca'][n]:.2f}",
                "" if bundle.score_table["extended_uca"].get(n) is None
                else f"{bundle.score_table['extended_uca'][n]:.2f}",
            ]
            for n in bundle.nodes
        ],
    ))
    written.append(_write_csv(
        out_dir / "plot_custom_rules.csv",
        ["node", "passed", "failed", "score_pct"],
        [
            [r["node"], r["passed"], r["failed"],
             "" if r["score_pct"] is None else f"{r['score_pct']:.2f}"]
            for r in bundle.rule_table
        ],
    ))
    written.append(_write_csv(
        out_dir / "plot_runtime.csv",
        ["tool", "avg_runtime_seconds", "total_runtime_seconds", "runs"],
        [
            [tool, f"{entry.average:.2f}", f"{entry.total:.2f}", entry.count]
            for tool, entry in bundle.runtime.per_tool.items()
        ],
    ))
    return written
