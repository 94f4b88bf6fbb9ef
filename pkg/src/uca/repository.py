"""Single-file SQLite repository for audit runs, scores and rule outcomes.

Schema (four tables, created on open):
  audit_runs           one row per tool execution
  aggregate_scores     one row per node and iteration with the unified scores
  custom_rules         rule definitions (params stored as JSON)
  custom_rule_results  one row per rule execution per node and iteration

Concurrency contract: concurrent reads are fine; writes are serialized by a
lock on the store handle, and the handle may be passed between threads.
Timestamps are stored as ISO-8601 UTC text.
"""

from __future__ import annotations

import csv
import json
import sqlite3
import threading
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from .errors import (
    ConstraintViolationError,
    CorruptStoreError,
    EmptyStoreError,
    StoreIOError,
)
from .rules import CheckType, Rule, RuleResult, RuleSet
from .scoring import AggregateScore, Tool

__all__ = [
    "Phase",
    "AuditRun",
    "ToolRuntime",
    "RuntimeSummary",
    "Store",
    "open_store",
    "AUDIT_CSV_HEADER",
    "AGGREGATE_CSV_HEADER",
]

AUDIT_CSV_HEADER = [
    "node", "tool", "timestamp", "iteration", "phase",
    "raw_score", "normalized_score", "runtime_seconds",
]
AGGREGATE_CSV_HEADER = [
    "node", "iteration", "lynis", "openscap", "aide",
    "custom", "standard_uca", "extended_uca", "timestamp",
]


class Phase(str, Enum):
    PRE = "pre"
    POST = "post"
    ITERATION = "iteration"


@dataclass
class AuditRun:
    """One tool execution record.

    ``raw_score`` holds the tool-native value (hardening index, compliance
    percentage, or total AIDE change count); ``normalized_score`` the derived
    0-100 value.
    """

    node: str
    tool: Tool
    timestamp: str
    iteration: int
    phase: Phase
    raw_score: float
    normalized_score: float
    runtime_seconds: float
    id: int | None = None


@dataclass(frozen=True)
class ToolRuntime:
    average: float
    total: float
    count: int


@dataclass(frozen=True)
class RuntimeSummary:
    per_tool: dict[str, ToolRuntime] = field(default_factory=dict)
    grand_total: float = 0.0


_SCHEMA = """
CREATE TABLE IF NOT EXISTS audit_runs (
    id INTEGER PRIMARY KEY AUTOINCREMENT,
    node TEXT NOT NULL,
    tool TEXT NOT NULL CHECK (tool IN ('lynis', 'openscap', 'aide')),
    timestamp TEXT NOT NULL,
    iteration INTEGER NOT NULL CHECK (iteration >= 0),
    phase TEXT NOT NULL CHECK (phase IN ('pre', 'post', 'iteration')),
    raw_score REAL NOT NULL,
    normalized_score REAL NOT NULL
        CHECK (normalized_score >= 0 AND normalized_score <= 100),
    runtime_seconds REAL NOT NULL CHECK (runtime_seconds >= 0)
);
CREATE TABLE IF NOT EXISTS aggregate_scores (
    id INTEGER PRIMARY KEY AUTOINCREMENT,
    node TEXT NOT NULL,
    iteration INTEGER NOT NULL CHECK (iteration >= 0),
    lynis REAL NOT NULL CHECK (lynis >= 0 AND lynis <= 100),
    openscap REAL NOT NULL CHECK (openscap >= 0 AND openscap <= 100),
    aide REAL NOT NULL CHECK (aide >= 0 AND aide <= 100),
    custom REAL CHECK (custom IS NULL OR (custom >= 0 AND custom <= 100)),
    standard_uca REAL NOT NULL CHECK (standard_uca >= 0 AND standard_uca <= 100),
    extended_uca REAL
        CHECK (extended_uca IS NULL OR (extended_uca >= 0 AND extended_uca <= 100)),
    timestamp TEXT NOT NULL,
    CHECK ((custom IS NULL) = (extended_uca IS NULL))
);
CREATE TABLE IF NOT EXISTS custom_rules (
    rule_id TEXT PRIMARY KEY,
    name TEXT NOT NULL,
    check_type TEXT NOT NULL,
    weight INTEGER NOT NULL CHECK (weight >= 1),
    params TEXT NOT NULL,
    description TEXT NOT NULL DEFAULT ''
);
CREATE TABLE IF NOT EXISTS custom_rule_results (
    id INTEGER PRIMARY KEY AUTOINCREMENT,
    rule_id TEXT NOT NULL,
    node TEXT NOT NULL,
    iteration INTEGER NOT NULL CHECK (iteration >= 0),
    passed INTEGER NOT NULL CHECK (passed IN (0, 1)),
    evidence TEXT NOT NULL
);
"""


def open_store(path: Path | str) -> "Store":
    """Open (creating if needed) the store at ``path``; idempotent."""
    return Store(path)


class Store:
    """Handle to one store file. Use as a context manager or call close()."""

    def __init__(self, path: Path | str):
        self.path = Path(path)
        self._lock = threading.RLock()
        try:
            self._conn = sqlite3.connect(str(self.path), check_same_thread=False)
        except sqlite3.Error as exc:
            # "unable to open database file": missing parent, no permission
            raise StoreIOError(f"{self.path}: {exc}") from None
        try:
            self._conn.executescript(_SCHEMA)
            self._conn.commit()
        except sqlite3.OperationalError as exc:
            # read-only or failing medium
            raise StoreIOError(f"{self.path}: {exc}") from None
        except sqlite3.DatabaseError as exc:
            # "file is not a database"
            raise CorruptStoreError(f"{self.path}: {exc}") from None

    def close(self) -> None:
        self._conn.close()

    def __enter__(self) -> "Store":
        return self

    def __exit__(self, *exc_info: object) -> None:
        self.close()

    # --- recording ---------------------------------------------------------

    def record_audit_run(self, run: AuditRun) -> int:
        if not 0.0 <= run.normalized_score <= 100.0:
            raise ConstraintViolationError(
                f"normalized_score {run.normalized_score!r} outside [0, 100]"
            )
        if run.runtime_seconds < 0:
            raise ConstraintViolationError("runtime_seconds must be >= 0")
        if run.iteration < 0:
            raise ConstraintViolationError("iteration must be >= 0")
        with self._lock:
            try:
                cursor = self._conn.execute(
                    "INSERT INTO audit_runs (node, tool, timestamp, iteration, phase,"
                    " raw_score, normalized_score, runtime_seconds)"
                    " VALUES (?, ?, ?, ?, ?, ?, ?, ?)",
                    (
                        run.node, Tool(run.tool).value, run.timestamp, run.iteration,
                        Phase(run.phase).value, run.raw_score, run.normalized_score,
                        run.runtime_seconds,
                    ),
                )
                self._conn.commit()
            except (sqlite3.IntegrityError, ValueError) as exc:
                raise ConstraintViolationError(str(exc)) from None
            run.id = cursor.lastrowid
            return run.id

    def record_aggregate(self, agg: AggregateScore) -> int:
        components = {"lynis": agg.lynis, "openscap": agg.openscap, "aide": agg.aide,
                      "standard_uca": agg.standard_uca}
        for name, value in components.items():
            if not 0.0 <= value <= 100.0:
                raise ConstraintViolationError(f"{name} {value!r} outside [0, 100]")
        if (agg.custom is None) != (agg.extended_uca is None):
            raise ConstraintViolationError(
                "custom and extended_uca must be present together"
            )
        low = min(agg.lynis, agg.openscap, agg.aide) - 1e-9
        high = max(agg.lynis, agg.openscap, agg.aide) + 1e-9
        if not low <= agg.standard_uca <= high:
            raise ConstraintViolationError(
                "standard_uca must lie between its components"
            )
        if agg.timestamp is None:
            raise ConstraintViolationError("aggregate timestamp is required")
        with self._lock:
            try:
                cursor = self._conn.execute(
                    "INSERT INTO aggregate_scores (node, iteration, lynis, openscap,"
                    " aide, custom, standard_uca, extended_uca, timestamp)"
                    " VALUES (?, ?, ?, ?, ?, ?, ?, ?, ?)",
                    (
                        agg.node, agg.iteration, agg.lynis, agg.openscap, agg.aide,
                        agg.custom, agg.standard_uca, agg.extended_uca, agg.timestamp,
                    ),
                )
                self._conn.commit()
            except sqlite3.IntegrityError as exc:
                raise ConstraintViolationError(str(exc)) from None
            agg.id = cursor.lastrowid
            return agg.id

    def record_rules(self, ruleset: RuleSet) -> int:
        """Upsert rule definitions; returns the number written."""
        with self._lock:
            self._conn.executemany(
                "INSERT OR REPLACE INTO custom_rules"
                " (rule_id, name, check_type, weight, params, description)"
                " VALUES (?, ?, ?, ?, ?, ?)",
                [
                    (r.id, r.name, r.check_type.value, r.weight,
                     json.dumps(dict(r.params), sort_keys=True), r.description)
                    for r in ruleset.rules
                ],
            )
            self._conn.commit()
        return len(ruleset.rules)

    def record_rule_results(self, results: list[RuleResult]) -> int:
        for result in results:
            if result.iteration < 0:
                raise ConstraintViolationError("iteration must be >= 0")
        with self._lock:
            try:
                self._conn.executemany(
                    "INSERT INTO custom_rule_results"
                    " (rule_id, node, iteration, passed, evidence)"
                    " VALUES (?, ?, ?, ?, ?)",
                    [
                        (r.rule_id, r.node, r.iteration, int(r.passed), r.evidence)
                        for r in results
                    ],
                )
                self._conn.commit()
            except sqlite3.IntegrityError as exc:
                raise ConstraintViolationError(str(exc)) from None
        return len(results)

    # --- queries -------------------------------------------------------------

    def count_runs(self) -> int:
        return self._conn.execute("SELECT COUNT(*) FROM audit_runs").fetchone()[0]

    def count_aggregates(self) -> int:
        return self._conn.execute("SELECT COUNT(*) FROM aggregate_scores").fetchone()[0]

    def nodes(self) -> list[str]:
        rows = self._conn.execute(
            "SELECT DISTINCT node FROM audit_runs ORDER BY node"
        ).fetchall()
        return [row[0] for row in rows]

    def tools(self) -> list[str]:
        rows = self._conn.execute(
            "SELECT DISTINCT tool FROM audit_runs ORDER BY tool"
        ).fetchall()
        return [row[0] for row in rows]

    def audit_runs(self) -> list[AuditRun]:
        rows = self._conn.execute(
            "SELECT id, node, tool, timestamp, iteration, phase, raw_score,"
            " normalized_score, runtime_seconds FROM audit_runs"
            " ORDER BY node, tool, iteration, id"
        ).fetchall()
        return [
            AuditRun(
                id=row[0], node=row[1], tool=Tool(row[2]), timestamp=row[3],
                iteration=row[4], phase=Phase(row[5]), raw_score=row[6],
                normalized_score=row[7], runtime_seconds=row[8],
            )
            for row in rows
        ]

    def aggregates(self) -> list[AggregateScore]:
        rows = self._conn.execute(
            "SELECT id, node, iteration, lynis, openscap, aide, custom,"
            " standard_uca, extended_uca, timestamp FROM aggregate_scores"
            " ORDER BY node, iteration, id"
        ).fetchall()
        return [
            AggregateScore(
                id=row[0], node=row[1], iteration=row[2], lynis=row[3],
                openscap=row[4], aide=row[5], custom=row[6], standard_uca=row[7],
                extended_uca=row[8], timestamp=row[9],
            )
            for row in rows
        ]

    def runs_for(self, node: str, iteration: int) -> dict[str, AuditRun]:
        """Latest run per tool for (node, iteration)."""
        rows = self._conn.execute(
            "SELECT id, node, tool, timestamp, iteration, phase, raw_score,"
            " normalized_score, runtime_seconds FROM audit_runs"
            " WHERE node = ? AND iteration = ? ORDER BY id",
            (node, iteration),
        ).fetchall()
        latest: dict[str, AuditRun] = {}
        for row in rows:
            latest[row[2]] = AuditRun(
                id=row[0], node=row[1], tool=Tool(row[2]), timestamp=row[3],
                iteration=row[4], phase=Phase(row[5]), raw_score=row[6],
                normalized_score=row[7], runtime_seconds=row[8],
            )
        return latest

    def tool_scores(self, tool: str, node: str) -> list[float]:
        """Normalized scores for one tool on one node, ordered by iteration."""
        rows = self._conn.execute(
            "SELECT normalized_score FROM audit_runs"
            " WHERE tool = ? AND node = ? ORDER BY iteration, id",
            (Tool(tool).value, node),
        ).fetchall()
        return [row[0] for row in rows]

    def stored_rules(self) -> RuleSet | None:
        rows = self._conn.execute(
            "SELECT rule_id, name, check_type, weight, params, description"
            " FROM custom_rules ORDER BY rowid"
        ).fetchall()
        if not rows:
            return None
        return RuleSet(rules=tuple(
            Rule(
                id=row[0], name=row[1], check_type=CheckType(row[2]),
                weight=row[3], params=json.loads(row[4]), description=row[5],
            )
            for row in rows
        ))

    def rule_results(self, node: str | None = None) -> list[RuleResult]:
        query = (
            "SELECT rule_id, node, iteration, passed, evidence"
            " FROM custom_rule_results"
        )
        params: tuple = ()
        if node is not None:
            query += " WHERE node = ?"
            params = (node,)
        query += " ORDER BY node, iteration, id"
        rows = self._conn.execute(query, params).fetchall()
        return [
            RuleResult(rule_id=r[0], node=r[1], iteration=r[2],
                       passed=bool(r[3]), evidence=r[4])
            for r in rows
        ]

    def summarize_runtime(self) -> RuntimeSummary:
        """Per-tool average/total runtime and the grand total."""
        rows = self._conn.execute(
            "SELECT tool, AVG(runtime_seconds), SUM(runtime_seconds), COUNT(*)"
            " FROM audit_runs GROUP BY tool ORDER BY tool"
        ).fetchall()
        if not rows:
            raise EmptyStoreError("no audit runs recorded")
        per_tool = {
            row[0]: ToolRuntime(average=row[1], total=row[2], count=row[3])
            for row in rows
        }
        grand = sum(entry.total for entry in per_tool.values())
        return RuntimeSummary(per_tool=per_tool, grand_total=grand)

    # --- CSV export/import ---------------------------------------------------

    def export_audit_csv(self, path: Path | str) -> int:
        """Write audit_runs.csv ordered by (node, tool, iteration); returns rows."""
        runs = self.audit_runs()
        with open(path, "w", newline="") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(AUDIT_CSV_HEADER)
            for run in runs:
                writer.writerow([
                    run.node, run.tool.value, run.timestamp, run.iteration,
                    run.phase.value, f"{run.raw_score:.2f}",
                    f"{run.normalized_score:.2f}", repr(run.runtime_seconds),
                ])
        return len(runs)

    def export_aggregate_csv(self, path: Path | str) -> int:
        aggs = self.aggregates()
        with open(path, "w", newline="") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(AGGREGATE_CSV_HEADER)
            for agg in aggs:
                writer.writerow([
                    agg.node, agg.iteration, f"{agg.lynis:.2f}",
                    f"{agg.openscap:.2f}", f"{agg.aide:.2f}",
                    "" if agg.custom is None else f"{agg.custom:.2f}",
                    f"{agg.standard_uca:.2f}",
                    "" if agg.extended_uca is None else f"{agg.extended_uca:.2f}",
                    agg.timestamp,
                ])
        return len(aggs)

    def import_audit_csv(self, path: Path | str) -> int:
        """Load rows from an audit_runs.csv export; returns rows inserted."""
        count = 0
        with open(path, newline="") as handle:
            reader = csv.reader(handle)
            header = next(reader, None)
            if header != AUDIT_CSV_HEADER:
                raise ConstraintViolationError(f"{path}: unexpected header {header!r}")
            for lineno, row in enumerate(reader, start=2):
                try:
                    run = AuditRun(
                        node=row[0], tool=Tool(row[1]), timestamp=row[2],
                        iteration=int(row[3]), phase=Phase(row[4]),
                        raw_score=float(row[5]), normalized_score=float(row[6]),
                        runtime_seconds=float(row[7]),
                    )
                except (IndexError, ValueError) as exc:
                    raise ConstraintViolationError(f"{path}:{lineno}: {exc}") from None
                self.record_audit_run(run)
                count += 1
        return count

    def import_aggregate_csv(self, path: Path | str) -> int:
        count = 0
        with open(path, newline="") as handle:
            reader = csv.reader(handle)
            header = next(reader, None)
            if header != AGGREGATE_CSV_HEADER:
                raise ConstraintViolationError(f"{path}: unexpected header {header!r}")
            for lineno, row in enumerate(reader, start=2):
                try:
                    agg = AggregateScore(
                        node=row[0], iteration=int(row[1]), lynis=float(row[2]),
                        openscap=float(row[3]), aide=float(row[4]),
                        custom=float(row[5]) if row[5] else None,
                        standard_uca=float(row[6]),
                        extended_uca=float(row[7]) if row[7] else None,
                        timestamp=row[8],
                    )
                except (IndexError, ValueError) as exc:
                    raise ConstraintViolationError(f"{path}:{lineno}: {exc}") from None
                self.record_aggregate(agg)
                count += 1
        return count
