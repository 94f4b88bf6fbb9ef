"""Parsers for the three audit tool output formats.

Each parser is a pure function from document text to a structured report.
They tolerate format noise (comments, unknown keys, extra sections) but fail
loudly when a required field is missing or unusable.

Formats:
  - Lynis machine report: ``key=value`` lines (the ``lynis-report.dat`` style
    file), required key ``hardening_index``.
  - XCCDF scan results: XML with ``rule-result`` elements each carrying one
    result status; element matching is by local name so any XCCDF namespace
    version is accepted.
  - AIDE comparison report: summary block with added/removed/changed counts,
    or a clean-match marker when the database matched the filesystem.
"""

from __future__ import annotations

import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field

from .errors import (
    MalformedReportError,
    MalformedValueError,
    MissingFieldError,
    NoResultsError,
    UndefinedComplianceError,
    XmlError,
)

__all__ = [
    "LynisReport",
    "ScapReport",
    "AideReport",
    "parse_lynis_report",
    "parse_xccdf_results",
    "parse_aide_report",
    "OTHER_STATUSES",
]

# Result statuses that do not enter the compliance denominator. ``fixed`` is
# folded into pass_count but still surfaced here for auditability.
OTHER_STATUSES = (
    "notapplicable",
    "notchecked",
    "notselected",
    "informational",
    "error",
    "unknown",
    "fixed",
)


@dataclass(frozen=True)
class LynisReport:
    """Parsed Lynis machine report."""

    hardening_index: int
    raw_key_count: int


@dataclass(frozen=True)
class ScapReport:
    """Tallied XCCDF rule results with the derived compliance percentage."""

    pass_count: int
    fail_count: int
    other_counts: dict[str, int] = field(default_factory=dict)
    compliance_pct: float = 0.0


@dataclass(frozen=True)
class AideReport:
    """Added/removed/changed entry counts from an AIDE comparison report."""

    added: int
    removed: int
    changed: int

    @property
    def total_changes(self) -> int:
        return self.added + self.removed + self.changed


def parse_lynis_report(document: str) -> LynisReport:
    """Extract the hardening index from a Lynis ``key=value`` report.

    Comments (``#``) and blank lines are skipped; lines without ``=`` are
    ignored as noise. Duplicate keys resolve to the last occurrence, which
    mirrors append-style report files.

    Raises:
        MissingFieldError: no ``hardening_index`` key in the document.
        MalformedValueError: its value is not an integer in [0, 100].
    """
    values: dict[str, str] = {}
    lines: dict[str, int] = {}
    key_count = 0
    for lineno, line in enumerate(document.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            continue
        key, _, value = stripped.partition("=")
        key = key.strip()
        if not key:
            continue
        key_count += 1
        values[key] = value.strip()
        lines[key] = lineno
    if "hardening_index" not in values:
        raise MissingFieldError("hardening_index key not found")
    raw = values["hardening_index"]
    try:
        index = int(raw)
    except ValueError:
        raise MalformedValueError(
            f"line {lines['hardening_index']}: hardening_index={raw!r} is not an integer"
        ) from None
    if not 0 <= index <= 100:
        raise MalformedValueError(
            f"line {lines['hardening_index']}: hardening_index {index} outside [0, 100]"
        )
    return LynisReport(hardening_index=index, raw_key_count=key_count)


def _local_name(tag: object) -> str:
    # ElementTree renders namespaced tags as "{uri}name"; comments and
    # processing instructions have non-string tags.
    if not isinstance(tag, str):
        return ""
    return tag.rsplit("}", 1)[-1]


def parse_xccdf_results(document: str) -> ScapReport:
    """Tally rule-result statuses from an XCCDF results document.

    Matching is by local element name, ignoring namespaces, since SCAP
    content ships under several namespace versions. ``fixed`` counts as a
    pass; statuses outside the known set are tallied under ``unknown``.
    The compliance percentage covers pass+fail only.

    Raises:
        XmlError: malformed XML.
        NoResultsError: no rule-result elements at all.
        UndefinedComplianceError: zero pass and zero fail results.
    """
    try:
        root = ET.fromstring(document)
    except ET.ParseError as exc:
        raise XmlError(f"not well-formed XML: {exc}") from None

    passes = 0
    fails = 0
    others = {status: 0 for status in OTHER_STATUSES}
    seen = 0
    for elem in root.iter():
        if _local_name(elem.tag) != "rule-result":
            continue
        seen += 1
        status = None
        for child in elem:
            if _local_name(child.tag) == "result":
                status = (child.text or "").strip().lower()
                break
        if status == "pass":
            passes += 1
        elif status == "fail":
            fails += 1
        elif status == "fixed":
            others["fixed"] += 1
            passes += 1
        elif status in others:
            others[status] += 1
        else:
            others["unknown"] += 1

    if seen == 0:
        raise NoResultsError("document contains no rule-result elements")
    evaluated = passes + fails
    if evaluated == 0:
        raise UndefinedComplianceError(
            "no pass or fail results; compliance percentage is undefined"
        )
    return ScapReport(
        pass_count=passes,
        fail_count=fails,
        other_counts=others,
        compliance_pct=100.0 * passes / evaluated,
    )


# Accepts both AIDE wordings ("Added entries: 2" and "Added files: 2");
# section headers without a count deliberately do not match.
_AIDE_COUNT_RE = re.compile(
    r"^\s*(Added|Removed|Changed)\s+(?:entries|files):\s*(\d+)\s*$",
    re.IGNORECASE | re.MULTILINE,
)
_AIDE_CLEAN_RE = re.compile(
    r"found\s+NO\s+differences|Looks\s+okay", re.IGNORECASE
)


def parse_aide_report(document: str) -> AideReport:
    """Extract added/removed/changed counts from an AIDE comparison report.

    A clean-match report (database matches, no summary counts) yields
    (0, 0, 0). If summary count lines are present, all three must be; a
    partial summary is rejected rather than silently zero-filled.

    Raises:
        MalformedReportError: neither a complete summary nor a clean-match
            marker was found.
    """
    counts: dict[str, int] = {}
    for match in _AIDE_COUNT_RE.finditer(document):
        kind = match.group(1).lower()
        # First occurrence wins: the summary block precedes detail sections.
        counts.setdefault(kind, int(match.group(2)))
    if counts:
        missing = [k for k in ("added", "removed", "changed") if k not in counts]
        if missing:
            raise MalformedReportError(
                f"incomplete summary: missing {', '.join(missing)} count(s)"
            )
        return AideReport(counts["added"], counts["removed"], counts["changed"])
    if _AIDE_CLEAN_RE.search(document):
        return AideReport(0, 0, 0)
    raise MalformedReportError(
        "no summary counts and no clean-match marker found"
    )
