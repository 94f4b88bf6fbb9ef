"""Declarative weighted security rules evaluated against node snapshots.

A rule set is an ordered list of weighted checks (config directives, service
states, file modes, firewall state). Rules never shell into hosts: they read
a NodeSnapshot, a captured view of the node's configuration, so evaluation
is deterministic and testable offline. Absence of a file, key or service is
a failing observation, not an error.

The compliance score is 100 * (weight of passed rules) / (total weight).
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path, PurePosixPath
from typing import Iterable, Mapping

from .errors import (
    DuplicateIdError,
    NonPositiveWeightError,
    SchemaError,
    SnapshotError,
    UnknownRuleIdError,
)

__all__ = [
    "CheckType",
    "FirewallState",
    "Rule",
    "RuleSet",
    "RuleResult",
    "NodeSnapshot",
    "load_rules",
    "default_rules",
    "rules_to_json",
    "evaluate_rule",
    "evaluate_rules",
    "score_rules",
    "save_snapshot",
    "load_snapshot",
]

MISSING_EVIDENCE = "not present"


class CheckType(str, Enum):
    CONFIG_DIRECTIVE = "config_directive"
    SERVICE_ACTIVE = "service_active"
    FILE_MODE = "file_mode"
    FIREWALL_ACTIVE = "firewall_active"


class FirewallState(str, Enum):
    ACTIVE = "active"
    INACTIVE = "inactive"
    UNKNOWN = "unknown"


# Required params per check type; expected_is_regex is optional.
_REQUIRED_PARAMS = {
    CheckType.CONFIG_DIRECTIVE: ("path", "key", "expected"),
    CheckType.SERVICE_ACTIVE: ("service",),
    CheckType.FILE_MODE: ("path", "max_mode"),
    CheckType.FIREWALL_ACTIVE: (),
}


@dataclass(frozen=True)
class Rule:
    id: str
    name: str
    check_type: CheckType
    weight: int
    params: Mapping[str, object] = field(default_factory=dict)
    description: str = ""


@dataclass(frozen=True)
class RuleSet:
    rules: tuple[Rule, ...]

    @property
    def total_weight(self) -> int:
        return sum(rule.weight for rule in self.rules)

    def get(self, rule_id: str) -> Rule:
        for rule in self.rules:
            if rule.id == rule_id:
                return rule
        raise UnknownRuleIdError(f"no rule with id {rule_id!r}")


@dataclass(frozen=True)
class RuleResult:
    rule_id: str
    node: str
    iteration: int
    passed: bool
    evidence: str


@dataclass
class NodeSnapshot:
    """Captured configuration state of one node.

    ``files`` maps absolute paths to text content, ``services`` maps service
    names to state strings (active/inactive), ``permissions`` maps absolute
    paths to (octal mode, owner, group).
    """

    node: str
    files: dict[str, str] = field(default_factory=dict)
    services: dict[str, str] = field(default_factory=dict)
    permissions: dict[str, tuple[int, str, str]] = field(default_factory=dict)
    firewall_state: FirewallState = FirewallState.UNKNOWN


def _validate_rule_dict(entry: object, position: int) -> Rule:
    if not isinstance(entry, dict):
        raise SchemaError(f"rule #{position}: expected an object, got {type(entry).__name__}")
    for name in ("id", "name", "check_type", "weight"):
        if name not in entry:
            raise SchemaError(f"rule #{position}: missing required field {name!r}")
    rule_id = entry["id"]
    if not isinstance(rule_id, str) or not rule_id:
        raise SchemaError(f"rule #{position}: id must be a non-empty string")
    try:
        check_type = CheckType(entry["check_type"])
    except ValueError:
        raise SchemaError(
            f"rule {rule_id!r}: unknown check_type {entry['check_type']!r}"
        ) from None
    weight = entry["weight"]
    if isinstance(weight, bool) or not isinstance(weight, int):
        raise SchemaError(f"rule {rule_id!r}: weight must be an integer")
    if weight < 1:
        raise NonPositiveWeightError(f"rule {rule_id!r}: weight must be >= 1, got {weight}")
    params = entry.get("params", {})
    if not isinstance(params, dict):
        raise SchemaError(f"rule {rule_id!r}: params must be an object")
    for key in _REQUIRED_PARAMS[check_type]:
        if key not in params:
            raise SchemaError(f"rule {rule_id!r}: params missing {key!r} for {check_type.value}")
    if check_type is CheckType.CONFIG_DIRECTIVE and params.get("expected_is_regex"):
        try:
            re.compile(str(params["expected"]))
        except re.error as exc:
            raise SchemaError(f"rule {rule_id!r}: bad expected regex: {exc}") from None
    if check_type is CheckType.FILE_MODE:
        _parse_mode(str(params["max_mode"]), f"rule {rule_id!r} max_mode")
    return Rule(
        id=rule_id,
        name=str(entry["name"]),
        check_type=check_type,
        weight=weight,
        params=dict(params),
        description=str(entry.get("description", "")),
    )


def _parse_mode(text: str, what: str) -> int:
    try:
        mode = int(text, 8)
    except ValueError:
        raise SchemaError(f"{what}: {text!r} is not an octal mode") from None
    if not 0 <= mode <= 0o7777:
        raise SchemaError(f"{what}: {text!r} outside [0000, 7777]")
    return mode


def load_rules(document: str) -> RuleSet:
    """Parse and validate a JSON rules document (top-level list of rules)."""
    try:
        data = json.loads(document)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"rules document is not valid JSON: {exc}") from None
    if not isinstance(data, list):
        raise SchemaError("rules document must be a top-level list")
    rules = []
    seen: set[str] = set()
    for position, entry in enumerate(data):
        rule = _validate_rule_dict(entry, position)
        if rule.id in seen:
            raise DuplicateIdError(f"duplicate rule id {rule.id!r}")
        seen.add(rule.id)
        rules.append(rule)
    return RuleSet(rules=tuple(rules))


def rules_to_json(ruleset: RuleSet) -> str:
    """Serialize a rule set back to the JSON document format."""
    entries = [
        {
            "id": r.id,
            "name": r.name,
            "check_type": r.check_type.value,
            "weight": r.weight,
            "description": r.description,
            "params": dict(r.params),
        }
        for r in ruleset.rules
    ]
    return json.dumps(entries, indent=2) + "\n"


def default_rules() -> RuleSet:
    """The built-in eight-rule baseline policy (total weight 61)."""
    sshd = "/etc/ssh/sshd_config"
    return RuleSet(rules=(
        Rule(
            id="ssh_root_login",
            name="SSH root login disabled",
            check_type=CheckType.CONFIG_DIRECTIVE,
            weight=8,
            params={"path": sshd, "key": "PermitRootLogin", "expected": "no"},
            description="Direct root logins over SSH must be disabled.",
        ),
        Rule(
            id="ssh_empty_passwords",
            name="SSH empty passwords disabled",
            check_type=CheckType.CONFIG_DIRECTIVE,
            weight=8,
            params={"path": sshd, "key": "PermitEmptyPasswords", "expected": "no"},
            description="Accounts with empty passwords must not authenticate.",
        ),
        Rule(
            id="ssh_max_auth_tries",
            name="SSH authentication attempts limited",
            check_type=CheckType.CONFIG_DIRECTIVE,
            weight=6,
            params={
                "path": sshd,
                "key": "MaxAuthTries",
                "expected": "[1-4]",
                "expected_is_regex": True,
            },
            description="At most four authentication attempts per connection.",
        ),
        Rule(
            id="x11_forwarding_disabled",
            name="X11 forwarding disabled",
            check_type=CheckType.CONFIG_DIRECTIVE,
            weight=7,
            params={"path": sshd, "key": "X11Forwarding", "expected": "no"},
            description="X11 forwarding widens the attack surface of sshd.",
        ),
        Rule(
            id="firewall_active",
            name="Host firewall active",
            check_type=CheckType.FIREWALL_ACTIVE,
            weight=8,
            params={},
            description="A host-based firewall must be enabled.",
        ),
        Rule(
            id="auditd_active",
            name="auditd service active",
            check_type=CheckType.SERVICE_ACTIVE,
            weight=7,
            params={"service": "auditd"},
            description="Kernel audit logging must be running.",
        ),
        Rule(
            id="shadow_file_mode",
            name="/etc/shadow permissions restricted",
            check_type=CheckType.FILE_MODE,
            weight=7,
            params={"path": "/etc/shadow", "max_mode": "0640"},
            description="The shadow file must not be world readable.",
        ),
        Rule(
            id="password_max_days",
            name="Password maximum age enforced",
            check_type=CheckType.CONFIG_DIRECTIVE,
            weight=10,
            params={
                "path": "/etc/login.defs",
                "key": "PASS_MAX_DAYS",
                "expected": "([1-9]|[1-8][0-9]|90)",
                "expected_is_regex": True,
            },
            description="Passwords must expire within 90 days.",
        ),
    ))


def _find_directive(content: str, key: str) -> tuple[str, str] | None:
    """Last uncommented, unindented ``key value`` line; returns (line, value)."""
    found = None
    for raw in content.splitlines():
        if not raw.strip():
            continue
        if raw[0] in (" ", "\t") or raw.startswith("#"):
            continue
        parts = re.split(r"[=\s]+", raw.strip(), maxsplit=1)
        if parts[0].lower() != key.lower():
            continue
        value = parts[1].strip() if len(parts) > 1 else ""
        found = (raw.strip(), value)
    return found


def _check_config_directive(rule: Rule, snapshot: NodeSnapshot) -> tuple[bool, str]:
    path = str(rule.params["path"])
    content = snapshot.files.get(path)
    if content is None:
        return False, MISSING_EVIDENCE
    hit = _find_directive(content, str(rule.params["key"]))
    if hit is None:
        return False, MISSING_EVIDENCE
    line, value = hit
    expected = str(rule.params["expected"])
    if rule.params.get("expected_is_regex"):
        passed = re.fullmatch(expected, value) is not None
    else:
        passed = value == expected
    return passed, line


def _check_service_active(rule: Rule, snapshot: NodeSnapshot) -> tuple[bool, str]:
    service = str(rule.params["service"])
    state = snapshot.services.get(service)
    if state is None:
        return False, MISSING_EVIDENCE
    return state == "active", f"{service} {state}"


def _check_file_mode(rule: Rule, snapshot: NodeSnapshot) -> tuple[bool, str]:
    path = str(rule.params["path"])
    entry = snapshot.permissions.get(path)
    if entry is None:
        return False, MISSING_EVIDENCE
    mode, owner, group = entry
    max_mode = _parse_mode(str(rule.params["max_mode"]), f"rule {rule.id!r} max_mode")
    passed = (mode & ~max_mode) == 0
    return passed, f"{path} {mode:04o} {owner}:{group}"


def _check_firewall_active(rule: Rule, snapshot: NodeSnapshot) -> tuple[bool, str]:
    state = snapshot.firewall_state
    return state is FirewallState.ACTIVE, f"firewall {state.value}"


_CHECKS = {
    CheckType.CONFIG_DIRECTIVE: _check_config_directive,
    CheckType.SERVICE_ACTIVE: _check_service_active,
    CheckType.FILE_MODE: _check_file_mode,
    CheckType.FIREWALL_ACTIVE: _check_firewall_active,
}


def evaluate_rule(rule: Rule, snapshot: NodeSnapshot, iteration: int = 0) -> RuleResult:
    """Evaluate one rule against a snapshot; absence fails, never raises."""
    passed, evidence = _CHECKS[rule.check_type](rule, snapshot)
    return RuleResult(
        rule_id=rule.id,
        node=snapshot.node,
        iteration=iteration,
        passed=passed,
        evidence=evidence,
    )


def evaluate_rules(
    ruleset: RuleSet, snapshot: NodeSnapshot, iteration: int = 0
) -> list[RuleResult]:
    """Evaluate every rule in order; deterministic over a fixed snapshot."""
    return [evaluate_rule(rule, snapshot, iteration) for rule in ruleset.rules]


def score_rules(results: Iterable[RuleResult], ruleset: RuleSet) -> float:
    """Weighted compliance percentage for one evaluation pass."""
    total = ruleset.total_weight
    passed_weight = 0
    for result in results:
        rule = ruleset.get(result.rule_id)
        if result.passed:
            passed_weight += rule.weight
    return 100.0 * passed_weight / total


# --- snapshot directory format ----------------------------------------------
#
# manifest.json        {"node": ..., "captured_at": ...}
# files/<path>         node files mirrored under their absolute paths
# services.tsv         name <TAB> state
# permissions.tsv      path <TAB> octal mode <TAB> owner <TAB> group
# firewall.txt         one word: active | inactive


def save_snapshot(
    snapshot: NodeSnapshot, directory: Path | str, captured_at: str = ""
) -> None:
    """Write a snapshot to its on-disk directory layout."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    manifest = {"node": snapshot.node, "captured_at": captured_at}
    (directory / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    for path in sorted(snapshot.files):
        rel = PurePosixPath(path)
        if not rel.is_absolute():
            raise SnapshotError(f"snapshot file path must be absolute: {path!r}")
        dest = directory.joinpath("files", *rel.parts[1:])
        dest.parent.mkdir(parents=True, exist_ok=True)
        dest.write_text(snapshot.files[path])
    with open(directory / "services.tsv", "w") as handle:
        for name in sorted(snapshot.services):
            handle.write(f"{name}\t{snapshot.services[name]}\n")
    with open(directory / "permissions.tsv", "w") as handle:
        for path in sorted(snapshot.permissions):
            mode, owner, group = snapshot.permissions[path]
            handle.write(f"{path}\t{mode:04o}\t{owner}\t{group}\n")
    (directory / "firewall.txt").write_text(snapshot.firewall_state.value + "\n")


def load_snapshot(directory: Path | str) -> NodeSnapshot:
    """Read a snapshot directory back into a NodeSnapshot.

    Raises SnapshotError for a missing/invalid manifest or malformed table
    rows; a missing firewall.txt loads as ``unknown``.
    """
    directory = Path(directory)
    manifest_path = directory / "manifest.json"
    if not manifest_path.is_file():
        raise SnapshotError(f"{directory}: missing manifest.json")
    try:
        manifest = json.loads(manifest_path.read_text())
    except json.JSONDecodeError as exc:
        raise SnapshotError(f"{manifest_path}: invalid JSON: {exc}") from None
    node = manifest.get("node")
    if not isinstance(node, str) or not node:
        raise SnapshotError(f"{manifest_path}: missing node id")

    files: dict[str, str] = {}
    files_root = directory / "files"
    if files_root.is_dir():
        for file_path in sorted(files_root.rglob("*")):
            if file_path.is_file():
                rel = file_path.relative_to(files_root)
                files["/" + rel.as_posix()] = file_path.read_text()

    services: dict[str, str] = {}
    services_path = directory / "services.tsv"
    if services_path.is_file():
        for lineno, line in enumerate(services_path.read_text().splitlines(), 1):
            if not line.strip():
                continue
            fields = line.split("\t")
            if len(fields) != 2:
                raise SnapshotError(f"{services_path}:{lineno}: expected name<TAB>state")
            services[fields[0]] = fields[1]

    permissions: dict[str, tuple[int, str, str]] = {}
    permissions_path = directory / "permissions.tsv"
    if permissions_path.is_file():
        for lineno, line in enumerate(permissions_path.read_text().splitlines(), 1):
            if not line.strip():
                continue
            fields = line.split("\t")
            if len(fields) != 4:
                raise SnapshotError(
                    f"{permissions_path}:{lineno}: expected path<TAB>mode<TAB>owner<TAB>group"
                )
            try:
                mode = _parse_mode(fields[1], f"{permissions_path}:{lineno}")
            except SchemaError as exc:
                raise SnapshotError(str(exc)) from None
            permissions[fields[0]] = (mode, fields[2], fields[3])

    firewall = FirewallState.UNKNOWN
    firewall_path = directory / "firewall.txt"
    if firewall_path.is_file():
        word = firewall_path.read_text().strip()
        try:
            firewall = FirewallState(word)
        except ValueError:
            raise SnapshotError(f"{firewall_path}: expected 'active' or 'inactive', got {word!r}") from None

    return NodeSnapshot(
        node=node,
        files=files,
        services=services,
        permissions=permissions,
        firewall_state=firewall,
    )
