import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from uca.errors import (
    MalformedReportError,
    MalformedValueError,
    MissingFieldError,
    NoResultsError,
    UndefinedComplianceError,
    XmlError,
)
from uca.fixtures import make_aide_fixture, make_lynis_fixture, make_xccdf_fixture
from uca.parsers import (
    parse_aide_report,
    parse_lynis_report,
    parse_xccdf_results,
)


class TestLynisParser:
    def test_extracts_hardening_index(self):
        report = parse_lynis_report("os=Linux\nhardening_index=64\n")
        assert report.hardening_index == 64
        assert report.raw_key_count == 2

    def test_last_duplicate_wins(self):
        document = (
            "# comment line\n"
            "hardening_index=63\n"
            "\n"
            "hardening_index=65\n"
        )
        assert parse_lynis_report(document).hardening_index == 65

    def test_missing_index(self):
        with pytest.raises(MissingFieldError):
            parse_lynis_report("os=Linux\nlynis_version=3.0.9\n")

    @pytest.mark.parametrize("value", ["abc", "64.5", "101", "-3", "0x40", ""])
    def test_malformed_index(self, value):
        with pytest.raises(MalformedValueError):
            parse_lynis_report(f"hardening_index={value}\n")

    def test_noise_lines_ignored(self):
        document = "noise without separator\nhardening_index=50\n   \n# x\n"
        report = parse_lynis_report(document)
        assert report.hardening_index == 50
        assert report.raw_key_count == 1

    def test_boundary_values(self):
        assert parse_lynis_report("hardening_index=0\n").hardening_index == 0
        assert parse_lynis_report("hardening_index=100\n").hardening_index == 100

    def test_value_with_whitespace(self):
        assert parse_lynis_report("hardening_index = 64 \n").hardening_index == 64


def _xccdf(*statuses: str, ns: str = "http://checklists.nist.gov/xccdf/1.2") -> str:
    xmlns = f' xmlns="{ns}"' if ns else ""
    results = "".join(
        f'<rule-result idref="r{i}"><result>{s}</result></rule-result>'
        for i, s in enumerate(statuses)
    )
    return f"<Benchmark{xmlns}><TestResult>{results}</TestResult></Benchmark>"


class TestXccdfParser:
    def test_compliance_over_pass_and_fail(self):
        report = parse_xccdf_results(_xccdf(*(["pass"] * 28 + ["fail"] * 12)))
        assert report.pass_count == 28
        assert report.fail_count == 12
        assert report.compliance_pct == pytest.approx(70.0)

    def test_notapplicable_excluded_from_denominator(self):
        report = parse_xccdf_results(
            _xccdf(*(["pass"] * 5 + ["fail"] * 5 + ["notapplicable"] * 10))
        )
        assert report.compliance_pct == pytest.approx(50.0)
        assert report.other_counts["notapplicable"] == 10

    def test_no_evaluated_rules_is_undefined(self):
        with pytest.raises(UndefinedComplianceError):
            parse_xccdf_results(_xccdf(*(["notchecked"] * 4)))

    def test_zero_rule_results(self):
        with pytest.raises(NoResultsError):
            parse_xccdf_results("<Benchmark><TestResult/></Benchmark>")

    def test_malformed_xml(self):
        with pytest.raises(XmlError):
            parse_xccdf_results("<Benchmark><TestResult>")

    def test_fixed_counts_as_pass(self):
        report = parse_xccdf_results(_xccdf("pass", "pass", "pass", "fixed", "fail"))
        assert report.pass_count == 4
        assert report.fail_count == 1
        assert report.other_counts["fixed"] == 1
        assert report.compliance_pct == pytest.approx(80.0)

    def test_unexpected_status_tallied_as_unknown(self):
        report = parse_xccdf_results(_xccdf("pass", "weird-status", "error"))
        assert report.other_counts["unknown"] == 1
        assert report.other_counts["error"] == 1
        assert report.compliance_pct == pytest.approx(100.0)

    @pytest.mark.parametrize("ns", [
        "http://checklists.nist.gov/xccdf/1.1",
        "http://checklists.nist.gov/xccdf/1.2",
        "",
    ])
    def test_namespace_agnostic(self, ns):
        report = parse_xccdf_results(_xccdf("pass", "fail", ns=ns))
        assert (report.pass_count, report.fail_count) == (1, 1)

    def test_status_case_and_whitespace(self):
        document = (
            "<Benchmark><TestResult>"
            "<rule-result><result> PASS </result></rule-result>"
            "<rule-result><result>fail</result></rule-result>"
            "</TestResult></Benchmark>"
        )
        report = parse_xccdf_results(document)
        assert (report.pass_count, report.fail_count) == (1, 1)


class TestAideParser:
    def test_summary_counts(self):
        report = parse_aide_report(make_aide_fixture(2, 1, 4))
        assert (report.added, report.removed, report.changed) == (2, 1, 4)
        assert report.total_changes == 7

    def test_clean_match_is_zero(self):
        document = (
            "AIDE found NO differences between database and filesystem. Looks okay!!\n"
        )
        assert parse_aide_report(document).total_changes == 0

    def test_partial_summary_rejected(self):
        with pytest.raises(MalformedReportError):
            parse_aide_report("Added entries: 3\n")

    def test_empty_document_rejected(self):
        with pytest.raises(MalformedReportError):
            parse_aide_report("nothing relevant here\n")

    def test_files_wording_variant(self):
        document = (
            "Summary:\n"
            "  Added files: 1\n"
            "  Removed files: 0\n"
            "  Changed files: 9\n"
        )
        report = parse_aide_report(document)
        assert (report.added, report.removed, report.changed) == (1, 0, 9)

    def test_section_headers_do_not_confuse(self):
        document = (
            "Summary:\n"
            "  Added entries:\t2\n"
            "  Removed entries:\t0\n"
            "  Changed entries:\t1\n"
            "\n"
            "---------------------------------------------------\n"
            "Added entries:\n"
            "---------------------------------------------------\n"
            "f++++: /etc/new-file\n"
        )
        report = parse_aide_report(document)
        assert (report.added, report.removed, report.changed) == (2, 0, 1)


# Statuses that pass straight into other_counts without folding into pass.
_NON_FOLD_STATUSES = st.sampled_from(
    ["notapplicable", "notchecked", "notselected", "informational", "error", "unknown"]
)


class TestRoundTripProperties:
    @given(index=st.integers(min_value=0, max_value=100))
    def test_lynis_inversion(self, index):
        assert parse_lynis_report(make_lynis_fixture(index)).hardening_index == index

    @given(
        passed=st.integers(min_value=0, max_value=150),
        failed=st.integers(min_value=0, max_value=150),
        extras=st.dictionaries(_NON_FOLD_STATUSES, st.integers(0, 20), max_size=4),
    )
    def test_xccdf_inversion(self, passed, failed, extras):
        if passed + failed == 0:
            expected = (
                UndefinedComplianceError if sum(extras.values()) else NoResultsError
            )
            with pytest.raises(expected):
                parse_xccdf_results(make_xccdf_fixture(passed, failed, extras))
            return
        report = parse_xccdf_results(make_xccdf_fixture(passed, failed, extras))
        assert report.pass_count == passed
        assert report.fail_count == failed
        for status, count in extras.items():
            assert report.other_counts[status] == count

    @given(
        added=st.integers(min_value=0, max_value=300),
        removed=st.integers(min_value=0, max_value=300),
        changed=st.integers(min_value=0, max_value=300),
        wording=st.sampled_from(["entries", "files"]),
    )
    def test_aide_inversion(self, added, removed, changed, wording):
        report = parse_aide_report(make_aide_fixture(added, removed, changed, wording))
        assert (report.added, report.removed, report.changed) == (added, removed, changed)

    @settings(max_examples=30)
    @given(index=st.integers(min_value=0, max_value=100))
    def test_parsers_are_pure(self, index):
        document = make_lynis_fixture(index)
        assert parse_lynis_report(document) == parse_lynis_report(document)
