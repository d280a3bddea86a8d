"""Catalog fixtures and regression-runner tests.

The full sweep (every entry, with weight-5 checks) runs in the acceptance
module; here the machinery is exercised on a fast subset.
"""

import pytest

from clawkit.catalog import (CatalogError, entries, run_entry, run_regression)
from clawkit.structure import structural_report


@pytest.fixture(scope="module")
def all_entries():
    return entries()


class TestEntries:
    def test_all_families_present(self, all_entries):
        families = {e.family for e in all_entries}
        assert families == {"kdv", "mkdv", "trig", "hyperbolic", "exp",
                            "cubic", "negative"}

    def test_at_least_two_instances_per_family(self, all_entries):
        from collections import Counter
        counts = Counter(e.family for e in all_entries if not e.negative)
        assert all(v >= 2 for v in counts.values())

    def test_negative_fixtures(self, all_entries):
        negatives = [e for e in all_entries if e.negative]
        assert len(negatives) >= 3

    def test_entries_validate_structurally(self, all_entries):
        for entry in all_entries:
            report = structural_report(entry.equation().bound())
            if entry.negative:
                assert not report.k_vanishes, entry.id
            else:
                assert report.k_vanishes and report.n_vanishes, entry.id
                assert report.normal_form_detected == "u_xxx + g(x,u,p)"

    def test_expected_counts_nonnegative(self, all_entries):
        for entry in all_entries:
            assert all(n >= 0 for n in entry.expected_type)

    def test_discrepant_entries_carry_notes(self, all_entries):
        for entry in all_entries:
            if not entry.negative and entry.expected_type != entry.classified_type:
                assert entry.notes, entry.id

    def test_degenerate_hyperbolic_rejected(self):
        from clawkit.catalog import CatalogEntry, _validate_entry
        bad = CatalogEntry(id="x", family="hyperbolic", f_text="1", g_text="0",
                           bindings={"m": "2", "n": "-2"},
                           expected_type=(0, 0, 0), classified_type=(0, 0, 0),
                           expected_n5=None, ansatz={}, notes="")
        with pytest.raises(CatalogError):
            _validate_entry(bad)


class TestRegression:
    def test_kdv_classical(self):
        entry = next(e for e in entries() if e.id == "kdv/classical")
        result = run_entry(entry)
        assert result.passed
        assert result.computed_type == [3, 1, 1]

    def test_negative_fixture(self):
        entry = next(e for e in entries() if e.id == "negative/quadratic-q")
        result = run_entry(entry)
        assert result.passed
        assert result.computed_type[0] == 0

    def test_mismatch_reported_not_fatal(self):
        import dataclasses
        entry = next(e for e in entries() if e.id == "kdv/classical")
        broken = dataclasses.replace(entry, expected_type=(9, 9, 9))
        result = run_entry(broken)
        assert not result.passed
        assert any("type mismatch" in f for f in result.failures)

    def test_report_table_and_determinism(self):
        only = ["kdv/classical", "negative/quadratic-q"]
        rep1 = run_regression(only=only)
        rep2 = run_regression(only=only)
        assert rep1.passed and rep2.passed
        strip = lambda rep: [(r.entry.id, r.computed_type) for r in rep.results]
        assert strip(rep1) == strip(rep2)
        table = rep1.table()
        assert "kdv/classical" in table and "PASS" in table

    def test_family_filter(self):
        rep = run_regression(only=["negative"])
        assert len(rep.results) == 3
