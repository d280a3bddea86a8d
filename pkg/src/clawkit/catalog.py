"""Classified-equation catalog and regression runner.

The shipped data file encodes the classification of equations
u_t = u_xxx + g(x,u,p) by their conservation-law type (n_-1, n_1, n_3):
six families (quadratic flux, cubic flux both signs, trigonometric,
hyperbolic, exponential, and pure cubic-in-p), each with several exact
parameter instantiations, plus negative fixtures that fail the
divergence-form test.

Each entry carries two triples: `classified_type`, the type from the
classification table, and `expected_type`, the count reachable by the
declared exact ansatz.  They differ only where the missing laws provably
leave the expression class (irrational frequencies, exponential-in-t
weights); the regression asserts `expected_type` and reports both.
"""

from __future__ import annotations

import importlib.resources as resources
import json
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional

from .expr import ExprError
from .parser import ParamTable
from .search import SearchOptions, classify_type, solve_densities
from .structure import (EvolutionEq, equation_from_strings, structural_report)


class CatalogError(ExprError):
    pass


@dataclass(frozen=True)
class CatalogEntry:
    id: str
    family: str
    f_text: str
    g_text: str
    bindings: dict            # parameter name -> exact rational string
    expected_type: tuple      # in-class counts asserted by the regression
    classified_type: tuple    # counts from the classification table
    expected_n5: Optional[int]
    ansatz: dict              # SearchOptions overrides (d_x, d_t, d_u)
    notes: str
    negative: bool = False

    def equation(self) -> EvolutionEq:
        table = ParamTable()
        for name, value in self.bindings.items():
            table.register(name, Fraction(value))
        return equation_from_strings(self.f_text, self.g_text, table)

    def search_options(self) -> SearchOptions:
        opts = SearchOptions()
        for key, value in self.ansatz.items():
            if key not in ("d_x", "d_t", "d_u"):
                raise CatalogError(f"{self.id}: unknown ansatz override {key!r}")
            setattr(opts, key, int(value))
        return opts

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "family": self.family,
            "f": self.f_text,
            "g": self.g_text,
            "parameters": dict(self.bindings),
            "expected_type": list(self.expected_type),
            "classified_type": list(self.classified_type),
            "expected_n5": self.expected_n5,
            "ansatz": dict(self.ansatz),
            "notes": self.notes,
            "negative": self.negative,
        }


def _load_raw() -> dict:
    with resources.files("clawkit").joinpath("data/catalog.json").open("rb") as fh:
        return json.load(fh)


def entries() -> List[CatalogEntry]:
    """All catalog entries, positive fixtures first, in file order."""
    raw = _load_raw()
    out = []
    for item in raw["entries"]:
        entry = CatalogEntry(
            id=item["id"],
            family=item["family"],
            f_text=item["f"],
            g_text=item["g"],
            bindings=dict(item.get("parameters", {})),
            expected_type=tuple(item["expected_type"]),
            classified_type=tuple(item["classified_type"]),
            expected_n5=item.get("expected_n5"),
            ansatz=dict(item.get("ansatz", {})),
            notes=item.get("notes", ""),
        )
        _validate_entry(entry)
        out.append(entry)
    for item in raw["negative_fixtures"]:
        out.append(CatalogEntry(
            id=item["id"], family="negative", f_text=item["f"], g_text=item["g"],
            bindings={}, expected_type=(0, 0, 0), classified_type=(0, 0, 0),
            expected_n5=None, ansatz={}, notes=item.get("notes", ""), negative=True))
    return out


def _validate_entry(entry: CatalogEntry) -> None:
    if any(n < 0 for n in entry.expected_type):
        raise CatalogError(f"{entry.id}: negative expected count")
    if entry.family == "hyperbolic":
        m = Fraction(entry.bindings.get("m", "0"))
        n = Fraction(entry.bindings.get("n", "0"))
        if m * m == n * n:
            raise CatalogError(
                f"{entry.id}: degenerate hyperbolic coefficients need m^2 != n^2")


@dataclass
class EntryResult:
    entry: CatalogEntry
    computed_type: Optional[list]
    computed_n5: Optional[int]
    struct_flags: dict
    passed: bool
    failures: list
    notes: list
    elapsed: float

    def to_dict(self) -> dict:
        # No timing fields here: identical runs must serialize identically.
        return {
            "id": self.entry.id,
            "expected_type": list(self.entry.expected_type),
            "classified_type": list(self.entry.classified_type),
            "computed_type": self.computed_type,
            "expected_n5": self.entry.expected_n5,
            "computed_n5": self.computed_n5,
            "structural": self.struct_flags,
            "passed": self.passed,
            "failures": list(self.failures),
            "notes": list(self.notes),
        }


@dataclass
class RegressionReport:
    results: List[EntryResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def to_dict(self) -> dict:
        return {"passed": self.passed,
                "entries": [r.to_dict() for r in self.results]}

    def table(self) -> str:
        width = max(len(r.entry.id) for r in self.results) + 2
        lines = []
        for r in self.results:
            status = "PASS" if r.passed else "FAIL"
            expected = ",".join(str(n) for n in r.entry.expected_type)
            computed = ("-" if r.computed_type is None
                        else ",".join(str(n) for n in r.computed_type))
            line = f"{r.entry.id:<{width}} {status}  expected ({expected})  computed ({computed})"
            if r.entry.expected_n5 is not None:
                line += f"  n5 {r.computed_n5}/{r.entry.expected_n5}"
            lines.append(line)
            for msg in r.failures:
                lines.append(f"{'':<{width}}   ! {msg}")
            for msg in r.notes:
                lines.append(f"{'':<{width}}   - {msg}")
        lines.append("overall: " + ("PASS" if self.passed else "FAIL"))
        return "\n".join(lines)


def run_entry(entry: CatalogEntry, weight5: bool = False) -> EntryResult:
    start = time.time()
    failures = []
    notes = []
    computed_type = None
    computed_n5 = None
    struct_flags = {}
    try:
        eq = entry.equation().bound()
        report = structural_report(eq)
        struct_flags = report.to_dict()
        if entry.negative:
            if report.k_vanishes:
                failures.append("negative fixture unexpectedly passes the divergence-form test")
            laws0 = solve_densities(eq, 0, entry.search_options())
            computed_type = [len(laws0), None, None]
            if laws0:
                failures.append(
                    f"expected no nontrivial order-0 laws, found {len(laws0)}")
        else:
            if not report.k_vanishes:
                failures.append("divergence-form test fails")
            elif report.n_vanishes is False:
                failures.append("secondary invariant test fails")
            check_n5 = weight5 and entry.expected_n5 is not None
            triple, _ = classify_type(eq, entry.search_options(),
                                      with_weight5=check_n5)
            computed_type = [triple.n_minus1, triple.n1, triple.n3]
            computed_n5 = triple.n5
            if tuple(computed_type) != entry.expected_type:
                failures.append(
                    f"type mismatch: computed {tuple(computed_type)}, "
                    f"expected {entry.expected_type}")
            if entry.expected_type != entry.classified_type:
                notes.append(
                    f"in-class count {entry.expected_type} differs from classified "
                    f"type {entry.classified_type}: {entry.notes}")
            if check_n5 and computed_n5 != entry.expected_n5:
                failures.append(
                    f"weight-5 count mismatch: computed {computed_n5}, "
                    f"expected {entry.expected_n5}")
    except ExprError as exc:
        failures.append(f"error: {exc}")
    return EntryResult(entry=entry, computed_type=computed_type,
                       computed_n5=computed_n5, struct_flags=struct_flags,
                       passed=not failures, failures=failures, notes=notes,
                       elapsed=time.time() - start)


def run_regression(weight5: bool = False,
                   only: Optional[List[str]] = None,
                   progress=None) -> RegressionReport:
    """Sweep every entry; per-entry failures are collected, never fatal."""
    report = RegressionReport()
    for entry in entries():
        if only and entry.id not in only and entry.family not in only:
            continue
        result = run_entry(entry, weight5=weight5)
        report.results.append(result)
        if progress is not None:
            progress(result)
    return report
