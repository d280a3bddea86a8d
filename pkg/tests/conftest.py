"""Shared fixtures and bounded random-expression strategies."""

from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import strategies as st

from clawkit.expr import Expr
from clawkit.jets import JetContext
from clawkit.linalg import rref
from clawkit.parser import parse
from clawkit.structure import equation_from_strings

SMALL_RATIONALS = st.builds(
    Fraction,
    st.integers(min_value=-9, max_value=9),
    st.integers(min_value=1, max_value=4),
)

_SYMBOLS = ["t", "x", "u", "p1", "p2", "p3"]


@st.composite
def atom_exprs(draw):
    """A transcendental atom applied to a simple argument."""
    func = draw(st.sampled_from(["exp", "sin", "cos"]))
    arg_sym = draw(st.sampled_from(["x", "u"]))
    mult = draw(st.sampled_from([1, 2, Fraction(1, 2), -1]))
    return Expr.apply(func, Expr.rational(mult) * Expr.symbol(arg_sym))


@st.composite
def bounded_exprs(draw, max_terms: int = 4, with_atoms: bool = True,
                  symbols=None):
    """Small canonical expressions: sums of monomials over a bounded alphabet."""
    names = symbols if symbols is not None else _SYMBOLS
    n_terms = draw(st.integers(min_value=1, max_value=max_terms))
    total = Expr.zero()
    for _ in range(n_terms):
        coeff = draw(SMALL_RATIONALS)
        if coeff == 0:
            coeff = Fraction(1)
        term = Expr.rational(coeff)
        n_factors = draw(st.integers(min_value=0, max_value=3))
        for _ in range(n_factors):
            if with_atoms and draw(st.booleans()) and draw(st.booleans()):
                factor = draw(atom_exprs())
            else:
                name = draw(st.sampled_from(names))
                power = draw(st.sampled_from([1, 1, 2, 3, -1]))
                factor = Expr.symbol(name) ** power
            term = term * factor
        total = total + term
    return total


@pytest.fixture
def kdv():
    return equation_from_strings("1", "u*p1")


@pytest.fixture
def mkdv():
    return equation_from_strings("1", "(u^2/2)*p1")


@pytest.fixture
def kdv_ctx(kdv):
    return JetContext(rhs=kdv.rhs())


def span_contains(basis_exprs, target: Expr) -> bool:
    """Exact rational check that target lies in the linear span of the basis."""
    monomials = {}
    rows = []
    for e in basis_exprs:
        row = {}
        for mono, coeff in e.terms():
            idx = monomials.setdefault(mono, len(monomials))
            row[idx] = coeff
        rows.append(row)
    target_row = {}
    for mono, coeff in target.terms():
        if mono not in monomials:
            return False
        target_row[monomials[mono]] = coeff
    pivots = rref(rows)
    r = dict(target_row)
    while True:
        hit = next((c for c in r if c in pivots), None)
        if hit is None:
            break
        factor = r.pop(hit)
        for c2, v in pivots[hit].items():
            if c2 == hit:
                continue
            nv = r.get(c2, 0) - factor * v
            if nv == 0:
                r.pop(c2, None)
            else:
                r[c2] = nv
    return not r


def P(text: str, params=None) -> Expr:
    return parse(text, params)
