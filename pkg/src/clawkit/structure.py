"""Structural classification of u_t = f(x,u,u_x)*u_xxx + g(x,u,u_x,u_xx).

Two scalar invariants of the equation class are decided through their
vanishing loci in local coordinates:

* the divergence-form test (`k_vanishes`): the second-order-in-u_xx content
  of g matches the total derivative (f*u_xx)_x, i.e. g_qq = 2 f_p;
* the secondary test (`n_vanishes`), defined on the divergence-form locus:
  4 f_p^2 = 3 f f_pp and 4 (f_p f_x + p f_p f_u) = 3 f (f_px + p f_pu - f_u).

The report also records whether g is at most quadratic in u_xx, which is a
necessary condition for the equation to carry conservation laws above the
lowest weight.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .expr import Expr, ExprError
from .parser import ParamTable, parse

OBSTRUCTION_NO_LOW_WEIGHT = "no weight -1 laws"
OBSTRUCTION_G_CUBIC = ("higher-weight laws require g at most quadratic in u_xx "
                       "(necessary condition only)")


class EquationError(ExprError):
    """The pair (f, g) does not define a valid equation of the class."""


class PreconditionViolated(ExprError):
    """The secondary invariant test requires the divergence-form test to pass."""


@dataclass(frozen=True)
class EvolutionEq:
    """Validated equation u_t = f*p3 + g with its parameter table."""

    f: Expr
    g: Expr
    params: ParamTable = field(default_factory=ParamTable)

    def rhs(self) -> Expr:
        return self.f * Expr.jet(3) + self.g

    def bound(self) -> "EvolutionEq":
        """Equation with every bound parameter substituted by its rational."""
        return EvolutionEq(self.params.apply(self.f), self.params.apply(self.g),
                           self.params.copy())

    def describe(self) -> dict:
        return {"f": str(self.f), "g": str(self.g), "params": self.params.as_dict()}


@dataclass
class StructReport:
    k_vanishes: bool
    n_vanishes: Optional[bool]
    g_quadratic_in_q: bool
    normal_form_detected: Optional[str]
    predicted_obstructions: list

    def to_dict(self) -> dict:
        return {
            "k_vanishes": self.k_vanishes,
            "n_vanishes": self.n_vanishes,
            "g_quadratic_in_q": self.g_quadratic_in_q,
            "normal_form_detected": self.normal_form_detected,
            "predicted_obstructions": list(self.predicted_obstructions),
        }


def validate_equation(f: Expr, g: Expr,
                      params: Optional[ParamTable] = None) -> EvolutionEq:
    """Check the class constraints on (f, g) and build an EvolutionEq."""
    if f.is_zero():
        raise EquationError("f vanishes identically")
    if f.depends_on("t") or g.depends_on("t"):
        raise EquationError("f and g must not depend on t")
    if f.jet_order() >= 2:
        raise EquationError("f may depend on x, u, p1 only")
    if g.jet_order() >= 3:
        raise EquationError("g may depend on x, u, p1, p2 only")
    return EvolutionEq(f, g, params.copy() if params is not None else ParamTable())


def equation_from_strings(f_text: str, g_text: str,
                          params: Optional[ParamTable] = None) -> EvolutionEq:
    table = params if params is not None else ParamTable()
    return validate_equation(parse(f_text, table), parse(g_text, table), table)


def k_invariant_vanishes(eq: EvolutionEq) -> bool:
    """True iff g_qq = 2 f_p, the divergence normal form u_t = (f q)_x + ... ."""
    g_qq = eq.g.diff("p2").diff("p2")
    f_p = eq.f.diff("p1")
    return (g_qq - 2 * f_p).is_zero()


def n_invariant_vanishes(eq: EvolutionEq) -> bool:
    """Secondary invariant test; only defined on the k-vanishing locus."""
    if not k_invariant_vanishes(eq):
        raise PreconditionViolated(
            "the secondary test is defined only when the divergence-form test passes")
    f = eq.f
    f_p = f.diff("p1")
    first = 4 * f_p ** 2 - 3 * f * f.diff("p1").diff("p1")
    if not first.is_zero():
        return False
    p1 = Expr.symbol("p1")
    lhs = 4 * (f_p * f.diff("x") + p1 * f_p * f.diff("u"))
    rhs = 3 * f * (f_p.diff("x") + p1 * f_p.diff("u") - f.diff("u"))
    return (lhs - rhs).is_zero()


def structural_report(eq: EvolutionEq) -> StructReport:
    k = k_invariant_vanishes(eq)
    n = n_invariant_vanishes(eq) if k else None
    g_quad = eq.g.diff("p2").diff("p2").diff("p2").is_zero()
    normal_form = None
    if eq.f.is_one() and eq.g.jet_order() <= 1:
        normal_form = "u_xxx + g(x,u,p)"
    obstructions = []
    if not k:
        obstructions.append(OBSTRUCTION_NO_LOW_WEIGHT)
    if not g_quad:
        obstructions.append(OBSTRUCTION_G_CUBIC)
    return StructReport(k_vanishes=k, n_vanishes=n, g_quadratic_in_q=g_quad,
                        normal_form_detected=normal_form,
                        predicted_obstructions=obstructions)
