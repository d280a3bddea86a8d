"""Conservation-law search by determining equations.

The density is an unknown linear combination of ansatz monomials
x^a t^b J A, with J a jet monomial in u, p1..pm and A an optional
transcendental atom.  A combination rho is a conserved density exactly
when euler(total_t(rho)) vanishes identically; collecting the coefficient
of every residual monomial yields a sparse exact linear system for the
unknown coefficients.  Solutions are quotiented by total x-derivatives,
reduced by parts to canonical low-order representatives, and echelonized
under a jet-order-graded monomial order so that the count at each order
is the dimension of the corresponding filtration quotient.

Weights follow the dictionary weight = 2*order - 1, where order is the
highest jet variable of the reduced density (order 0: depends on t, x, u
only).
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from . import linalg
from .expr import (Expr, ExprError, _mono_cmp, monomial_max_jet,
                   jet_symbol_name)
from .jets import JetContext, default_jet_cap, euler, extract_flux, reduce_by_parts, total_t, total_x
from .structure import EvolutionEq

DEFAULT_DEGREE_X = 2
DEFAULT_DEGREE_T = 2
DEFAULT_BASIS_CAP = 20000
DEFAULT_ATOM_MULTIPLES = (Fraction(1, 2), Fraction(1), Fraction(2))

LINEAR_EQUATION_WARNING = ("linear equation: classified type counts apply to "
                           "nonlinear equations only")


class SearchError(ExprError):
    pass


class BasisCapExceeded(SearchError):
    pass


class UnboundParameterError(SearchError):
    pass


def default_jet_degree(order: int) -> int:
    """Default total jet-polynomial degree of the density ansatz."""
    return max(2 * order + 2, 3)


# -- graded monomial order for density echelonization ------------------------

def _graded_cmp(m1, m2) -> int:
    g1, g2 = monomial_max_jet(m1), monomial_max_jet(m2)
    if g1 != g2:
        return 1 if g1 > g2 else -1
    return _mono_cmp(m1, m2)


_graded_key = functools.cmp_to_key(_graded_cmp)


def _graded_leading(e: Expr):
    return max(e._terms, key=_graded_key)


# -- ansatz -------------------------------------------------------------------


@dataclass
class Ansatz:
    """Finite density ansatz: one unknown per basis monomial."""

    m: int
    d_x: int
    d_t: int
    d_u: int
    atoms: List[Expr]
    basis: List[Expr]

    def describe(self) -> dict:
        return {
            "m": self.m,
            "d_x": self.d_x,
            "d_t": self.d_t,
            "d_u": self.d_u,
            "atoms": [str(a) for a in self.atoms],
            "size": len(self.basis),
        }


def harvest_atoms(g: Expr,
                  multiples: Sequence[Fraction] = DEFAULT_ATOM_MULTIPLES) -> List[Expr]:
    """Transcendental atoms for the ansatz, harvested from g.

    Each exp direction found in g contributes exp(c*dir) for c in
    +-multiples; each sin/cos argument contributes sin(c*arg), cos(c*arg)
    for positive c.  Fractional multiples are included because densities
    of equations with a cubic-in-p1 term sit at half the frequency of g.
    """
    exp_dirs = []
    trig_args = []
    seen = set()
    stack = [g]
    while stack:
        e = stack.pop()
        for mono in e._terms:
            for atom, _ in mono:
                if atom.kind != "app":
                    continue
                stack.append(atom.arg)
                if atom.name == "exp":
                    ((direction, _),) = atom.arg._terms.items()
                    d = Expr._make({direction: Fraction(1)})
                    if ("exp", d) not in seen:
                        seen.add(("exp", d))
                        exp_dirs.append(d)
                elif atom.name in ("sin", "cos"):
                    if ("trig", atom.arg) not in seen:
                        seen.add(("trig", atom.arg))
                        trig_args.append(atom.arg)
    out = []
    for d in exp_dirs:
        for c in multiples:
            for sign in (1, -1):
                out.append(Expr.apply("exp", Expr.rational(sign * c) * d))
    for a in trig_args:
        for c in multiples:
            scaled = Expr.rational(c) * a
            out.append(Expr.apply("cos", scaled))
            out.append(Expr.apply("sin", scaled))
    uniq = []
    seen_e = set()
    for a in out:
        if a not in seen_e:
            seen_e.add(a)
            uniq.append(a)
    uniq.sort(key=lambda e: e.sort_key())
    return uniq


def _jet_monomials(m: int, d_u: int) -> List[Expr]:
    """All monomials in u, p1..pm of total degree <= d_u (including 1)."""
    syms = [Expr.jet(i) for i in range(m + 1)]
    out = []

    def rec(idx: int, remaining: int, acc: Expr):
        out.append(acc)
        for j in range(idx, len(syms)):
            if remaining >= 1:
                rec(j, remaining - 1, acc * syms[j])

    rec(0, d_u, Expr.one())
    # Dedupe (rec builds each multiset exactly once, but keep it safe).
    uniq = []
    seen = set()
    for e in out:
        if e not in seen:
            seen.add(e)
            uniq.append(e)
    return uniq


def build_ansatz(eq: EvolutionEq, m: int, d_x: int = DEFAULT_DEGREE_X,
                 d_t: int = DEFAULT_DEGREE_T, d_u: Optional[int] = None,
                 atoms: Optional[Sequence[Expr]] = None,
                 cap: int = DEFAULT_BASIS_CAP) -> Ansatz:
    """Enumerate the density basis (x^a t^b J A) deterministically."""
    if m < 0 or d_x < 0 or d_t < 0:
        raise SearchError("ansatz degrees must be nonnegative")
    if d_u is None:
        d_u = default_jet_degree(m)
    atom_list = list(atoms) if atoms is not None else harvest_atoms(eq.params.apply(eq.g))
    jets = _jet_monomials(m, d_u)
    size = (d_x + 1) * (d_t + 1) * len(jets) * (1 + len(atom_list))
    if size > cap:
        raise BasisCapExceeded(
            f"ansatz would have {size} monomials, cap is {cap}")
    x = Expr.symbol("x")
    t = Expr.symbol("t")
    basis = []
    seen = set()
    for a, b in itertools.product(range(d_x + 1), range(d_t + 1)):
        xt = x ** a * t ** b
        for jet in jets:
            for atom_factor in [None] + atom_list:
                mono = xt * jet if atom_factor is None else xt * jet * atom_factor
                if mono not in seen:
                    seen.add(mono)
                    basis.append(mono)
    basis.sort(key=lambda e: e.sort_key())
    return Ansatz(m=m, d_x=d_x, d_t=d_t, d_u=d_u, atoms=atom_list, basis=basis)


# -- determining system --------------------------------------------------------


@dataclass
class DeterminingSystem:
    """Exact linear system for the ansatz coefficients."""

    ansatz: Ansatz
    equations: List[Dict[int, object]]
    provenance: List[str]  # residual monomial per equation, printable

    def size(self) -> Tuple[int, int]:
        return (len(self.equations), len(self.ansatz.basis))


def _context_for(eq: EvolutionEq, m: int) -> JetContext:
    bound = eq.bound()
    free = ({n for n in bound.params.names()
             if bound.params.binding(n) is None}
            & (bound.f.free_symbols() | bound.g.free_symbols()))
    if free:
        raise UnboundParameterError(
            f"parameters must be bound to rationals for solving: {sorted(free)}")
    rhs = bound.rhs()
    needed = 2 * (m + max(rhs.jet_order(), 3))
    cap = default_jet_cap()
    if needed > cap:
        raise SearchError(
            f"order-{m} search needs jet cap {needed}, have {cap} "
            f"(set {'CLAWKIT_JET_CAP'} to raise it)")
    return JetContext(max_order=cap, rhs=rhs)


def determining_system(eq: EvolutionEq, ansatz: Ansatz,
                       ctx: Optional[JetContext] = None) -> DeterminingSystem:
    """Expand euler(total_t(rho)) and collect one equation per residual monomial.

    The t-powers of the basis are factored out: with rho = t^b * h and h
    t-free, euler(total_t(rho)) = b t^(b-1) euler(h) + t^b euler(total_t(h)),
    so each t-free core is expanded only once.
    """
    if ctx is None:
        ctx = _context_for(eq, ansatz.m)
    t = Expr.symbol("t")
    cores: Dict[Expr, Tuple[Expr, Expr]] = {}
    columns: Dict[object, Dict[int, object]] = {}

    def add(mono, index, coeff):
        row = columns.get(mono)
        if row is None:
            columns[mono] = {index: coeff}
        else:
            row[index] = row.get(index, 0) + coeff

    for index, b_expr in enumerate(ansatz.basis):
        b_t = b_expr.degree_in("t")
        core = b_expr * t ** (-b_t) if b_t else b_expr
        pair = cores.get(core)
        if pair is None:
            e_core = euler(core, ctx)
            e_dt = euler(total_t(core, ctx), ctx)
            cores[core] = (e_core, e_dt)
        else:
            e_core, e_dt = pair
        residual = Expr.zero()
        if b_t:
            residual = residual + b_t * t ** (b_t - 1) * e_core
        residual = residual + t ** b_t * e_dt
        for mono, coeff in residual.terms():
            add(mono, index, coeff)

    ordered = sorted(columns.items(), key=lambda kv: _graded_key(kv[0]))
    equations = []
    provenance = []
    for mono, row in ordered:
        clean = {i: c for i, c in row.items() if c != 0}
        if clean:
            equations.append(clean)
            provenance.append(str(Expr._make({mono: Fraction(1)})))
    return DeterminingSystem(ansatz=ansatz, equations=equations, provenance=provenance)


# -- conservation laws ----------------------------------------------------------


@dataclass
class ConservationLaw:
    rho: Expr
    flux: Expr
    order: int
    weight: int

    def to_dict(self) -> dict:
        return {"rho": str(self.rho), "flux": str(self.flux),
                "order": self.order, "weight": self.weight}


def _trivial_vectors(ansatz: Ansatz, ctx: JetContext) -> List[Dict[int, object]]:
    """In-span generators of the trivial density subspace.

    Pure (t,x) basis monomials are trivial, and so is D_x(sigma) for any
    sigma whose derivative stays inside the basis span.
    """
    index = {b: i for i, b in enumerate(ansatz.basis)}
    out = []
    for b_expr, i in index.items():
        if b_expr.jet_order() < 0:
            out.append({i: 1})
    x = Expr.symbol("x")
    t = Expr.symbol("t")
    seen = set()
    for a, b in itertools.product(range(ansatz.d_x + 1), range(ansatz.d_t + 1)):
        xt = x ** a * t ** b
        for jet in _jet_monomials(max(ansatz.m - 1, 0), ansatz.d_u):
            for atom_factor in [None] + ansatz.atoms:
                sigma = xt * jet if atom_factor is None else xt * jet * atom_factor
                if sigma in seen or sigma.jet_order() >= ansatz.m:
                    continue
                seen.add(sigma)
                try:
                    image = total_x(sigma, ctx)
                except ExprError:
                    continue
                vec = {}
                ok = True
                for mono, coeff in image.terms():
                    j = index.get(Expr._make({mono: Fraction(1)}))
                    if j is None:
                        ok = False
                        break
                    vec[j] = vec.get(j, 0) + coeff
                if ok and vec:
                    out.append(vec)
    return out


def _echelonize_densities(cands: List[Expr]) -> List[Expr]:
    """RREF over monomial coordinates w.r.t. the jet-order-graded order.

    The result is the canonical basis of the span; the number of basis
    densities of each order equals the dimension jump of the filtration
    by jet order.
    """
    pivots: Dict[object, Expr] = {}
    for e in sorted(cands, key=lambda v: v.sort_key()):
        while not e.is_zero():
            lead = _graded_leading(e)
            hit = pivots.get(lead)
            if hit is None:
                break
            e = e - e.coefficient(lead) * hit
        if e.is_zero():
            continue
        lead = _graded_leading(e)
        e = e / e.coefficient(lead)
        for l2 in list(pivots):
            prev = pivots[l2]
            c = prev.coefficient(lead)
            if c != 0:
                pivots[l2] = prev - c * e
        pivots[lead] = e
    ordered = sorted(pivots.items(), key=lambda kv: _graded_key(kv[0]))
    return [e for _, e in ordered]


@dataclass
class SearchOptions:
    d_x: int = DEFAULT_DEGREE_X
    d_t: int = DEFAULT_DEGREE_T
    d_u: Optional[int] = None
    atoms: Optional[List[Expr]] = None
    cap: int = DEFAULT_BASIS_CAP


def solve_densities(eq: EvolutionEq, m: int,
                    opts: Optional[SearchOptions] = None) -> List[ConservationLaw]:
    """All independent nontrivial conservation laws found in the ansatz.

    Every returned law is machine-checked: total_t(rho) = total_x(flux)
    exactly, euler(rho) != 0, and rho is its own by-parts reduction.
    """
    opts = opts or SearchOptions()
    ctx = _context_for(eq, m)
    ansatz = build_ansatz(eq, m, d_x=opts.d_x, d_t=opts.d_t, d_u=opts.d_u,
                          atoms=opts.atoms, cap=opts.cap)
    system = determining_system(eq, ansatz, ctx)
    solutions = linalg.nullspace(system.equations, len(ansatz.basis))

    trivial = linalg.rref(_trivial_vectors(ansatz, ctx))
    reduced_candidates = []
    for vec in solutions:
        r = dict(vec)
        while True:
            hit = None
            for c in r:
                if c in trivial:
                    hit = c
                    break
            if hit is None:
                break
            factor = r.pop(hit)
            for c2, v in trivial[hit].items():
                if c2 == hit:
                    continue
                nv = r.get(c2, 0) - factor * v
                if nv == 0:
                    r.pop(c2, None)
                else:
                    r[c2] = nv
        if not r:
            continue
        rho = Expr.zero()
        for i, c in r.items():
            rho = rho + Expr.rational(c) * ansatz.basis[i]
        rho_red, _ = reduce_by_parts(rho, ctx)
        if rho_red.is_zero() or euler(rho_red, ctx).is_zero():
            continue
        reduced_candidates.append(rho_red)

    laws = []
    for rho in _echelonize_densities(reduced_candidates):
        if euler(rho, ctx).is_zero():
            continue
        d_rho = total_t(rho, ctx)
        flux = extract_flux(d_rho, ctx)
        if not (total_x(flux, ctx) - d_rho).is_zero():
            raise SearchError(f"flux verification failed for density {rho}")
        order = max(rho.jet_order(), 0)
        laws.append(ConservationLaw(rho=rho, flux=flux, order=order,
                                    weight=2 * order - 1))
    laws.sort(key=lambda law: (law.order, _graded_key(_graded_leading(law.rho))))
    return laws


# -- type classification ---------------------------------------------------------


@dataclass
class TypeTriple:
    n_minus1: int
    n1: int
    n3: int
    n5: Optional[int] = None

    def as_list(self) -> list:
        out = [self.n_minus1, self.n1, self.n3]
        if self.n5 is not None:
            out.append(self.n5)
        return out


def is_linear_equation(eq: EvolutionEq) -> bool:
    rhs = eq.bound().rhs()
    names = ["u"] + [jet_symbol_name(i) for i in range(1, max(rhs.jet_order(), 0) + 1)]
    if any(a.kind == "app" and a.arg.jet_order() >= 0
           for a in rhs.atoms()):
        return False
    for n1 in names:
        d = rhs.diff(n1)
        for n2 in names:
            if not d.diff(n2).is_zero():
                return False
    return True


def classify_type(eq: EvolutionEq, opts: Optional[SearchOptions] = None,
                  with_weight5: bool = False) -> Tuple[TypeTriple, Dict[int, List[ConservationLaw]]]:
    """Counts of independent laws at orders 0,1,2 (and 3 when requested).

    Runs solve_densities at each order with the default (or supplied)
    degrees; the count at order k is the number of echelon densities of
    order exactly k in the run with m = k.
    """
    orders = [0, 1, 2] + ([3] if with_weight5 else [])
    by_order: Dict[int, List[ConservationLaw]] = {}
    counts = {}
    for m in orders:
        run_opts = opts or SearchOptions()
        laws = solve_densities(eq, m, run_opts)
        by_order[m] = [law for law in laws if law.order == m]
        counts[m] = len(by_order[m])
    triple = TypeTriple(n_minus1=counts[0], n1=counts[1], n3=counts[2],
                        n5=counts.get(3))
    return triple, by_order


def weight_sequence_probe(eq: EvolutionEq, max_order: int,
                          opts: Optional[SearchOptions] = None) -> dict:
    """Exploratory counts of new laws per order up to max_order."""
    if max_order < 0:
        raise SearchError("max_order must be nonnegative")
    counts = []
    for m in range(max_order + 1):
        laws = solve_densities(eq, m, opts or SearchOptions())
        counts.append((m, len([law for law in laws if law.order == m])))
    warnings = []
    if is_linear_equation(eq):
        warnings.append(LINEAR_EQUATION_WARNING)
    return {"counts": counts, "warnings": warnings,
            "note": "counts are lower bounds relative to the ansatz degrees"}
