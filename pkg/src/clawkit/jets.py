"""Differential algebra on the x-jet of a scalar evolution equation.

Coordinates are t, x, u = p0, p1, p2, ... with p_i the i-th x-derivative of
u treated as independent.  The context carries the jet-order cap and, when
time derivatives are needed, the evolution right-hand side Q with
u_t = Q(x, u, p1, p2, p3).

Provided derivations:

* total_x  - D_x = d/dx + sum p_{i+1} d/dp_i
* total_t  - D_t e = de/dt + sum (de/dp_i) D_x^i(Q), the derivative on
             solutions of the evolution equation
* euler    - variational derivative E = sum (-D_x)^i d/dp_i; its kernel in
             this expression class is exactly {D_x(sigma) + h(t,x)}
* reduce_by_parts - strip terms whose own highest jet variable is linear,
             producing a canonical low-order density representative
* extract_flux    - invert D_x on expressions with vanishing Euler operator
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Optional

from .expr import (Atom, Expr, ExprError, _JET_NAMES, jet_symbol_name,
                   monomial_degree_in, monomial_max_jet)

DEFAULT_JET_CAP = 12
_ENV_CAP = "CLAWKIT_JET_CAP"


class JetError(ExprError):
    pass


class JetOrderError(JetError):
    """An operation would exceed the configured jet-order cap."""


class MissingEvolutionError(JetError):
    """A time derivative was requested without an evolution right-hand side."""


class NotExactError(JetError):
    """extract_flux input has a nonvanishing Euler operator."""


class NonIntegrableResidualError(JetError):
    """A pure (t,x) residual has no antiderivative in the expression class."""


class _NonElementary(JetError):
    """Internal: a termwise antiderivative left the expression class."""


def default_jet_cap() -> int:
    raw = os.environ.get(_ENV_CAP)
    if raw:
        try:
            cap = int(raw)
        except ValueError:
            raise JetError(f"{_ENV_CAP} must be an integer, got {raw!r}")
        if cap < 4:
            raise JetError(f"{_ENV_CAP} must be at least 4")
        return cap
    return DEFAULT_JET_CAP


@dataclass
class JetContext:
    """Jet-order cap plus the (optional) evolution right-hand side Q."""

    max_order: int = field(default_factory=default_jet_cap)
    rhs: Optional[Expr] = None
    _dxq: list = field(default_factory=list, repr=False)

    def rhs_dx(self, i: int) -> Expr:
        """Cached D_x^i(Q)."""
        if self.rhs is None:
            raise MissingEvolutionError("context has no evolution right-hand side")
        if not self._dxq:
            self._dxq.append(self.rhs)
        while len(self._dxq) <= i:
            self._dxq.append(total_x(self._dxq[-1], self))
        return self._dxq[i]


# Cache of single-atom total-x derivatives; atoms are interned so this is
# shared across contexts (the rule itself has no context dependence).
_TOTAL_X_ATOM: dict = {}


def _atom_total_x(atom: Atom) -> Expr:
    cached = _TOTAL_X_ATOM.get(atom)
    if cached is not None:
        return cached
    if atom.kind == "sym":
        if atom.name == "x":
            out = Expr.one()
        elif atom.name == "t":
            out = Expr.zero()
        else:
            k = _JET_NAMES.get(atom.name)
            out = Expr.jet(k + 1) if k is not None else Expr.zero()
    else:
        inner = _total_x_raw(atom.arg)
        if inner.is_zero():
            out = Expr.zero()
        elif atom.name == "exp":
            out = inner * Expr({((atom, 1),): Expr.one().as_rational()})
        elif atom.name == "log":
            out = inner * atom.arg ** -1
        elif atom.name == "sin":
            out = inner * Expr.apply("cos", atom.arg)
        else:  # cos
            out = -inner * Expr.apply("sin", atom.arg)
    _TOTAL_X_ATOM[atom] = out
    return out


def _total_x_raw(e: Expr) -> Expr:
    out = Expr.zero()
    for mono, coeff in e.terms():
        for i, (atom, exp) in enumerate(mono):
            da = _atom_total_x(atom)
            if da.is_zero():
                continue
            rest = {a: (ex - 1 if j == i else ex)
                    for j, (a, ex) in enumerate(mono)}
            base = Expr._make({_mono_of(rest): coeff * exp})
            out = out + base * da
    return out


def _mono_of(factors: dict):
    return tuple(sorted(((a, e) for a, e in factors.items() if e != 0),
                        key=lambda fe: fe[0].key))


def total_x(e: Expr, ctx: JetContext) -> Expr:
    """Total derivative along x; raises if the result would exceed the cap."""
    order = e.jet_order()
    if order >= ctx.max_order:
        raise JetOrderError(
            f"total_x on order {order} would exceed jet cap {ctx.max_order}")
    return _total_x_raw(e)


def total_t(e: Expr, ctx: JetContext) -> Expr:
    """Evolutionary time derivative of e on solutions of u_t = Q."""
    if ctx.rhs is None:
        raise MissingEvolutionError("total_t requires an evolution right-hand side")
    order = e.jet_order()
    q_order = max(ctx.rhs.jet_order(), 0)
    if order + q_order > ctx.max_order:
        raise JetOrderError(
            f"total_t on order {order} would exceed jet cap {ctx.max_order}")
    out = e.diff("t")
    for i in range(order + 1):
        de = e.diff(jet_symbol_name(i))
        if not de.is_zero():
            out = out + de * ctx.rhs_dx(i)
    return out


def euler(e: Expr, ctx: JetContext) -> Expr:
    """Variational derivative E(e) = sum_i (-D_x)^i (de/dp_i).

    E(e) = 0 exactly when e = D_x(sigma) + h(t,x) within the class.
    """
    order = e.jet_order()
    if order > ctx.max_order // 2:
        raise JetOrderError(
            f"euler on order {order} needs jet cap >= {2 * order}, have {ctx.max_order}")
    if order < 0:
        return Expr.zero()
    # Horner form: S_i = g_i - D_x(S_{i+1}) gives S_0 = sum (-D_x)^i g_i.
    acc = Expr.zero()
    for i in range(order, -1, -1):
        acc = e.diff(jet_symbol_name(i)) - _total_x_raw(acc)
    return acc


def _split_var_factors(mono, name: str):
    """Partition a monomial w.r.t. one symbol: (power, dependent apps, free part)."""
    power = 0
    apps = []
    free = {}
    for atom, exp in mono:
        if atom.kind == "sym" and atom.name == name:
            power = exp
        elif atom.kind == "app" and atom.arg.depends_on(name):
            apps.append((atom, exp))
        else:
            free[atom] = exp
    return power, apps, free


def antiderivative(e: Expr, name: str) -> Expr:
    """Antiderivative of e with respect to the plain symbol `name`.

    Terms are integrated individually (rational powers, and polynomial
    times exp/sin/cos/log factors with arguments linear in the symbol);
    terms that are not elementary one by one are retried together with a
    linear ansatz over partner monomials, which handles combinations like
    d/du (u^-2 cos(2u)).  Raises _NonElementary when no antiderivative in
    the class exists.
    """
    out = Expr.zero()
    failed: dict = {}
    for mono, coeff in e.terms():
        try:
            out = out + _antiderivative_term(mono, coeff, name)
        except _NonElementary:
            failed[mono] = coeff
    if failed:
        out = out + _antiderivative_by_ansatz(Expr._make(failed), name)
    return out


_PARTNERS = {"sin": ("sin", "cos"), "cos": ("sin", "cos"),
             "exp": ("exp",), "log": ("log",)}


def _antiderivative_by_ansatz(e: Expr, name: str) -> Expr:
    """Solve d/d{name} W = e for W over a finite candidate basis.

    Candidates combine nearby powers of the symbol with derivative
    partners of the application factors occurring in e.
    """
    import itertools as _it

    from . import linalg

    v = Expr.symbol(name)
    candidates = []
    seen = set()
    for mono, _ in e.terms():
        power, apps, free = _split_var_factors(mono, name)
        free_e = Expr._make({_mono_of(free): Expr.one().as_rational()})
        variant_lists = []
        for atom, exp_ in apps:
            names = _PARTNERS.get(atom.name, (atom.name,))
            variant_lists.append([Expr.apply(nm, atom.arg) ** exp_
                                  for nm in names])
        for combo in _it.product(*variant_lists) if variant_lists else [()]:
            for k in (power - 1, power, power + 1):
                cand = free_e * v ** k
                for factor in combo:
                    cand = cand * factor
                if cand not in seen and not cand.is_zero():
                    seen.add(cand)
                    candidates.append(cand)
    if not candidates:
        raise _NonElementary(f"no candidate antiderivatives in {name}: {e}")
    derivs = [c.diff(name) for c in candidates]
    columns: dict = {}
    rhs_col = len(candidates)
    for j, d in enumerate(derivs):
        for mono, coeff in d.terms():
            columns.setdefault(mono, {})[j] = coeff
    for mono, coeff in e.terms():
        columns.setdefault(mono, {})[rhs_col] = -coeff
    rows = [dict(row) for _, row in sorted(columns.items(),
                                           key=lambda kv: str(kv[0]))]
    for vec in linalg.nullspace(rows, rhs_col + 1):
        scale = vec.get(rhs_col)
        if scale:
            out = Expr.zero()
            for j, c in vec.items():
                if j != rhs_col:
                    out = out + Expr.rational(c) * candidates[j] / scale
            return out
    raise _NonElementary(f"no elementary antiderivative in {name}: {e}")


def _antiderivative_term(mono, coeff, name: str) -> Expr:
    power, apps, free = _split_var_factors(mono, name)
    base = Expr._make({_mono_of(free): coeff})
    v = Expr.symbol(name)
    if not apps:
        if power == -1:
            return base * Expr.apply("log", v)
        return base * v ** (power + 1) / (power + 1)
    if power < 0:
        raise _NonElementary(
            f"no elementary antiderivative in {name}: {Expr._make({mono: coeff})}")
    n = power
    if all(atom.name == "exp" for atom, _ in apps):
        # Any product of exp factors with arguments linear in the variable:
        # the effective exponent slope is the sum of e_i * d(arg_i)/d(name).
        slope = Expr.zero()
        for atom, e in apps:
            s = atom.arg.diff(name)
            if s.depends_on(name):
                raise _NonElementary(f"exp argument not linear in {name}: {atom}")
            slope = slope + e * s
        if slope.is_zero():
            raise _NonElementary(f"exp factors constant in {name}: {mono}")
        inv_slope = slope ** -1  # single-monomial requirement enforced here
        w = Expr._make({_mono_of(dict(apps)): Expr.one().as_rational()})
        head = base * inv_slope * v ** n * w
        if n == 0:
            return head
        return head - n * inv_slope * antiderivative(base * v ** (n - 1) * w, name)
    if len(apps) > 1 or apps[0][1] != 1:
        raise _NonElementary(
            f"no elementary antiderivative in {name}: {Expr._make({mono: coeff})}")
    atom = apps[0][0]
    slope = atom.arg.diff(name)
    if slope.depends_on(name):
        raise _NonElementary(f"application argument not linear in {name}: {atom}")
    inv_slope = slope ** -1
    func = atom.name
    if func in ("sin", "cos"):
        other = Expr.apply("cos" if func == "sin" else "sin", atom.arg)
        sign = -1 if func == "sin" else 1
        head = sign * base * inv_slope * v ** n * other
        if n == 0:
            return head
        return head - sign * n * inv_slope * antiderivative(
            base * v ** (n - 1) * other, name)
    if func == "log":
        # int v^n log(w) dv = v^(n+1)/(n+1) log(w) - slope/(n+1) int v^(n+1)/w dv
        atom_e = Expr._make({((atom, 1),): Expr.one().as_rational()})
        head = base * v ** (n + 1) / (n + 1) * atom_e
        residue = base * slope / (n + 1) * v ** (n + 1) * atom.arg ** -1
        return head - antiderivative(residue, name)
    raise _NonElementary(f"cannot integrate {func} factor")  # pragma: no cover


def reduce_by_parts(e: Expr, ctx: JetContext):
    """Split e = reduced + D_x(exact) by repeated integration by parts.

    A term is reducible when its own highest jet variable p_k (k >= 1)
    appears linearly; such terms are traded for terms of strictly lower
    top order.  Terms whose antiderivative would leave the expression
    class are left in place.
    """
    order = e.jet_order()
    if order >= ctx.max_order:
        raise JetOrderError(
            f"reduce_by_parts on order {order} exceeds jet cap {ctx.max_order}")
    exact = Expr.zero()
    frozen = Expr.zero()
    current = e
    while True:
        groups: dict = {}
        for mono, coeff in current.terms():
            k = monomial_max_jet(mono)
            if (k >= 1 and monomial_degree_in(mono, jet_symbol_name(k)) == 1
                    and not any(a.kind == "app" and a.arg.jet_order() >= k
                                for a, _ in mono)):
                groups.setdefault(k, []).append((mono, coeff))
        if not groups:
            break
        k = max(groups)
        top = jet_symbol_name(k)
        below = jet_symbol_name(k - 1)
        for mono, coeff in groups[k]:
            term = Expr._make({mono: coeff})
            s_part = term * Expr.symbol(top) ** -1
            try:
                w = antiderivative(s_part, below)
            except _NonElementary:
                frozen = frozen + term
                current = current - term
                continue
            exact = exact + w
            current = current - _total_x_raw(w)
    return current + frozen, exact


def extract_flux(h: Expr, ctx: JetContext) -> Expr:
    """Return F with D_x(F) = h exactly; requires euler(h) = 0."""
    residual = euler(h, ctx)
    if not residual.is_zero():
        raise NotExactError(f"euler operator does not vanish: E = {residual}")
    flux = Expr.zero()
    current = h
    while (k := current.jet_order()) >= 1:
        top = jet_symbol_name(k)
        lead = {}
        rest = {}
        for mono, coeff in current.terms():
            deg = monomial_degree_in(mono, top)
            via_app = any(a.kind == "app" and a.arg.jet_order() >= k for a, _ in mono)
            if deg == 0 and not via_app:
                rest[mono] = coeff
            elif deg == 1 and not via_app:
                lead[mono] = coeff
            else:
                raise NotExactError(
                    f"top jet variable {top} enters nonlinearly in {Expr._make({mono: coeff})}")
        s_part = Expr._make(lead) * Expr.symbol(top) ** -1
        try:
            w = antiderivative(s_part, jet_symbol_name(k - 1))
        except _NonElementary as exc:
            raise NonIntegrableResidualError(str(exc))
        flux = flux + w
        current = current - _total_x_raw(w)
    if current.depends_on("u"):
        raise NotExactError(f"residual still depends on u: {current}")
    if not current.is_zero():
        try:
            flux = flux + antiderivative(current, "x")
        except _NonElementary as exc:
            raise NonIntegrableResidualError(
                f"(t,x) residual has no closed-form antiderivative: {exc}")
    return flux
