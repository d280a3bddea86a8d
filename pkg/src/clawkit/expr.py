"""Exact symbolic expressions over jet coordinates.

An expression is a sparse sum of monomials with rational coefficients.  A
monomial is a product of integer powers of *atoms*: the symbols t, x, u,
p1..pN (u is the 0th jet variable, p_i its i-th x-derivative), named
parameters, and transcendental applications exp/log/sin/cos of a
sub-expression.  All arithmetic is exact; floats are rejected outright.

Canonical-form rules, applied eagerly on construction:

* sums are flattened, like monomials merged, zero coefficients dropped;
* exp of a sum splits into a product of exp factors, and exp factors whose
  arguments are rational multiples of the same monomial merge, so that
  e.g. exp(u)*exp(u/2) and exp(3/2*u) normalize identically;
* cosh/sinh are rewritten in terms of exp on input;
* products of positive powers of sin/cos linearize into the Fourier basis
  (product-to-sum), so sin(u)^2 + cos(u)^2 collapses to 1;
* sin/cos arguments are sign-normalized (sin is odd, cos even).

Division is supported only through negative integer powers of a single
monomial; quotients by sums are rejected.
"""

from __future__ import annotations

import functools
from fractions import Fraction
from typing import Iterator, Mapping, Union

try:
    from gmpy2 import mpq as _RAT
except ImportError:  # pragma: no cover - gmpy2 is an optional speedup
    _RAT = Fraction

RatLike = Union[int, Fraction, "_RAT"]

_ZERO = _RAT(0)
_ONE = _RAT(1)

MAX_JET = 20
_JET_NAMES = {"u": 0}
_JET_NAMES.update({f"p{i}": i for i in range(1, MAX_JET + 1)})
_FUNCTIONS = ("exp", "log", "sin", "cos")
_FUNC_INDEX = {name: i for i, name in enumerate(_FUNCTIONS)}
_INPUT_FUNCTIONS = _FUNCTIONS + ("sinh", "cosh")
RESERVED_NAMES = frozenset({"t", "x", "u", "p", "q"}
                           | {f"p{i}" for i in range(1, MAX_JET + 1)}
                           | set(_INPUT_FUNCTIONS))


class ExprError(Exception):
    """Base class for expression-kernel failures."""


class DivisionError(ExprError):
    """Division or inversion that would leave the expression class."""


class CyclicBindingError(ExprError):
    """Chained substitution failed to reach a fixed point."""


def as_rational(value: RatLike) -> "_RAT":
    """Coerce an exact numeric value; floats are refused."""
    if isinstance(value, bool) or isinstance(value, float):
        raise TypeError(f"exact rational required, got {value!r}")
    if isinstance(value, int):
        return _RAT(value)
    if isinstance(value, Fraction) or type(value) is type(_ZERO):
        return _RAT(value)
    raise TypeError(f"exact rational required, got {type(value).__name__}")


def _sym_rank(name: str) -> tuple:
    if name == "t":
        return (0, 0)
    if name == "x":
        return (1, 0)
    if name in _JET_NAMES:
        return (2, _JET_NAMES[name])
    return (3, name)


class Atom:
    """Interned multiplicative atom: a symbol or a function application."""

    __slots__ = ("kind", "name", "arg", "key", "_hash")

    _sym_cache: dict = {}
    _app_cache: dict = {}

    def __init__(self, kind: str, name: str, arg: "Expr | None", key: tuple):
        self.kind = kind
        self.name = name
        self.arg = arg
        self.key = key
        self._hash = hash(key)

    @staticmethod
    def symbol(name: str) -> "Atom":
        atom = Atom._sym_cache.get(name)
        if atom is None:
            atom = Atom("sym", name, None, (0,) + _sym_rank(name))
            Atom._sym_cache[name] = atom
        return atom

    @staticmethod
    def app(func: str, arg: "Expr") -> "Atom":
        cache_key = (func, arg)
        atom = Atom._app_cache.get(cache_key)
        if atom is None:
            key = (1, _FUNC_INDEX[func], arg.sort_key())
            atom = Atom("app", func, arg, key)
            Atom._app_cache[cache_key] = atom
        return atom

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other) -> bool:
        return self is other or (isinstance(other, Atom) and self.key == other.key)

    def __lt__(self, other: "Atom") -> bool:
        return self.key < other.key

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"Atom({self})"

    def __str__(self) -> str:
        if self.kind == "sym":
            return self.name
        return f"{self.name}({self.arg})"


# A monomial is a tuple of (atom, exponent) pairs sorted by atom key; the
# empty tuple is the unit monomial.
Monomial = tuple

_UNIT: Monomial = ()


def _mono_degree(mono: Monomial) -> int:
    return sum(e for _, e in mono)


def _mono_cmp(m1: Monomial, m2: Monomial) -> int:
    """Degree-lexicographic order; symbols rank t < x < u < p1 < ... < params.

    Ties break on the exponent of the largest atom where the monomials
    differ, so that e.g. p1 > u > x > t among degree-one monomials.
    """
    d1, d2 = _mono_degree(m1), _mono_degree(m2)
    if d1 != d2:
        return 1 if d1 > d2 else -1
    i, j = len(m1) - 1, len(m2) - 1
    while i >= 0 or j >= 0:
        if i >= 0 and (j < 0 or m1[i][0].key > m2[j][0].key):
            e1, e2 = m1[i][1], 0
            i -= 1
        elif j >= 0 and (i < 0 or m2[j][0].key > m1[i][0].key):
            e1, e2 = 0, m2[j][1]
            j -= 1
        else:
            e1, e2 = m1[i][1], m2[j][1]
            i -= 1
            j -= 1
        if e1 != e2:
            return 1 if e1 > e2 else -1
    return 0


_mono_sort_key = functools.cmp_to_key(_mono_cmp)


def _mono_static_key(mono: Monomial) -> tuple:
    return tuple((atom.key, e) for atom, e in mono)


def _trig_parity_sign(func: str, arg: "Expr") -> tuple:
    """Sign-normalize a sin/cos argument. Returns (sign, normalized arg)."""
    lead = arg.leading_coefficient()
    if lead < 0:
        return (-1 if func == "sin" else 1), -arg
    return 1, arg


def _exp_factors(arg: "Expr") -> list:
    """Split exp(sum) into per-monomial factors: [(direction mono, rational)]."""
    return [(mono, coeff) for mono, coeff in arg._terms.items()]


def _emit_exp(direction: Monomial, multiple) -> tuple:
    """Build the canonical (atom, exponent) pair for exp(multiple * direction)."""
    num, den = multiple.numerator, multiple.denominator
    inner = Expr._make({direction: _RAT(1, den)}) if den != 1 else Expr._make({direction: _ONE})
    return Atom.app("exp", inner), int(num)


class Expr:
    """Immutable canonical expression. Use module helpers or parse() to build."""

    __slots__ = ("_terms", "_hash", "_skey", "_ordered", "_jorder")

    def __init__(self, terms: dict):
        # Internal: use _make so zero coefficients never survive.
        self._terms = terms
        self._hash = None
        self._skey = None
        self._ordered = None
        self._jorder = None

    # -- construction -----------------------------------------------------

    @staticmethod
    def _make(terms: dict) -> "Expr":
        return Expr({m: c for m, c in terms.items() if c != 0})

    @staticmethod
    def rational(value: RatLike) -> "Expr":
        c = as_rational(value)
        return Expr._make({_UNIT: c})

    @staticmethod
    def symbol(name: str) -> "Expr":
        return Expr({((Atom.symbol(name), 1),): _ONE})

    @staticmethod
    def jet(i: int) -> "Expr":
        if not 0 <= i <= MAX_JET:
            raise ExprError(f"jet index {i} outside supported range 0..{MAX_JET}")
        return Expr.symbol("u" if i == 0 else f"p{i}")

    @staticmethod
    def apply(func: str, arg: "Expr") -> "Expr":
        """Canonical transcendental application."""
        if func == "cosh":
            e = Expr.apply("exp", arg)
            return (e + e ** -1) / 2 if not arg.is_zero() else Expr.one()
        if func == "sinh":
            if arg.is_zero():
                return Expr.zero()
            e = Expr.apply("exp", arg)
            return (e - e ** -1) / 2
        if func not in _FUNC_INDEX:
            raise ExprError(f"unknown function {func!r}")
        if func == "exp":
            if arg.is_zero():
                return Expr.one()
            factors: dict = {}
            for direction, multiple in _exp_factors(arg):
                atom, power = _emit_exp(direction, multiple)
                factors[atom] = factors.get(atom, 0) + power
            mono = _factors_to_mono(factors)
            return Expr({mono: _ONE})
        if func == "log":
            if arg.is_zero():
                raise ExprError("log of zero")
            if arg.is_one():
                return Expr.zero()
            return Expr({((Atom.app("log", arg), 1),): _ONE})
        # sin / cos
        if arg.is_zero():
            return Expr.zero() if func == "sin" else Expr.one()
        sign, arg = _trig_parity_sign(func, arg)
        return Expr({((Atom.app(func, arg), 1),): _RAT(sign)})

    @staticmethod
    def zero() -> "Expr":
        return _EXPR_ZERO

    @staticmethod
    def one() -> "Expr":
        return _EXPR_ONE

    # -- predicates and views ---------------------------------------------

    def is_zero(self) -> bool:
        return not self._terms

    def is_one(self) -> bool:
        return self._terms == {_UNIT: _ONE}

    def is_rational(self) -> bool:
        return not self._terms or (len(self._terms) == 1 and _UNIT in self._terms)

    def as_rational(self):
        if not self.is_rational():
            raise ExprError(f"not a rational constant: {self}")
        return self._terms.get(_UNIT, _ZERO)

    def terms(self) -> Iterator[tuple]:
        return iter(self._terms.items())

    def num_terms(self) -> int:
        return len(self._terms)

    def ordered_terms(self) -> list:
        """Terms sorted by descending monomial order (leading first)."""
        if self._ordered is None:
            self._ordered = sorted(self._terms.items(),
                                   key=lambda kv: _mono_sort_key(kv[0]),
                                   reverse=True)
        return self._ordered

    def leading_monomial(self) -> Monomial:
        if not self._terms:
            raise ExprError("zero expression has no leading monomial")
        return self.ordered_terms()[0][0]

    def leading_coefficient(self):
        if not self._terms:
            return _ZERO
        return self.ordered_terms()[0][1]

    def coefficient(self, mono: Monomial):
        return self._terms.get(mono, _ZERO)

    def sort_key(self) -> tuple:
        if self._skey is None:
            self._skey = tuple(sorted((_mono_static_key(m), (int(c.numerator), int(c.denominator)))
                                      for m, c in self._terms.items()))
        return self._skey

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(self.sort_key())
        return self._hash

    def __eq__(self, other) -> bool:
        if not isinstance(other, Expr):
            return NotImplemented
        return self._terms == other._terms

    # -- structural scans ---------------------------------------------------

    def atoms(self) -> set:
        out = set()
        for mono in self._terms:
            for atom, _ in mono:
                out.add(atom)
        return out

    def free_symbols(self) -> set:
        """All symbol names occurring anywhere, including inside applications."""
        out: set = set()
        stack = [self]
        while stack:
            e = stack.pop()
            for mono in e._terms:
                for atom, _ in mono:
                    if atom.kind == "sym":
                        out.add(atom.name)
                    else:
                        stack.append(atom.arg)
        return out

    def jet_order(self) -> int:
        """Highest jet index occurring (u counts as 0); -1 if none occurs."""
        if self._jorder is None:
            order = -1
            stack = [self]
            while stack:
                e = stack.pop()
                for mono in e._terms:
                    for atom, _ in mono:
                        if atom.kind == "sym":
                            k = _JET_NAMES.get(atom.name)
                            if k is not None and k > order:
                                order = k
                        else:
                            stack.append(atom.arg)
            self._jorder = order
        return self._jorder

    def depends_on(self, name: str) -> bool:
        return name in self.free_symbols()

    def degree_in(self, name: str) -> int:
        """Maximum exponent of the plain symbol across monomials (0 if absent)."""
        atom = Atom.symbol(name)
        deg = 0
        for mono in self._terms:
            for a, e in mono:
                if a is atom:
                    deg = max(deg, e)
        return deg

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other) -> "Expr":
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if not self._terms:
            return other
        if not other._terms:
            return self
        terms = dict(self._terms)
        for mono, c in other._terms.items():
            acc = terms.get(mono)
            if acc is None:
                terms[mono] = c
            else:
                acc = acc + c
                if acc == 0:
                    del terms[mono]
                else:
                    terms[mono] = acc
        return Expr(terms)

    __radd__ = __add__

    def __neg__(self) -> "Expr":
        return Expr({m: -c for m, c in self._terms.items()})

    def __sub__(self, other) -> "Expr":
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> "Expr":
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other) -> "Expr":
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if not self._terms or not other._terms:
            return _EXPR_ZERO
        if other.is_rational():
            c = other.as_rational()
            return Expr({m: v * c for m, v in self._terms.items()})
        if self.is_rational():
            c = self.as_rational()
            return Expr({m: v * c for m, v in other._terms.items()})
        acc: dict = {}
        for m1, c1 in self._terms.items():
            for m2, c2 in other._terms.items():
                for mono, coeff in _mul_mono(m1, m2, c1 * c2):
                    prev = acc.get(mono)
                    if prev is None:
                        acc[mono] = coeff
                    else:
                        prev = prev + coeff
                        if prev == 0:
                            del acc[mono]
                        else:
                            acc[mono] = prev
        return Expr._make(acc)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "Expr":
        if not isinstance(n, int):
            raise TypeError("exponent must be an integer")
        if n == 0:
            return _EXPR_ONE
        if n < 0:
            return self._invert() ** (-n) if n != -1 else self._invert()
        result = None
        base = self
        k = n
        while k:
            if k & 1:
                result = base if result is None else result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def _invert(self) -> "Expr":
        if len(self._terms) != 1:
            raise DivisionError(f"cannot invert a sum: {self}")
        (mono, coeff), = self._terms.items()
        inv = {atom: -e for atom, e in mono}
        acc: dict = {}
        for m, c in _mul_mono(_factors_to_mono(inv), _UNIT, _ONE / coeff):
            acc[m] = acc.get(m, _ZERO) + c
        return Expr._make(acc)

    def __truediv__(self, other) -> "Expr":
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if other.is_zero():
            raise ZeroDivisionError("division by zero expression")
        if other.is_rational():
            c = other.as_rational()
            return Expr({m: v / c for m, v in self._terms.items()})
        return self * other._invert()

    def __rtruediv__(self, other) -> "Expr":
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other / self

    # -- calculus -----------------------------------------------------------

    def diff(self, name: str) -> "Expr":
        """Exact partial derivative; all jet symbols are independent."""
        sym = Atom.symbol(name)
        out = _EXPR_ZERO
        for mono, coeff in self._terms.items():
            out = out + _diff_mono(mono, coeff, sym)
        return out

    def substitute(self, bindings: Mapping[str, "Expr | RatLike"],
                   chain: bool = False) -> "Expr":
        """Simultaneous substitution of symbols, then canonicalization.

        With chain=True, bindings are re-applied until a fixed point.  A
        cycle among distinct keys raises CyclicBindingError.
        """
        mapping = {name: (val if isinstance(val, Expr) else Expr.rational(val))
                   for name, val in bindings.items()}
        result = self._subs_once(mapping)
        if not chain:
            return result
        for _ in range(len(mapping) + 1):
            nxt = result._subs_once(mapping)
            if nxt == result:
                return result
            result = nxt
        raise CyclicBindingError(f"cyclic binding among {sorted(mapping)}")

    def _subs_once(self, mapping: Mapping[str, "Expr"]) -> "Expr":
        out = _EXPR_ZERO
        for mono, coeff in self._terms.items():
            term = Expr.rational(coeff)
            for atom, e in mono:
                if atom.kind == "sym":
                    rep = mapping.get(atom.name)
                    base = rep if rep is not None else Expr({((atom, 1),): _ONE})
                else:
                    base = Expr.apply(atom.name, atom.arg._subs_once(mapping))
                term = term * base ** e
            out = out + term
        return out

    # -- printing -----------------------------------------------------------

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        pieces = []
        for idx, (mono, coeff) in enumerate(self.ordered_terms()):
            sign = "-" if coeff < 0 else "+"
            body = _format_term(mono, abs(coeff))
            if idx == 0:
                pieces.append(body if sign == "+" else "-" + body)
            else:
                pieces.append(f" {sign} {body}")
        return "".join(pieces)

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"Expr({self})"


def _coerce(value) -> "Expr":
    if isinstance(value, Expr):
        return value
    if isinstance(value, bool) or isinstance(value, float):
        return NotImplemented
    if isinstance(value, (int, Fraction)) or type(value) is type(_ZERO):
        return Expr.rational(value)
    return NotImplemented


def _factors_to_mono(factors: dict) -> Monomial:
    return tuple(sorted(((a, e) for a, e in factors.items() if e != 0),
                        key=lambda fe: fe[0].key))


def _mul_mono(m1: Monomial, m2: Monomial, coeff) -> list:
    """Multiply two monomials; result is a list of (monomial, coeff) terms.

    exp factors with proportional arguments merge exactly; products of
    positive powers of sin/cos linearize into single-harmonic terms.
    """
    factors: dict = {}
    for atom, e in m1:
        factors[atom] = factors.get(atom, 0) + e
    for atom, e in m2:
        factors[atom] = factors.get(atom, 0) + e

    exp_total: dict = {}
    trig_stack: list = []
    plain: dict = {}
    for atom, e in factors.items():
        if e == 0:
            continue
        if atom.kind == "app" and atom.name == "exp":
            ((direction, multiple),) = atom.arg._terms.items()
            key = direction
            exp_total[key] = exp_total.get(key, _ZERO) + multiple * e
        elif atom.kind == "app" and atom.name in ("sin", "cos") and e > 0:
            trig_stack.extend([(atom.name, atom.arg)] * e)
        else:
            plain[atom] = plain.get(atom, 0) + e
    for direction, total in exp_total.items():
        if total == 0:
            continue
        atom, power = _emit_exp(direction, total)
        plain[atom] = plain.get(atom, 0) + power

    if not trig_stack:
        return [(_factors_to_mono(plain), coeff)]

    # Fold the trig factors: terms carry at most one (func, arg) trig part.
    terms = [(None, coeff)]
    for func, arg in trig_stack:
        new_terms = []
        for trig, c in terms:
            if trig is None:
                new_terms.append(((func, arg), c))
                continue
            f1, a1 = trig
            half = c / 2
            if f1 == "sin" and func == "sin":
                new_terms.append((("cos", a1 - arg), half))
                new_terms.append((("cos", a1 + arg), -half))
            elif f1 == "cos" and func == "cos":
                new_terms.append((("cos", a1 - arg), half))
                new_terms.append((("cos", a1 + arg), half))
            else:
                sin_arg, cos_arg = (a1, arg) if f1 == "sin" else (arg, a1)
                new_terms.append((("sin", sin_arg + cos_arg), half))
                new_terms.append((("sin", sin_arg - cos_arg), half))
        terms = new_terms

    out = []
    for trig, c in terms:
        if c == 0:
            continue
        if trig is None:
            out.append((_factors_to_mono(plain), c))
            continue
        func, arg = trig
        if arg.is_zero():
            if func == "sin":
                continue
            out.append((_factors_to_mono(plain), c))
            continue
        sign, arg = _trig_parity_sign(func, arg)
        fac = dict(plain)
        atom = Atom.app(func, arg)
        fac[atom] = fac.get(atom, 0) + 1
        out.append((_factors_to_mono(fac), c * sign))
    return out


def _atom_derivative(atom: Atom, sym: Atom) -> "Expr":
    """d(atom)/d(sym) for a single atom (chain rule through applications)."""
    if atom.kind == "sym":
        return _EXPR_ONE if atom is sym else _EXPR_ZERO
    inner = atom.arg.diff(sym.name)
    if inner.is_zero():
        return _EXPR_ZERO
    if atom.name == "exp":
        return inner * Expr({((atom, 1),): _ONE})
    if atom.name == "log":
        return inner * atom.arg._invert()
    if atom.name == "sin":
        return inner * Expr.apply("cos", atom.arg)
    if atom.name == "cos":
        return -inner * Expr.apply("sin", atom.arg)
    raise ExprError(f"no derivative rule for {atom.name}")  # pragma: no cover


def _diff_mono(mono: Monomial, coeff, sym: Atom) -> "Expr":
    # d(a^e) = e * a^(e-1) * da, where da for applications carries the chain
    # rule (and for exp already contains the atom itself).
    out = _EXPR_ZERO
    for i, (atom, e) in enumerate(mono):
        da = _atom_derivative(atom, sym)
        if da.is_zero():
            continue
        rest: dict = {}
        for j, (a2, e2) in enumerate(mono):
            rest[a2] = e2 - 1 if j == i else e2
        base = Expr({_factors_to_mono(rest): coeff * e})
        out = out + base * da
    return out


def _format_coeff(c) -> str:
    if c.denominator == 1:
        return str(c.numerator)
    return f"{c.numerator}/{c.denominator}"


def _format_term(mono: Monomial, coeff) -> str:
    parts = []
    if not mono:
        return _format_coeff(coeff)
    if coeff != 1:
        parts.append(_format_coeff(coeff))
    for atom, e in mono:
        s = str(atom)
        if e != 1:
            s += f"^{e}"
        parts.append(s)
    return "*".join(parts)


_EXPR_ZERO = Expr({})
_EXPR_ONE = Expr({_UNIT: _ONE})


# -- convenience constructors ------------------------------------------------

def num(value: RatLike) -> Expr:
    return Expr.rational(value)


def sym(name: str) -> Expr:
    return Expr.symbol(name)


T = Expr.symbol("t")
X = Expr.symbol("x")
U = Expr.symbol("u")


def p(i: int) -> Expr:
    return Expr.jet(i)


def jet_symbol_name(i: int) -> str:
    return "u" if i == 0 else f"p{i}"


def monomial_jet_degree(mono: Monomial) -> int:
    """Total degree in the plain jet symbols u, p1, p2, ... (atoms excluded)."""
    deg = 0
    for atom, e in mono:
        if atom.kind == "sym" and atom.name in _JET_NAMES:
            deg += e
    return deg


def monomial_max_jet(mono: Monomial) -> int:
    """Highest jet index among plain symbols and application arguments."""
    order = -1
    for atom, e in mono:
        if atom.kind == "sym":
            k = _JET_NAMES.get(atom.name)
            if k is not None:
                order = max(order, k)
        else:
            order = max(order, atom.arg.jet_order())
    return order


def monomial_degree_in(mono: Monomial, name: str) -> int:
    atom = Atom.symbol(name)
    for a, e in mono:
        if a is atom:
            return e
    return 0
