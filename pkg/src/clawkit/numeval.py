"""Floating-point evaluation of canonical expressions on numpy arrays.

The symbolic kernel is exact; this module is the single bridge to the
numeric side.  An environment maps symbol names to scalars or arrays;
jet symbols are typically bound to spectral derivatives of a grid
function.
"""

from __future__ import annotations

from typing import Dict, Mapping, Union

import numpy as np

from .expr import Atom, Expr, ExprError

ArrayLike = Union[float, np.ndarray]

_FUNCS = {"exp": np.exp, "log": np.log, "sin": np.sin, "cos": np.cos}


class EvaluationError(ExprError):
    pass


def evaluate(e: Expr, env: Mapping[str, ArrayLike]) -> ArrayLike:
    """Evaluate e with every symbol bound in env (scalar or ndarray)."""
    total: ArrayLike = 0.0
    for mono, coeff in e.terms():
        term: ArrayLike = float(coeff)
        for atom, power in mono:
            term = term * _atom_value(atom, env) ** power
        total = total + term
    return total


def _atom_value(atom: Atom, env: Mapping[str, ArrayLike]) -> ArrayLike:
    if atom.kind == "sym":
        try:
            return env[atom.name]
        except KeyError:
            raise EvaluationError(f"symbol {atom.name!r} is not bound")
    value = evaluate(atom.arg, env)
    return _FUNCS[atom.name](value)
