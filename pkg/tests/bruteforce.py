"""Brute-force enumeration oracles used to cross-check the real solver.

Deliberately dumb: enumerate every assignment in an integer box and
evaluate.  Vectorized with numpy so four-variable boxes stay affordable,
but still completely independent of ctpverify.solver.
"""

from __future__ import annotations

from typing import Optional

import numpy as np

from ctpverify.formula import (
    And,
    Atom,
    BoolConst,
    Formula,
    Implies,
    LinTerm,
    Not,
    Or,
    Rel,
    free_vars,
)

_REL_NUMPY = {
    Rel.EQ: lambda a, b: a == b,
    Rel.NEQ: lambda a, b: a != b,
    Rel.LE: lambda a, b: a <= b,
    Rel.LT: lambda a, b: a < b,
    Rel.GE: lambda a, b: a >= b,
    Rel.GT: lambda a, b: a > b,
}


def _eval_term(t: LinTerm, grids: dict):
    total = np.int64(t.constant)
    for v, c in t.coeffs:
        total = total + np.int64(c) * grids[v]
    return total


def _eval(f: Formula, grids: dict):
    if isinstance(f, BoolConst):
        return np.bool_(f.value)
    if isinstance(f, Atom):
        return _REL_NUMPY[f.rel](_eval_term(f.lhs, grids), _eval_term(f.rhs, grids))
    if isinstance(f, Not):
        return ~_eval(f.operand, grids)
    if isinstance(f, And):
        out = _eval(f.children[0], grids)
        for c in f.children[1:]:
            out = out & _eval(c, grids)
        return out
    if isinstance(f, Or):
        out = _eval(f.children[0], grids)
        for c in f.children[1:]:
            out = out | _eval(c, grids)
        return out
    if isinstance(f, Implies):
        return ~_eval(f.antecedent, grids) | _eval(f.consequent, grids)
    raise TypeError(f"not a formula: {f!r}")


def brute_force_sat(f: Formula, lo: int = -20, hi: int = 20) -> Optional[dict]:
    """First satisfying assignment over [lo, hi]^n, or None."""
    names = sorted(free_vars(f))
    axis = np.arange(lo, hi + 1, dtype=np.int64)
    grids = dict(zip(names, np.meshgrid(*[axis] * len(names), indexing="ij", sparse=True)))
    result = np.broadcast_to(_eval(f, grids), (len(axis),) * len(names))
    flat = np.flatnonzero(result.ravel())
    if flat.size == 0:
        return None
    coords = np.unravel_index(int(flat[0]), result.shape)
    return {name: int(axis[i]) for name, i in zip(names, coords)}
