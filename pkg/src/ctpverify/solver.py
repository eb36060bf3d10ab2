"""Sound and complete satisfiability for linear integer arithmetic.

The pipeline is classic: negation normal form, disjunctive normal form,
then each conjunct of linear constraints is decided exactly by variable
elimination in the style of the omega test.  Equalities are eliminated by
unimodular coefficient reduction and back-substitution; inequalities by
shadow projection, falling back to dark-shadow plus splinter enumeration
when the projection is inexact.  Everything runs on Python's unbounded
integers, so large constants are fine.

Work is metered: every DNF conjunct and every elimination step spends
from a budget, and exhausting it raises SolverBudgetError (never a wrong
answer).
"""

from __future__ import annotations

import itertools
from math import gcd
from typing import Iterator, Optional

from .formula import (
    FALSE,
    TRUE,
    And,
    Atom,
    BoolConst,
    Formula,
    Implies,
    Model,
    Not,
    Or,
    Rel,
    conj,
    eval_formula,
    free_vars,
    neg,
    simplify,
)

DEFAULT_BUDGET = 10**6


class SolverBudgetError(Exception):
    """The decision procedure ran out of budget; the query is undecided."""


_FRESH = itertools.count()


class Budget:
    __slots__ = ("remaining",)

    def __init__(self, limit: int):
        self.remaining = limit

    def spend(self, amount: int = 1) -> None:
        self.remaining -= amount
        if self.remaining < 0:
            raise SolverBudgetError("solver budget exhausted")


# ---------------------------------------------------------------------------
# Normal forms
#
# Primitive constraints are pairs (coeffs, const) read as
#   sum(coeffs[v] * v) + const <= 0      (inequality)
#   sum(coeffs[v] * v) + const  = 0      (equality)
# ---------------------------------------------------------------------------


def _atom_to_primitives(a: Atom, positive: bool):
    """Turn an atom (or its negation) into primitive constraints.

    Returns a list of alternatives (a disjunction); each alternative is a
    list of (coeffs, const, is_eq) triples (a conjunction).  Only NEQ
    produces two alternatives.
    """
    n = a.normalized()
    if not positive:
        n = n.negated()
    rel = n.rel
    d = n.lhs.as_dict()
    c = n.lhs.constant
    neg_d = {v: -k for v, k in d.items()}
    if rel == Rel.LE:
        return [[(d, c, False)]]
    if rel == Rel.LT:
        return [[(d, c + 1, False)]]
    if rel == Rel.GE:
        return [[(neg_d, -c, False)]]
    if rel == Rel.GT:
        return [[(neg_d, -c + 1, False)]]
    if rel == Rel.EQ:
        return [[(d, c, True)]]
    if rel == Rel.NEQ:
        return [[(d, c + 1, False)], [(neg_d, -c + 1, False)]]
    raise AssertionError(rel)


def _nnf(f: Formula, positive: bool) -> Formula:
    """Push negation down to atoms; result uses only And/Or/Atom/Not(Atom)."""
    if isinstance(f, BoolConst):
        return f if positive else (FALSE if f.value else TRUE)
    if isinstance(f, Atom):
        return f if positive else f.negated()
    if isinstance(f, Not):
        return _nnf(f.operand, not positive)
    if isinstance(f, And):
        kids = tuple(_nnf(c, positive) for c in f.children)
        return And(kids) if positive else Or(kids)
    if isinstance(f, Or):
        kids = tuple(_nnf(c, positive) for c in f.children)
        return Or(kids) if positive else And(kids)
    if isinstance(f, Implies):
        a, b = f.antecedent, f.consequent
        if positive:
            return Or((_nnf(a, False), _nnf(b, True)))
        return And((_nnf(a, True), _nnf(b, False)))
    raise TypeError(f"not a formula: {f!r}")


def _dnf_conjuncts(f: Formula, budget: Budget) -> Iterator[list]:
    """Yield the DNF of an NNF formula as lists of primitive constraints."""
    if isinstance(f, BoolConst):
        if f.value:
            budget.spend()
            yield []
        return
    if isinstance(f, Atom):
        for alt in _atom_to_primitives(f, True):
            budget.spend()
            yield alt
        return
    if isinstance(f, Or):
        for c in f.children:
            yield from _dnf_conjuncts(c, budget)
        return
    if isinstance(f, And):
        children = f.children

        def product(idx: int) -> Iterator[list]:
            if idx == len(children):
                budget.spend()
                yield []
                return
            for rest in product(idx + 1):
                for head in _dnf_conjuncts(children[idx], budget):
                    yield head + rest

        yield from product(0)
        return
    raise TypeError(f"unexpected node in NNF: {f!r}")


# ---------------------------------------------------------------------------
# Omega-style elimination over a conjunction
# ---------------------------------------------------------------------------


def _normalize(cons: list) -> Optional[list]:
    """Drop trivial constraints, divide by gcd; None when inconsistent."""
    out = []
    for coeffs, const, is_eq in cons:
        d = {v: c for v, c in coeffs.items() if c != 0}
        if not d:
            if is_eq:
                if const != 0:
                    return None
            elif const > 0:
                return None
            continue
        g = 0
        for c in d.values():
            g = gcd(g, abs(c))
        if g > 1:
            if is_eq:
                if const % g != 0:
                    return None
                const //= g
            else:
                # g*k + const <= 0  iff  k <= floor(-const/g)
                const = -((-const) // g)
            d = {v: c // g for v, c in d.items()}
        out.append((d, const, is_eq))
    return out


def _solve_equality(eq, others, budget: Budget) -> Optional[Model]:
    """Eliminate one equality, then recurse on the rewritten system."""
    coeffs, const = dict(eq[0]), eq[1]
    pending = []  # (var, coeffs, const): var := sum(coeffs)+const, applied in reverse

    while True:
        budget.spend()
        g = 0
        for c in coeffs.values():
            g = gcd(g, abs(c))
        if g == 0:
            if const != 0:
                return None
            rest = _omega(others, budget)
            break
        if const % g != 0:
            return None
        if g > 1:
            coeffs = {v: c // g for v, c in coeffs.items()}
            const //= g

        unit = next((v for v, c in coeffs.items() if abs(c) == 1), None)
        if unit is not None:
            a = coeffs[unit]
            # unit*a + rest + const = 0  =>  unit = -a*(rest + const)
            sol_coeffs = {v: -a * c for v, c in coeffs.items() if v != unit}
            sol_const = -a * const
            rewritten = [
                _substitute_constraint(con, unit, sol_coeffs, sol_const) for con in others
            ]
            pending.append((unit, sol_coeffs, sol_const))
            rest = _omega(rewritten, budget)
            break

        # No unit coefficient: reduce the other coefficients modulo the
        # smallest one with the change of variable fresh := x_k + sum(q_j*x_j),
        # a bijection on integer points, and keep going.
        k = min(coeffs, key=lambda v: abs(coeffs[v]))
        ak = coeffs[k]
        fresh = f"~e{next(_FRESH)}"
        new_coeffs = {fresh: ak}
        sol_coeffs = {fresh: 1}  # x_k = fresh - sum(q_j * x_j)
        for v, c in coeffs.items():
            if v == k:
                continue
            q = c // ak
            r = c - q * ak
            if r != 0:
                new_coeffs[v] = r
            if q != 0:
                sol_coeffs[v] = -q
        others = [_substitute_constraint(con, k, sol_coeffs, 0) for con in others]
        pending.append((k, sol_coeffs, 0))
        coeffs = new_coeffs

    if rest is None:
        return None
    model = dict(rest)
    for var, sol_coeffs, sol_const in reversed(pending):
        model[var] = sum(c * model.get(v, 0) for v, c in sol_coeffs.items()) + sol_const
    return model


def _substitute_constraint(con, var, sol_coeffs, sol_const):
    coeffs, const, is_eq = con
    c = coeffs.get(var)
    if not c:
        return con
    d = dict(coeffs)
    del d[var]
    for v, k in sol_coeffs.items():
        d[v] = d.get(v, 0) + c * k
    return (d, const + c * sol_const, is_eq)


def _eval_bound(coeffs, const, model):
    return sum(c * model.get(v, 0) for v, c in coeffs.items()) + const


def _ceil_div(a: int, b: int) -> int:
    return -((-a) // b)


def _omega(cons: list, budget: Budget) -> Optional[Model]:
    """Exact integer satisfiability of a conjunction of primitives."""
    budget.spend()
    cons = _normalize(cons)
    if cons is None:
        return None

    for i, con in enumerate(cons):
        if con[2]:
            return _solve_equality(con, cons[:i] + cons[i + 1 :], budget)

    variables = set()
    for coeffs, _, _ in cons:
        variables.update(coeffs)
    if not variables:
        return {}

    x = _pick_variable(cons, variables)
    lowers = []  # (beta, coeffs, const): beta*x >= sum(coeffs)+const
    uppers = []  # (alpha, coeffs, const): alpha*x <= sum(coeffs)+const
    others = []
    for coeffs, const, _ in cons:
        a = coeffs.get(x, 0)
        rest = {v: c for v, c in coeffs.items() if v != x}
        if a == 0:
            others.append((coeffs, const, False))
        elif a > 0:
            # a*x + rest + const <= 0  =>  a*x <= -rest - const
            uppers.append((a, {v: -c for v, c in rest.items()}, -const))
        else:
            # a*x + rest + const <= 0  =>  (-a)*x >= rest + const
            lowers.append((-a, rest, const))

    def extend(model: Model) -> Model:
        lo = None
        hi = None
        for beta, tc, tk in lowers:
            b = _ceil_div(_eval_bound(tc, tk, model), beta)
            lo = b if lo is None else max(lo, b)
        for alpha, tc, tk in uppers:
            b = _eval_bound(tc, tk, model) // alpha
            hi = b if hi is None else min(hi, b)
        if lo is None and hi is None:
            val = 0
        elif lo is None:
            val = hi
        elif hi is None:
            val = lo
        else:
            assert lo <= hi, "projection lost the witness"
            val = lo
        out = dict(model)
        out[x] = val
        return out

    if not lowers or not uppers:
        sub = _omega(others, budget)
        return None if sub is None else extend(sub)

    exact = all(alpha == 1 or beta == 1 for alpha, _, _ in uppers for beta, _, _ in lowers)
    shadow = list(others)
    for alpha, uc, uk in uppers:
        for beta, lc, lk in lowers:
            # alpha*lower <= alpha*beta*x <= beta*upper
            d = {v: alpha * c for v, c in lc.items()}
            for v, c in uc.items():
                d[v] = d.get(v, 0) - beta * c
            k = alpha * lk - beta * uk
            if not exact:
                k += (alpha - 1) * (beta - 1)
            shadow.append((d, k, False))
    sub = _omega(shadow, budget)
    if sub is not None:
        return extend(sub)
    if exact:
        return None

    # Dark shadow failed; only solutions hugging a lower bound remain.
    alpha_max = max(alpha for alpha, _, _ in uppers)
    for beta, lc, lk in lowers:
        limit = (alpha_max * beta - alpha_max - beta) // alpha_max
        for i in range(limit + 1):
            budget.spend()
            eq_coeffs = dict(lc)
            eq_coeffs[x] = eq_coeffs.get(x, 0) - beta
            sub = _omega(cons + [(eq_coeffs, lk + i, True)], budget)
            if sub is not None:
                return sub
    return None


def _pick_variable(cons, variables):
    """Prefer a variable whose elimination is exact, then fewest pairings."""
    best = None
    best_key = None
    for x in sorted(variables):
        lo = hi = 0
        unit = True
        for coeffs, _, _ in cons:
            a = coeffs.get(x, 0)
            if a > 0:
                hi += 1
                if a != 1:
                    unit = False
            elif a < 0:
                lo += 1
                if a != -1:
                    unit = False
        key = (0 if lo == 0 or hi == 0 else 1, 0 if unit else 1, lo * hi)
        if best_key is None or key < best_key:
            best, best_key = x, key
    return best


# ---------------------------------------------------------------------------
# Public interface
# ---------------------------------------------------------------------------


def is_sat(f: Formula, budget: Optional[int] = None) -> Optional[Model]:
    """Return a witnessing model, or None when unsatisfiable.

    The model assigns every free variable of the formula.  Raises
    SolverBudgetError when the work limit is hit; that is a third outcome,
    never to be conflated with unsatisfiability.
    """
    b = Budget(budget if budget is not None else DEFAULT_BUDGET)
    g = simplify(f)
    if g == TRUE:
        return {v: 0 for v in free_vars(f)}
    if g == FALSE:
        return None
    nnf = _nnf(g, True)
    for conjunct in _dnf_conjuncts(nnf, b):
        model = _omega(conjunct, b)
        if model is not None:
            out = {v: model.get(v, 0) for v in free_vars(f)}
            assert eval_formula(f, out), "solver returned a bogus model"
            return out
    return None


def entails(f: Formula, g: Formula, budget: Optional[int] = None) -> bool:
    """Whether every model of f satisfies g (f AND NOT g unsatisfiable).

    Conjunctions and implications on the right are split first, which keeps
    the DNF small for the long conjunctive summaries this project builds.
    """
    g = simplify(g)
    if g == TRUE:
        return True
    if isinstance(g, And):
        return all(entails(f, part, budget) for part in g.children)
    if isinstance(g, Implies):
        return entails(conj([f, g.antecedent]), g.consequent, budget)
    return is_sat(conj([f, neg(g)]), budget) is None


def equivalent(f: Formula, g: Formula, budget: Optional[int] = None) -> bool:
    return entails(f, g, budget) and entails(g, f, budget)
