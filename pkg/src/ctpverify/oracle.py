"""Brute-force ground truth backing the test suite.

Everything here enumerates: complete traces, reachable concrete states,
adjacent-swap pairs.  Feasibility and safety of each trace are computed
twice, symbolically through the solver and concretely by running every
initial valuation drawn from a bounded box; the two must agree, and a
mismatch raises rather than returning a value, because it would mean one
of the two engines is wrong.

Deliberately unscalable.  Budgets guard against accidental explosion.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterator, List, Optional, Sequence, Set, Tuple

from .formula import conj, eval_formula, neg
from .por import SemiCommuteFact, independent
from .program import (
    GlobalLoc,
    Program,
    concrete_step,
    execute,
    initial_state,
    schedulable_at,
    unconstrained_vars,
)
from .solver import is_sat

DEFAULT_BOX = (0, 8)
DEFAULT_TRACE_BUDGET = 100_000

Trace = Tuple[int, ...]
Env = Dict[str, int]


class OracleBudgetError(Exception):
    """The instance is too large for brute force."""


class OracleDisagreement(AssertionError):
    """Symbolic and concrete enumeration disagreed; one engine is broken."""


@dataclass(frozen=True)
class TraceReport:
    trace: Trace
    feasible: bool  # some initial valuation executes every step
    safe: bool  # no feasible prefix reaches a property-violating state


def _schedulable_traces(p: Program, loc: GlobalLoc, budget: int) -> Iterator[Trace]:
    """All complete transition sequences from loc, control flow only."""
    produced = 0

    def walk(loc: GlobalLoc, prefix: List[int]) -> Iterator[Trace]:
        nonlocal produced
        succ = schedulable_at(p, loc)
        if not succ:
            produced += 1
            if produced > budget:
                raise OracleBudgetError(f"more than {budget} complete traces")
            yield tuple(prefix)
            return
        for t in succ:
            moved = list(loc)
            moved[t.process] = t.dst
            prefix.append(t.tid)
            yield from walk(tuple(moved), prefix)
            prefix.pop()

    return walk(loc, [])


def initial_envs(p: Program, box: Tuple[int, int] = DEFAULT_BOX) -> List[Env]:
    """Concrete initial valuations: unconstrained variables range over the
    box, and the extra initial constraint filters."""
    free = unconstrained_vars(p)
    lo, hi = box
    out = []
    for values in itertools.product(range(lo, hi + 1), repeat=len(free)):
        env = {}
        for name, init in tuple(p.shared) + tuple(p.locals):
            env[name] = init if init is not None else values[free.index(name)]
        if eval_formula(p.init_constraint, env):
            out.append(env)
    return out


def _concrete_flags(p: Program, trace: Trace, envs: Sequence[Env]) -> Tuple[bool, bool]:
    """(feasible, safe) by running the trace from every initial valuation.

    A run stops at the first false guard; the states it did visit still
    count for safety.
    """
    feasible = False
    safe = True
    for env0 in envs:
        env = dict(env0)
        if not eval_formula(p.prop, env):
            safe = False
        completed = True
        for tid in trace:
            nxt = concrete_step(p, env, p.transition(tid))
            if nxt is None:
                completed = False
                break
            env = nxt
            if not eval_formula(p.prop, env):
                safe = False
        if completed:
            feasible = True
    return feasible, safe


def _symbolic_flags(p: Program, trace: Trace) -> Tuple[bool, bool]:
    s = initial_state(p)
    safe = is_sat(conj([s.pc, neg(p.prop)])) is None
    for tid in trace:
        s = execute(p, s, p.transition(tid))
        if is_sat(conj([s.pc, neg(p.prop)])) is not None:
            safe = False
    return is_sat(s.pc) is not None, safe


def enumerate_traces(p: Program, box: Tuple[int, int] = DEFAULT_BOX,
                     budget: int = DEFAULT_TRACE_BUDGET) -> List[TraceReport]:
    """Every complete trace with feasibility and safety flags.

    Flags are computed by both engines; see module docstring.  The box
    must be wide enough to witness every symbolically reachable
    violation or guard combination, which holds for all the systems the
    tests use.
    """
    envs = initial_envs(p, box)
    out = []
    for trace in _schedulable_traces(p, p.initial_loc(), budget):
        sym = _symbolic_flags(p, trace)
        con = _concrete_flags(p, trace, envs)
        if sym != con:
            raise OracleDisagreement(
                f"trace {trace}: symbolic (feasible, safe) = {sym}, concrete = {con}")
        out.append(TraceReport(trace, *sym))
    return out


def verdict(p: Program, box: Tuple[int, int] = DEFAULT_BOX,
            budget: int = DEFAULT_TRACE_BUDGET) -> str:
    """SAFE or UNSAFE by full enumeration."""
    reports = enumerate_traces(p, box, budget)
    return "UNSAFE" if any(not r.safe for r in reports) else "SAFE"


def trace_covers(p: Program, rho1: Trace, rho2: Trace,
                 box: Tuple[int, int] = DEFAULT_BOX) -> bool:
    """Safety of rho1 implies safety of rho2."""
    envs = initial_envs(p, box)
    return (not _concrete_flags(p, rho1, envs)[1]) or _concrete_flags(p, rho2, envs)[1]


# ---------------------------------------------------------------------------
# Concrete state space
# ---------------------------------------------------------------------------


def reachable_states(p: Program, box: Tuple[int, int] = DEFAULT_BOX,
                     budget: int = DEFAULT_TRACE_BUDGET) -> Set[Tuple[GlobalLoc, FrozenSet]]:
    """All (location, valuation) pairs reachable from some boxed initial."""
    seen = set()
    stack = [(p.initial_loc(), env) for env in initial_envs(p, box)]
    while stack:
        loc, env = stack.pop()
        key = (loc, frozenset(env.items()))
        if key in seen:
            continue
        seen.add(key)
        if len(seen) > budget:
            raise OracleBudgetError(f"more than {budget} reachable states")
        for t in schedulable_at(p, loc):
            nxt = concrete_step(p, env, t)
            if nxt is None:
                continue
            moved = list(loc)
            moved[t.process] = t.dst
            stack.append((tuple(moved), nxt))
    return seen


def safe_root(p: Program, loc: GlobalLoc, env: Env,
              budget: int = DEFAULT_TRACE_BUDGET) -> bool:
    """Does every state reachable from (loc, env) satisfy the property?"""
    seen = set()
    stack = [(loc, dict(env))]
    while stack:
        cur_loc, cur = stack.pop()
        key = (cur_loc, frozenset(cur.items()))
        if key in seen:
            continue
        seen.add(key)
        if len(seen) > budget:
            raise OracleBudgetError(f"more than {budget} states in subtree")
        if not eval_formula(p.prop, cur):
            return False
        for t in schedulable_at(p, cur_loc):
            nxt = concrete_step(p, cur, t)
            if nxt is None:
                continue
            moved = list(cur_loc)
            moved[t.process] = t.dst
            stack.append((tuple(moved), nxt))
    return True


# ---------------------------------------------------------------------------
# Semi-commutativity checking
# ---------------------------------------------------------------------------


def _run(p: Program, env: Env, seq: Sequence[int]) -> Optional[List[Env]]:
    """States visited by executing seq from env, or None when some guard
    fails partway (the sequence is then not an execution)."""
    states = [env]
    cur = env
    for tid in seq:
        nxt = concrete_step(p, cur, p.transition(tid))
        if nxt is None:
            return None
        cur = nxt
        states.append(cur)
    return states


def _run_is_safe(p: Program, states: List[Env]) -> bool:
    return all(eval_formula(p.prop, env) for env in states)


def check_semi_commute(p: Program, fact: SemiCommuteFact,
                       box: Tuple[int, int] = DEFAULT_BOX,
                       budget: int = DEFAULT_TRACE_BUDGET) -> bool:
    """Validate one fact by exhaustive swapping.

    For every reachable in-scope state satisfying the fact's condition
    and every complete schedulable continuation containing the pair
    left-then-right adjacently: when both the original and the swapped
    continuations execute fully from the state (every guard passes), a
    safe original run forces a safe swapped run.  Pairs where either
    ordering blocks on a guard impose nothing; the fact only speaks
    about executions.
    """
    checked = 0
    states = sorted(reachable_states(p, box, budget),
                    key=lambda k: (k[0], sorted(k[1])))
    for loc, frozen in states:
        if not fact.applies_at(loc):
            continue
        env = dict(frozen)
        if not eval_formula(fact.phi, env):
            continue
        for rho in _schedulable_traces(p, loc, budget):
            for i in range(len(rho) - 1):
                if rho[i] != fact.left or rho[i + 1] != fact.right:
                    continue
                swapped = list(rho)
                swapped[i], swapped[i + 1] = swapped[i + 1], swapped[i]
                checked += 1
                if checked > budget:
                    raise OracleBudgetError(f"more than {budget} swap checks")
                original_run = _run(p, env, rho)
                swapped_run = _run(p, env, swapped)
                if original_run is None or swapped_run is None:
                    continue
                if _run_is_safe(p, original_run) and not _run_is_safe(p, swapped_run):
                    return False
    return True


# ---------------------------------------------------------------------------
# Trace equivalence
# ---------------------------------------------------------------------------


def mazurkiewicz_classes(p: Program,
                         budget: int = DEFAULT_TRACE_BUDGET) -> List[Set[Trace]]:
    """Partition complete traces by adjacent swaps of independent pairs."""
    traces = list(_schedulable_traces(p, p.initial_loc(), budget))
    index = {t: i for i, t in enumerate(traces)}
    parent = list(range(len(traces)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for rho in traces:
        for i in range(len(rho) - 1):
            a, b = p.transition(rho[i]), p.transition(rho[i + 1])
            if a.process == b.process or not independent(p, a, b):
                continue
            swapped = list(rho)
            swapped[i], swapped[i + 1] = swapped[i + 1], swapped[i]
            j = index[tuple(swapped)]
            ra, rb = find(index[rho]), find(j)
            if ra != rb:
                parent[ra] = rb

    groups: Dict[int, Set[Trace]] = {}
    for rho in traces:
        groups.setdefault(find(index[rho]), set()).add(rho)
    return sorted(groups.values(), key=lambda g: sorted(g))
