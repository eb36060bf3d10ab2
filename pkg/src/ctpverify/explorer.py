"""Safety exploration: exhaustive, persistent-set, and interpolation modes.

The interpolation modes run the recursive scheme: explore a state's
chosen successors, summarize the proven-safe subtree as a formula built
from the property and weakest-precondition steps, memoize it per control
location, and prune any later state that entails a stored summary.
Persistent sets restrict the successor choice; their psi_trace condition
must hold at the concrete state or the restriction is skipped for that
state.

A persistent set all of whose members are guard-disabled proves nothing
(there are no explored traces to cover the pruned ones), so whenever the
set has no enabled member while the state does, the state falls back to
full scheduling.  This situation never arises in guard-free programs.
"""

from __future__ import annotations

import enum
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

from .formula import (
    FALSE,
    TRUE,
    Formula,
    LinTerm,
    atom_eq,
    conj,
    eval_formula,
    implies,
    neg,
    rename_var,
    simplify,
    substitute,
)
from .por import PersistentSetCache, pattern_facts, step1_facts
from .program import (
    GlobalLoc,
    Program,
    SymState,
    Transition,
    concrete_initial,
    concrete_step,
    execute,
    initial_state,
    schedulable,
    unconstrained_vars,
    violates,
)
from .solver import SolverBudgetError, entails, is_sat


class Mode(enum.Enum):
    EXHAUSTIVE = "exhaustive"
    POR = "por"
    SI = "si"
    POR_SI = "por-si"
    PDPOR_SI = "pdpor-si"

    @staticmethod
    def from_string(text: str) -> "Mode":
        key = text.strip().lower().replace("_", "-")
        for m in Mode:
            if m.value == key:
                return m
        raise ValueError(f"unknown mode {text!r}")

    @property
    def uses_memo(self) -> bool:
        return self in (Mode.SI, Mode.POR_SI, Mode.PDPOR_SI)

    @property
    def uses_persistent_sets(self) -> bool:
        return self in (Mode.POR, Mode.POR_SI, Mode.PDPOR_SI)


class ExplorationTimeout(Exception):
    """Wall-clock limit hit mid-exploration."""


class _Violation(Exception):
    def __init__(self, trace: List[int]):
        self.trace = trace


class MemoTable:
    """Per-location lists of proven subtree summaries; first entailed wins."""

    def __init__(self):
        self.entries: Dict[GlobalLoc, List[Formula]] = {}

    def lookup(self, s: SymState, budget: Optional[int] = None) -> Optional[Formula]:
        for psi in self.entries.get(s.loc, ()):
            if entails(s.pc, psi, budget):
                return psi
        return None

    def store(self, loc: GlobalLoc, psi: Formula) -> None:
        self.entries.setdefault(loc, []).append(psi)

    def __len__(self):
        return sum(len(v) for v in self.entries.values())


@dataclass
class ExplorationReport:
    verdict: str  # SAFE | UNSAFE | RESOURCE_LIMIT
    states_visited: int
    states_subsumed: int
    traces_completed: int
    time_ms: int
    counterexample: Optional[dict] = None  # {"trace": [...], "witness": {...}}
    memo: Optional[MemoTable] = field(default=None, repr=False, compare=False)
    persistent: Optional[PersistentSetCache] = field(default=None, repr=False, compare=False)

    def to_json(self) -> dict:
        out = {
            "verdict": self.verdict,
            "states_visited": self.states_visited,
            "states_subsumed": self.states_subsumed,
            "traces_completed": self.traces_completed,
            "time_ms": self.time_ms,
        }
        if self.counterexample is not None:
            out["counterexample"] = self.counterexample
        return out


def pre(t: Transition, phi: Formula) -> Formula:
    """Approximate weakest precondition over one transition."""
    if t.assign is not None:
        var, expr = t.assign
        phi = substitute(phi, var, expr)
    if t.guard == TRUE:
        return phi
    return simplify(implies(t.guard, phi))


class _Run:
    def __init__(self, p: Program, mode: Mode, budget: Optional[int],
                 deadline: Optional[float], order_key):
        self.p = p
        self.mode = mode
        self.budget = budget
        self.deadline = deadline
        self.order_key = order_key
        self.memo = MemoTable()
        self.trace: List[int] = []
        self.states_visited = 0
        self.states_subsumed = 0
        self.traces_completed = 0
        if mode == Mode.POR or mode == Mode.POR_SI:
            self.cache = PersistentSetCache(p, step1_facts(p), order_key)
        elif mode == Mode.PDPOR_SI:
            self.cache = PersistentSetCache(p, pattern_facts(p), order_key)
        else:
            self.cache = None

    def tick(self) -> None:
        if self.deadline is not None and time.monotonic() > self.deadline:
            raise ExplorationTimeout

    def is_enabled(self, s: SymState, t: Transition) -> bool:
        # every visited state has a satisfiable path constraint, so a
        # trivial guard never needs the solver
        if t.guard == TRUE:
            return True
        return is_sat(conj([s.pc, t.guard]), self.budget) is not None

    def ordered(self, ts) -> list:
        return sorted(ts, key=lambda t: self.order_key(t.tid))

    # -- modes without memoization -------------------------------------

    def visit_flat(self, s: SymState) -> None:
        self.tick()
        self.states_visited += 1
        if violates(self.p, s, self.budget) is not None:
            raise _Violation(list(self.trace))
        if self.mode == Mode.EXHAUSTIVE:
            candidates = self.ordered(schedulable(self.p, s))
        else:
            candidates = self.persistent_candidates(s)
        successors = [t for t in candidates if self.is_enabled(s, t)]
        if not successors:
            self.traces_completed += 1
            return
        for t in successors:
            self.trace.append(t.tid)
            self.visit_flat(execute(self.p, s, t))
            self.trace.pop()

    def persistent_candidates(self, s: SymState) -> list:
        sched = schedulable(self.p, s)
        entry = self.cache.at(s.loc)
        if len(entry.transitions) == len(sched):
            return self.ordered(sched)
        chosen = self.ordered(self.p.transition(i) for i in entry.transitions)
        if entry.psi_trace != TRUE and not entails(s.pc, entry.psi_trace, self.budget):
            return self.ordered(sched)
        if not any(self.is_enabled(s, t) for t in chosen) and \
                any(self.is_enabled(s, t) for t in sched):
            return self.ordered(sched)
        return chosen

    # -- interpolation modes ---------------------------------------------

    def visit_synergy(self, s: SymState) -> Formula:
        self.tick()
        hit = self.memo.lookup(s, self.budget)
        if hit is not None:
            self.states_subsumed += 1
            return hit
        self.states_visited += 1
        if violates(self.p, s, self.budget) is not None:
            raise _Violation(list(self.trace))

        psi_bar = self.p.prop
        if self.mode == Mode.SI:
            chosen = self.ordered(schedulable(self.p, s))
        else:
            chosen = self.persistent_candidates(s)
            sched_count = len(schedulable(self.p, s))
            if len(chosen) < sched_count:
                entry = self.cache.at(s.loc)
                psi_bar = conj([psi_bar, entry.psi_trace])

        explored_any = False
        for t in chosen:
            if not self.is_enabled(s, t):
                psi_bar = conj([psi_bar, pre(t, FALSE)])
                continue
            explored_any = True
            self.trace.append(t.tid)
            child = self.visit_synergy(execute(self.p, s, t))
            self.trace.pop()
            psi_bar = conj([psi_bar, pre(t, child)])
        if not explored_any:
            self.traces_completed += 1

        psi_bar = simplify(psi_bar)
        assert entails(s.pc, psi_bar, self.budget), "summary must cover its own state"
        self.memo.store(s.loc, psi_bar)
        return psi_bar


def verify(p: Program, mode: Mode, *, solver_budget: Optional[int] = None,
           timeout: Optional[float] = None,
           seed_order: Optional[Sequence[int]] = None) -> ExplorationReport:
    """Run one exploration and package the outcome.

    seed_order, when given, must be a permutation of all transition ids;
    earlier ids get explored (and seed persistent sets) first.
    """
    order_key = _make_order_key(p, seed_order)
    deadline = None if timeout is None else time.monotonic() + timeout
    run = _Run(p, mode, solver_budget, deadline, order_key)
    started = time.perf_counter()

    def report(verdict, counterexample=None):
        return ExplorationReport(
            verdict=verdict,
            states_visited=run.states_visited,
            states_subsumed=run.states_subsumed,
            traces_completed=run.traces_completed,
            time_ms=int(round((time.perf_counter() - started) * 1000)),
            counterexample=counterexample,
            memo=run.memo if mode.uses_memo else None,
            persistent=run.cache,
        )

    try:
        root = initial_state(p)
        if is_sat(root.pc, solver_budget) is None:
            run.states_visited = 1
            return report("SAFE")
        if mode.uses_memo:
            run.visit_synergy(root)
        else:
            run.visit_flat(root)
        return report("SAFE")
    except _Violation as v:
        witness = witness_for_trace(p, v.trace, budget=solver_budget)
        assert witness is not None, "violating path constraint must be satisfiable"
        assert replay(p, v.trace, witness), "counterexample must replay concretely"
        return report("UNSAFE", {"trace": list(v.trace), "witness": witness})
    except (SolverBudgetError, ExplorationTimeout):
        return report("RESOURCE_LIMIT")


def _make_order_key(p: Program, seed_order: Optional[Sequence[int]]):
    if seed_order is None:
        return lambda tid: tid
    order = list(seed_order)
    if sorted(order) != list(range(len(p.transitions()))):
        raise ValueError("seed order must be a permutation of all transition ids")
    rank = {tid: i for i, tid in enumerate(order)}
    return lambda tid: rank[tid]


# ---------------------------------------------------------------------------
# Counterexample extraction and replay
# ---------------------------------------------------------------------------


def trace_constraint(p: Program, trace: Sequence[int], with_violation: bool = True) -> Formula:
    """Single-assignment encoding of a transition sequence from the root.

    Every variable v starts as v@0; the k-th step writes v@k.  The result
    conjoins initial values, every guard over the names current at its
    step, and (optionally) the property's negation over the final names.
    """
    current = {v: f"{v}@0" for v in p.var_names()}
    parts = []
    for name, init in tuple(p.shared) + tuple(p.locals):
        if init is not None:
            parts.append(atom_eq(LinTerm.var(current[name]), LinTerm.const(init)))
    parts.append(_rename_all(p.init_constraint, current))
    for k, tid in enumerate(trace, start=1):
        t = p.transition(tid)
        parts.append(_rename_all(t.guard, current))
        if t.assign is not None:
            var, expr = t.assign
            renamed = expr
            for v in expr.vars():
                renamed = renamed.substitute(v, LinTerm.var(current[v]))
            current[var] = f"{var}@{k}"
            parts.append(atom_eq(LinTerm.var(current[var]), renamed))
    if with_violation:
        parts.append(_rename_all(neg(p.prop), current))
    return conj(parts)


def _rename_all(f: Formula, mapping: Dict[str, str]) -> Formula:
    for old, new in mapping.items():
        f = rename_var(f, old, new)
    return f


def witness_for_trace(p: Program, trace: Sequence[int],
                      budget: Optional[int] = None) -> Optional[dict]:
    """Initial values for the unconstrained variables making the trace end
    in violation; None when no such values exist."""
    model = is_sat(trace_constraint(p, trace), budget)
    if model is None:
        return None
    return {v: model.get(f"{v}@0", 0) for v in unconstrained_vars(p)}


def replay(p: Program, trace: Sequence[int], witness: dict) -> bool:
    """Concretely run the trace from the witnessed initial valuation.

    True when every step is schedulable with its guard holding and the
    final state breaks the property.
    """
    env = concrete_initial(p, witness)
    loc = list(p.initial_loc())
    for tid in trace:
        t = p.transition(tid)
        if loc[t.process] != t.src:
            return False
        nxt = concrete_step(p, env, t)
        if nxt is None:
            return False
        env = nxt
        loc[t.process] = t.dst
    return not eval_formula(p.prop, env)
