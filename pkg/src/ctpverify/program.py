"""Concurrent transition programs and their symbolic states.

A program is a fixed set of processes, each an acyclic control-flow graph
of guarded assignments over shared and process-local integer variables.
Executing a transition symbolically conjoins its guard and an equation for
the assignment onto the path formula; the overwritten generation of the
assigned variable is renamed to a fresh historical name (``x#3``) and
projected away again whenever a unit-coefficient equation allows it.
Historical names that survive projection are plain existential junk: every
consumer treats them as ordinary free variables.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

from .formula import (
    TRUE,
    Atom,
    Formula,
    LinTerm,
    Model,
    Not,
    Or,
    Rel,
    atom_eq,
    conj,
    conjuncts,
    eval_formula,
    free_vars,
    neg,
    rename_var,
    simplify,
    substitute,
)
from .solver import is_sat

GlobalLoc = Tuple[int, ...]


class ProgramError(ValueError):
    """Structural problem in a program definition."""


@dataclass(frozen=True)
class Transition:
    """One guarded step: ``src -> dst : [guard] var := expr``.

    ``assign`` is None for skip.  Guards are conjunctions of atoms (no
    negation or disjunction), checked at program construction.
    """

    tid: int
    process: int
    src: int
    dst: int
    guard: Formula = TRUE
    assign: Optional[tuple] = None  # (var name, LinTerm)


@dataclass(frozen=True)
class Process:
    index: int
    name: str
    initial: int
    transitions: tuple  # of Transition, in declaration order

    def locations(self) -> set:
        locs = {self.initial}
        for t in self.transitions:
            locs.add(t.src)
            locs.add(t.dst)
        return locs


@dataclass(frozen=True)
class Resource:
    """Marks a counter variable accessed only through add/double/subtract."""

    var: str
    bound: Atom


@dataclass(frozen=True)
class Flag:
    """Marks a variable that is only ever set to 1 and never unset."""

    var: str


@dataclass(frozen=True)
class Program:
    shared: tuple  # of (name, init int or None for unconstrained)
    locals: tuple  # of (qualified name, init int or None), owner by prefix
    processes: tuple  # of Process
    prop: Formula  # safety property, must hold in every reachable state
    init_constraint: Formula = TRUE  # extra root constraint, e.g. 0 <= f <= 1
    annotations: tuple = ()

    def __post_init__(self):
        _validate(self)

    # -- lookups ------------------------------------------------------------

    def transition(self, tid: int) -> Transition:
        return self.transitions()[tid]

    def transitions(self) -> tuple:
        cached = getattr(self, "_transitions", None)
        if cached is None:
            cached = tuple(t for p in self.processes for t in p.transitions)
            object.__setattr__(self, "_transitions", cached)
        return cached

    def var_names(self) -> set:
        return {name for name, _ in self.shared} | {name for name, _ in self.locals}

    def initial_loc(self) -> GlobalLoc:
        return tuple(p.initial for p in self.processes)

    def resources(self) -> list:
        return [a for a in self.annotations if isinstance(a, Resource)]

    def flags(self) -> list:
        return [a for a in self.annotations if isinstance(a, Flag)]


def _validate(p: Program) -> None:
    names = [n for n, _ in p.shared] + [n for n, _ in p.locals]
    if len(set(names)) != len(names):
        raise ProgramError("duplicate variable declaration")
    declared = set(names)
    resource_vars = {a.var for a in p.annotations if isinstance(a, Resource)}

    seen_tids = set()
    next_tid = 0
    for i, proc in enumerate(p.processes):
        if proc.index != i:
            raise ProgramError(f"process {proc.name} has index {proc.index}, expected {i}")
        for t in proc.transitions:
            if t.process != i:
                raise ProgramError(f"transition {t.tid} claims process {t.process}, not {i}")
            if t.src == t.dst:
                raise ProgramError(f"transition {t.tid} is a self-loop")
            if t.tid != next_tid:
                raise ProgramError(f"transition ids must be sequential, got {t.tid}")
            seen_tids.add(t.tid)
            next_tid += 1
            _check_guard(t.guard, declared, resource_vars, t.tid)
            if t.assign is not None:
                var, expr = t.assign
                if var not in declared:
                    raise ProgramError(f"assignment to undeclared variable {var!r}")
                undeclared = expr.vars() - declared
                if undeclared:
                    raise ProgramError(f"undeclared variable(s) {sorted(undeclared)}")
        _check_acyclic(proc)

    undeclared = free_vars(p.prop) - declared
    if undeclared:
        raise ProgramError(f"property uses undeclared variable(s) {sorted(undeclared)}")
    undeclared = free_vars(p.init_constraint) - declared
    if undeclared:
        raise ProgramError(f"init constraint uses undeclared variable(s) {sorted(undeclared)}")
    for a in p.annotations:
        if a.var not in declared:
            raise ProgramError(f"annotation on undeclared variable {a.var!r}")


def _check_guard(g: Formula, declared, resource_vars, tid) -> None:
    for part in conjuncts(g):
        if part == TRUE:
            continue
        if isinstance(part, (Not, Or)) or not isinstance(part, Atom):
            raise ProgramError(f"guard of transition {tid} must be a conjunction of atoms")
        used = part.lhs.vars() | part.rhs.vars()
        undeclared = used - declared
        if undeclared:
            raise ProgramError(f"undeclared variable(s) {sorted(undeclared)} in guard {tid}")
        clashing = used & resource_vars
        if clashing:
            raise ProgramError(
                f"resource variable(s) {sorted(clashing)} may not appear in guards"
            )


def _check_acyclic(proc: Process) -> None:
    out = {}
    for t in proc.transitions:
        out.setdefault(t.src, []).append(t.dst)
    color = {}

    def visit(u, stack):
        color[u] = 1
        for w in out.get(u, ()):
            if color.get(w) == 1:
                raise ProgramError(f"process {proc.name} has a control-flow cycle")
            if w not in color:
                visit(w, stack)
        color[u] = 2

    for loc in sorted(proc.locations()):
        if loc not in color:
            visit(loc, [])


# ---------------------------------------------------------------------------
# Symbolic states
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SymState:
    """A global program point plus the path constraint reaching it.

    ``depth`` counts transitions from the root; it exists for diagnostics
    and for minting fresh historical names, never for semantics.
    """

    loc: GlobalLoc
    pc: Formula
    depth: int = 0


def initial_state(p: Program) -> SymState:
    parts = []
    for name, init in tuple(p.shared) + tuple(p.locals):
        if init is not None:
            parts.append(atom_eq(LinTerm.var(name), LinTerm.const(init)))
    parts.append(p.init_constraint)
    return SymState(p.initial_loc(), conj(parts), 0)


def schedulable_at(p: Program, loc: GlobalLoc) -> list:
    """Transitions whose source location is current; ignores guards."""
    out = []
    for proc in p.processes:
        at = loc[proc.index]
        for t in proc.transitions:
            if t.src == at:
                out.append(t)
    return out


def schedulable(p: Program, s: SymState) -> list:
    return schedulable_at(p, s.loc)


def enabled(p: Program, s: SymState, budget: Optional[int] = None) -> list:
    """Schedulable transitions whose guard is satisfiable with the path."""
    return [t for t in schedulable(p, s) if is_enabled(p, s, t, budget)]


def is_enabled(p: Program, s: SymState, t: Transition, budget: Optional[int] = None) -> bool:
    if t.guard == TRUE:
        return is_sat(s.pc, budget) is not None
    return is_sat(conj([s.pc, t.guard]), budget) is not None


def execute(p: Program, s: SymState, t: Transition) -> SymState:
    """Strongest-postcondition step.

    The caller is responsible for only executing schedulable transitions;
    executing a disabled one simply yields an unsatisfiable state.
    """
    assert s.loc[t.process] == t.src, "transition not schedulable here"
    loc = list(s.loc)
    loc[t.process] = t.dst
    if t.assign is None:
        pc = conj([s.pc, t.guard])
    else:
        var, expr = t.assign
        hist = f"{var}#{s.depth}"
        renamed = rename_var(conj([s.pc, t.guard]), var, hist)
        equation = atom_eq(LinTerm.var(var), expr.substitute(var, LinTerm.var(hist)))
        pc = _project(conj([renamed, equation]), hist)
    return SymState(tuple(loc), simplify(pc), s.depth + 1)


def _project(f: Formula, var: str) -> Formula:
    """Eliminate var by substitution when a unit-coefficient equation
    defines it; otherwise keep the versioned conjuncts as they are."""
    parts = list(conjuncts(f))
    for i, part in enumerate(parts):
        if not (isinstance(part, Atom) and part.rel == Rel.EQ):
            continue
        n = part.normalized()
        c = n.lhs.coeff(var)
        if abs(c) != 1:
            continue
        # c*var + rest = 0  =>  var = -c*rest
        rest = n.lhs.substitute(var, LinTerm.const(0))
        solution = rest.scaled(-c)
        others = parts[:i] + parts[i + 1 :]
        return conj([substitute(q, var, solution) for q in others])
    return f


def is_terminal(p: Program, s: SymState) -> bool:
    return not schedulable(p, s)


def can_deschedule(p: Program, t1: Transition, t2: Transition) -> bool:
    """Whether executing t1 can make a co-schedulable t2 unschedulable.

    With acyclic per-process graphs this happens exactly when both leave
    the same location of the same process; distinct processes never
    interfere with each other's program counters.
    """
    assert t1.tid != t2.tid
    return t1.process == t2.process and t1.src == t2.src


def violates(p: Program, s: SymState, budget: Optional[int] = None) -> Optional[Model]:
    """A model of the path constraint that breaks the safety property,
    or None.  Unsatisfiable states violate nothing."""
    return is_sat(conj([s.pc, neg(p.prop)]), budget)


# ---------------------------------------------------------------------------
# Concrete execution (used by replay and the oracles)
# ---------------------------------------------------------------------------


def concrete_initial(p: Program, unconstrained_values: Optional[dict] = None) -> dict:
    """Initial valuation; unconstrained variables come from the mapping."""
    env = {}
    for name, init in tuple(p.shared) + tuple(p.locals):
        if init is not None:
            env[name] = init
        else:
            if unconstrained_values is None or name not in unconstrained_values:
                raise ValueError(f"no value for unconstrained variable {name!r}")
            env[name] = unconstrained_values[name]
    return env


def unconstrained_vars(p: Program) -> list:
    return [name for name, init in tuple(p.shared) + tuple(p.locals) if init is None]


def concrete_step(p: Program, env: dict, t: Transition) -> Optional[dict]:
    """Apply t to a concrete valuation; None when the guard is false."""
    if not eval_formula(t.guard, env):
        return None
    if t.assign is None:
        return dict(env)
    var, expr = t.assign
    out = dict(env)
    out[var] = expr.eval(env)
    return out
