"""Independence analysis, semi-commutativity facts, and persistent sets.

A fact ``(scope, phi, left, right)`` claims: at any in-scope state whose
valuation satisfies phi, a complete trace running ``left`` immediately
before ``right`` that stays safe guarantees the adjacently swapped trace
stays safe too.  Plain independence gives symmetric facts (equal final
states); the resource and flag patterns give directed, property-aware
ones.  Persistent sets are computed per control location from whatever
fact set the exploration mode selected.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Dict, FrozenSet, List, Optional, Tuple

from .formula import (
    TRUE,
    Atom,
    Formula,
    LinTerm,
    Rel,
    atoms,
    conj,
    conjuncts,
    free_vars,
    render,
    simplify,
)
from .program import GlobalLoc, Program, Transition, schedulable_at

ALL_LOCS = "*"


@dataclass(frozen=True)
class SemiCommuteFact:
    scope: object  # ALL_LOCS or a specific GlobalLoc
    phi: Formula
    left: int  # transition id
    right: int

    def __post_init__(self):
        if self.left == self.right:
            raise ValueError("a transition cannot semi-commute with itself")

    def applies_at(self, loc: GlobalLoc) -> bool:
        return self.scope == ALL_LOCS or self.scope == loc


@dataclass(frozen=True)
class PersistentSetEntry:
    loc: GlobalLoc
    transitions: FrozenSet[int]
    psi_trace: Formula


@dataclass(frozen=True)
class ScheduleAfterSet:
    loc: GlobalLoc
    transitions: FrozenSet[int]


# ---------------------------------------------------------------------------
# Read/write sets and plain independence
# ---------------------------------------------------------------------------


def reads(t: Transition) -> set:
    out = free_vars(t.guard)
    if t.assign is not None:
        out |= t.assign[1].vars()
    return out


def writes(t: Transition) -> set:
    return set() if t.assign is None else {t.assign[0]}


def independent(p: Program, t1: Transition, t2: Transition) -> bool:
    """No shared-variable conflict in either direction.

    Only meaningful across processes; local variables cannot collide
    because each belongs to a single process.
    """
    assert t1.process != t2.process
    shared = {name for name, _ in p.shared}
    w1 = writes(t1) & shared
    w2 = writes(t2) & shared
    r1 = reads(t1) & shared
    r2 = reads(t2) & shared
    return not (w1 & (r2 | w2)) and not (w2 & (r1 | w1))


def _property_sees_both(p: Program, t1: Transition, t2: Transition) -> bool:
    """Some property atom reads variables written by both transitions.

    Such an atom can distinguish the two interleavings at the
    intermediate state even though the final states agree, so plain
    independence is not enough to swap the pair.  With t1: a := 1,
    t2: b := 1 and the property b - a <= 0, only the t2-first order
    passes through a violating state.
    """
    w1, w2 = writes(t1), writes(t2)
    if not w1 or not w2:
        return False
    for a in atoms(p.prop):
        seen = a.lhs.vars() | a.rhs.vars()
        if seen & w1 and seen & w2:
            return True
    return False


def step1_facts(p: Program) -> FrozenSet[SemiCommuteFact]:
    """Unconditional facts from pairwise independence, both directions.

    Pairs whose writes meet inside a single property atom are skipped:
    equal final states do not cover the intermediate one there.
    """
    out = set()
    ts = p.transitions()
    for t1 in ts:
        for t2 in ts:
            if t1.process >= t2.process:
                continue
            if independent(p, t1, t2) and not _property_sees_both(p, t1, t2):
                out.add(SemiCommuteFact(ALL_LOCS, TRUE, t1.tid, t2.tid))
                out.add(SemiCommuteFact(ALL_LOCS, TRUE, t2.tid, t1.tid))
    return frozenset(out)


# ---------------------------------------------------------------------------
# Resource and flag patterns
# ---------------------------------------------------------------------------

# Left class can run first and cover the swapped order under an upper
# bound on the counter: the swapped run's counter values are pointwise
# dominated by the original run's from the swap onward, and every shape
# is monotone in the counter.
_COVERS = {
    ("add", "mult"), ("add", "sub"), ("mult", "sub"),
    ("add", "add"), ("mult", "mult"), ("sub", "sub"),
}


def classify_resource_access(t: Transition, r: str) -> Optional[str]:
    """One of 'add' (r := r+c, c>0), 'mult' (r := 2r), 'sub' (r := r-c, c>0)."""
    if t.assign is None or t.assign[0] != r:
        return None
    e = t.assign[1]
    if e.as_dict() == {r: 1} and e.constant > 0:
        return "add"
    if e.as_dict() == {r: 2} and e.constant == 0:
        return "mult"
    if e.as_dict() == {r: 1} and e.constant < 0:
        return "sub"
    return None


def _resource_facts(p: Program) -> set:
    out = set()
    prop_parts = list(conjuncts(p.prop))
    for res in p.resources():
        bound = res.bound.normalized()
        has_bound = False
        pure = True
        for part in prop_parts:
            if isinstance(part, Atom) and part.normalized() == bound:
                has_bound = True
            elif res.var in free_vars(part):
                # the counter is constrained by something other than its
                # upper bound; the domination argument no longer applies
                pure = False
        if not (has_bound and pure):
            continue
        classes: Dict[int, str] = {}
        usable = True
        for t in p.transitions():
            if res.var not in reads(t) | writes(t):
                continue
            cls = classify_resource_access(t, res.var)
            if cls is None:
                # some transition reads or writes the counter outside the
                # three shapes, so its value can leak into other state;
                # drop every fact for this variable
                usable = False
                break
            classes[t.tid] = cls
        if not usable:
            continue
        for tid1, c1 in classes.items():
            for tid2, c2 in classes.items():
                if tid1 == tid2:
                    continue
                if p.transition(tid1).process == p.transition(tid2).process:
                    continue
                if (c1, c2) in _COVERS:
                    out.add(SemiCommuteFact(ALL_LOCS, TRUE, tid1, tid2))
    return out


def _flag_facts(p: Program) -> set:
    out = set()
    ts = p.transitions()
    for flag in p.flags():
        phi = Atom(LinTerm.var(flag.var), Rel.EQ, LinTerm.const(1))
        for t1 in ts:
            for t2 in ts:
                if t1.tid != t2.tid and t1.process != t2.process:
                    out.add(SemiCommuteFact(ALL_LOCS, phi, t1.tid, t2.tid))
    return out


def pattern_facts(p: Program) -> FrozenSet[SemiCommuteFact]:
    """Everything known: independence plus annotation-driven patterns."""
    return frozenset(step1_facts(p) | _resource_facts(p) | _flag_facts(p))


# ---------------------------------------------------------------------------
# Schedulable-after sets and persistent sets
# ---------------------------------------------------------------------------


def schedulable_after(p: Program, loc: GlobalLoc) -> ScheduleAfterSet:
    """All transitions whose source is reachable in some process's local
    graph from its current location."""
    tids = set()
    for proc in p.processes:
        reach = {loc[proc.index]}
        frontier = [loc[proc.index]]
        edges: Dict[int, list] = {}
        for t in proc.transitions:
            edges.setdefault(t.src, []).append(t.dst)
        while frontier:
            u = frontier.pop()
            for w in edges.get(u, ()):
                if w not in reach:
                    reach.add(w)
                    frontier.append(w)
        for t in proc.transitions:
            if t.src in reach:
                tids.add(t.tid)
    return ScheduleAfterSet(loc, frozenset(tids))


class PersistentSetCache:
    """Per-location persistent sets over a fixed fact set, memoized.

    The order_key ranks transition ids; it decides the seed and the
    deterministic iteration order, nothing else.
    """

    def __init__(self, p: Program, facts: FrozenSet[SemiCommuteFact],
                 order_key: Optional[Callable[[int], int]] = None):
        self.program = p
        self.order_key = order_key or (lambda tid: tid)
        self._index: Dict[Tuple[int, int], List[SemiCommuteFact]] = {}
        for fact in facts:
            self._index.setdefault((fact.left, fact.right), []).append(fact)
        for bucket in self._index.values():
            # unconditional facts first, so psi_trace stays as weak as possible
            bucket.sort(key=lambda f: (f.phi != TRUE, repr(f.phi)))
        self._entries: Dict[GlobalLoc, PersistentSetEntry] = {}
        self._after: Dict[GlobalLoc, FrozenSet[int]] = {}

    def _find_fact(self, left: int, right: int, loc: GlobalLoc) -> Optional[SemiCommuteFact]:
        for fact in self._index.get((left, right), ()):
            if fact.applies_at(loc):
                return fact
        return None

    def after(self, loc: GlobalLoc) -> FrozenSet[int]:
        got = self._after.get(loc)
        if got is None:
            got = schedulable_after(self.program, loc).transitions
            self._after[loc] = got
        return got

    def at(self, loc: GlobalLoc) -> PersistentSetEntry:
        got = self._entries.get(loc)
        if got is None:
            got = self._compute(loc)
            self._entries[loc] = got
        return got

    def _compute(self, loc: GlobalLoc) -> PersistentSetEntry:
        p = self.program
        key = self.order_key
        sched = schedulable_at(p, loc)
        if not sched:
            return PersistentSetEntry(loc, frozenset(), TRUE)
        sched_ids = {t.tid for t in sched}
        proc_sched: Dict[int, set] = {}
        for t in sched:
            proc_sched.setdefault(t.process, set()).add(t.tid)
        after = self.after(loc)

        seed = min(sched, key=lambda t: key(t.tid))
        T = {seed.tid}

        def settled(ti: Transition) -> bool:
            # Every schedulable transition of ti's process is already in
            # T, so no derivation reaches ti without first running T.
            return proc_sched.get(ti.process, set()) <= T

        changed = True
        while changed:
            changed = False
            for ti_id in sorted(after - T, key=key):
                ti = p.transition(ti_id)
                if settled(ti):
                    continue
                if all(self._find_fact(tp, ti_id, loc) is not None for tp in T):
                    continue
                if ti_id in sched_ids:
                    T.add(ti_id)
                else:
                    T |= proc_sched[ti.process]
                changed = True
                break

        if T == sched_ids:
            return PersistentSetEntry(loc, frozenset(T), TRUE)
        phis = []
        for ti_id in sorted(after - T, key=key):
            ti = p.transition(ti_id)
            if settled(ti):
                continue
            for tp in sorted(T, key=key):
                fact = self._find_fact(tp, ti_id, loc)
                assert fact is not None, "closure left an unjustified transition"
                phis.append(fact.phi)
        return PersistentSetEntry(loc, frozenset(T), simplify(conj(phis)))

    def dump(self) -> str:
        """Computed entries so far, one line per location, stable order."""
        lines = []
        for loc in sorted(self._entries):
            e = self._entries[loc]
            tids = ",".join(str(t) for t in sorted(e.transitions))
            lines.append(f"{loc} -> T={{{tids}}} psi_trace={render(e.psi_trace)}")
        return "\n".join(lines)
