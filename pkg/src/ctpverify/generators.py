"""Benchmark program families.

Each generator returns a fully validated Program; the CLI's ``gen``
command renders them to ``.ctp`` files.
"""

from __future__ import annotations

from .formula import Atom, LinTerm, Rel, TRUE, ZERO, atom_le, conj
from .program import Flag, Process, Program, Resource, Transition


def _is_zero(t: LinTerm) -> Atom:
    return Atom(t, Rel.EQ, ZERO)


def gen_closely_coupled() -> Program:
    """Two increments racing two doublings of one shared counter.

    Every interleaving ends at a different value; the largest (8) is
    reached by doubling only after both increments.
    """
    x = LinTerm.var("x")
    inc = x.plus(LinTerm.const(1))
    dbl = x.scaled(2)
    p1 = Process(0, "P1", 0, (
        Transition(0, 0, 0, 1, TRUE, ("x", inc)),
        Transition(1, 0, 1, 2, TRUE, ("x", inc)),
    ))
    p2 = Process(1, "P2", 0, (
        Transition(2, 1, 0, 1, TRUE, ("x", dbl)),
        Transition(3, 1, 1, 2, TRUE, ("x", dbl)),
    ))
    bound = atom_le(x, LinTerm.const(8))
    return Program(
        shared=(("x", 0),),
        locals=(),
        processes=(p1, p2),
        prop=bound,
        annotations=(Resource("x", bound),),
    )


def gen_sum_of_ids(n: int) -> Program:
    """n single-transition processes, process i adding its id i to ``sum``."""
    if n < 1:
        raise ValueError("need at least one process")
    s = LinTerm.var("sum")
    total = n * (n + 1) // 2
    processes = tuple(
        Process(i, f"A{i + 1}", 0, (
            Transition(i, i, 0, 1, TRUE, ("sum", s.plus(LinTerm.const(i + 1)))),
        ))
        for i in range(n)
    )
    bound = atom_le(s, LinTerm.const(total))
    return Program(
        shared=(("sum", 0),),
        locals=(),
        processes=processes,
        prop=bound,
        annotations=(Resource("sum", bound),),
    )


def gen_producer_consumer(n: int) -> Program:
    """n incrementers and n doublers feeding x, one consumer copying x to c.

    Each producer does a private setup step first, so plain independence
    already removes some interleavings.  The consumed value can never
    exceed n * 2**n (increment everything, then double everything).
    """
    if n < 1:
        raise ValueError("need at least one producer pair")
    x = LinTerm.var("x")
    limit = n * 2 ** n
    processes = []
    locals_ = []
    tid = 0
    for i in range(1, n + 1):
        name = f"Inc{i}"
        lv = f"{name}.l"
        locals_.append((lv, 0))
        processes.append(Process(len(processes), name, 0, (
            Transition(tid, len(processes), 0, 1, TRUE, (lv, LinTerm.const(1))),
            Transition(tid + 1, len(processes), 1, 2, TRUE, ("x", x.plus(LinTerm.const(1)))),
        )))
        tid += 2
    for i in range(1, n + 1):
        name = f"Dbl{i}"
        lv = f"{name}.l"
        locals_.append((lv, 0))
        processes.append(Process(len(processes), name, 0, (
            Transition(tid, len(processes), 0, 1, TRUE, (lv, LinTerm.const(1))),
            Transition(tid + 1, len(processes), 1, 2, TRUE, ("x", x.scaled(2))),
        )))
        tid += 2
    processes.append(Process(len(processes), "Cons", 0, (
        Transition(tid, len(processes), 0, 1, TRUE, ("c", x)),
    )))
    return Program(
        shared=(("x", 0), ("c", 0)),
        locals=tuple(locals_),
        processes=tuple(processes),
        prop=atom_le(LinTerm.var("c"), LinTerm.const(limit)),
        annotations=(Resource("x", atom_le(x, LinTerm.const(limit))),),
    )


def gen_dining_philosophers(n: int) -> Program:
    """One dining round for n philosophers over n forks in a ring.

    Fork start values are unknown in {0,1}: a fork may already be gone.
    Each philosopher thinks, grabs left then right fork (guarded,
    test-and-set in one transition each), then eats: the counter goes up
    on sitting down and back down when done.  Forks are never released,
    so at most floor(n/2) philosophers hold disjoint fork pairs at once.
    """
    if n < 2:
        raise ValueError("need at least two philosophers")
    eat = LinTerm.var("eat")
    shared = [("eat", 0)]
    box = []
    for i in range(1, n + 1):
        shared.append((f"fork{i}", None))
        f = LinTerm.var(f"fork{i}")
        box.append(atom_le(LinTerm.const(0), f))
        box.append(atom_le(f, LinTerm.const(1)))
    processes = []
    tid = 0
    for i in range(1, n + 1):
        left = LinTerm.var(f"fork{i}")
        right = LinTerm.var(f"fork{i % n + 1}")
        idx = len(processes)
        processes.append(Process(idx, f"Phil{i}", 0, (
            Transition(tid, idx, 0, 1, TRUE, None),
            Transition(tid + 1, idx, 1, 2, _is_zero(left), (f"fork{i}", LinTerm.const(1))),
            Transition(tid + 2, idx, 2, 3, _is_zero(right), (f"fork{i % n + 1}", LinTerm.const(1))),
            Transition(tid + 3, idx, 3, 4, TRUE, ("eat", eat.plus(LinTerm.const(1)))),
            Transition(tid + 4, idx, 4, 5, TRUE, ("eat", eat.minus(LinTerm.const(1)))),
        )))
        tid += 5
    return Program(
        shared=tuple(shared),
        locals=(),
        processes=tuple(processes),
        prop=atom_le(eat, LinTerm.const(n // 2)),
        init_constraint=conj(box),
    )


def gen_flag_pair() -> Program:
    """Tiny optimistic-concurrency shape: a writer sets a done flag; the
    other process only works while the flag is still clear."""
    f = LinTerm.var("f")
    x = LinTerm.var("x")
    p1 = Process(0, "Work", 0, (
        Transition(0, 0, 0, 1, _is_zero(f), ("x", x.plus(LinTerm.const(1)))),
    ))
    p2 = Process(1, "Close", 0, (
        Transition(1, 1, 0, 1, TRUE, ("f", LinTerm.const(1))),
        Transition(2, 1, 1, 2, TRUE, ("x", x.scaled(2))),
    ))
    return Program(
        shared=(("f", 0), ("x", 0)),
        locals=(),
        processes=(p1, p2),
        prop=atom_le(x, LinTerm.const(2)),
        annotations=(Flag("f"),),
    )


FAMILIES = {
    "cc": lambda n: gen_closely_coupled(),
    "pc": gen_producer_consumer,
    "phil": gen_dining_philosophers,
    "sum": gen_sum_of_ids,
}
