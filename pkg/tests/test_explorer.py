"""Exploration mode tests with hand-computed state and trace counts.

The closely-coupled system is small enough to walk on paper:

* exhaustive / step-1 persistent sets: the full 19-node tree, 6 traces
  (all transitions touch x, so step-1 independence finds nothing);
* interpolation alone: one state per location (9) plus 4 re-visits that
  hit a stored summary, one completed trace;
* patterns + interpolation: a single chain of 5 states.
"""

import dataclasses

import pytest

from ctpverify.explorer import (
    ExplorationReport,
    MemoTable,
    Mode,
    pre,
    replay,
    trace_constraint,
    verify,
    witness_for_trace,
)
from ctpverify.formula import TRUE, FALSE, Atom, LinTerm, Rel, neg, parse_formula
from ctpverify.generators import (
    gen_closely_coupled,
    gen_dining_philosophers,
    gen_flag_pair,
    gen_producer_consumer,
    gen_sum_of_ids,
)
from ctpverify.program import Process, Program, Resource, Transition, initial_state
from ctpverify.solver import equivalent, is_sat


def counts(r: ExplorationReport):
    return (r.verdict, r.states_visited, r.states_subsumed, r.traces_completed)


# ---------------------------------------------------------------------------
# mode parsing
# ---------------------------------------------------------------------------


def test_mode_from_string():
    assert Mode.from_string("pdpor-si") == Mode.PDPOR_SI
    assert Mode.from_string("POR_SI") == Mode.POR_SI
    assert Mode.from_string(" exhaustive ") == Mode.EXHAUSTIVE
    with pytest.raises(ValueError):
        Mode.from_string("bfs")


# ---------------------------------------------------------------------------
# pre
# ---------------------------------------------------------------------------


def test_pre_substitutes_assignment():
    p = gen_closely_coupled()
    inc = p.transition(0)
    dbl = p.transition(2)
    bound = parse_formula("x <= 8")
    assert equivalent(pre(inc, bound), parse_formula("x <= 7"))
    assert equivalent(pre(dbl, bound), parse_formula("2*x <= 8"))


def test_pre_guarded_false_is_guard_negation():
    t = Transition(tid=0, process=0, src=0, dst=1,
                   guard=Atom(LinTerm.var("f"), Rel.EQ, LinTerm.const(0)),
                   assign=("x", LinTerm.var("x").plus(LinTerm.const(1))))
    assert equivalent(pre(t, FALSE), neg(t.guard))
    assert equivalent(pre(t, parse_formula("x <= 1")),
                      parse_formula("f = 0 -> x <= 0"))


# ---------------------------------------------------------------------------
# frozen counts on the generated systems
# ---------------------------------------------------------------------------


def test_closely_coupled_exhaustive():
    r = verify(gen_closely_coupled(), Mode.EXHAUSTIVE)
    assert counts(r) == ("SAFE", 19, 0, 6)


def test_closely_coupled_por_finds_no_independence():
    # every transition reads and writes x
    r = verify(gen_closely_coupled(), Mode.POR)
    assert counts(r) == ("SAFE", 19, 0, 6)


def test_closely_coupled_si():
    r = verify(gen_closely_coupled(), Mode.SI)
    assert counts(r) == ("SAFE", 9, 4, 1)
    assert r.memo is not None and len(r.memo) == 9


def test_closely_coupled_por_si_degrades_to_si():
    r = verify(gen_closely_coupled(), Mode.POR_SI)
    assert counts(r) == ("SAFE", 9, 4, 1)


def test_closely_coupled_pdpor_si_single_chain():
    r = verify(gen_closely_coupled(), Mode.PDPOR_SI)
    assert counts(r) == ("SAFE", 5, 0, 1)


def test_sum_exhaustive_tree():
    # 1 + 3 + 6 + 6 prefixes of the 3! interleavings
    r = verify(gen_sum_of_ids(3), Mode.EXHAUSTIVE)
    assert counts(r) == ("SAFE", 16, 0, 6)


def test_sum_por_all_dependent():
    r = verify(gen_sum_of_ids(3), Mode.POR)
    assert counts(r) == ("SAFE", 16, 0, 6)


@pytest.mark.parametrize("n", [2, 3, 6])
def test_sum_pdpor_si_is_linear(n):
    r = verify(gen_sum_of_ids(n), Mode.PDPOR_SI)
    assert counts(r) == ("SAFE", n + 1, 0, 1)


def test_producer_consumer_patterns_stay_conservative():
    # the consumer's c := x reads the counter outside the recognized
    # shapes, so the pattern pass contributes nothing beyond step-1
    p = gen_producer_consumer(2)
    a = verify(p, Mode.POR_SI)
    b = verify(p, Mode.PDPOR_SI)
    assert a.verdict == b.verdict == "SAFE"
    assert counts(a) == counts(b)


@pytest.mark.parametrize("mode", [Mode.EXHAUSTIVE, Mode.POR, Mode.SI,
                                  Mode.POR_SI, Mode.PDPOR_SI])
def test_philosophers_safe_in_every_mode(mode):
    r = verify(gen_dining_philosophers(2), mode)
    assert r.verdict == "SAFE"


def test_single_process_chain():
    chain = Program(
        shared=(("x", 0),),
        locals=(),
        processes=(Process(0, "P", 0, (
            Transition(0, 0, 0, 1, TRUE, ("x", LinTerm.var("x").plus(LinTerm.const(1)))),
            Transition(1, 0, 1, 2, TRUE, ("x", LinTerm.var("x").plus(LinTerm.const(1)))),
        )),),
        prop=parse_formula("x <= 2"),
    )
    for mode in Mode:
        assert counts(verify(chain, mode)) == ("SAFE", 3, 0, 1)


# ---------------------------------------------------------------------------
# guarded systems: the reduced set must keep an enabled member
# ---------------------------------------------------------------------------


def test_flag_pair_pdpor_si():
    # at the root the flag condition f = 1 does not hold yet, and after
    # the flag is set the singleton set {work} is disabled forever; both
    # situations must fall back to full scheduling
    r = verify(gen_flag_pair(), Mode.PDPOR_SI)
    assert counts(r) == ("SAFE", 6, 0, 2)


# ---------------------------------------------------------------------------
# exploration order override
# ---------------------------------------------------------------------------


def test_seed_order_reversed_cc():
    # doubling before adding is not a covered direction, so reversed
    # seeding loses the reduction and degrades to plain interpolation
    p = gen_closely_coupled()
    r = verify(p, Mode.PDPOR_SI, seed_order=[3, 2, 1, 0])
    assert counts(r) == ("SAFE", 9, 4, 1)


def test_seed_order_reversed_sum_still_linear():
    # add/add commutes in both directions, any seed gives a chain
    r = verify(gen_sum_of_ids(3), Mode.PDPOR_SI, seed_order=[2, 1, 0])
    assert counts(r) == ("SAFE", 4, 0, 1)


def test_seed_order_must_be_permutation():
    with pytest.raises(ValueError):
        verify(gen_sum_of_ids(3), Mode.PDPOR_SI, seed_order=[0, 0, 1])


# ---------------------------------------------------------------------------
# violations, witnesses, replay
# ---------------------------------------------------------------------------


def tightened_cc() -> Program:
    p = gen_closely_coupled()
    bound = parse_formula("x <= 7")
    return dataclasses.replace(
        p, prop=bound, annotations=(Resource("x", bound),))


@pytest.mark.parametrize("mode", list(Mode))
def test_tightened_cc_unsafe_in_every_mode(mode):
    r = verify(tightened_cc(), mode)
    assert r.verdict == "UNSAFE"
    assert r.counterexample is not None
    trace = r.counterexample["trace"]
    witness = r.counterexample["witness"]
    assert witness == {}
    assert replay(tightened_cc(), trace, witness)
    # the only violating valuation is x = 8: both doublings after both
    # increments
    assert sorted(trace) == [0, 1, 2, 3]


def test_philosophers_eat_bound_zero_unsafe():
    p = gen_dining_philosophers(2)
    p = dataclasses.replace(p, prop=parse_formula("eat <= 0"))
    r = verify(p, Mode.POR)
    assert r.verdict == "UNSAFE"
    cex = r.counterexample
    assert set(cex["witness"]) == {"fork1", "fork2"}
    assert replay(p, cex["trace"], cex["witness"])


@pytest.mark.parametrize("mode", list(Mode))
def test_cross_variable_property_atom_is_not_prunable(mode):
    # x := 1 and y := 1 write disjoint variables, yet y - x <= 0 fails
    # exactly between them in the y-first order.  Pruning that order
    # would hide the only violation.
    p = Program(
        shared=(("x", 0), ("y", 0)),
        locals=(),
        processes=(
            Process(0, "P", 0, (Transition(0, 0, 0, 1, TRUE, ("x", LinTerm.const(1))),)),
            Process(1, "Q", 0, (Transition(1, 1, 0, 1, TRUE, ("y", LinTerm.const(1))),)),
        ),
        prop=parse_formula("y - x <= 0"),
    )
    r = verify(p, mode)
    assert r.verdict == "UNSAFE"
    assert r.counterexample["trace"] == [1]
    assert replay(p, [1], r.counterexample["witness"])


def test_initially_violating_program():
    p = gen_closely_coupled()
    p = dataclasses.replace(p, prop=parse_formula("x <= -1"), annotations=())
    r = verify(p, Mode.EXHAUSTIVE)
    assert counts(r) == ("UNSAFE", 1, 0, 0)
    assert r.counterexample == {"trace": [], "witness": {}}
    assert replay(p, [], {})


def test_replay_rejects_bad_runs():
    p = gen_flag_pair()
    # close's doubling is not schedulable before close's flag write
    assert not replay(p, [2], {})
    # work is guard-disabled once the flag is set
    assert not replay(p, [1, 0], {})
    # a safe complete run is not a counterexample
    assert not replay(p, [0, 1, 2], {})


def test_witness_for_trace_picks_fork_values():
    p = gen_dining_philosophers(2)
    p = dataclasses.replace(p, prop=parse_formula("eat <= 0"))
    w = witness_for_trace(p, [0, 1, 2, 3])
    assert w == {"fork1": 0, "fork2": 0}
    assert witness_for_trace(p, [0, 1, 2, 4]) is None  # eat -1 never fires first


def test_trace_constraint_infeasible_without_violation():
    p = gen_closely_coupled()
    f = trace_constraint(p, [0, 1, 2, 3], with_violation=False)
    m = is_sat(f)
    assert m is not None and m["x@4"] == 8
    assert is_sat(trace_constraint(p, [0, 1, 2, 3])) is None  # 8 <= 8 holds


# ---------------------------------------------------------------------------
# resource limits
# ---------------------------------------------------------------------------


def test_timeout_reports_resource_limit():
    r = verify(gen_producer_consumer(2), Mode.EXHAUSTIVE, timeout=0.0)
    assert r.verdict == "RESOURCE_LIMIT"
    assert r.counterexample is None


def test_solver_budget_reports_resource_limit():
    r = verify(gen_dining_philosophers(2), Mode.SI, solver_budget=1)
    assert r.verdict == "RESOURCE_LIMIT"


# ---------------------------------------------------------------------------
# memo table and report shape
# ---------------------------------------------------------------------------


def test_memo_first_entailed_wins():
    memo = MemoTable()
    loc = (0, 0)
    memo.store(loc, parse_formula("x <= 5"))
    memo.store(loc, parse_formula("x <= 100"))
    s = initial_state(gen_closely_coupled())  # pc: x = 0
    assert memo.lookup(dataclasses.replace(s, loc=loc)) == parse_formula("x <= 5")
    assert len(memo) == 2


def test_report_json_shape():
    safe = verify(gen_closely_coupled(), Mode.PDPOR_SI).to_json()
    assert set(safe) == {"verdict", "states_visited", "states_subsumed",
                         "traces_completed", "time_ms"}
    unsafe = verify(tightened_cc(), Mode.EXHAUSTIVE).to_json()
    assert unsafe["verdict"] == "UNSAFE"
    assert set(unsafe["counterexample"]) == {"trace", "witness"}


def test_report_attaches_mode_internals():
    si = verify(gen_closely_coupled(), Mode.SI)
    assert si.memo is not None and si.persistent is None
    por = verify(gen_closely_coupled(), Mode.POR)
    assert por.memo is None and por.persistent is not None
    ex = verify(gen_closely_coupled(), Mode.EXHAUSTIVE)
    assert ex.memo is None and ex.persistent is None
