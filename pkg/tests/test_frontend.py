import pytest

from ctpverify.formula import ParseError, parse_formula
from ctpverify.frontend import parse, render_program
from ctpverify.generators import (
    gen_closely_coupled,
    gen_dining_philosophers,
    gen_flag_pair,
    gen_producer_consumer,
    gen_sum_of_ids,
)
from ctpverify.program import ProgramError, Resource
from ctpverify.solver import equivalent

CC_SOURCE = """\
# two increments race two doublings
shared x = 0
resource x <= 8
property always x <= 8
process P1 {
  0 -> 1 : [true] x := x + 1 ;
  1 -> 2 : [true] x := x + 1 ;
}
process P2 {
  0 -> 1 : [true] x := 2*x ;
  1 -> 2 : [true] x := 2*x ;
}
"""


def test_parse_closely_coupled_source():
    p = parse(CC_SOURCE)
    assert len(p.processes) == 2
    assert all(len(proc.transitions) == 2 for proc in p.processes)
    assert equivalent(p.prop, parse_formula("x <= 8"))
    assert p == gen_closely_coupled()


def test_parse_minimal_program():
    p = parse("shared x = 0\nproperty always x <= 0\nprocess P {\n 0 -> 1 : [true] skip ;\n}\n")
    assert len(p.processes) == 1
    assert p.transition(0).assign is None


@pytest.mark.parametrize("make", [
    gen_closely_coupled,
    lambda: gen_sum_of_ids(3),
    lambda: gen_producer_consumer(2),
    lambda: gen_dining_philosophers(2),
    lambda: gen_dining_philosophers(3),
    gen_flag_pair,
])
def test_render_parse_round_trip(make):
    p = make()
    assert parse(render_program(p)) == p


def test_bare_local_name_resolves_inside_block():
    src = """\
shared x = 0
local P.count = 0
property always x <= 1
process P {
  0 -> 1 : [count = 0] count := count + 1 ;
}
"""
    p = parse(src)
    var, expr = p.transition(0).assign
    assert var == "P.count"
    assert expr.vars() == {"P.count"}


def test_cross_process_local_access_rejected():
    src = """\
shared x = 0
local P.count = 0
property always x <= 1
process Q {
  0 -> 1 : [true] P.count := 1 ;
}
process P {
}
"""
    with pytest.raises(ParseError, match="may not touch"):
        parse(src)


def test_undeclared_variable_has_position():
    src = "shared x = 0\nproperty always x <= 1\nprocess P {\n  0 -> 1 : [true] y := 1 ;\n}\n"
    with pytest.raises(ParseError) as err:
        parse(src)
    assert err.value.line == 4
    assert "y" in err.value.message


def test_missing_semicolon_rejected():
    src = "shared x = 0\nproperty always x <= 1\nprocess P {\n  0 -> 1 : [true] skip\n}\n"
    with pytest.raises(ParseError, match="';'"):
        parse(src)


def test_resource_variable_in_guard_is_semantic_error():
    src = """\
shared x = 0
resource x <= 8
property always x <= 8
process P {
  0 -> 1 : [x = 0] x := x + 1 ;
}
"""
    with pytest.raises(ProgramError, match="resource"):
        parse(src)


def test_missing_property_rejected():
    with pytest.raises(ParseError, match="property"):
        parse("shared x = 0\n")


def test_unconstrained_and_init_survive_round_trip():
    p = gen_dining_philosophers(2)
    text = render_program(p)
    assert "shared fork1 = *" in text
    assert "init" in text
    assert parse(text).init_constraint == p.init_constraint


# -- generator structure ------------------------------------------------------


def test_producer_consumer_process_counts():
    assert len(gen_producer_consumer(1).processes) == 3
    assert len(gen_producer_consumer(2).processes) == 5
    with pytest.raises(ValueError):
        gen_producer_consumer(0)


def test_philosophers_need_at_least_two():
    with pytest.raises(ValueError):
        gen_dining_philosophers(1)


def test_sum_bound_is_triangle_number():
    p = gen_sum_of_ids(3)
    assert equivalent(p.prop, parse_formula("sum <= 6"))
    [r] = p.resources()
    assert r.var == "sum"


def test_closely_coupled_resource_annotation():
    p = gen_closely_coupled()
    [r] = p.resources()
    assert isinstance(r, Resource)
    assert r.var == "x"
    assert "resource x <= 8" in render_program(p)
