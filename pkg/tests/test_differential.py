"""Differential testing: every mode against brute-force enumeration.

Seeds are fixed, so failures reproduce; the acceptance suite runs the
same harness over a larger batch.
"""

import random

import pytest

from ctpverify.explorer import Mode, verify
from ctpverify.oracle import check_semi_commute, verdict
from ctpverify.por import pattern_facts
from .randprog import random_program

ALL_MODES = (Mode.EXHAUSTIVE, Mode.POR, Mode.SI, Mode.POR_SI, Mode.PDPOR_SI)


def check_one(seed: int) -> None:
    p = random_program(random.Random(seed))
    expected = verdict(p)
    for mode in ALL_MODES:
        got = verify(p, mode)
        assert got.verdict == expected, (
            f"seed {seed}: {mode.value} said {got.verdict}, enumeration says {expected}")


@pytest.mark.parametrize("seed", range(40))
def test_modes_agree_with_enumeration(seed):
    check_one(seed)


@pytest.mark.parametrize("seed", range(40, 60))
def test_random_resource_facts_hold(seed):
    """Annotated random programs must only emit facts enumeration confirms."""
    rng = random.Random(seed)
    found = 0
    while found < 2:
        p = random_program(rng)
        facts = pattern_facts(p)
        if not facts:
            continue
        found += 1
        for fact in facts:
            assert check_semi_commute(p, fact), (seed, fact)
