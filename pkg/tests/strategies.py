"""Hypothesis strategies shared by the property tests."""
from fractions import Fraction

from hypothesis import strategies as st

from ellpoisson.exactpoly import MPoly, VarId, param

POOL = [VarId("X", 0), VarId("X", 2), VarId("X", 3), VarId("X", -2),
        param("a0"), param("b1"), param("c"), VarId("F", 1), VarId("F", 2), VarId("E", 1)]

rationals = st.fractions(min_value=-20, max_value=20, max_denominator=12)
nonzero_rationals = rationals.filter(lambda q: q != 0)

monomials = st.dictionaries(st.sampled_from(POOL), st.integers(1, 3), max_size=3)


@st.composite
def mpolys(draw, max_terms=5, variables=None):
    mono = monomials if variables is None else st.dictionaries(
        st.sampled_from(variables), st.integers(1, 3), max_size=3)
    terms = draw(st.lists(st.tuples(mono, rationals), max_size=max_terms))
    return MPoly.from_terms(terms)


def nonzero(strategy):
    return strategy.filter(lambda p: not p.is_zero())


def as_fraction(q) -> Fraction:
    return Fraction(int(q.numerator), int(q.denominator))
