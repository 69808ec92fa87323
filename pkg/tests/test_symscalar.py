import pytest
from hypothesis import given, settings, strategies as st

from heckeconv.symscalar import (
    EPS, ONE, ZERO, SymScalar, SymbolTable, UnknownSymbol, alpha, format_scalar,
)

atoms = st.sampled_from([ONE, EPS, alpha(2), alpha(3), alpha(2, 2), SymScalar.const(2)])


@st.composite
def scalars(draw):
    out = ZERO
    for _ in range(draw(st.integers(0, 3))):
        coef = draw(st.fractions(min_value=-5, max_value=5, max_denominator=4))
        term = SymScalar.const(coef)
        for _ in range(draw(st.integers(0, 2))):
            term = term * draw(atoms)
        out = out + term
    return out


def test_eps_squares_to_one():
    assert EPS * EPS == ONE


def test_cancellation():
    assert (alpha(2) - alpha(2)).is_zero()
    assert ((ONE + EPS) * (ONE - EPS)).is_zero()


def test_zero_tests():
    assert ZERO.is_zero()
    assert not (EPS - 1).is_zero()
    assert (alpha(2) * EPS - EPS * alpha(2)).is_zero()


def test_alpha_powers_are_not_reduced():
    a = alpha(5)
    assert a * a != ONE
    assert (a ** 3).symbols() == {"alpha_5"}


def test_symbol_table():
    t = SymbolTable(["alpha_7"])
    assert "alpha_7" in t.names
    with pytest.raises(UnknownSymbol):
        t.declare("gamma")


def test_format():
    assert format_scalar(ZERO) == "0"
    assert format_scalar(ONE) == "1"


@settings(max_examples=1000, deadline=None)
@given(scalars(), scalars(), scalars())
def test_ring_axioms(x, y, z):
    assert (x + y) + z == x + (y + z)
    assert (x * y) * z == x * (y * z)
    assert x * y == y * x
    assert x + y == y + x
    assert x * (y + z) == x * y + x * z
    assert (x - x).is_zero()
    assert x * ONE == x and x + ZERO == x
