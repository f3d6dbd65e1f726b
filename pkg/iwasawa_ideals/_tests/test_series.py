import numpy as np
import pytest

from iwasawa_ideals.code_algebra.series import (
    RingContext,
    compose_images,
    format_many,
    one_plus_pow,
    parse_many,
    ts_arith,
    ts_deg_gr,
    ts_inverse,
    ts_partial,
    ts_substitute,
)


@pytest.fixture
def one_var():
    return RingContext(2, 4)


def test_monomial_order_is_graded_lex(two_vars):
    assert two_vars.monomials[:6] == [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]
    assert two_vars.size == 36
    assert two_vars.count_below[2] == 3


def test_freshman_square(one_var):
    x = one_var.parse("1 + X0_0")
    assert ts_arith(x, x, "mul") == one_var.parse("1 + X0_0^2")
    assert ts_arith(x, one_var.zero, "add") == x


def test_square_of_sum_in_char_two():
    ring = RingContext(2, 3, e=2)
    s = ring.parse("X0_0 + X1_0")
    assert s * s == ring.parse("X0_0^2 + X1_0^2")


def test_truncation(one_var):
    x = one_var.parse("X0_0^3")
    assert (x * x).is_zero()
    assert one_var.parse("X0_0^5").is_zero()


def test_deg_gr(two_vars):
    order, symbol = ts_deg_gr(two_vars.parse("X0_0*X1_0 + X0_0^3"))
    assert order == 2
    assert symbol == two_vars.parse("X0_0*X1_0")
    assert ts_deg_gr(two_vars.parse("1 + X0_0")) == (0, two_vars.one)
    order, symbol = ts_deg_gr(two_vars.zero)
    assert order == ">=8"
    assert symbol.is_zero()


def test_inverse():
    ring = RingContext(2, 3)
    assert ts_inverse(ring.parse("1 + X0_0")) == ring.parse("1 + X0_0 + X0_0^2")
    assert ts_inverse(ring.one) == ring.one
    with pytest.raises(ZeroDivisionError):
        ts_inverse(ring.parse("X0_0"))


def test_inverse_mod_three():
    ring = RingContext(3, 6, e=2)
    a = ring.parse("2 + X0_0 + X0_0*X1_0")
    assert a * a.inverse() == ring.one


def test_partial(two_vars, one_var):
    assert ts_partial(one_var.parse("X0_0^2"), (0, 0)).is_zero()
    assert ts_partial(one_var.parse("X0_0^3"), (0, 0)) == one_var.parse("X0_0^2")
    assert ts_partial(two_vars.parse("X0_0*X1_0"), (0, 0)) == two_vars.parse("X1_0")


def test_partial_loses_one_degree_of_precision(two_vars):
    derivative = two_vars.parse("X0_0*X1_0").partial((1, 0))
    assert derivative.precision == two_vars.N - 1


def test_substitute(one_var):
    a = one_var.parse("X0_0^2")
    assert ts_substitute(a, [one_var.parse("X0_0")]) == a
    assert ts_substitute(a, [one_var.parse("X0_0 + X0_0^2")]) == a
    b = one_var.parse("1 + X0_0 + X0_0^3")
    assert ts_substitute(b, [one_var.zero]) == one_var.one


def test_substitute_rejects_units(one_var):
    with pytest.raises(ValueError):
        one_var.parse("X0_0").substitute([one_var.one])


def test_compose_images(two_vars):
    first = [two_vars.parse("X0_0 + X1_0^2"), two_vars.parse("X1_0")]
    second = [two_vars.parse("X0_0"), two_vars.parse("X1_0 + X0_0*X1_0")]
    a = two_vars.parse("X0_0^2*X1_0 + X1_0^3 + X0_0")
    assert a.substitute(first).substitute(second) == a.substitute(
        compose_images(first, second)
    )


@pytest.mark.parametrize(
    "exponent, expected",
    [(3, "1 + X0_0 + X0_0^2 + X0_0^3"), (0, "1"), (4, "1"), (2, "1 + X0_0^2")],
)
def test_one_plus_pow(one_var, exponent, expected):
    assert one_plus_pow(one_var, (0, 0), exponent) == one_var.parse(expected)


def test_one_plus_pow_matches_power():
    ring = RingContext(3, 10, e=2)
    base = ring.parse("1 + X1_0")
    for a in range(12):
        assert one_plus_pow(ring, (1, 0), a) == base**a


def test_frobenius_is_pth_power(two_vars):
    a = two_vars.parse("1 + X0_0 + X0_0*X1_0")
    assert a.frobenius(1) == a * a
    assert a.frobenius(2) == a**4


def test_homogeneous_part(two_vars):
    x = two_vars.parse("1 + X0_0 + X0_0*X1_0 + X1_0^2 + X1_0^3")
    assert x.homogeneous_part(2) == two_vars.parse("X0_0*X1_0 + X1_0^2")
    assert x.homogeneous_part(0) == two_vars.one
    assert x.homogeneous_part(7) == two_vars.zero


def test_format_and_parse(two_vars):
    x = two_vars.parse("X1_0 + 3*X0_0^2*X1_0 + X0_0")
    assert x.format() == "X0_0 + X1_0 + X0_0^2*X1_0"
    assert two_vars.parse(x.format()) == x
    assert two_vars.zero.format() == "0"


def test_parse_many(two_vars):
    gens = parse_many(two_vars, "X0_0; X1_0^2 ;")
    assert format_many(gens) == ["X0_0", "X1_0^2"]
    assert parse_many(two_vars, "") == []


@pytest.mark.parametrize("text", ["X2_0", "X0_0 +", "X0_0/2", "Y", "(X0_0", "X0_0)*("])
def test_parse_rejects(two_vars, text):
    with pytest.raises(ValueError):
        two_vars.parse(text)


def test_coefficients_are_reduced():
    ring = RingContext(3, 4)
    x = ring.parse("-X0_0 + 4")
    assert x.terms() == {(0,): 1, (1,): 2}
    assert not x.coeffs.flags.writeable


def test_mixing_contexts_fails(two_vars, one_var):
    with pytest.raises(ValueError):
        two_vars.one + one_var.one


def test_ring_context_rejects_small_n():
    with pytest.raises(ValueError):
        RingContext(2, 1)
    np.testing.assert_array_equal(RingContext(2, 2, e=2).count_below, [0, 1, 3])
