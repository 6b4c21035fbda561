from __future__ import annotations

from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from overtile.exactnum import (ContextMismatch, DivisionByZero, ExactDomain, FieldContext, FloatDomain,
                               NoPositiveRoot, count_roots, isolate_pf_root)
from overtile.exactnum import poly as P
from overtile.exactnum.domain import quantize
from overtile.exactnum.roots import DEFAULT_WIDTH

X = sympy.Symbol("x")


def sym_largest_root(coeffs):
    p = sympy.Poly(list(reversed([sympy.Rational(str(c)) for c in coeffs])), X)
    return max(r for r in p.real_roots() if r > 0)


@pytest.mark.parametrize("coeffs", [[-1, -2, 1], [2, -1, -4, 1], [-2, 1], [0, 2, -1, -4, 1]])
def test_isolate_pf_root_against_sympy(coeffs):
    lo, hi = isolate_pf_root(coeffs)
    root = sym_largest_root(coeffs)
    assert lo <= root <= hi
    assert hi - lo <= DEFAULT_WIDTH


def test_linear_root_is_exact():
    assert isolate_pf_root([-2, 1]) == (2, 2)


def test_cubic_root_digits():
    lo, hi = isolate_pf_root([2, -1, -4, 1])
    assert 4.1248 < float(lo) <= float(hi) < 4.1250


def test_no_positive_root():
    with pytest.raises(NoPositiveRoot):
        isolate_pf_root([1, 1])
    with pytest.raises(NoPositiveRoot):
        isolate_pf_root([2, 3, 1])


def test_sturm_count_matches_sympy():
    p = P.mul(P.from_roots([1, 2, 3]), P.make([-2, 0, 1]))
    assert count_roots(p, Fraction(0), Fraction(10)) == 4
    assert count_roots(p, Fraction(3, 2), Fraction(5, 2)) == 1


@pytest.fixture
def silver():
    return FieldContext.from_polynomial([-1, -2, 1])


def test_square_reduces(silver):
    b = silver.beta
    assert list((b * b).coeffs) == [1, 2]


def test_rational_context_addition():
    ctx = FieldContext.from_polynomial([-2, 1])
    s = ctx.const(Fraction(3, 2)) + Fraction(1, 2)
    assert s.as_rational() == 2


def test_inverse_splits_context():
    ctx = FieldContext(P.mul(P.make([-2, 1]), P.make([1, 0, 1])), (Fraction(19, 10), Fraction(21, 10)))
    b = ctx.beta
    inv = (b * b + 1).inverse()
    assert ctx.degree == 1
    assert inv.as_rational() == Fraction(1, 5)


def test_signs(silver):
    b = silver.beta
    assert (b * 0).sign() == 0
    assert (b - 2).sign() == 1
    assert (b * b - 2 * b - 1).sign() == 0


def test_division_by_zero(silver):
    with pytest.raises(DivisionByZero):
        (silver.beta * 0).inverse()


def test_context_mismatch(silver):
    other = FieldContext.from_polynomial([-1, -2, 1])
    with pytest.raises(ContextMismatch):
        silver.beta + other.beta


def test_sign_splits_on_hidden_zero():
    # (x^2 - 2x - 1)(x - 5) with beta = 1 + sqrt 2; x^2 - 2x - 1 is a nonzero residue that vanishes at beta
    ctx = FieldContext(P.mul(P.make([-1, -2, 1]), P.make([-5, 1])), (Fraction(2), Fraction(3)))
    e = ctx.element([-1, -2, 1])
    assert e.sign() == 0
    assert ctx.degree == 2


def test_modulus_brackets_interval(silver):
    lo, hi = silver.lo, silver.hi
    assert (P.evaluate(silver.modulus, lo) > 0) != (P.evaluate(silver.modulus, hi) > 0)


def test_domains():
    ctx = FieldContext.from_polynomial([-1, -1, 1])
    d = ExactDomain(ctx)
    phi = ctx.beta
    assert d.cmp(phi, Fraction(8, 5)) == 1
    assert d.eq(phi * phi, phi + 1)
    assert d.max(phi, 2) == 2
    f = FloatDomain(1e-9)
    assert f.eq(1.0, 1.0 + 1e-12)
    assert f.sign(-1e-12) == 0
    assert quantize(0.1 + 0.2) == quantize(0.3)


coef = st.fractions(min_value=-1000, max_value=1000, max_denominator=50)
vec3 = st.lists(coef, min_size=3, max_size=3)
CUBIC = [2, -1, -4, 1]
# irreducible, so the context never splits and can be shared
CTX = FieldContext.from_polynomial(CUBIC)


def elem(ctx, c):
    return ctx.element(c)


@settings(max_examples=60, deadline=None)
@given(vec3, vec3, vec3)
def test_ring_axioms(a, b, c):
    ctx = CTX
    x, y, z = elem(ctx, a), elem(ctx, b), elem(ctx, c)
    assert ((x + y) + z).coeffs == (x + (y + z)).coeffs
    assert (x * (y + z)).coeffs == (x * y + x * z).coeffs
    assert (x * y).coeffs == (y * x).coeffs
    if x.sign() != 0:
        assert list((x * x.inverse()).coeffs) == [1]


@settings(max_examples=1000, deadline=None)
@given(vec3, vec3)
def test_sign_is_multiplicative(a, b):
    ctx = CTX
    x, y = elem(ctx, a), elem(ctx, b)
    assert (x * y).sign() == x.sign() * y.sign()


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(-1000, 1000), min_size=3, max_size=3))
def test_float_value_matches_midpoint(c):
    ctx = CTX
    e = ctx.element(c)
    mid = (ctx.lo + ctx.hi) / 2
    assert abs(float(e) - float(P.evaluate(P.make(c), mid))) <= 2.0 ** -40


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(-50, 50), min_size=2, max_size=2))
def test_sign_against_sympy(c):
    ctx = FieldContext.from_polynomial([-1, -2, 1])
    e = ctx.element(c)
    exact = c[0] + c[1] * (1 + sympy.sqrt(2))
    assert e.sign() == int(sympy.sign(exact))
