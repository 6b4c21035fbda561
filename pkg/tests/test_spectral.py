from __future__ import annotations

import json
import math
from fractions import Fraction

import numpy as np
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from overtile.exactnum import FloatModeUnsupported, Mode
from overtile.exactnum import poly as P
from overtile.ruledsl import parse_rules
from overtile.spectral import (NotPrimitive, char_poly, is_primitive, matrix, pf_data, pf_to_csv, pf_to_json,
                               substitution_matrix)

from conftest import rules

F = Fraction
X = sympy.Symbol("x")


def sym_charpoly(rows) -> list[Fraction]:
    m = sympy.Matrix([[sympy.Rational(str(x)) for x in r] for r in rows])
    coeffs = m.charpoly(X).all_coeffs()
    return [F(str(c)) for c in reversed(coeffs)]


def ex52_poly(r):
    return P.make([0, r, 2 * r - 1, -(2 + r), 1])


def test_ex11_matrix():
    M = substitution_matrix(rules("ex11"))
    assert M.rows() == [[F(3, 2), F(1, 2), F(1, 2)], [1, 0, 1], [0, 1, 0]]
    assert M.mode is Mode.EXACT


@pytest.mark.parametrize("r", [F(1, 4), F(1, 3), F(1, 2), F(2, 3)])
def test_ex52_matrix_and_poly(r):
    M = substitution_matrix(rules("ex52").with_params(r=r))
    assert M.rows() == [[1 + r, 0, 1 - r, 1], [1, 1, 0, 1], [1, 1, 0, 1], [0, 0, 1, 0]]
    assert char_poly(M) == tuple(ex52_poly(r))
    assert list(char_poly(M)) == sym_charpoly(M.rows())


def test_identity_and_scalar():
    assert substitution_matrix(parse_rules("alphabet a; a -> a")).rows() == [[1]]
    assert list(char_poly(matrix([[2]]))) == [-2, 1]


def test_ex53_poly_factors():
    M = substitution_matrix(rules("ex53"))
    expected = P.mul(P.mul(P.make([F(-1, 2), 1]), P.make([-1, 1])), P.make([2, -1, -4, 1]))
    assert char_poly(M) == expected


def test_char_poly_needs_rationals():
    with pytest.raises(FloatModeUnsupported):
        char_poly(substitution_matrix(rules("ex52_float")))


def bool_witness(rows):
    """Oracle: smallest n with a positive n-th boolean power."""
    A = (np.array(rows, dtype=float) > 0).astype(int)
    k = len(rows)
    B = A.copy()
    for n in range(1, k * k - 2 * k + 3):
        if B.min() > 0:
            return n
        B = ((B @ A) > 0).astype(int)
    return None


@pytest.mark.parametrize("name", ["ex11", "ex52", "ex53"])
def test_primitivity(name):
    M = substitution_matrix(rules(name))
    ok, n = is_primitive(M)
    assert ok and n == bool_witness(M.rows())


def test_ex11_witness_is_3():
    assert is_primitive(substitution_matrix(rules("ex11"))) == (True, 3)


def test_reducible():
    assert is_primitive(matrix([[1, 0], [0, 1]]))[0] is False
    with pytest.raises(NotPrimitive):
        pf_data(matrix([[1, 0], [0, 1]]))


def test_ex11_pf():
    M = substitution_matrix(rules("ex11"))
    pf = pf_data(M)
    assert pf.beta.as_rational() == 2
    assert [x.as_rational() for x in pf.left] == [2, 1, 1]
    assert [x.as_rational() for x in pf.right] == [F(1, 3), F(2, 9), F(1, 9)]
    assert pf.verify_exact(M)
    l, r = pf.appendix_normalized()
    assert sum(x.as_rational() for x in r) == 1
    assert sum(a.as_rational() * b.as_rational() for a, b in zip(l, r)) == 1


def test_ex52_float_pf():
    M = substitution_matrix(rules("ex52_float"))
    pf = pf_data(M)
    b, l, _ = pf.floats()
    s2 = math.sqrt(2)
    assert abs(b - (1 + s2)) < 1e-12
    want = np.array([s2, s2 - 1, 2 - s2, 1])
    assert np.max(np.abs(np.array(l) - want)) < 1e-8
    assert max(pf.residuals(M)) < 1e-10


def test_ex53_right_vector():
    M = substitution_matrix(rules("ex53"))
    pf = pf_data(M)
    p = pf.beta
    want = [p, p - 2, p * p - 3 * p - 2, p * 0 + 2, p * 0 + 2]
    ratio = pf.right[0] / want[0]
    assert all((x - ratio * w).sign() == 0 for x, w in zip(pf.right, want))
    assert pf.verify_exact(M)


def test_char_poly_vanishes_at_beta():
    for name in ("ex11", "ex52", "ex53"):
        M = substitution_matrix(rules(name))
        pf = pf_data(M)
        acc = pf.beta * 0
        for c in reversed(char_poly(M)):
            acc = acc * pf.beta + c
        assert acc.sign() == 0


def test_exports_are_deterministic():
    M = substitution_matrix(rules("ex52"))
    a = json.dumps(pf_to_json(M, pf_data(M), "abcd"), sort_keys=True)
    b = json.dumps(pf_to_json(M, pf_data(M), "abcd"), sort_keys=True)
    assert a == b
    assert pf_to_csv(M, pf_data(M), "abcd").startswith("quantity,index,value\nM,aa,3/2")


positive = st.integers(1, 5).map(F)
small = st.one_of(st.just(F(0)), positive, st.fractions(min_value=F(1, 10), max_value=3, max_denominator=10))


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 3).flatmap(lambda k: st.lists(st.lists(small, min_size=k, max_size=k), min_size=k, max_size=k)))
def test_random_primitive_matrices(rows):
    M = matrix(rows)
    ok, n = is_primitive(M)
    assert n == bool_witness(rows) if ok else bool_witness(rows) is None
    if not ok:
        return
    assert list(char_poly(M)) == sym_charpoly(rows)
    pf = pf_data(M)
    assert pf.verify_exact(M)
    ev = max(np.linalg.eigvals(M.to_numpy()).real)
    assert abs(float(pf.beta) - ev) < 1e-9
    s = sum((a * b for a, b in zip(pf.left, pf.right)), pf.beta * 0)
    assert (s - 1).sign() == 0


@settings(max_examples=20, deadline=None)
@given(st.fractions(min_value=F(1, 2), max_value=4, max_denominator=9))
def test_scaling_left_rescales_right(c):
    M = substitution_matrix(rules("ex11"))
    pf = pf_data(M)
    l = [x * c for x in pf.left]
    r = [x / c for x in pf.right]
    s = sum((a * b for a, b in zip(l, r)), pf.beta * 0)
    assert (s - 1).sign() == 0
