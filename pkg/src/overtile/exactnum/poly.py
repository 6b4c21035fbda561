"""Dense univariate polynomials over Q.

A polynomial is a tuple of ``Fraction`` coefficients, lowest degree first,
with no trailing zeros.  The zero polynomial is the empty tuple.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence

Poly = tuple  # tuple[Fraction, ...]

ZERO: Poly = ()
ONE: Poly = (Fraction(1),)
X: Poly = (Fraction(0), Fraction(1))


def make(coeffs: Iterable) -> Poly:
    """Build a trimmed polynomial from low-to-high coefficients."""
    out = [Fraction(c) for c in coeffs]
    while out and out[-1] == 0:
        out.pop()
    return tuple(out)


def from_roots(roots: Iterable) -> Poly:
    p = ONE
    for r in roots:
        p = mul(p, (Fraction(-Fraction(r)), Fraction(1)))
    return p


def degree(p: Poly) -> int:
    return len(p) - 1


def lead(p: Poly) -> Fraction:
    return p[-1] if p else Fraction(0)


def add(p: Poly, q: Poly) -> Poly:
    if len(p) < len(q):
        p, q = q, p
    out = list(p)
    for i, c in enumerate(q):
        out[i] += c
    return make(out)


def neg(p: Poly) -> Poly:
    return tuple(-c for c in p)


def sub(p: Poly, q: Poly) -> Poly:
    return add(p, neg(q))


def scale(p: Poly, c) -> Poly:
    c = Fraction(c)
    if c == 0:
        return ZERO
    return tuple(a * c for a in p)


def mul(p: Poly, q: Poly) -> Poly:
    if not p or not q:
        return ZERO
    out = [Fraction(0)] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a == 0:
            continue
        for j, b in enumerate(q):
            out[i + j] += a * b
    return make(out)


def divmod_(p: Poly, q: Poly) -> tuple[Poly, Poly]:
    if not q:
        raise ZeroDivisionError("polynomial division by zero")
    r = list(p)
    dq = len(q) - 1
    lq = q[-1]
    if len(r) - 1 < dq:
        return ZERO, make(r)
    quot = [Fraction(0)] * (len(r) - dq)
    for k in range(len(r) - 1 - dq, -1, -1):
        c = r[k + dq] / lq
        quot[k] = c
        if c:
            for j in range(dq + 1):
                r[k + j] -= c * q[j]
    return make(quot), make(r[:dq])


def mod(p: Poly, q: Poly) -> Poly:
    return divmod_(p, q)[1]


def monic(p: Poly) -> Poly:
    if not p:
        return p
    return scale(p, 1 / p[-1])


def gcd(p: Poly, q: Poly) -> Poly:
    """Monic gcd (zero if both are zero)."""
    while q:
        p, q = q, mod(p, q)
    return monic(p)


def xgcd(p: Poly, q: Poly) -> tuple[Poly, Poly, Poly]:
    """Return (g, s, t) with s*p + t*q = g, g monic."""
    r0, r1 = p, q
    s0, s1 = ONE, ZERO
    t0, t1 = ZERO, ONE
    while r1:
        qt, r = divmod_(r0, r1)
        r0, r1 = r1, r
        s0, s1 = s1, sub(s0, mul(qt, s1))
        t0, t1 = t1, sub(t0, mul(qt, t1))
    if not r0:
        return ZERO, ZERO, ZERO
    c = 1 / r0[-1]
    return scale(r0, c), scale(s0, c), scale(t0, c)


def derivative(p: Poly) -> Poly:
    return make(i * c for i, c in enumerate(p) if i > 0)


def evaluate(p: Poly, x):
    acc = 0 * x
    for c in reversed(p):
        acc = acc * x + c
    return acc


def square_free(p: Poly) -> Poly:
    """Monic square-free part p / gcd(p, p')."""
    if degree(p) <= 0:
        return monic(p)
    g = gcd(p, derivative(p))
    return monic(divmod_(p, g)[0])


def compose_linear(p: Poly, a, b) -> Poly:
    """p(a*x + b)."""
    lin = make([b, a])
    acc = ZERO
    for c in reversed(p):
        acc = add(mul(acc, lin), (Fraction(c),) if c else ZERO)
    return acc


def format_poly(p: Poly, var: str = "x") -> str:
    if not p:
        return "0"
    terms = []
    for i in range(len(p) - 1, -1, -1):
        c = p[i]
        if c == 0:
            continue
        sign = "-" if c < 0 else "+"
        a = abs(c)
        if i == 0:
            body = str(a)
        else:
            mono = var if i == 1 else f"{var}^{i}"
            body = mono if a == 1 else f"{a}*{mono}"
        terms.append((sign, body))
    first_sign, first = terms[0]
    out = ("-" if first_sign == "-" else "") + first
    for s, b in terms[1:]:
        out += f" {s} {b}"
    return out


def integer_coeffs(p: Sequence) -> list[int]:
    """Coefficients as ints; raises ValueError when one is not integral."""
    out = []
    for c in p:
        c = Fraction(c)
        if c.denominator != 1:
            raise ValueError(f"non-integer coefficient {c}")
        out.append(c.numerator)
    return out
