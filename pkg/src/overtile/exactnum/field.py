"""Exact arithmetic in Q(beta) for a real algebraic number beta.

Elements are residues modulo a square-free polynomial that has beta as a
root.  The modulus need not be irreducible: when an operation meets a zero
divisor (a failed inversion, or a residue that vanishes at beta) the context
is split and the factor carrying beta replaces the modulus.  Residues taken
modulo the old modulus reduce consistently modulo the new one, so elements
created before a split stay valid.
"""

from __future__ import annotations

import logging
from decimal import Decimal, localcontext
from fractions import Fraction
from typing import Union

from . import poly as P
from .roots import DEFAULT_WIDTH, bisect_root, count_roots, isolate_pf_root

log = logging.getLogger(__name__)

Number = Union[int, Fraction]


class DivisionByZero(ZeroDivisionError):
    pass


class ContextMismatch(ValueError):
    pass


class FieldContext:
    """The modulus together with an isolating interval for beta."""

    def __init__(self, modulus, interval, check: bool = True):
        modulus = P.monic(P.make(modulus))
        lo, hi = (Fraction(v) for v in interval)
        if P.degree(modulus) < 1:
            raise ValueError("modulus must have positive degree")
        if lo > hi:
            raise ValueError("empty interval")
        if check:
            if P.degree(P.gcd(modulus, P.derivative(modulus))) > 0:
                raise ValueError("modulus is not square-free")
            if lo == hi:
                if P.evaluate(modulus, lo) != 0:
                    raise ValueError(f"{lo} is not a root of the modulus")
            else:
                if P.evaluate(modulus, lo) == 0 or P.evaluate(modulus, hi) == 0:
                    raise ValueError("interval endpoints must not be roots")
                n = count_roots(modulus, lo, hi)
                if n != 1:
                    raise ValueError(f"interval holds {n} roots of the modulus")
        self.modulus: P.Poly = modulus
        self.lo, self.hi = lo, hi
        self.version = 0
        self.splits = 0
        if lo == hi and P.degree(modulus) > 1:
            self._set_modulus(P.make([-lo, 1]))
        # float conversions evaluate at the midpoint, so keep the interval narrow
        self.refine_to(DEFAULT_WIDTH)

    @classmethod
    def from_polynomial(cls, p) -> "FieldContext":
        """Context for the largest positive root of ``p`` (square-free part)."""
        p = P.square_free(P.make(p))
        return cls(p, isolate_pf_root(p))

    @property
    def degree(self) -> int:
        return P.degree(self.modulus)

    @property
    def is_rational(self) -> bool:
        return self.degree == 1

    def _set_modulus(self, m: P.Poly) -> None:
        self.modulus = P.monic(m)
        self.version += 1
        if P.degree(self.modulus) == 1:
            self.lo = self.hi = -self.modulus[0]

    def split(self, factor: P.Poly) -> bool:
        """Replace the modulus by whichever of ``factor``, ``modulus/factor`` vanishes at beta.

        Returns True when beta is a root of ``factor``.
        """
        factor = P.monic(P.gcd(factor, self.modulus))
        if P.degree(factor) < 1 or P.degree(factor) == self.degree:
            return P.degree(factor) == self.degree
        other, rem = P.divmod_(self.modulus, factor)
        assert not rem
        if self.lo == self.hi:
            hit = P.evaluate(factor, self.lo) == 0
        else:
            a, b = P.evaluate(factor, self.lo), P.evaluate(factor, self.hi)
            hit = (a > 0) != (b > 0)
        log.debug("split %s -> %s", P.format_poly(self.modulus),
                  P.format_poly(factor if hit else other))
        self._set_modulus(factor if hit else other)
        self.splits += 1
        return hit

    def refine(self) -> None:
        if self.lo == self.hi:
            return
        lo, hi = bisect_root(self.modulus, self.lo, self.hi)
        if lo == hi:
            self.lo = self.hi = lo
            self._set_modulus(P.make([-lo, 1]))
        else:
            self.lo, self.hi = lo, hi

    def refine_to(self, width: Fraction) -> None:
        while self.hi - self.lo > width:
            self.refine()

    def element(self, coeffs) -> "FieldElement":
        return FieldElement(self, P.make(coeffs))

    def const(self, c: Number) -> "FieldElement":
        return FieldElement(self, P.make([c]))

    @property
    def beta(self) -> "FieldElement":
        return FieldElement(self, P.X)

    def __repr__(self) -> str:
        return f"FieldContext({P.format_poly(self.modulus)}, [{float(self.lo)!r}, {float(self.hi)!r}])"


def _interval_eval(c: P.Poly, lo: Fraction, hi: Fraction) -> tuple[Fraction, Fraction]:
    a = b = Fraction(0)
    for coef in reversed(c):
        prods = (a * lo, a * hi, b * lo, b * hi)
        a, b = min(prods) + coef, max(prods) + coef
    return a, b


class FieldElement:
    __slots__ = ("ctx", "_coeffs", "_version")

    def __init__(self, ctx: FieldContext, coeffs: P.Poly):
        self.ctx = ctx
        if P.degree(coeffs) >= ctx.degree:
            coeffs = P.mod(coeffs, ctx.modulus)
        self._coeffs = coeffs
        self._version = ctx.version

    @property
    def coeffs(self) -> P.Poly:
        """Reduced coefficient tuple, lowest degree first."""
        if self._version != self.ctx.version:
            self._coeffs = P.mod(self._coeffs, self.ctx.modulus)
            self._version = self.ctx.version
        return self._coeffs

    def coeff_vector(self, n: int | None = None) -> list[Fraction]:
        n = self.ctx.degree if n is None else n
        c = list(self.coeffs)
        return c + [Fraction(0)] * (n - len(c))

    # -- arithmetic ---------------------------------------------------------

    def _lift(self, other) -> P.Poly:
        if isinstance(other, FieldElement):
            if other.ctx is not self.ctx:
                raise ContextMismatch("elements belong to different contexts")
            return other.coeffs
        if isinstance(other, (int, Fraction)):
            return P.make([other])
        return NotImplemented

    def __add__(self, other):
        q = self._lift(other)
        if q is NotImplemented:
            return q
        return FieldElement(self.ctx, P.add(self.coeffs, q))

    __radd__ = __add__

    def __sub__(self, other):
        q = self._lift(other)
        if q is NotImplemented:
            return q
        return FieldElement(self.ctx, P.sub(self.coeffs, q))

    def __rsub__(self, other):
        q = self._lift(other)
        if q is NotImplemented:
            return q
        return FieldElement(self.ctx, P.sub(q, self.coeffs))

    def __neg__(self):
        return FieldElement(self.ctx, P.neg(self.coeffs))

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return FieldElement(self.ctx, P.scale(self.coeffs, other))
        q = self._lift(other)
        if q is NotImplemented:
            return q
        return FieldElement(self.ctx, P.mul(self.coeffs, q))

    __rmul__ = __mul__

    def inverse(self) -> "FieldElement":
        while True:
            c = self.coeffs
            if not c:
                raise DivisionByZero("inverse of zero")
            g, s, _ = P.xgcd(c, self.ctx.modulus)
            if P.degree(g) == 0:
                return FieldElement(self.ctx, s)
            # zero divisor: keep the factor that carries beta and retry
            self.ctx.split(g)

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            if other == 0:
                raise DivisionByZero("division by zero")
            return FieldElement(self.ctx, P.scale(self.coeffs, 1 / Fraction(other)))
        q = self._lift(other)
        if q is NotImplemented:
            return q
        return self * other.inverse()

    def __rtruediv__(self, other):
        q = self._lift(other)
        if q is NotImplemented:
            return q
        return FieldElement(self.ctx, q) * self.inverse()

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        acc = FieldElement(self.ctx, P.ONE)
        base = self
        while n:
            if n & 1:
                acc = acc * base
            base = base * base
            n >>= 1
        return acc

    # -- sign and comparisons -----------------------------------------------

    def is_zero(self) -> bool:
        return self.sign() == 0

    def sign(self) -> int:
        """Exact sign of the value at beta."""
        c = self.coeffs
        if not c:
            return 0
        ctx = self.ctx
        if len(c) == 1:
            return 1 if c[0] > 0 else -1
        a, b = _interval_eval(c, ctx.lo, ctx.hi)
        if a > 0:
            return 1
        if b < 0:
            return -1
        # the residue might vanish at beta without being zero: split on the gcd
        g = P.gcd(c, ctx.modulus)
        if P.degree(g) > 0:
            ctx.split(g)
            c = self.coeffs
            if not c:
                return 0
            if len(c) == 1:
                return 1 if c[0] > 0 else -1
        # nonzero at beta now, so refinement terminates
        while True:
            ctx.refine()
            c = self.coeffs
            if len(c) <= 1:
                return 0 if not c else (1 if c[0] > 0 else -1)
            a, b = _interval_eval(c, ctx.lo, ctx.hi)
            if a > 0:
                return 1
            if b < 0:
                return -1

    def _cmp(self, other) -> int:
        q = self._lift(other)
        if q is NotImplemented:
            return NotImplemented
        return FieldElement(self.ctx, P.sub(self.coeffs, q)).sign()

    def __eq__(self, other):
        if isinstance(other, float):
            return NotImplemented
        r = self._cmp(other)
        return r if r is NotImplemented else r == 0

    def __ne__(self, other):
        r = self.__eq__(other)
        return r if r is NotImplemented else not r

    def __lt__(self, other):
        r = self._cmp(other)
        return r if r is NotImplemented else r < 0

    def __le__(self, other):
        r = self._cmp(other)
        return r if r is NotImplemented else r <= 0

    def __gt__(self, other):
        r = self._cmp(other)
        return r if r is NotImplemented else r > 0

    def __ge__(self, other):
        r = self._cmp(other)
        return r if r is NotImplemented else r >= 0

    __hash__ = None  # equality can change representation after a split

    def __abs__(self):
        return -self if self.sign() < 0 else self

    # -- conversions ----------------------------------------------------------

    def midpoint_value(self) -> Fraction:
        mid = (self.ctx.lo + self.ctx.hi) / 2
        return P.evaluate(self.coeffs, mid) if self.coeffs else Fraction(0)

    def __float__(self) -> float:
        return float(self.midpoint_value())

    def as_rational(self) -> Fraction | None:
        c = self.coeffs
        if len(c) <= 1:
            return c[0] if c else Fraction(0)
        return None

    def to_decimal(self, digits: int = 30) -> Decimal:
        """Decimal value correct to ``digits`` significant digits (up to the last one)."""
        c = self.coeffs
        eps = Fraction(1, 10 ** (digits + 8))
        while True:
            a, b = _interval_eval(c, self.ctx.lo, self.ctx.hi) if len(c) > 1 else (
                (c[0], c[0]) if c else (Fraction(0), Fraction(0)))
            if b - a <= eps * max(1, abs(a)):
                break
            self.ctx.refine()
            c = self.coeffs
        mid = (a + b) / 2
        with localcontext() as dc:
            dc.prec = digits
            return Decimal(mid.numerator) / Decimal(mid.denominator)

    def __repr__(self) -> str:
        return f"FieldElement({P.format_poly(self.coeffs, 'b')} ~ {float(self):.12g})"

    def __str__(self) -> str:
        return P.format_poly(self.coeffs, "b")
