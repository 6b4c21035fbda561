"""Sturm sequences and isolation of the Perron-Frobenius root."""

from __future__ import annotations

from fractions import Fraction

from . import poly as P

#: target width of an isolating interval
DEFAULT_WIDTH = Fraction(1, 2**64)


class NoPositiveRoot(ValueError):
    pass


class RootTieError(ValueError):
    """Two positive roots could not be separated within the refinement budget."""


def sturm_sequence(p: P.Poly) -> list[P.Poly]:
    seq = [p, P.derivative(p)]
    while seq[-1] and P.degree(seq[-1]) > 0:
        r = P.mod(seq[-2], seq[-1])
        if not r:
            break
        seq.append(P.neg(r))
    return [q for q in seq if q]


def _sign(x) -> int:
    return (x > 0) - (x < 0)


def sign_variations(seq: list[P.Poly], x: Fraction) -> int:
    signs = [s for s in (_sign(P.evaluate(q, x)) for q in seq) if s]
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def count_roots(p: P.Poly, lo, hi, seq: list[P.Poly] | None = None) -> int:
    """Number of distinct real roots of ``p`` in the half-open interval (lo, hi]."""
    if P.degree(p) <= 0:
        return 0
    seq = seq if seq is not None else sturm_sequence(p)
    return sign_variations(seq, Fraction(lo)) - sign_variations(seq, Fraction(hi))


def cauchy_bound(p: P.Poly) -> Fraction:
    """Strict upper bound on the modulus of every root."""
    lc = abs(p[-1])
    return 1 + max((abs(c) / lc for c in p[:-1]), default=Fraction(0))


def isolate_pf_root(p, width: Fraction = DEFAULT_WIDTH) -> tuple[Fraction, Fraction]:
    """Isolate the largest positive real root of ``p``.

    Returns ``(lo, hi)`` containing exactly that root and no other root of
    ``p``; ``lo == hi`` when the root is rational and was hit exactly.
    """
    p = P.square_free(P.make(p))
    if P.degree(p) < 1:
        raise NoPositiveRoot("constant polynomial")
    if P.degree(p) == 1:
        root = -p[0] / p[1]
        if root <= 0:
            raise NoPositiveRoot(f"only root {root} is not positive")
        return root, root
    seq = sturm_sequence(p)
    lo, hi = Fraction(0), cauchy_bound(p)
    if count_roots(p, lo, hi, seq) == 0:
        raise NoPositiveRoot("no root in (0, bound]")
    # invariant: the largest root lies in (lo, hi]
    while True:
        if P.evaluate(p, hi) == 0:
            return hi, hi
        n = count_roots(p, lo, hi, seq)
        if hi - lo <= width and P.evaluate(p, lo) != 0:
            if n != 1:
                raise RootTieError(f"{n} roots remain in an interval of width {hi - lo}")
            break
        mid = (lo + hi) / 2
        if count_roots(p, mid, hi, seq) >= 1:
            lo = mid
        else:
            hi = mid
    guess = ((lo + hi) / 2).limit_denominator(2**20)
    if lo <= guess <= hi and P.evaluate(p, guess) == 0:
        return guess, guess
    return lo, hi


def bisect_root(p: P.Poly, lo: Fraction, hi: Fraction) -> tuple[Fraction, Fraction]:
    """One bisection step keeping the unique sign change of ``p`` on [lo, hi]."""
    mid = (lo + hi) / 2
    vm = P.evaluate(p, mid)
    if vm == 0:
        return mid, mid
    if _sign(P.evaluate(p, lo)) * _sign(vm) < 0:
        return lo, mid
    return mid, hi
