"""Substitution matrix, primitivity, characteristic polynomial, Perron-Frobenius data."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .exactnum import FieldContext, FieldElement, FloatModeUnsupported, Mode
from .exactnum import poly as P
from .ruledsl import SymbolicSubstitution

log = logging.getLogger(__name__)


class NotPrimitive(ValueError):
    pass


class PowerIterationFailed(RuntimeError):
    pass


@dataclass(frozen=True)
class SubstMatrix:
    entries: tuple[tuple, ...]  # entries[i][j]: weight of letter i in sigma(j)
    mode: Mode

    @property
    def dim(self) -> int:
        return len(self.entries)

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def rows(self) -> list[list]:
        return [list(r) for r in self.entries]

    def to_numpy(self) -> np.ndarray:
        return np.array([[float(x) for x in r] for r in self.entries])


def substitution_matrix(sub: SymbolicSubstitution) -> SubstMatrix:
    k = sub.size
    mode = sub.mode
    zero = Fraction(0) if mode is Mode.EXACT else 0.0
    m = [[zero] * k for _ in range(k)]
    for j in range(k):
        for i, w in sub.image_weights(j):
            m[i][j] = m[i][j] + (w if mode is Mode.EXACT else float(w))
    return SubstMatrix(tuple(tuple(r) for r in m), mode)


def matrix(rows: Sequence[Sequence]) -> SubstMatrix:
    """Build a matrix from nested lists; rational entries give an exact matrix."""
    exact = all(not isinstance(x, float) for r in rows for x in r)
    conv = Fraction if exact else float
    return SubstMatrix(tuple(tuple(conv(x) for x in r) for r in rows),
                       Mode.EXACT if exact else Mode.FLOAT)


def _exact_rows(M: SubstMatrix) -> list[list[Fraction]]:
    out = []
    for r in M.entries:
        row = []
        for x in r:
            if isinstance(x, float):
                if not x.is_integer():
                    raise FloatModeUnsupported("characteristic polynomial needs rational entries")
                x = Fraction(x)
            row.append(x)
        out.append(row)
    return out


def _matmul(a, b):
    n = len(a)
    return [[sum((a[i][k] * b[k][j] for k in range(n)), Fraction(0)) for j in range(n)]
            for i in range(n)]


def char_poly_rows(rows: Sequence[Sequence[Fraction]]) -> P.Poly:
    """det(xI - A) by Faddeev-LeVerrier, low degree first."""
    n = len(rows)
    a = [[Fraction(x) for x in r] for r in rows]
    coeffs = [Fraction(0)] * (n + 1)
    coeffs[n] = Fraction(1)
    mk = [[Fraction(0)] * n for _ in range(n)]  # M_0 = 0
    c = Fraction(1)
    for k in range(1, n + 1):
        # M_k = A M_{k-1} + c_{n-k+1} I
        am = _matmul(a, mk)
        for i in range(n):
            am[i][i] += c
        mk = am
        amk = _matmul(a, mk)
        c = -sum((amk[i][i] for i in range(n)), Fraction(0)) / k
        coeffs[n - k] = c
    return P.make(coeffs)


def char_poly(M: SubstMatrix) -> P.Poly:
    return char_poly_rows(_exact_rows(M))


def is_primitive(M: SubstMatrix) -> tuple[bool, int | None]:
    """Smallest n with M^n > 0 (on the boolean support), up to the Wielandt bound."""
    k = M.dim
    s = np.array([[float(x) > 0 for x in r] for r in M.entries], dtype=bool)
    bound = k * k - 2 * k + 2
    p = s.copy()
    for n in range(1, bound + 1):
        if p.all():
            return True, n
        p = (p.astype(np.int64) @ s.astype(np.int64)) > 0
    return False, None


# --- Perron-Frobenius data ---------------------------------------------------------


@dataclass
class PFData:
    beta: FieldElement | float
    left: list
    right: list
    primitivity_witness: int
    mode: Mode
    ctx: FieldContext | None = None
    poly: P.Poly | None = None

    def floats(self) -> tuple[float, list[float], list[float]]:
        return float(self.beta), [float(x) for x in self.left], [float(x) for x in self.right]

    def appendix_normalized(self) -> tuple[list, list]:
        """(l, r) rescaled so that sum(r) = 1 while sum(l_i r_i) stays 1."""
        s = sum(self.right[1:], self.right[0])
        return [x * s for x in self.left], [x / s for x in self.right]

    def residuals(self, M: SubstMatrix) -> tuple[float, float]:
        """max |lM - beta l| and max |Mr - beta r| as floats."""
        A = M.to_numpy()
        b, l, r = self.floats()
        l, r = np.array(l), np.array(r)
        return float(np.max(np.abs(l @ A - b * l))), float(np.max(np.abs(A @ r - b * r)))

    def verify_exact(self, M: SubstMatrix) -> bool:
        k = M.dim
        rows = _exact_rows(M)
        for j in range(k):
            lm = sum((self.left[i] * rows[i][j] for i in range(k)), self.beta * 0)
            if (lm - self.beta * self.left[j]).sign() != 0:
                return False
        for i in range(k):
            mr = sum((self.right[j] * rows[i][j] for j in range(k)), self.beta * 0)
            if (mr - self.beta * self.right[i]).sign() != 0:
                return False
        return True


def _strip_rational_roots(p: P.Poly) -> P.Poly:
    """Divide out linear factors x - q for rational roots q (rational root test)."""
    while P.degree(p) > 1 and p[0] == 0:
        p = P.make(p[1:])
    den = math.lcm(*(c.denominator for c in p))
    num = P.integer_coeffs(P.scale(p, den))
    if abs(num[0]) > 10**12 or abs(num[-1]) > 10**12:
        return p

    def divisors(n):
        n = abs(n)
        return {d for i in range(1, math.isqrt(n) + 1) if n % i == 0 for d in (i, n // i)}

    for u in sorted(divisors(num[0])):
        for v in sorted(divisors(num[-1])):
            for q in (Fraction(u, v), Fraction(-u, v)):
                if P.degree(p) > 1 and P.evaluate(p, q) == 0:
                    p, _ = P.divmod_(p, P.make([-q, 1]))
    return p


def _kernel_vector(rows: list[list[FieldElement]]) -> list[FieldElement]:
    """A nonzero vector x with rows @ x = 0, assuming a one-dimensional kernel."""
    n = len(rows[0])
    a = [list(r) for r in rows]
    pivots = []
    r = 0
    for c in range(n):
        piv = next((i for i in range(r, len(a)) if a[i][c].sign() != 0), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        inv = a[r][c].inverse()
        a[r] = [x * inv for x in a[r]]
        for i in range(len(a)):
            if i != r and a[i][c].sign() != 0:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
    free = [c for c in range(n) if c not in pivots]
    if len(free) != 1:
        raise NotPrimitive(f"eigenspace has dimension {len(free)}")
    fc = free[0]
    one = a[0][0] * 0 + 1
    x = [None] * n
    x[fc] = one
    for i, c in enumerate(pivots):
        x[c] = -a[i][fc]
    return x


def _positive(v: list) -> list:
    if v[-1].sign() < 0 if isinstance(v[-1], FieldElement) else v[-1] < 0:
        v = [-x for x in v]
    return v


def pf_data(M: SubstMatrix, strip_rational: bool = True) -> PFData:
    ok, n = is_primitive(M)
    if not ok:
        raise NotPrimitive("substitution matrix is not primitive")
    if M.mode is Mode.EXACT:
        return _pf_exact(M, n, strip_rational)
    return _pf_float(M, n)


def _pf_exact(M: SubstMatrix, n: int, strip_rational: bool) -> PFData:
    rows = _exact_rows(M)
    k = M.dim
    cp = char_poly_rows(rows)
    sf = P.square_free(cp)
    ctx = FieldContext.from_polynomial(sf)
    if strip_rational and not ctx.is_rational:
        # beta is irrational here, so every rational root can go
        reduced = _strip_rational_roots(sf)
        if P.degree(reduced) < P.degree(sf):
            ctx = FieldContext(reduced, (ctx.lo, ctx.hi))
    beta = ctx.beta
    shifted = [[ctx.const(rows[i][j]) - (beta if i == j else 0) for j in range(k)] for i in range(k)]
    right = _positive(_kernel_vector(shifted))
    transposed = [[shifted[j][i] for j in range(k)] for i in range(k)]
    left = _positive(_kernel_vector(transposed))
    left = [x / left[-1] for x in left]
    s = sum(left[i] * right[i] for i in range(k))
    right = [x / s for x in right]
    for v in left + right:
        if v.sign() <= 0:
            raise NotPrimitive("Perron-Frobenius vector is not strictly positive")
    return PFData(beta, left, right, n, Mode.EXACT, ctx, cp)


def _power(A: np.ndarray, tol: float = 1e-13, max_iter: int = 200000) -> tuple[float, np.ndarray]:
    k = A.shape[0]
    B = A + np.eye(k)  # shift keeps the dominant eigenvalue strictly dominant
    v = np.ones(k) / k
    lam = 0.0
    for _ in range(max_iter):
        w = B @ v
        w /= np.linalg.norm(w)
        lam = float(w @ A @ w)
        if np.linalg.norm(A @ w - lam * w) <= tol * max(1.0, lam):
            return lam, w
        v = w
    raise PowerIterationFailed("power iteration did not reach the residual target")


def _pf_float(M: SubstMatrix, n: int) -> PFData:
    A = M.to_numpy()
    beta, r = _power(A)
    _, l = _power(A.T)
    l = np.abs(l) / abs(l[-1])
    r = np.abs(r)
    r = r / float(l @ r)
    return PFData(beta, [float(x) for x in l], [float(x) for x in r], n, Mode.FLOAT)


# --- export -----------------------------------------------------------------------


def _num_json(x):
    if isinstance(x, FieldElement):
        return {"coeffs": [str(c) for c in x.coeff_vector()], "decimal": str(x.to_decimal(30))}
    if isinstance(x, Fraction):
        return {"coeffs": [str(x)], "decimal": str(x)}
    return {"decimal": repr(float(x))}


def pf_to_json(M: SubstMatrix, pf: PFData, alphabet: Sequence[str]) -> dict:
    out = {
        "mode": pf.mode.value,
        "alphabet": list(alphabet),
        "matrix": [[str(x) if isinstance(x, Fraction) else repr(float(x)) for x in r] for r in M.entries],
        "beta": _num_json(pf.beta),
        "left": [_num_json(x) for x in pf.left],
        "right": [_num_json(x) for x in pf.right],
        "primitivity_witness": pf.primitivity_witness,
    }
    if pf.ctx is not None:
        out["modulus"] = [str(c) for c in pf.ctx.modulus]
    if pf.poly is not None:
        out["char_poly"] = [str(c) for c in pf.poly]
    return out


def pf_to_csv(M: SubstMatrix, pf: PFData, alphabet: Sequence[str]) -> str:
    lines = ["quantity,index,value"]
    for i, r in enumerate(M.entries):
        for j, x in enumerate(r):
            lines.append(f"M,{alphabet[i]}{alphabet[j]},{x}")
    lines.append(f"beta,,{_num_json(pf.beta)['decimal']}")
    for name, vec in (("l", pf.left), ("r", pf.right)):
        for a, x in zip(alphabet, vec):
            lines.append(f"{name},{a},{_num_json(x)['decimal']}")
    if pf.poly is not None:
        for d, c in enumerate(pf.poly):
            lines.append(f"char_poly,{d},{c}")
    return "\n".join(lines) + "\n"
