"""Certify the expansion factor as an algebraic integer through the module of return vectors."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .exactnum import ExactDomain, FieldElement, FloatModeUnsupported
from .exactnum import poly as P
from .geometry1d import GeomSubstitution, Patch
from .spectral import char_poly_rows


class EmptyModule(ValueError):
    pass


class ModuleNotInvariant(ValueError):
    pass


class VerificationFailed(ValueError):
    pass


# --- integer lattices -----------------------------------------------------------------


def hnf(rows: Sequence[Sequence[int]]) -> list[list[int]]:
    """Row Hermite normal form; returns the nonzero rows (a basis of the row lattice)."""
    a = [list(map(int, r)) for r in rows if any(r)]
    if not a:
        return []
    ncols = len(a[0])
    basis = []
    col = 0
    while a and col < ncols:
        nz = [r for r in a if r[col] != 0]
        zero = [r for r in a if r[col] == 0]
        if not nz:
            col += 1
            continue
        # gcd-reduce the column with repeated Euclid steps on the smallest entry
        while len(nz) > 1:
            nz.sort(key=lambda r: abs(r[col]))
            p = nz[0]
            rest = []
            for r in nz[1:]:
                q = r[col] // p[col]
                r = [x - q * y for x, y in zip(r, p)]
                (rest if r[col] != 0 else zero).append(r)
            nz = [p] + rest
        p = nz[0]
        if p[col] < 0:
            p = [-x for x in p]
        basis.append(p)
        a = [r for r in zero if any(r)]
        col += 1
    # reduce entries above each pivot into [0, pivot)
    for i, r in enumerate(basis):
        c = next(j for j, x in enumerate(r) if x)
        for k in range(i):
            q = basis[k][c] // r[c]
            if q:
                basis[k] = [x - q * y for x, y in zip(basis[k], r)]
    return basis


def solve_rational(basis: Sequence[Sequence[Fraction]], target: Sequence[Fraction]) -> list[Fraction] | None:
    """Coefficients a with sum a_i basis_i = target, or None when no solution exists."""
    k = len(basis)
    n = len(target)
    # augmented system: columns are basis vectors
    m = [[Fraction(basis[i][j]) for i in range(k)] + [Fraction(target[j])] for j in range(n)]
    piv_cols = []
    r = 0
    for c in range(k):
        piv = next((i for i in range(r, n) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = 1 / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(n):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        piv_cols.append(c)
        r += 1
    if any(m[i][k] != 0 for i in range(r, n)):
        return None
    sol = [Fraction(0)] * k
    for i, c in enumerate(piv_cols):
        sol[c] = m[i][k]
    return sol


# --- return module -----------------------------------------------------------------------


@dataclass
class ReturnModule:
    generators: list[FieldElement]
    basis: list[FieldElement]
    denominator: int
    int_basis: list[list[int]]   # HNF rows; basis_i = int_basis_i / denominator in power basis
    degree: int                  # field degree the vectors were written in
    window: tuple | None = None

    @property
    def rank(self) -> int:
        return len(self.basis)

    def vectors(self) -> list[list[Fraction]]:
        return [[Fraction(x, self.denominator) for x in r] for r in self.int_basis]

    def contains(self, other: "ReturnModule") -> bool:
        mine = self.vectors()
        for v in other.vectors():
            a = solve_rational(mine, _pad(v, self.degree))
            if a is None or any(x.denominator != 1 for x in a):
                return False
        return True

    def same_lattice(self, other: "ReturnModule") -> bool:
        return self.degree == other.degree and self.contains(other) and other.contains(self)


def _pad(v: Sequence[Fraction], n: int) -> list[Fraction]:
    v = list(v)
    return v + [Fraction(0)] * (n - len(v))


def return_module(p: Patch, window: tuple | None = None) -> ReturnModule:
    """Z-module spanned by differences of positions of same-label tiles."""
    dom = p.geom.dom
    if not isinstance(dom, ExactDomain):
        raise FloatModeUnsupported("return modules need exact positions")
    ctx = dom.ctx
    gens = []
    for i in range(p.geom.size):
        pos = p.positions(i)
        # differences to the first occurrence generate all pairwise differences
        gens += [x - pos[0] for x in pos[1:]]
    if not gens:
        raise EmptyModule("no label occurs twice")
    return module_from_generators(gens, ctx, window)


def module_from_generators(gens: list[FieldElement], ctx, window: tuple | None = None) -> ReturnModule:
    for x in gens:
        x.sign()  # settle pending splits before reading coefficient vectors
    n = ctx.degree
    vecs = [x.coeff_vector(n) for x in gens]
    den = math.lcm(*(c.denominator for v in vecs for c in v))
    rows = hnf([[int(c * den) for c in v] for v in vecs])
    if not rows:
        raise EmptyModule("all return vectors vanish")
    g = math.gcd(den, *(x for r in rows for x in r))
    den //= g
    rows = [[x // g for x in r] for r in rows]
    basis = [ctx.element([Fraction(x, den) for x in r]) for r in rows]
    return ReturnModule(gens, basis, den, rows, n, window)


@dataclass
class AlgebraicCertificate:
    matrix: list[list[int]]
    poly: list[int]              # monic, low degree first
    residual_zero: bool
    degree: int
    windows: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.residual_zero

    def poly_text(self) -> str:
        return P.format_poly(P.make(self.poly))


def certify_algebraic_integer(g: GeomSubstitution, m: ReturnModule) -> AlgebraicCertificate:
    """beta v_i = sum_j a_ij v_j with integer a_ij; then char(A)(beta) = 0."""
    dom = g.dom
    if not isinstance(dom, ExactDomain):
        raise FloatModeUnsupported("algebraic certificates need exact arithmetic")
    ctx = dom.ctx
    if ctx.degree != m.degree:
        # the context was split since: rewrite the generators in the new basis
        m = module_from_generators(m.generators, ctx, m.window)
    vecs = m.vectors()
    A = []
    for v in m.basis:
        w = (g.beta * v).coeff_vector(m.degree)
        a = solve_rational(vecs, w)
        if a is None or any(x.denominator != 1 for x in a):
            raise ModuleNotInvariant("beta times a basis vector leaves the module; enlarge the window")
        A.append([int(x) for x in a])
    # coordinates: beta v_i = sum_j A[i][j] v_j, so beta is an eigenvalue of A
    cp = char_poly_rows(A)
    if any(c.denominator != 1 for c in cp) or cp[-1] != 1:
        raise VerificationFailed("characteristic polynomial is not monic integral")
    coeffs = [int(c) for c in cp]
    zero = _eval_at(cp, g.beta).sign() == 0
    return AlgebraicCertificate(A, coeffs, zero, len(A), [m.window])


def _eval_at(p: P.Poly, x: FieldElement) -> FieldElement:
    acc = x * 0
    for c in reversed(p):
        acc = acc * x + c
    return acc


@dataclass
class StabilityReport:
    modules: list[ReturnModule]
    certificates: list[AlgebraicCertificate]
    stable: bool
    nested: bool


def certify_with_doubling(g: GeomSubstitution, tiling_for, windows: Sequence) -> StabilityReport:
    """Compute module and certificate for each window; stable when all agree.

    ``tiling_for(W)`` must return the tiling cut to [-W, W].
    """
    mods = [return_module(tiling_for(W), (-W, W)) for W in windows]
    certs = [certify_algebraic_integer(g, m) for m in mods]
    ctx = g.dom.ctx
    mods = [m if m.degree == ctx.degree else module_from_generators(m.generators, ctx, m.window)
            for m in mods]
    nested = all(b.contains(a) for a, b in zip(mods, mods[1:]))
    stable = nested and all(a.same_lattice(b) for a, b in zip(mods, mods[1:])) and \
        all(c.poly == certs[0].poly and c.passed for c in certs)
    return StabilityReport(mods, certs, stable, nested)


def certificate_to_json(cert: AlgebraicCertificate, m: ReturnModule) -> dict:
    return {
        "basis": [[str(x) for x in v] for v in m.vectors()],
        "matrix": cert.matrix,
        "poly": cert.poly,
        "poly_text": cert.poly_text(),
        "zero_at_beta": cert.residual_zero,
        "windows": [[str(a) for a in w] if w else None for w in cert.windows],
    }
