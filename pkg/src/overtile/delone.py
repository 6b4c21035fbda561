"""Overlapping substitutions derived from one-dimensional Delone sets with inflation symmetry.

The point sets are spectra X = {sum eps_j lam^j : eps_j in 0..m} in
Omega = [0, inf).  Each point gets a Voronoi cell and a collar label; the
inflated cell lam*V_x, intersected with the Voronoi tiling, is the image of
the labelled tile.
"""

from __future__ import annotations

import bisect
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Sequence

from .exactnum import DEFAULT_EPS, ExactDomain, FieldContext, FieldElement, FloatDomain, Mode
from .exactnum import poly as P
from .exactnum.domain import quantize
from .geometry1d import GeomSubstitution, IllegalOverlap, Patch, Tile

log = logging.getLogger(__name__)


class WindowTooSmall(ValueError):
    pass


class NotWellDefined(ValueError):
    def __init__(self, cls: int, witnesses: tuple):
        super().__init__(f"class {cls} has representatives {witnesses} with different images")
        self.cls = cls
        self.witnesses = witnesses


# --- numbers ------------------------------------------------------------------------


@dataclass
class Scalars:
    """Arithmetic policy for one point set: exact in Q(lam) or float with a grid."""

    dom: Any
    lam: Any

    @property
    def exact(self) -> bool:
        return isinstance(self.dom, ExactDomain)

    def num(self, x):
        return self.dom.num(x)

    def key(self, x):
        """Hashable key that identifies equal values."""
        if self.exact:
            x.sign()  # settle pending splits
            return tuple(x.coeffs)
        return quantize(float(x), 24)


def scalars(lam, eps: float = DEFAULT_EPS) -> Scalars:
    """``lam`` may be a rational, a float, or a (polynomial, interval) pair for an algebraic number.

    For exact keys the minimal polynomial must be irreducible; degree <= 3
    without rational roots (or degree 1) is checked.
    """
    if isinstance(lam, float):
        return Scalars(FloatDomain(eps), lam)
    if isinstance(lam, FieldElement):
        ctx = lam.ctx
    elif isinstance(lam, tuple):
        ctx = FieldContext(*lam)
    else:
        q = Fraction(lam)
        ctx = FieldContext([-q, 1], (q, q))
    _check_irreducible(ctx.modulus)
    value = lam if isinstance(lam, FieldElement) else ctx.beta
    return Scalars(ExactDomain(ctx), value)


def golden() -> tuple:
    return ([-1, -1, 1], (Fraction(3, 2), Fraction(2)))


def _check_irreducible(p: P.Poly) -> None:
    d = P.degree(p)
    if d == 1:
        return
    if d > 3:
        raise ValueError("exact spectra support minimal polynomials of degree <= 3")
    from .spectral import _strip_rational_roots
    if P.degree(_strip_rational_roots(p)) < d or p[0] == 0:
        raise ValueError("polynomial has a rational root; pass the minimal polynomial")


def _dedupe(values: list, S: Scalars) -> list:
    seen = {}
    for v in values:
        seen.setdefault(S.key(v), v)
    return sorted(seen.values(), key=float)


def _exact_sorted(values: list, S: Scalars) -> list:
    out = sorted(values, key=float)
    for a, b in zip(out, out[1:]):
        if S.dom.cmp(a, b) >= 0:
            raise ArithmeticError("float order disagrees with exact order")
    return out


# --- spectra ------------------------------------------------------------------------


@dataclass
class SpectrumSet:
    S: Scalars
    m: int
    W: Any
    points: list

    @property
    def lam(self):
        return self.S.lam

    def floats(self) -> list[float]:
        return [float(x) for x in self.points]

    def gaps(self) -> list:
        return [b - a for a, b in zip(self.points, self.points[1:])]

    def set_equation_holds(self, upto=None) -> bool:
        """X and the union of lam X + i agree on [0, upto] (default W/lam - m)."""
        S = self.S
        upto = self.W / S.lam - self.m if upto is None else upto
        lhs = {S.key(x) for x in self.points if S.dom.cmp(x, upto) <= 0}
        rhs = set()
        for x in self.points:
            for i in range(self.m + 1):
                y = S.lam * x + i
                if S.dom.cmp(y, upto) <= 0:
                    rhs.add(S.key(y))
        return lhs == rhs

    def to_csv(self) -> str:
        return "index,position\n" + "".join(f"{i},{float(x)!r}\n" for i, x in enumerate(self.points))


def spectrum(lam, m: int, W, eps: float = DEFAULT_EPS) -> SpectrumSet:
    """All digit sums sum eps_j lam^j <= W with digits 0..m.

    Uses the closure X <- X u {lam x + i <= W}: every digit sum arises from
    0 by Horner steps, and values only grow, so the closure is finite.
    """
    S = lam if isinstance(lam, Scalars) else scalars(lam, eps)
    if S.dom.cmp(S.lam, 1) <= 0:
        raise ValueError("lambda must exceed 1")
    if m + 1 < float(S.lam) - 1e-12:
        raise ValueError("need m >= lambda - 1")
    W = S.num(W) if S.exact else float(W)
    zero = S.num(0)
    known = {S.key(zero): zero}
    frontier = [zero]
    while frontier:
        nxt = []
        for x in frontier:
            for i in range(m + 1):
                y = S.lam * x + i
                if S.dom.cmp(y, W) > 0:
                    continue
                k = S.key(y)
                if k not in known:
                    known[k] = y
                    nxt.append(y)
        frontier = nxt
    pts = sorted(known.values(), key=float)
    if S.exact:
        pts = _exact_sorted(pts, S)
    return SpectrumSet(S, m, W, pts)


# --- Voronoi cells ---------------------------------------------------------------------


def voronoi_1d(points: Sequence, S: Scalars | None = None) -> list[tuple]:
    """Cells [mid(prev, x), mid(x, next)] clipped to Omega = [0, inf); the last
    cell ends at the last point, the first starts at 0 (or at the first point if it is 0)."""
    pts = list(points)
    if len(pts) < 2:
        raise WindowTooSmall("need at least two points")
    zero = pts[0] * 0
    cells = []
    for k, x in enumerate(pts):
        lo = zero if k == 0 else (pts[k - 1] + x) / 2
        hi = x if k == len(pts) - 1 else (x + pts[k + 1]) / 2
        if k == 0 and (S.dom.cmp(x, 0) < 0 if S else x < 0):
            raise ValueError("points must lie in [0, inf)")
        cells.append((lo, hi))
    return cells


# --- radii ------------------------------------------------------------------------------


@dataclass
class RadiiBundle:
    R0: Any
    RD: Any
    R1: Any
    R2: Any
    R3: Any
    RL: Any
    L: Any
    L_min: Any
    window: Any

    def floats(self) -> dict:
        return {k: float(getattr(self, k)) for k in ("R0", "RD", "R1", "R2", "R3", "RL", "L", "L_min")}


def _collar(sorted_pts: list, fl: list[float], center, R, S: Scalars) -> tuple:
    """Keys of p - center for points within the closed ball B(center, R)."""
    c, r = float(center), float(R)
    lo = bisect.bisect_left(fl, c - r - 1e-6)
    hi = bisect.bisect_right(fl, c + r + 1e-6)
    dom = S.dom
    out = []
    for p in sorted_pts[lo:hi]:
        d = p - center
        if dom.cmp(abs(d), R) <= 0:
            out.append(S.key(d))
    return tuple(out)


def _measure_rd(X: SpectrumSet, R0) -> Any:
    """Smallest radius R <= m such that the collar of lam X around z decides z in X."""
    S, lam, dom = X.S, X.S.lam, X.S.dom
    pts = X.points
    inflated = [lam * p for p in pts]
    infl_f = [float(p) for p in inflated]
    members = {S.key(x) for x in pts}
    cap = S.num(X.m)
    top = X.W / lam - cap  # beyond this lam X is incomplete near z
    # candidates: points, points moved by short return vectors of lam X, and
    # non-members at fractions of each gap
    cands = {}
    for k, x in enumerate(pts):
        if dom.cmp(x, top) > 0:
            break
        cands.setdefault(S.key(x), x)
        for j in (k - 1, k + 1, k - 2, k + 2):
            if 0 <= j < len(pts) and dom.cmp(abs(pts[j] - x), 2 * R0) <= 0:
                z = x + lam * (pts[j] - x)
                if dom.cmp(z, 0) >= 0 and dom.cmp(z, top) <= 0:
                    cands.setdefault(S.key(z), z)
        if k + 1 < len(pts):
            gap = pts[k + 1] - x
            for t in (Fraction(1, 4), Fraction(1, 2), Fraction(3, 4)):
                z = x + gap * t
                cands.setdefault(S.key(z), z)
    # candidate radii: distances from z to points of lam X within the cap
    radii = {}
    for z in cands.values():
        for p in inflated[bisect.bisect_left(infl_f, float(z) - float(cap) - 1e-6):
                          bisect.bisect_right(infl_f, float(z) + float(cap) + 1e-6)]:
            d = abs(p - z)
            if dom.cmp(d, cap) <= 0:
                radii.setdefault(S.key(d), d)
    for R in sorted(radii.values(), key=float):
        table = {}
        ok = True
        for kz, z in cands.items():
            col = _collar(inflated, infl_f, z, R, S)
            mult = kz in members
            if table.setdefault(col, mult) != mult:
                ok = False
                break
        if ok:
            return R
    return cap


def radii(X: SpectrumSet, L_request=0) -> RadiiBundle:
    S = X.S
    if len(X.points) < 2:
        raise WindowTooSmall("one-point window cannot certify relative denseness")
    lam = S.lam
    gaps = X.gaps()
    R0 = max(gaps, key=float) / 2
    RD = _measure_rd(X, R0)
    one = S.num(1)
    R1 = lam * (R0 + one)
    R2 = S.dom.max((R1 + 2 * R0 + 2) / lam, (R0 + R1 + one) / (lam - 1))
    R3 = S.dom.max(2 * R0 + 2, R0 + R2 + one)
    L_min = S.dom.max((R1 + 3 * R0 + 3 + RD) / lam + R0 + one,
                      (R1 + RD + (lam + 1) * (R0 + one)) / (lam - 1))
    L = S.dom.max(S.num(L_request) if S.exact else float(L_request), L_min)
    RL = S.dom.max(3 * R0 + 3, L + R0 + one)
    return RadiiBundle(R0, RD, R1, R2, R3, RL, L, L_min, X.W)


# --- collar classes and the derived rule ----------------------------------------------------


@dataclass
class CollarTile:
    center: Any
    cell: tuple
    collar: tuple
    omega: Any  # key of min(x, R2): (Omega - x) intersected with B_R2 is [-min(x, R2), R2]

    shape: tuple = ()  # keys of V_x - x

    def label(self) -> tuple:
        return (self.shape, self.collar, self.omega)


@dataclass
class RuleTable:
    S: Scalars
    classes: list[tuple]               # class labels in order of first occurrence
    cells: list[tuple]                 # V_x - x for each class
    images: list[list[tuple[int, Any]]]  # (class, offset of the image point from lam x)
    counts: list[int]

    @property
    def size(self) -> int:
        return len(self.classes)

    def geom(self) -> GeomSubstitution:
        """The rule table as a geometric substitution on tiles [0, |V|]."""
        lam = self.S.lam
        lengths = [b - a for a, b in self.cells]
        rules = []
        for c, img in enumerate(self.images):
            a_c = self.cells[c][0]
            rules.append([Tile(d, off + self.cells[d][0] - lam * a_c) for d, off in img])
        names = tuple(f"C{i}" for i in range(self.size))
        return GeomSubstitution(names, lengths, lam, rules, self.S.dom)

    def to_json(self) -> dict:
        from .geometry1d import geom_to_json
        out = geom_to_json(self.geom())
        out["counts"] = self.counts
        return out


@dataclass
class WellDefinednessReport:
    status: str            # PASS or FAIL
    well_defined: bool
    fixed_point: bool
    classes: int
    representatives: int
    shrunken_window: Any
    detail: str = ""

    @property
    def passed(self) -> bool:
        return self.status == "PASS"


def collar_tiles(X: SpectrumSet, bundle: RadiiBundle) -> list[CollarTile]:
    S = X.S
    pts = X.points
    fl = X.floats()
    cells = voronoi_1d(pts, S)
    out = []
    for x, cell in zip(pts, cells):
        col = _collar(pts, fl, x, bundle.L, S)
        om = S.key(S.dom.min(x, bundle.R2))
        shape = (S.key(cell[0] - x), S.key(cell[1] - x))
        out.append(CollarTile(x, cell, col, om, shape))
    return out


def _image(tiles: list[CollarTile], lo_f: list[float], x, cell, S: Scalars) -> list[tuple[int, Any]]:
    """Tiles of the Voronoi tiling meeting lam * cell (closed intersection)."""
    lam, dom = S.lam, S.dom
    a, b = lam * cell[0], lam * cell[1]
    start = max(0, bisect.bisect_left(lo_f, float(a)) - 3)
    out = []
    for t in tiles[start:]:
        if dom.cmp(t.cell[0], b) > 0:
            break
        if dom.cmp(t.cell[1], a) >= 0:
            out.append((t, t.center - lam * x))
    return out


def derive_substitution(X: SpectrumSet, bundle: RadiiBundle, inside_only: bool = False
                        ) -> tuple[RuleTable, WellDefinednessReport]:
    S, lam, dom = X.S, X.S.lam, X.S.dom
    tiles = collar_tiles(X, bundle)
    one = S.num(1)
    # the image of x, with collars, must lie inside the window
    Ws = (X.W - bundle.L - bundle.R0 - one) / lam - bundle.R0 - one
    # inside points see neither the boundary label nor a truncated collar
    lo = dom.max(bundle.R2, bundle.L) if inside_only else S.num(0)
    if dom.cmp(Ws, lo) <= 0:
        raise WindowTooSmall(f"shrunken window {float(Ws):.4g} is empty; enlarge W")
    usable = [t for t in tiles if dom.cmp(t.center, lo) >= 0 and dom.cmp(t.center, Ws) <= 0]
    if not usable:
        raise WindowTooSmall("no points in the shrunken window")
    index: dict = {}
    classes, cells, counts, reps = [], [], [], []
    for t in usable:
        lab = t.label()
        if lab not in index:
            index[lab] = len(classes)
            classes.append(lab)
            cells.append((t.cell[0] - t.center, t.cell[1] - t.center))
            counts.append(0)
            reps.append(t)
        counts[index[lab]] += 1
    lo_f = [float(t.cell[0]) for t in tiles]

    def label_of(t: CollarTile) -> int:
        lab = t.label()
        if lab not in index:
            # an image tile whose class never occurs as a center in the shrunken window
            index[lab] = len(classes)
            classes.append(lab)
            cells.append((t.cell[0] - t.center, t.cell[1] - t.center))
            counts.append(0)
            reps.append(t)
        return index[lab]

    images: dict[int, list] = {}
    witness: dict[int, Any] = {}
    well = True
    detail = ""
    for t in usable:
        c = index[t.label()]
        img = [(label_of(u), off) for u, off in _image(tiles, lo_f, t.center, t.cell, S)]
        key = [(d, S.key(off)) for d, off in img]
        if c not in images:
            images[c] = (img, key)
            witness[c] = t.center
        elif images[c][1] != key:
            well = False
            detail = f"class {c}: points {float(witness[c]):.6g} and {float(t.center):.6g} disagree"
            break
    n_centers = len(images)
    # classes that occur only inside images get no rule; they must not be needed
    table_images = [images[c][0] if c in images else [] for c in range(len(classes))]
    table = RuleTable(S, classes, cells, table_images, counts)
    fixed = False
    if well:
        fixed, why = _fixed_point_identity(table, tiles, index, usable, lo, Ws, bundle)
        detail = detail or why
    status = "PASS" if well and fixed else "FAIL"
    return table, WellDefinednessReport(status, well, fixed, n_centers, len(usable), Ws, detail)


def _fixed_point_identity(table: RuleTable, tiles: list[CollarTile], index: dict,
                          usable: list[CollarTile], lo, Ws, bundle: RadiiBundle) -> tuple[bool, str]:
    """Apply the rule table to the labelled cells of [lo, Ws] and compare with
    the labelled Voronoi tiling on the safely covered region."""
    S, lam, dom = table.S, table.S.lam, table.S.dom
    g = table.geom()
    src = Patch([Tile(index[t.label()], t.cell[0]) for t in usable], g)
    if any(not table.images[t.label] for t in src.tiles):
        return False, "a class in the window has no rule"
    try:
        from .geometry1d import apply
        out = apply(g, src)
    except IllegalOverlap as exc:
        return False, f"images overlap: {exc}"
    margin = bundle.R0 + 1
    a = lam * (lo + margin) if dom.cmp(lo, 0) > 0 else S.num(0)
    b = lam * (Ws - margin)
    if dom.cmp(a, b) >= 0:
        return False, "comparison region is empty"
    want = []
    for t in tiles:
        if dom.cmp(t.cell[0], a) >= 0 and dom.cmp(t.cell[1], b) <= 0:
            lab = t.label()
            if lab not in index:
                return False, "tiling contains a class missing from the table"
            want.append(Tile(index[lab], t.cell[0]))
    ref = Patch(want, g)
    got = out.cut(a, b)
    if not got.same_as(ref):
        return False, "image of the tiling differs from the tiling"
    return True, ""


# --- pipeline ------------------------------------------------------------------------------


@dataclass
class PipelineReport:
    status: str                       # PASS, FAIL, or NO_FLC
    windows: list
    class_counts: list[int]
    reports: list[WellDefinednessReport]
    tables: list[RuleTable] = field(repr=False, default_factory=list)
    bundles: list[RadiiBundle] = field(repr=False, default_factory=list)

    @property
    def passed(self) -> bool:
        return self.status == "PASS"

    def summary(self) -> dict:
        return {
            "status": self.status,
            "windows": [float(w) for w in self.windows],
            "class_counts": self.class_counts,
            "well_defined": [r.well_defined for r in self.reports],
            "fixed_point": [r.fixed_point for r in self.reports],
            "radii": [b.floats() for b in self.bundles],
        }


def delone_pipeline(lam, m: int, W, L_request=0, inside_only: bool = True,
                    eps: float = DEFAULT_EPS) -> PipelineReport:
    """Derive rules at W and 2W; PASS needs both well defined with equal class counts."""
    S = lam if isinstance(lam, Scalars) else scalars(lam, eps)
    windows = [W, 2 * W]
    counts, reports, tables, bundles = [], [], [], []
    for w in windows:
        X = spectrum(S, m, w)
        bundle = radii(X, L_request)
        table, rep = derive_substitution(X, bundle, inside_only)
        counts.append(rep.classes)
        reports.append(rep)
        tables.append(table)
        bundles.append(bundle)
    if counts[1] > counts[0]:
        status = "NO_FLC"
    elif all(r.passed for r in reports):
        status = "PASS"
    else:
        status = "FAIL"
    return PipelineReport(status, windows, counts, reports, tables, bundles)
