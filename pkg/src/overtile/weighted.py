"""Weighted patterns, the lifted substitution xi, cut-offs and empirical frequencies."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Iterable, Sequence

from .exactnum import ExactDomain
from .exactnum.domain import quantize
from .geometry1d import GeomSubstitution, Patch, Tile, sort_tiles


class WindowNotCovered(ValueError):
    pass


class WeightedPattern:
    """Finitely supported map from tiles to nonzero weights."""

    __slots__ = ("entries", "geom")

    def __init__(self, entries: list[tuple[Tile, Any]], geom: GeomSubstitution):
        self.entries = entries
        self.geom = geom

    @classmethod
    def build(cls, items: Iterable[tuple[Tile, Any]], geom: GeomSubstitution) -> "WeightedPattern":
        """Sort, add weights of coinciding tiles and drop zeros."""
        dom = geom.dom
        items = list(items)
        if not isinstance(dom, ExactDomain):
            # snap float positions so that rounding noise cannot split a tile
            items = [(Tile(t.label, quantize(float(t.left))), w) for t, w in items]
        merged: list[tuple[Tile, Any]] = []
        for t, w in sort_tiles(items, dom, tile=lambda it: it[0]):
            if merged and merged[-1][0].label == t.label and dom.eq(merged[-1][0].left, t.left):
                merged[-1] = (merged[-1][0], merged[-1][1] + w)
            else:
                merged.append((t, w))
        return cls([(t, w) for t, w in merged if dom.sign(w) != 0], geom)

    @classmethod
    def delta(cls, t: Tile, geom: GeomSubstitution) -> "WeightedPattern":
        return cls([(t, geom.dom.num(1))], geom)

    @classmethod
    def indicator(cls, p: Patch) -> "WeightedPattern":
        one = p.geom.dom.num(1)
        return cls([(t, one) for t in p.tiles], p.geom)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def scale(self, c) -> "WeightedPattern":
        return WeightedPattern.build(((t, w * c) for t, w in self.entries), self.geom)

    def __add__(self, other: "WeightedPattern") -> "WeightedPattern":
        return WeightedPattern.build(self.entries + other.entries, self.geom)

    def support_pattern(self) -> list[Tile]:
        return [t for t, _ in self.entries]

    def weight(self, t: Tile):
        d = self.geom.dom
        for s, w in self.entries:
            if s.label == t.label and d.eq(s.left, t.left):
                return w
        return d.num(0)

    def same_as(self, other: "WeightedPattern") -> bool:
        d = self.geom.dom
        if len(self) != len(other):
            return False
        return all(s.label == t.label and d.eq(s.left, t.left) and d.eq(v, w)
                   for (s, v), (t, w) in zip(self.entries, other.entries))


@dataclass
class Xi:
    """The lifted substitution: per letter, the weighted image of T_i."""

    geom: GeomSubstitution
    images: list[list[tuple[Tile, Any]]]

    def of(self, i: int) -> WeightedPattern:
        return WeightedPattern.build(self.images[i], self.geom)


def _overlap(a0, a1, b0, b1, dom):
    lo, hi = dom.max(a0, b0), dom.min(a1, b1)
    return hi - lo if dom.cmp(hi, lo) > 0 else dom.num(0)


def lift(g: GeomSubstitution) -> Xi:
    """Weight of S in rho(T_i) is |[0, beta l_i] intersect supp S| / l_S."""
    dom = g.dom
    images = []
    for i, rule in enumerate(g.rules):
        big = g.beta * g.lengths[i]
        img = []
        for s in rule:
            ls = g.lengths[s.label]
            img.append((s, _overlap(dom.num(0), big, s.left, s.left + ls, dom) / ls))
        images.append(img)
    return Xi(g, images)


def xi_apply(xi: Xi, v: WeightedPattern) -> WeightedPattern:
    g = xi.geom
    out = []
    for t, wt in v.entries:
        shift = g.beta * t.left
        for s, ws in xi.images[t.label]:
            out.append((Tile(s.label, s.left + shift), wt * ws))
    return WeightedPattern.build(out, g)


def xi_power(xi: Xi, v: WeightedPattern, n: int) -> WeightedPattern:
    for _ in range(n):
        v = xi_apply(xi, v)
    return v


def cutoff(v: WeightedPattern, K: tuple | None) -> WeightedPattern:
    """Keep entries with supp T inside K; ``None`` is the empty set."""
    if K is None:
        return WeightedPattern([], v.geom)
    lo, hi = K
    d, g = v.geom.dom, v.geom
    return WeightedPattern([(t, w) for t, w in v.entries
                            if d.cmp(t.left, lo) >= 0 and d.cmp(g.right(t), hi) <= 0], g)


def tau(v: WeightedPattern, i: int):
    total = v.geom.dom.num(0)
    for t, w in v.entries:
        if t.label == i:
            total = total + w
    return total


def lift_matrix(xi: Xi) -> list[list]:
    """tau_{T_i}(xi(T_j)): the substitution matrix seen through the geometry."""
    k = xi.geom.size
    cols = [xi.of(j) for j in range(k)]
    return [[tau(cols[j], i) for j in range(k)] for i in range(k)]


# --- frequencies -------------------------------------------------------------------


@dataclass(frozen=True)
class VanHoveWindow:
    lo: Fraction | float
    hi: Fraction | float
    margin: Fraction | float = 0

    def __post_init__(self):
        if not self.hi > self.lo:
            raise ValueError("window needs hi > lo")

    @property
    def length(self):
        return self.hi - self.lo

    def interior(self) -> tuple | None:
        a, b = self.lo + self.margin, self.hi - self.margin
        return (a, b) if a < b else None

    def boundary_measure(self):
        """|boundary collar| = |[lo-L, lo+L] u [hi-L, hi+L]|."""
        L = self.margin
        return 4 * L if 2 * L <= self.length else self.length + 2 * L


@dataclass
class FrequencyRow:
    window: VanHoveWindow
    letter: str
    count: int
    density: float
    expected: float
    deviation: float


@dataclass
class FrequencyReport:
    rows: list[FrequencyRow]
    boundary_ratio: dict  # window -> |boundary| / |A|

    def max_deviation(self, window: VanHoveWindow) -> float:
        return max(r.deviation for r in self.rows if r.window == window)

    def densities(self, window: VanHoveWindow) -> list[float]:
        return [r.density for r in self.rows if r.window == window]

    def to_csv(self) -> str:
        lines = ["window,letter,count,density,r_i,deviation"]
        for r in self.rows:
            w = f"[{r.window.lo};{r.window.hi}]"
            lines.append(f"{w},{r.letter},{r.count},{r.density:.12g},{r.expected:.12g},{r.deviation:.6e}")
        return "\n".join(lines) + "\n"


def empirical_frequency(p: Patch, windows: Sequence[VanHoveWindow], right: Sequence) -> FrequencyReport:
    """Tiles with support in A, per letter, divided by |A|."""
    g = p.geom
    expected = [float(x) for x in right]
    rows, ratios = [], {}
    for win in windows:
        if not p.covers(win.lo, win.hi):
            raise WindowNotCovered(f"patch does not cover [{win.lo}, {win.hi}]")
        inside = p.cut(win.lo, win.hi)
        counts = [0] * g.size
        for t in inside.tiles:
            counts[t.label] += 1
        length = float(win.length)
        for i, a in enumerate(g.alphabet):
            dens = counts[i] / length
            rows.append(FrequencyRow(win, a, counts[i], dens, expected[i], abs(dens - expected[i])))
        ratios[win] = float(win.boundary_measure()) / length
    return FrequencyReport(rows, ratios)


def max_image_diameter(xi: Xi, k: int) -> Any:
    """Largest |supp xi^k(T_i)| reach beyond [0, beta^k l_i] on either side."""
    g = xi.geom
    d = g.dom
    worst = d.num(0)
    bk = d.num(1)
    for _ in range(k):
        bk = bk * g.beta
    for i in range(g.size):
        v = xi_power(xi, WeightedPattern.delta(Tile(i, d.num(0)), g), k)
        lo = v.entries[0][0].left
        hi = max((g.right(t) for t, _ in v.entries), key=float)
        worst = d.max(worst, d.max(-lo, hi - bk * g.lengths[i]))
    return worst


def fixed_point_identity(xi: Xi, tiling: Patch, k: int, window: tuple) -> bool:
    """xi^k(v) agrees with v on the safely interior part of ``window``.

    With v the indicator of the tiling inside [lo, hi], tiles of xi^k(v)
    are complete only where every contributing image comes from inside the
    window: [beta^k lo + L_k, beta^k hi - L_k] intersected with [lo, hi].
    """
    g = xi.geom
    d = g.dom
    lo, hi = window
    v = WeightedPattern.indicator(tiling.cut(lo, hi))
    w = xi_power(xi, v, k)
    L = max_image_diameter(xi, k) + max(g.lengths, key=float)
    bk = d.num(1)
    for _ in range(k):
        bk = bk * g.beta
    a = d.max(d.num(lo), bk * lo + L)
    b = d.min(d.num(hi), bk * hi - L)
    if d.cmp(a, b) >= 0:
        raise ValueError("window too small for the fixed-point identity")
    return cutoff(w, (a, b)).same_as(cutoff(v, (a, b)))
