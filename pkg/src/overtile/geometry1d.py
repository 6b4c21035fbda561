"""Interval tiles, patches, geometric realization and iteration of overlapping substitutions."""

from __future__ import annotations

import functools
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterable, NamedTuple, Sequence

from .adjacency import AdjacencyGraph, build_adjacency_graph, check_graph_consistency
from .exactnum import DEFAULT_EPS, ExactDomain, FieldContext, FieldElement, FloatDomain, Mode
from .exactnum import poly as P
from .ruledsl import SymbolicSubstitution
from .spectral import PFData

log = logging.getLogger(__name__)

Domain = Any  # ExactDomain | FloatDomain


class GeometryError(ValueError):
    pass


class IllegalOverlap(GeometryError):
    def __init__(self, tile1: "Tile", tile2: "Tile", interval: tuple, note: str = ""):
        self.tile1, self.tile2, self.interval = tile1, tile2, interval
        self.level: int | None = None
        self.seed: int | None = None
        lo, hi = (float(v) for v in interval)
        msg = f"tiles {tile1.label}@{float(tile1.left):.6g} and {tile2.label}@{float(tile2.left):.6g} overlap on [{lo:.6g}, {hi:.6g}]"
        super().__init__(msg + (f" ({note})" if note else ""))


class LengthIdentityViolation(GeometryError):
    pass


class NotExpanding(GeometryError):
    pass


class NoSeedFound(GeometryError):
    pass


class NonNested(GeometryError):
    pass


class Tile(NamedTuple):
    label: int
    left: Any


@dataclass
class GeomSubstitution:
    alphabet: tuple[str, ...]
    lengths: list
    beta: Any
    rules: list[list[Tile]]  # rules[i] = rho(T_i) with T_i = [0, l_i]
    dom: Domain

    @property
    def size(self) -> int:
        return len(self.alphabet)

    @property
    def mode(self) -> Mode:
        return self.dom.mode

    def zero(self):
        return self.dom.num(0)

    def right(self, t: Tile):
        return t.left + self.lengths[t.label]

    def image(self, t: Tile) -> list[Tile]:
        """rho(T + x) = rho(T) + beta x."""
        shift = self.beta * t.left
        return [Tile(s.label, s.left + shift) for s in self.rules[t.label]]

    def proto(self, i: int) -> "Patch":
        return Patch([Tile(i, self.zero())], self)


# --- patches ---------------------------------------------------------------------


def sort_tiles(items: list, dom: Domain, tile=lambda x: x) -> list:
    """Sort by (left, label): float keys first, exact comparison to confirm."""
    keyed = sorted(items, key=lambda it: (float(tile(it).left), tile(it).label))
    for a, b in zip(keyed, keyed[1:]):
        a, b = tile(a), tile(b)
        c = dom.cmp(a.left, b.left)
        if c > 0 or (c == 0 and a.label > b.label):
            # float order disagrees with exact order: fall back to exact sorting
            def cmp(s, t):
                s, t = tile(s), tile(t)
                return dom.cmp(s.left, t.left) or (s.label > t.label) - (s.label < t.label)
            return sorted(items, key=functools.cmp_to_key(cmp))
    return keyed


class Patch:
    """Sorted tiles with pairwise disjoint interiors; identical tiles stored once."""

    __slots__ = ("tiles", "geom")

    def __init__(self, tiles: list[Tile], geom: GeomSubstitution):
        self.tiles = tiles
        self.geom = geom

    @classmethod
    def build(cls, tiles: Iterable[Tile], geom: GeomSubstitution) -> "Patch":
        dom, lengths = geom.dom, geom.lengths
        out: list[Tile] = []
        reach = reach_tile = None
        for t in sort_tiles(list(tiles), dom):
            if out and dom.eq(t.left, out[-1].left):
                if t.label == out[-1].label:
                    continue
                prev = out[-1]
                raise IllegalOverlap(prev, t, (t.left, dom.min(geom.right(prev), geom.right(t))),
                                     "distinct tiles share a left endpoint")
            if reach is not None and dom.cmp(t.left, reach) < 0:
                raise IllegalOverlap(reach_tile, t, (t.left, dom.min(reach, t.left + lengths[t.label])))
            out.append(t)
            r = t.left + lengths[t.label]
            if reach is None or dom.cmp(r, reach) > 0:
                reach, reach_tile = r, t
        return cls(out, geom)

    def __len__(self) -> int:
        return len(self.tiles)

    def __iter__(self):
        return iter(self.tiles)

    def __repr__(self) -> str:
        return f"Patch({self.word()!r}, {len(self)} tiles)"

    def word(self, sep: str | None = None) -> str:
        names = self.geom.alphabet
        if sep is None:
            sep = "" if all(len(a) == 1 for a in names) else " "
        return sep.join(names[t.label] for t in self.tiles)

    def support(self) -> tuple:
        if not self.tiles:
            raise GeometryError("empty patch has no support")
        return self.tiles[0].left, self.geom.right(self.tiles[-1])

    def intervals(self) -> list[tuple[str, float, float]]:
        g = self.geom
        return [(g.alphabet[t.label], float(t.left), float(g.right(t))) for t in self.tiles]

    def translate(self, x) -> "Patch":
        return Patch([Tile(t.label, t.left + x) for t in self.tiles], self.geom)

    def covers(self, lo, hi) -> bool:
        if not self.tiles:
            return False
        a, b = self.support()
        d = self.geom.dom
        return d.cmp(a, lo) <= 0 and d.cmp(b, hi) >= 0

    def cut(self, lo, hi) -> "Patch":
        """Tiles whose support lies in [lo, hi]."""
        d, g = self.geom.dom, self.geom
        keep = [t for t in self.tiles if d.cmp(t.left, lo) >= 0 and d.cmp(g.right(t), hi) <= 0]
        return Patch(keep, g)

    def issubset(self, other: "Patch") -> bool:
        d = self.geom.dom
        j = 0
        for t in self.tiles:
            while j < len(other.tiles) and (d.cmp(other.tiles[j].left, t.left) < 0 or (
                    d.eq(other.tiles[j].left, t.left) and other.tiles[j].label < t.label)):
                j += 1
            if j == len(other.tiles):
                return False
            u = other.tiles[j]
            if u.label != t.label or not d.eq(u.left, t.left):
                return False
        return True

    def same_as(self, other: "Patch") -> bool:
        return len(self) == len(other) and self.issubset(other)

    def adjacent_pairs(self) -> set[tuple[int, int]]:
        d, g = self.geom.dom, self.geom
        return {(a.label, b.label) for a, b in zip(self.tiles, self.tiles[1:])
                if d.eq(g.right(a), b.left)}

    def positions(self, label: int) -> list:
        return [t.left for t in self.tiles if t.label == label]


def apply(g: GeomSubstitution, p: Patch) -> Patch:
    return Patch.build((s for t in p.tiles for s in g.image(t)), g)


def iterate(g: GeomSubstitution, p: Patch, n: int) -> Patch:
    for _ in range(n):
        p = apply(g, p)
    return p


# --- realization -------------------------------------------------------------------


def domain_for(pf: PFData, eps: float = DEFAULT_EPS) -> Domain:
    return ExactDomain(pf.ctx) if pf.mode is Mode.EXACT else FloatDomain(eps)


def realize(sub: SymbolicSubstitution, pf: PFData, eps: float = DEFAULT_EPS) -> GeomSubstitution:
    dom = domain_for(pf, eps)
    exact = pf.mode is Mode.EXACT
    lengths = list(pf.left)
    beta = pf.beta
    if dom.cmp(beta, 1) <= 0:
        raise NotExpanding(f"expansion factor {float(beta):.6g} is not > 1")

    def w(x):
        return x if exact else float(x)

    rules = []
    for i in range(sub.size):
        items = sub.image_weights(i)
        a1, r = items[0]
        pos = -(1 - w(r)) * lengths[a1]
        tiles = []
        mass = dom.num(0)
        for a, wt in items:
            tiles.append(Tile(a, pos))
            pos = pos + lengths[a]
            mass = mass + w(wt) * lengths[a]
        target = beta * lengths[i]
        if not dom.eq(mass, target):
            raise LengthIdentityViolation(
                f"weighted length of the image of {sub.alphabet[i]!r} is {float(mass):.12g}, "
                f"expected {float(target):.12g}")
        if dom.cmp(tiles[0].left, 0) > 0 or dom.cmp(pos, target) < 0:
            raise NotExpanding(f"rule patch of {sub.alphabet[i]!r} does not cover its inflated tile")
        rules.append(tiles)
    return GeomSubstitution(sub.alphabet, lengths, beta, rules, dom)


def realize_word(g: GeomSubstitution, letters: Sequence[int], start=0) -> Patch:
    """Juxtapose whole tiles for a word, starting at ``start``."""
    pos = g.dom.num(start)
    tiles = []
    for a in letters:
        tiles.append(Tile(a, pos))
        pos = pos + g.lengths[a]
    return Patch(tiles, g)


# --- consistency certificate -------------------------------------------------------


@dataclass
class Certificate:
    status: str                       # PASS or FAIL
    stage: str                        # "graph", "geometry" or "complete"
    stabilized_at: int | None = None
    levels: list[dict] = field(default_factory=list)
    detail: str = ""

    @property
    def passed(self) -> bool:
        return self.status == "PASS"


def certify_consistency(g: GeomSubstitution, sub: SymbolicSubstitution,
                        graph: AdjacencyGraph | None = None) -> Certificate:
    """Compare the geometric adjacencies G'_nu of rho^nu(T_a) with G_nu.

    Levels 1..k*+1 are checked; the extra level confirms the geometric
    graph has stopped growing as well.
    """
    graph = graph or build_adjacency_graph(sub)
    report = check_graph_consistency(sub, graph, getattr(g.dom, "eps", DEFAULT_EPS))
    if not report.passed:
        return Certificate("FAIL", "graph", graph.stabilized_at,
                           detail="; ".join(line for line, c in zip(report.lines(), report.checks) if not c.ok))
    kstar = graph.stabilized_at
    patches = [g.proto(a) for a in range(g.size)]
    seen: set[tuple[int, int]] = set()
    levels = []
    ok = True
    for nu in range(1, kstar + 2):
        for a in range(g.size):
            try:
                patches[a] = apply(g, patches[a])
            except IllegalOverlap as exc:
                exc.level, exc.seed = nu, a
                return Certificate("FAIL", "geometry", kstar, levels,
                                   f"level {nu}, seed {g.alphabet[a]}: {exc}")
            seen |= patches[a].adjacent_pairs()
        want = set(graph.level(nu))
        match = seen == want
        ok = ok and match
        levels.append({
            "level": nu,
            "geometric": sorted((g.alphabet[e], g.alphabet[f]) for e, f in seen),
            "symbolic": sorted((g.alphabet[e], g.alphabet[f]) for e, f in want),
            "match": match,
        })
    if not ok:
        bad = [lv["level"] for lv in levels if not lv["match"]]
        return Certificate("FAIL", "geometry", kstar, levels, f"adjacency mismatch at levels {bad}")
    return Certificate("PASS", "complete", kstar, levels)


# --- fixed points and tilings --------------------------------------------------------


@dataclass(frozen=True)
class Seed:
    k: int
    tile: Tile
    offset: Any  # c with T_i + c in rho^k(T_i)


def fixed_point_seed(g: GeomSubstitution, k_max: int = 6) -> Seed:
    """Find T_i + c strictly inside rho^k(T_i); the seed T_i + x with x = c/(1 - beta^k)
    then satisfies T_i + x in rho^k(T_i + x)."""
    d = g.dom
    patches = [g.proto(a) for a in range(g.size)]
    bk = d.num(1)
    for k in range(1, k_max + 1):
        bk = bk * g.beta
        for i in range(g.size):
            patches[i] = apply(g, patches[i])
            lo, hi = patches[i].support()
            li = g.lengths[i]
            for t in patches[i].tiles:
                if t.label == i and d.cmp(t.left, lo) > 0 and d.cmp(t.left + li, hi) < 0:
                    x = t.left / (1 - bk)
                    return Seed(k, Tile(i, x), t.left)
    raise NoSeedFound(f"no interior self-copy in rho^k for k <= {k_max}")


def generate_tiling(g: GeomSubstitution, seed: Seed, W, max_rounds: int = 64) -> Patch:
    """The fixed-point tiling cut to [-W, W] (tiles whose support lies inside)."""
    p = Patch([seed.tile], g)
    if W == 0:
        return p
    lo, hi = -W, W
    for _ in range(max_rounds):
        if p.covers(lo, hi):
            return p.cut(lo, hi)
        q = iterate(g, p, seed.k)
        if not p.issubset(q):
            raise NonNested("iterated patch does not contain its predecessor")
        p = q
    raise GeometryError("window not covered within the iteration budget")


# --- JSON ----------------------------------------------------------------------------


def num_to_json(x) -> dict:
    if isinstance(x, FieldElement):
        return {"coeffs": [str(c) for c in x.coeff_vector()], "decimal": str(x.to_decimal(30))}
    if isinstance(x, (int, Fraction)):
        return {"coeffs": [str(Fraction(x))], "decimal": str(Fraction(x))}
    return {"decimal": repr(float(x))}


def num_from_json(obj, dom: Domain):
    if isinstance(dom, ExactDomain):
        if "coeffs" not in obj:
            raise GeometryError("exact geometry needs coefficient vectors")
        return dom.ctx.element([Fraction(c) for c in obj["coeffs"]])
    return float(obj["decimal"]) if isinstance(obj, dict) else float(obj)


def patch_to_json(p: Patch) -> list[dict]:
    g = p.geom
    return [{"label": g.alphabet[t.label], "left": num_to_json(t.left), "length_index": t.label}
            for t in p.tiles]


def geom_to_json(g: GeomSubstitution) -> dict:
    out = {
        "mode": g.mode.value,
        "alphabet": list(g.alphabet),
        "beta": num_to_json(g.beta),
        "lengths": [num_to_json(x) for x in g.lengths],
        "rules": [[{"label": g.alphabet[t.label], "left": num_to_json(t.left)} for t in r]
                  for r in g.rules],
    }
    if isinstance(g.dom, ExactDomain):
        ctx = g.dom.ctx
        out["modulus"] = [str(c) for c in ctx.modulus]
        out["interval"] = [str(ctx.lo), str(ctx.hi)]
    else:
        out["eps"] = g.dom.eps
    return out


def geom_from_json(obj: dict) -> GeomSubstitution:
    """Load a (possibly hand-authored) geometric substitution."""
    if obj.get("mode", "FLOAT") == "EXACT":
        ctx = FieldContext([Fraction(c) for c in obj["modulus"]],
                           [Fraction(v) for v in obj["interval"]])
        dom: Domain = ExactDomain(ctx)
    else:
        dom = FloatDomain(obj.get("eps", DEFAULT_EPS))
    alphabet = tuple(obj["alphabet"])
    index = {a: i for i, a in enumerate(alphabet)}
    lengths = [num_from_json(x, dom) for x in obj["lengths"]]
    beta = num_from_json(obj["beta"], dom)
    rules = [[Tile(index[t["label"]], num_from_json(t["left"], dom)) for t in r] for r in obj["rules"]]
    if len(rules) != len(alphabet):
        raise GeometryError("one rule patch per letter is required")
    g = GeomSubstitution(alphabet, lengths, beta, rules, dom)
    for i in range(g.size):
        Patch.build(rules[i], g)  # rule patches must be patches
    return g
