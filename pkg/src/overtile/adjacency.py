"""Adjacency graphs G_k of a symbolic substitution and the graph consistency check."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .exactnum import DEFAULT_EPS
from .ruledsl import Scalar, SymbolicSubstitution

Edge = tuple[int, int]


@dataclass(frozen=True)
class AdjacencyGraph:
    alphabet: tuple[str, ...]
    levels: tuple[frozenset[Edge], ...]  # levels[k-1] = edges of G_k

    @property
    def stabilized_at(self) -> int:
        return len(self.levels)

    @property
    def edges(self) -> frozenset[Edge]:
        return self.levels[-1]

    def level(self, k: int) -> frozenset[Edge]:
        """Edges of G_k (G_k = G_{k*} for k beyond stabilization)."""
        if k < 1:
            raise ValueError("levels start at 1")
        return self.levels[min(k, len(self.levels)) - 1]

    def named(self, k: int | None = None) -> list[tuple[str, str]]:
        edges = self.edges if k is None else self.level(k)
        return [(self.alphabet[e], self.alphabet[f]) for e, f in sorted(edges)]


def _is_one(w: Scalar, eps: float) -> bool:
    return w == 1 if isinstance(w, Fraction) else abs(w - 1) <= eps


def build_adjacency_graph(sub: SymbolicSubstitution, eps: float = DEFAULT_EPS) -> AdjacencyGraph:
    g1 = set()
    for img in sub.images:
        for x, y in zip(img, img[1:]):
            g1.add((x.letter, y.letter))
    levels = [frozenset(g1)]
    while True:
        cur = levels[-1]
        nxt = set(cur)
        for h, g in cur:
            e, r = sub.last(h)
            f, s = sub.first(g)
            if _is_one(r, eps) and _is_one(s, eps):
                nxt.add((e, f))
        if nxt == cur:
            break
        levels.append(frozenset(nxt))
    return AdjacencyGraph(sub.alphabet, tuple(levels))


@dataclass(frozen=True)
class EdgeCheck:
    edge: Edge
    end: tuple[int, Scalar]    # last item of sigma(e)
    start: tuple[int, Scalar]  # first item of sigma(f)
    ok: bool
    reason: str = ""


@dataclass
class ConsistencyReport:
    alphabet: tuple[str, ...]
    checks: list[EdgeCheck] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.ok for c in self.checks)

    @property
    def violations(self) -> list[EdgeCheck]:
        return [c for c in self.checks if not c.ok]

    def lines(self) -> list[str]:
        a = self.alphabet
        out = []
        for c in self.checks:
            (h, r), (h2, s) = c.end, c.start
            tag = "ok" if c.ok else f"FAIL ({c.reason})"
            out.append(f"{a[c.edge[0]]}->{a[c.edge[1]]}: [{a[h]}]_{r} | [{a[h2]}]_{s} {tag}")
        return out


def check_graph_consistency(sub: SymbolicSubstitution, g: AdjacencyGraph,
                            eps: float = DEFAULT_EPS) -> ConsistencyReport:
    """Every edge e->f must glue sigma(e) to sigma(f): both ends whole, or
    the same letter split as r and 1 - r."""
    report = ConsistencyReport(sub.alphabet)
    for e, f in sorted(g.edges):
        end, start = sub.last(e), sub.first(f)
        (h, r), (h2, s) = end, start
        if _is_one(r, eps) and _is_one(s, eps):
            ok, why = True, ""
        elif h != h2:
            ok, why = False, "different letters at the junction"
        elif _is_one(r + s, eps) and not _is_one(r, eps) and not _is_one(s, eps):
            ok, why = True, ""
        else:
            ok, why = False, f"{r} + {s} != 1"
        report.checks.append(EdgeCheck((e, f), end, start, ok, why))
    return report


def to_dot(g: AdjacencyGraph, k: int | None = None, name: str = "G") -> str:
    k = g.stabilized_at if k is None else k
    lines = [f"digraph {name}{k} {{"]
    for a in g.alphabet:
        lines.append(f'  "{a}";')
    for e, f in g.named(k):
        lines.append(f'  "{e}" -> "{f}";')
    lines.append("}")
    return "\n".join(lines) + "\n"
