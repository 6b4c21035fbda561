"""Graph-directed IFS in the plane: open set condition, linear condition, attractor polylines."""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from shapely.geometry import Point, Polygon
from shapely.geometry.base import BaseGeometry

from .exactnum import DEFAULT_EPS

MAX_DEPTH = 16


class GifsError(ValueError):
    pass


class NotContractive(GifsError):
    pass


class NotStronglyConnected(GifsError):
    pass


class DepthBudgetExceeded(GifsError):
    pass


@dataclass(frozen=True)
class AffineMap:
    matrix: np.ndarray
    translation: np.ndarray

    @classmethod
    def of(cls, matrix, translation) -> "AffineMap":
        a = np.asarray(matrix, dtype=float).reshape(2, 2)
        b = np.asarray(translation, dtype=float).reshape(2)
        return cls(a, b)

    def __call__(self, pts) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        return pts @ self.matrix.T + self.translation

    def then(self, inner: "AffineMap") -> "AffineMap":
        """self o inner."""
        return AffineMap(self.matrix @ inner.matrix, self.matrix @ inner.translation + self.translation)

    @property
    def ratio(self) -> float:
        return float(np.linalg.norm(self.matrix, 2))


@dataclass(frozen=True)
class GifsEdge:
    source: int  # i(e): the attractor being built
    target: int  # t(e): the attractor being mapped
    f: AffineMap
    name: str = ""


@dataclass
class GifsSystem:
    vertices: list[str]
    edges: list[GifsEdge]

    def __post_init__(self):
        if not self.edges:
            raise GifsError("system has no maps")
        for e in self.edges:
            if e.f.ratio >= 1:
                raise NotContractive(f"map {e.name or e} has ratio {e.f.ratio:.6g} >= 1")
        if not self._strongly_connected():
            raise NotStronglyConnected("graph is not strongly connected")

    def _strongly_connected(self) -> bool:
        n = len(self.vertices)
        fwd = {i: {e.target for e in self.edges if e.source == i} for i in range(n)}
        back = {i: {e.source for e in self.edges if e.target == i} for i in range(n)}
        for adj in (fwd, back):
            seen, stack = {0}, [0]
            while stack:
                for j in adj[stack.pop()]:
                    if j not in seen:
                        seen.add(j)
                        stack.append(j)
            if len(seen) != n:
                return False
        return True

    def out_edges(self, i: int) -> list[int]:
        return [k for k, e in enumerate(self.edges) if e.source == i]


@dataclass
class FeasibleSets:
    polygons: list[np.ndarray]

    def shape(self, i: int) -> Polygon:
        return Polygon(self.polygons[i])


def _image(e: GifsEdge, U: FeasibleSets) -> Polygon:
    return Polygon(e.f(U.polygons[e.target]))


# --- open set condition ----------------------------------------------------------


@dataclass
class VertexOsc:
    vertex: str
    passed: bool
    witnesses: list[str] = field(default_factory=list)


@dataclass
class OscReport:
    vertices: list[VertexOsc]
    eps: float

    @property
    def passed(self) -> bool:
        return all(v.passed for v in self.vertices)


def verify_osc(sys: GifsSystem, U: FeasibleSets, eps: float = DEFAULT_EPS) -> OscReport:
    """Images f_e(U_t(e)) lie in U_i and have pairwise disjoint interiors."""
    out = []
    for i, name in enumerate(sys.vertices):
        home = U.shape(i)
        wit = []
        ids = sys.out_edges(i)
        imgs = {k: _image(sys.edges[k], U) for k in ids}
        for k, img in imgs.items():
            for p in np.asarray(img.exterior.coords)[:-1]:
                d = home.distance(Point(p))
                if d > eps:
                    wit.append(f"image of edge {_edge_name(sys, k)} leaves U_{name}: vertex {tuple(np.round(p, 12))} at distance {d:.3g}")
                    break
        for a, b in itertools.combinations(ids, 2):
            area = imgs[a].intersection(imgs[b]).area
            if area > eps * min(imgs[a].area, imgs[b].area):
                wit.append(f"images of edges {_edge_name(sys, a)} and {_edge_name(sys, b)} overlap with area {area:.6g}")
        out.append(VertexOsc(name, not wit, wit))
    return OscReport(out, eps)


def _edge_name(sys: GifsSystem, k: int) -> str:
    return sys.edges[k].name or str(k)


# --- linear condition ---------------------------------------------------------------


@dataclass
class Contact:
    edges: tuple[str, str]
    point: tuple[float, float]
    diameter: float


@dataclass
class VertexLinear:
    vertex: str
    passed: bool
    order: list[str]
    contacts: list[Contact]
    witnesses: list[str] = field(default_factory=list)


@dataclass
class LinearReport:
    vertices: list[VertexLinear]
    eps: float

    @property
    def passed(self) -> bool:
        return all(v.passed for v in self.vertices)


def _diameter(g: BaseGeometry) -> float:
    pts = []
    geoms = getattr(g, "geoms", [g])
    for part in geoms:
        if hasattr(part, "exterior"):
            pts.extend(part.exterior.coords)
        else:
            pts.extend(part.coords)
    if len(pts) < 2:
        return 0.0
    a = np.asarray(pts)
    return float(np.max(np.linalg.norm(a[:, None, :] - a[None, :, :], axis=-1)))


def _contact(a: Polygon, b: Polygon, eps: float) -> tuple[tuple[float, float], float] | None:
    if a.distance(b) > eps:
        return None
    inter = a.intersection(b)
    if inter.is_empty:
        # within eps but not touching: use the midpoint of the nearest points
        from shapely.ops import nearest_points
        p, q = nearest_points(a, b)
        return ((p.x + q.x) / 2, (p.y + q.y) / 2), 0.0
    c = inter.centroid if inter.area > 0 or inter.length > 0 else inter.representative_point()
    return (c.x, c.y), _diameter(inter)


def verify_linear_condition(sys: GifsSystem, U: FeasibleSets, eps: float = DEFAULT_EPS) -> LinearReport:
    """Per vertex, image closures touching in single points must form a path."""
    out = []
    for i, name in enumerate(sys.vertices):
        ids = sys.out_edges(i)
        imgs = {k: _image(sys.edges[k], U) for k in ids}
        adj = {k: [] for k in ids}
        contacts: dict[tuple[int, int], Contact] = {}
        wit = []
        for a, b in itertools.combinations(ids, 2):
            c = _contact(imgs[a], imgs[b], eps)
            if c is None:
                continue
            adj[a].append(b)
            adj[b].append(a)
            contacts[(a, b)] = Contact((_edge_name(sys, a), _edge_name(sys, b)), c[0], c[1])
            if c[1] > eps:
                wit.append(f"edges {_edge_name(sys, a)} and {_edge_name(sys, b)} meet in a set of diameter {c[1]:.3g}")
        order = _path_order(ids, adj)
        if order is None:
            comps = _components(ids, adj)
            if len(comps) > 1:
                wit.append(f"pieces split into {len(comps)} components: "
                           + " | ".join(",".join(_edge_name(sys, k) for k in c) for c in comps))
            else:
                wit.append("piece adjacency is not a path")
            order = []
        else:
            pts = [contacts[tuple(sorted((a, b)))].point for a, b in zip(order, order[1:])]
            for p, q in zip(pts, pts[1:]):
                if np.hypot(p[0] - q[0], p[1] - q[1]) <= eps:
                    wit.append("consecutive meeting points coincide")
        ordered = [contacts[tuple(sorted((a, b)))] for a, b in zip(order, order[1:])] if order else \
            list(contacts.values())
        out.append(VertexLinear(name, not wit, [_edge_name(sys, k) for k in order], ordered, wit))
    return LinearReport(out, eps)


def _components(ids: list[int], adj: dict) -> list[list[int]]:
    seen, comps = set(), []
    for s in ids:
        if s in seen:
            continue
        comp, stack = [], [s]
        seen.add(s)
        while stack:
            v = stack.pop()
            comp.append(v)
            for w in adj[v]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        comps.append(sorted(comp))
    return comps


def _path_order(ids: list[int], adj: dict) -> list[int] | None:
    if len(ids) == 1:
        return list(ids)
    if len(_components(ids, adj)) != 1:
        return None
    if any(len(adj[k]) > 2 for k in ids):
        return None
    ends = [k for k in ids if len(adj[k]) == 1]
    if len(ends) != 2:
        return None  # a cycle
    order = [min(ends)]
    prev = None
    while len(order) < len(ids):
        nxt = [w for w in adj[order[-1]] if w != prev]
        prev = order[-1]
        order.append(nxt[0])
    return order


# --- attractor approximation ----------------------------------------------------------


def walks(sys: GifsSystem, i: int, n: int, order: dict[int, list[int]] | None = None) -> list[tuple[int, ...]]:
    """All edge sequences e_1..e_n starting at vertex i (source of e_1)."""
    order = order or {v: sys.out_edges(v) for v in range(len(sys.vertices))}
    out = [()]
    ends = [i]
    for _ in range(n):
        nxt, nends = [], []
        for w, v in zip(out, ends):
            for k in order[v]:
                nxt.append(w + (k,))
                nends.append(sys.edges[k].target)
        out, ends = nxt, nends
    return out


def attractor_approx(sys: GifsSystem, depth: int, seeds: Sequence | None = None,
                     U: FeasibleSets | None = None,
                     order: dict[int, list[int]] | None = None) -> list[dict]:
    """Depth-n pieces f_{e1}...f_{en}(seed_{t(en)}) per vertex, chained into a polyline.

    ``seeds`` gives a point list per vertex (a segment or polygon); by default
    the feasible polygons are used.
    """
    if depth > MAX_DEPTH:
        raise DepthBudgetExceeded(f"depth {depth} exceeds {MAX_DEPTH}")
    if seeds is None:
        if U is None:
            raise GifsError("need seeds or feasible sets")
        seeds = U.polygons
    seeds = [np.asarray(s, dtype=float) for s in seeds]
    out = []
    for i in range(len(sys.vertices)):
        pieces = []
        for w in walks(sys, i, depth, order):
            f = AffineMap(np.eye(2), np.zeros(2))
            for k in w:
                f = f.then(sys.edges[k].f)
            last = sys.edges[w[-1]].target if w else i
            pieces.append(f(seeds[last]))
        out.append({"vertex": sys.vertices[i], "pieces": pieces, "polyline": _chain(pieces)})
    return out


def _chain(pieces: list[np.ndarray]) -> np.ndarray:
    """Concatenate pieces, flipping each so it starts near where the last ended."""
    if not pieces:
        return np.zeros((0, 2))
    line = [pieces[0]]
    if len(pieces) > 1:
        first, second = pieces[0], pieces[1]
        d_keep = min(np.linalg.norm(first[-1] - second[0]), np.linalg.norm(first[-1] - second[-1]))
        d_flip = min(np.linalg.norm(first[0] - second[0]), np.linalg.norm(first[0] - second[-1]))
        if d_flip < d_keep:
            line[0] = first[::-1]
    for p in pieces[1:]:
        end = line[-1][-1]
        if np.linalg.norm(p[-1] - end) < np.linalg.norm(p[0] - end):
            p = p[::-1]
        if np.linalg.norm(p[0] - end) <= 1e-12:
            p = p[1:]
        line.append(p)
    return np.vstack(line)


# --- JSON ------------------------------------------------------------------------------


def load_system(obj: dict | str) -> tuple[GifsSystem, FeasibleSets | None, list | None]:
    if isinstance(obj, str):
        obj = json.loads(obj)
    verts = [str(v) for v in obj["vertices"]]
    index = {v: i for i, v in enumerate(verts)}
    edges = [GifsEdge(index[str(e["from"])], index[str(e["to"])],
                      AffineMap.of(e["matrix"], e["translation"]), str(e.get("name", k)))
             for k, e in enumerate(obj.get("edges", []))]
    sys = GifsSystem(verts, edges)
    U = None
    if obj.get("polygons"):
        U = FeasibleSets([np.asarray(obj["polygons"][v], dtype=float) for v in verts])
    seeds = None
    if obj.get("seeds"):
        seeds = [np.asarray(obj["seeds"][v], dtype=float) for v in verts]
    return sys, U, seeds


def system_to_json(sys: GifsSystem, U: FeasibleSets | None = None, seeds=None) -> dict:
    out = {
        "vertices": list(sys.vertices),
        "edges": [{"name": e.name, "from": sys.vertices[e.source], "to": sys.vertices[e.target],
                   "matrix": e.f.matrix.tolist(), "translation": e.f.translation.tolist()}
                  for e in sys.edges],
    }
    if U is not None:
        out["polygons"] = {v: np.asarray(p).tolist() for v, p in zip(sys.vertices, U.polygons)}
    if seeds is not None:
        out["seeds"] = {v: np.asarray(s).tolist() for v, s in zip(sys.vertices, seeds)}
    return out


def osc_to_json(rep: OscReport) -> dict:
    return {"passed": rep.passed, "eps": rep.eps,
            "vertices": [{"vertex": v.vertex, "passed": v.passed, "witnesses": v.witnesses}
                         for v in rep.vertices]}


def linear_to_json(rep: LinearReport) -> dict:
    return {"passed": rep.passed, "eps": rep.eps,
            "vertices": [{"vertex": v.vertex, "passed": v.passed, "order": v.order,
                          "contacts": [{"edges": list(c.edges), "point": [round(c.point[0], 12), round(c.point[1], 12)],
                                        "diameter": c.diameter} for c in v.contacts],
                          "witnesses": v.witnesses}
                         for v in rep.vertices]}
