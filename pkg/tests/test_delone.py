from __future__ import annotations

import itertools
import json
import math
from fractions import Fraction

import pytest

from overtile.delone import (WindowTooSmall, collar_tiles, delone_pipeline, derive_substitution, golden, radii,
                             scalars, spectrum, voronoi_1d)
from overtile.geometry1d import apply, geom_from_json

F = Fraction
PHI = (1 + math.sqrt(5)) / 2


def brute_spectrum(lam: float, m: int, W: float) -> list[float]:
    n = 0
    while lam ** n <= W:
        n += 1
    vals = set()
    for digits in itertools.product(range(m + 1), repeat=n):
        s = sum(d * lam ** j for j, d in enumerate(digits))
        if s <= W + 1e-9:
            vals.add(round(s, 9))
    return sorted(vals)


def test_integer_spectrum():
    X = spectrum(2, 1, 16)
    assert [x.as_rational() for x in X.points] == list(range(17))
    assert X.set_equation_holds()


def test_golden_spectrum_against_enumeration():
    X = spectrum(golden(), 1, 20)
    assert [round(x, 9) for x in X.floats()] == brute_spectrum(PHI, 1, 20)
    gaps = {round(float(g), 9) for g in X.gaps()}
    assert gaps == {1.0, round(PHI - 1, 9)}
    assert X.set_equation_holds()


def test_float_spectrum_against_enumeration():
    X = spectrum(1.5, 1, 12)
    assert [round(x, 9) for x in X.floats()] == brute_spectrum(1.5, 1, 12)


def test_zero_window():
    X = spectrum(2, 1, 0)
    assert [x.as_rational() for x in X.points] == [0]
    with pytest.raises(WindowTooSmall):
        radii(X)


def test_parameter_checks():
    with pytest.raises(ValueError):
        spectrum(F(1, 2), 1, 10)
    with pytest.raises(ValueError):
        spectrum(4, 1, 10)
    with pytest.raises(ValueError):
        scalars(([-2, 0, 0, 0, 1], (1, 2)))  # degree too high for the irreducibility check


def test_voronoi_examples():
    S = scalars(2)
    pts = [S.num(x) for x in (0, 1, 2, 3)]
    cells = [(a.as_rational(), b.as_rational()) for a, b in voronoi_1d(pts, S)]
    assert cells == [(0, F(1, 2)), (F(1, 2), F(3, 2)), (F(3, 2), F(5, 2)), (F(5, 2), 3)]
    assert voronoi_1d([F(0), F(5)]) == [(0, F(5, 2)), (F(5, 2), 5)]
    with pytest.raises(WindowTooSmall):
        voronoi_1d([F(0)])


def test_golden_cells():
    X = spectrum(golden(), 1, 30)
    cells = voronoi_1d(X.points, X.S)
    for (a, b), (c, d) in zip(cells, cells[1:]):
        assert (b - c).sign() == 0
    inner = {round(float(b - a), 9) for a, b in cells[1:-1]}
    assert inner <= {round(x, 9) for x in (1.0, PHI - 1, (1 + PHI - 1) / 2)}


def test_integer_radii():
    X = spectrum(2, 1, 64)
    b = radii(X)
    assert b.R0.as_rational() == F(1, 2)
    assert b.R1.as_rational() == 3


@pytest.mark.parametrize("lam, W", [(2, 64), (golden(), 80), (1.5, 40)])
def test_radii_inequalities(lam, W):
    X = spectrum(lam, 1, W)
    b = radii(X, L_request=0)
    d, l = X.S.dom, X.S.lam
    ge = lambda a, c: d.cmp(a, c) >= 0 or abs(float(a) - float(c)) < 1e-9
    assert ge(b.R1, l * (b.R0 + 1))
    assert ge(l * b.R2, b.R1 + 2 * b.R0 + 2)
    assert ge(l * b.R2, b.R0 + b.R1 + b.R2 + 1)
    assert d.eq(b.R3, d.max(2 * b.R0 + 2, b.R0 + b.R2 + 1))
    assert d.eq(b.RL, d.max(3 * b.R0 + 3, b.L + b.R0 + 1))
    assert ge(l * (b.L - b.R0 - 1), b.R1 + b.RL + b.RD)
    for x, (lo, hi) in zip(X.points, voronoi_1d(X.points, X.S)):
        assert ge(b.R0 + 1, x - lo) and ge(b.R0 + 1, hi - x)


def test_requested_collar_radius_is_respected():
    X = spectrum(2, 1, 64)
    assert radii(X, L_request=20).L.as_rational() == 20


def test_integer_pipeline():
    rep = delone_pipeline(2, 1, 64)
    assert rep.status == "PASS"
    assert rep.class_counts == [1, 1]
    table = rep.tables[0]
    g = table.geom()
    # tile frame [0, 1]: three unit cells centred at -1, 0, 1 around the inflated centre
    assert [t.left.as_rational() for t in g.rules[0]] == [F(-1, 2), F(1, 2), F(3, 2)]
    assert [x.as_rational() for x in table.cells[0]] == [F(-1, 2), F(1, 2)]


def test_rule_table_json_is_importable():
    rep = delone_pipeline(2, 1, 64)
    g = geom_from_json(json.loads(json.dumps(rep.tables[0].to_json())))
    p = apply(g, apply(g, g.proto(0)))
    assert len(p) == 7


def test_golden_pipeline(golden_pipeline):
    rep = golden_pipeline
    assert rep.status == "PASS"
    assert rep.class_counts[0] == rep.class_counts[1]
    assert all(r.well_defined and r.fixed_point for r in rep.reports)


def test_three_halves_has_no_flc(three_halves_pipeline):
    rep = three_halves_pipeline
    assert rep.status == "NO_FLC"
    assert rep.class_counts[1] > rep.class_counts[0]


def test_small_window_is_reported():
    X = spectrum(2, 1, 8)
    with pytest.raises(WindowTooSmall):
        derive_substitution(X, radii(X), inside_only=True)


def test_collar_labels_distinguish_boundary():
    X = spectrum(2, 1, 64)
    b = radii(X)
    tiles = collar_tiles(X, b)
    assert tiles[0].label() != tiles[20].label()
    assert tiles[20].label() == tiles[21].label()
