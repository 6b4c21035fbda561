from __future__ import annotations

from fractions import Fraction

import json
from importlib.resources import files

import pytest
from hypothesis import strategies as st

from overtile.geometry1d import realize
from overtile.ruledsl import parse_rules
from overtile.spectral import pf_data, substitution_matrix

DATA = files("overtile") / "data"


def rules(name: str):
    return parse_rules((DATA / f"{name}.rules").read_text())


def gifs_fixture(name: str) -> dict:
    return json.loads((DATA / "gifs" / f"{name}.json").read_text())


def geometry(sub):
    M = substitution_matrix(sub)
    pf = pf_data(M)
    return M, pf, realize(sub, pf)


@pytest.fixture(scope="session")
def ex11():
    return rules("ex11")


@pytest.fixture(scope="session")
def ex11_geom(ex11):
    return geometry(ex11)


end_weight = st.fractions(min_value=Fraction(1, 50), max_value=1, max_denominator=50)


@st.composite
def substitutions(draw):
    k = draw(st.integers(1, 4))
    names = [chr(ord("a") + i) for i in range(k)]
    lines = ["alphabet " + " ".join(names) + ";"]
    for n in names:
        m = draw(st.integers(1, 5))
        body = [draw(st.sampled_from(names)) for _ in range(m)]
        if m > 1:
            for pos in (0, m - 1):
                w = draw(end_weight)
                if w != 1:
                    body[pos] = f"[{body[pos]}:{w.numerator}/{w.denominator}]"
        lines.append(f"{n} -> {' '.join(body)};")
    return "\n".join(lines)


@pytest.fixture(scope="session")
def golden_pipeline():
    from overtile.delone import delone_pipeline, golden
    return delone_pipeline(golden(), 1, 150)


@pytest.fixture(scope="session")
def three_halves_pipeline():
    from overtile.delone import delone_pipeline
    return delone_pipeline(1.5, 1, 60)
