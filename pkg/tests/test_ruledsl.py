from __future__ import annotations

import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from overtile.exactnum import Mode
from overtile.ruledsl import (InteriorWeightNotOne, MergeError, MissingRule, RuleError, RuleSyntaxError,
                              SingletonWeightNotOne, UndeclaredLetter, WeightOutOfRange, apply_word,
                              emit_canonical, eval_number, iterate_word, letters, parse_rules, word)

from conftest import rules, substitutions

EX11 = "alphabet a b c; a -> [a:1/2] b a; b -> c [a:1/2]; c -> b [a:1/2]"
FIXTURES = ["ex11", "ex11_corrupted", "ex52", "ex52_float", "ex53", "doubling"]


def test_parse_ex11():
    s = parse_rules(EX11)
    assert s.alphabet == ("a", "b", "c")
    assert [(a, w) for a, w in s.image_weights(0)] == [(0, Fraction(1, 2)), (1, 1), (0, 1)]
    assert s.mode is Mode.EXACT


def test_identity_rule():
    s = parse_rules("alphabet a; a -> [a:1]")
    assert emit_canonical(s) == "alphabet a;\na -> a;\n"


@pytest.mark.parametrize("text, exc", [
    ("alphabet a b; a -> a [b:1/2] a; b -> b", InteriorWeightNotOne),
    ("alphabet a; a -> [a:1/2]", SingletonWeightNotOne),
    ("alphabet a b; a -> [a:3/2] b; b -> a", WeightOutOfRange),
    ("alphabet a b; a -> [a:0] b; b -> a", WeightOutOfRange),
    ("alphabet a; a -> a z", UndeclaredLetter),
    ("alphabet a b; a -> a b", MissingRule),
    ("alphabet a; a -> [a 1/2]", RuleSyntaxError),
])
def test_rejections(text, exc):
    with pytest.raises(exc):
        parse_rules(text)


def test_syntax_error_position():
    with pytest.raises(RuleSyntaxError) as info:
        parse_rules("alphabet a b;\na -> a b;\nb -> [a:1/2 b;")
    assert info.value.line == 3
    assert info.value.col > 1


def test_comments_and_whitespace():
    s = parse_rules("# header\nalphabet   a b ;  # letters\n a->a b ;\n\tb -> a\n")
    assert s.format_image(0) == "a b"


@pytest.mark.parametrize("name", FIXTURES)
def test_round_trip_fixtures(name):
    s = rules(name)
    assert parse_rules(emit_canonical(s)) == s


def test_param_text_is_emitted():
    text = emit_canonical(rules("ex52"))
    assert "param r = 1/2;" in text
    assert "[a:1-r]" in text


def test_params_and_modes():
    s = rules("ex52")
    assert s.mode is Mode.EXACT
    assert rules("ex52_float").mode is Mode.FLOAT
    t = s.with_params(r="1/3")
    assert t.image_weights(2)[-1] == (0, Fraction(2, 3))
    assert s.with_params(r=0.25).mode is Mode.FLOAT
    with pytest.raises(RuleError):
        s.with_params(q="1/2")
    with pytest.raises(WeightOutOfRange):
        s.with_params(r="3/2")


def test_eval_number():
    assert eval_number("1/3 + 1/6") == Fraction(1, 2)
    assert eval_number("sqrt(9/4)") == Fraction(3, 2)
    assert math.isclose(eval_number("sqrt(2)/2"), math.sqrt(2) / 2)
    with pytest.raises(RuleError):
        eval_number("__import__('os')")


def test_word_iteration():
    s = rules("ex11")
    assert letters(s, iterate_word(s, "ba", 1)) == "caba"
    assert letters(s, iterate_word(s, "ba", 2)) == "babacaba"
    assert letters(s, iterate_word(s, "ba", 3)) == "cabacabababacaba"


def test_merge_error():
    s = rules("ex11_corrupted")
    with pytest.raises(MergeError):
        apply_word(s, word(s, "ba"))


# --- properties -------------------------------------------------------------------------

@settings(max_examples=200, deadline=None)
@given(substitutions())
def test_round_trip_random(text):
    s = parse_rules(text)
    assert parse_rules(emit_canonical(s)) == s


@settings(max_examples=200, deadline=None)
@given(substitutions(), st.data())
def test_interior_mutation_is_rejected(text, data):
    s = parse_rules(text)
    long = [j for j in range(s.size) if len(s.images[j]) >= 3]
    if not long:
        return
    j = data.draw(st.sampled_from(long))
    pos = data.draw(st.integers(1, len(s.images[j]) - 2))
    w = data.draw(st.fractions(min_value=Fraction(1, 50), max_value=Fraction(49, 50), max_denominator=50))
    items = s.format_image(j).split()
    letter = items[pos].strip("[]").split(":")[0]
    items[pos] = f"[{letter}:{w.numerator}/{w.denominator}]"
    lines = emit_canonical(s).splitlines()
    lines[1 + len(s.params) + j] = f"{s.alphabet[j]} -> {' '.join(items)};"
    with pytest.raises(InteriorWeightNotOne):
        parse_rules("\n".join(lines))
