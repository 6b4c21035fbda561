"""Symbolic overlapping substitution rules: parsing, emission, word rewriting.

Concrete syntax::

    # Example: a -> [a]_{1/2} b a, ...
    alphabet a b c;
    param r = 1/2;          # optional, any number of params
    a -> [a:1/2] b a;
    b -> c [a:r];
    c -> b [a:1-r];

A bracketed item ``[x:w]`` carries weight ``w``; a bare letter has weight 1.
Weights are rationals ``p/q``, decimals, parameter names, or ``1-name``.
Parameters bound to rationals keep the rule exact; decimals and ``sqrt``
make the whole rule a floating-point rule.
"""

from __future__ import annotations

import ast
import math
import operator
import re
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Mapping, Sequence, Union

from .exactnum import DEFAULT_EPS, Mode

Scalar = Union[Fraction, float]


class RuleError(ValueError):
    pass


class RuleSyntaxError(RuleError):
    def __init__(self, msg: str, line: int, col: int):
        super().__init__(f"{msg} (line {line}, col {col})")
        self.msg = msg
        self.line = line
        self.col = col


class UndeclaredLetter(RuleError):
    pass


class InteriorWeightNotOne(RuleError):
    pass


class SingletonWeightNotOne(RuleError):
    pass


class WeightOutOfRange(RuleError):
    pass


class MissingRule(RuleError):
    pass


class MergeError(RuleError):
    """Two adjacent stick-outs do not add up to a whole letter."""


# --- values -------------------------------------------------------------------


@dataclass(frozen=True)
class Param:
    text: str
    value: Scalar

    @property
    def exact(self) -> bool:
        return isinstance(self.value, Fraction)


@dataclass(frozen=True)
class Weight:
    """A literal weight, a parameter reference, or ``1 - parameter``."""

    literal: Scalar | None = None
    param: str | None = None
    complement: bool = False

    @classmethod
    def one(cls) -> "Weight":
        return cls(literal=Fraction(1))

    def resolve(self, params: Mapping[str, Param]) -> Scalar:
        if self.param is None:
            return self.literal
        v = params[self.param].value
        return 1 - v if self.complement else v

    def text(self) -> str:
        if self.param is not None:
            return f"1-{self.param}" if self.complement else self.param
        v = self.literal
        if isinstance(v, Fraction):
            return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
        return repr(float(v))


@dataclass(frozen=True)
class WeightedLetter:
    letter: int
    weight: Weight


@dataclass(frozen=True)
class SymbolicSubstitution:
    alphabet: tuple[str, ...]
    images: tuple[tuple[WeightedLetter, ...], ...]
    params: Mapping[str, Param] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "params", dict(self.params))

    def __eq__(self, other):
        if not isinstance(other, SymbolicSubstitution):
            return NotImplemented
        return (self.alphabet == other.alphabet and self.images == other.images
                and self.params == other.params)

    def __hash__(self):
        return hash((self.alphabet, self.images))

    @property
    def size(self) -> int:
        return len(self.alphabet)

    @property
    def mode(self) -> Mode:
        exact = all(isinstance(self.weight(it), Fraction)
                    for img in self.images for it in img)
        return Mode.EXACT if exact else Mode.FLOAT

    def weight(self, item: WeightedLetter) -> Scalar:
        return item.weight.resolve(self.params)

    def image_weights(self, j: int) -> list[tuple[int, Scalar]]:
        return [(it.letter, self.weight(it)) for it in self.images[j]]

    def first(self, j: int) -> tuple[int, Scalar]:
        it = self.images[j][0]
        return it.letter, self.weight(it)

    def last(self, j: int) -> tuple[int, Scalar]:
        it = self.images[j][-1]
        return it.letter, self.weight(it)

    def index(self, name: str) -> int:
        return self.alphabet.index(name)

    def with_params(self, **values) -> "SymbolicSubstitution":
        """Rebind parameters; values may be numbers or expression strings."""
        params = dict(self.params)
        for name, v in values.items():
            if name not in params:
                raise RuleError(f"unknown parameter {name!r}")
            params[name] = _param_from(v)
        sub = replace(self, params=params)
        validate(sub)
        return sub

    def format_image(self, j: int) -> str:
        return " ".join(_item_text(self, it) for it in self.images[j])


def _param_from(v) -> Param:
    if isinstance(v, Param):
        return v
    if isinstance(v, str):
        return Param(v.strip(), eval_number(v))
    if isinstance(v, float):
        return Param(repr(v), v)
    v = Fraction(v)
    return Param(str(v), v)


# --- number expressions -------------------------------------------------------

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub,
           ast.Mult: operator.mul, ast.Div: operator.truediv}


def _sqrt(x: Scalar) -> Scalar:
    if isinstance(x, Fraction) and x >= 0:
        n, d = math.isqrt(x.numerator), math.isqrt(x.denominator)
        if n * n == x.numerator and d * d == x.denominator:
            return Fraction(n, d)
    return math.sqrt(x)


def eval_number(text: str) -> Scalar:
    """Evaluate a small arithmetic expression: numbers, + - * /, sqrt(...).

    Integer and ``p/q`` arithmetic stays exact; decimals and irrational
    square roots produce floats.
    """
    try:
        tree = ast.parse(text.strip(), mode="eval")
    except SyntaxError as exc:
        raise RuleError(f"bad number {text!r}") from exc

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return Fraction(node.value) if isinstance(node.value, int) else float(node.value)
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            a, b = ev(node.left), ev(node.right)
            if isinstance(a, float) or isinstance(b, float):
                a, b = float(a), float(b)
            return _BINOPS[type(node.op)](a, b)
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if (isinstance(node, ast.Call) and isinstance(node.func, ast.Name)
                and node.func.id == "sqrt" and len(node.args) == 1 and not node.keywords):
            return _sqrt(ev(node.args[0]))
        raise RuleError(f"unsupported expression in {text!r}")

    return ev(tree)


# --- tokenizer / parser ------------------------------------------------------------

_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r\n]+|\#[^\n]*)
  | (?P<arrow>->)
  | (?P<num>\d+(?:\.\d*)?(?:[eE][-+]?\d+)?|\.\d+(?:[eE][-+]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<sym>[\[\]:;=/()+\-*])
""", re.VERBOSE)


@dataclass
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Tok]:
    out = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise RuleSyntaxError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind != "ws":
            out.append(_Tok(kind, m.group(), line, pos - line_start + 1))
        for i, ch in enumerate(m.group()):
            if ch == "\n":
                line += 1
                line_start = pos + i + 1
        pos = m.end()
    out.append(_Tok("eof", "", line, pos - line_start + 1))
    return out


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def error(self, msg: str, tok: _Tok | None = None):
        tok = tok or self.tok
        raise RuleSyntaxError(msg, tok.line, tok.col)

    def take(self, kind: str, text: str | None = None) -> _Tok:
        t = self.tok
        if t.kind != kind or (text is not None and t.text != text):
            want = text or kind
            self.error(f"expected {want!r}, found {t.text or 'end of input'!r}")
        self.i += 1
        return t

    def at(self, kind: str, text: str | None = None) -> bool:
        t = self.tok
        return t.kind == kind and (text is None or t.text == text)

    def parse(self) -> SymbolicSubstitution:
        self.take("name", "alphabet")
        letters = []
        while self.at("name"):
            letters.append(self.take("name").text)
        if not letters:
            self.error("alphabet needs at least one letter")
        if len(set(letters)) != len(letters):
            self.error("duplicate letter in alphabet")
        self.take("sym", ";")
        params: dict[str, Param] = {}
        while self.at("name", "param"):
            self.take("name")
            name = self.take("name").text
            self.take("sym", "=")
            start = self.tok
            parts = []
            while not self.at("sym", ";") and not self.at("eof"):
                parts.append(self.tok.text)
                self.i += 1
            self.take("sym", ";")
            src = "".join(parts)
            if not src:
                self.error("empty parameter value", start)
            params[name] = Param(src, eval_number(src))
        rules: dict[int, tuple[WeightedLetter, ...]] = {}
        while not self.at("eof"):
            head = self.take("name")
            if head.text not in letters:
                raise UndeclaredLetter(f"rule for undeclared letter {head.text!r} (line {head.line})")
            j = letters.index(head.text)
            if j in rules:
                self.error(f"second rule for {head.text!r}", head)
            self.take("arrow")
            items = []
            while not self.at("sym", ";") and not self.at("eof") and not self._rule_start():
                items.append(self.item(letters, params))
            if not items:
                self.error("empty image")
            if self.at("sym", ";"):
                self.take("sym", ";")
            rules[j] = tuple(items)
        missing = [letters[j] for j in range(len(letters)) if j not in rules]
        if missing:
            raise MissingRule(f"no rule for {', '.join(missing)}")
        sub = SymbolicSubstitution(tuple(letters), tuple(rules[j] for j in range(len(letters))), params)
        validate(sub)
        return sub

    def _rule_start(self) -> bool:
        # a name followed by '->' begins the next rule (last ';' is optional)
        return self.at("name") and self.toks[self.i + 1].kind == "arrow"

    def item(self, letters, params) -> WeightedLetter:
        if self.at("sym", "["):
            self.take("sym", "[")
            name = self.take("name")
            self.take("sym", ":")
            w = self.weight(params)
            self.take("sym", "]")
        else:
            name = self.take("name")
            w = Weight.one()
        if name.text not in letters:
            raise UndeclaredLetter(f"letter {name.text!r} is not declared (line {name.line}, col {name.col})")
        return WeightedLetter(letters.index(name.text), w)

    def weight(self, params) -> Weight:
        t = self.tok
        if t.kind == "name":
            self.i += 1
            if t.text not in params:
                self.error(f"unknown parameter {t.text!r}", t)
            return Weight(param=t.text)
        if t.kind != "num":
            self.error("expected a weight")
        self.i += 1
        if self.at("sym", "/"):
            self.take("sym", "/")
            den = self.take("num")
            if "." in t.text or "." in den.text or int(den.text) == 0:
                self.error("rational weight needs integer p/q with q > 0", t)
            return Weight(literal=Fraction(int(t.text), int(den.text)))
        if self.at("sym", "-"):
            self.take("sym", "-")
            if t.text != "1":
                self.error("only 1-<param> complements are supported", t)
            p = self.take("name")
            if p.text not in params:
                self.error(f"unknown parameter {p.text!r}", p)
            return Weight(param=p.text, complement=True)
        if any(c in t.text for c in ".eE"):
            return Weight(literal=float(t.text))
        return Weight(literal=Fraction(int(t.text)))


def parse_rules(text: str) -> SymbolicSubstitution:
    return _Parser(text).parse()


def validate(sub: SymbolicSubstitution, eps: float = DEFAULT_EPS) -> None:
    """Enforce 0 < w <= 1, singleton weight 1, interior weights 1."""
    for j, img in enumerate(sub.images):
        name = sub.alphabet[j]
        ws = [sub.weight(it) for it in img]
        for w in ws:
            if not (w > 0 and w <= 1 + (eps if isinstance(w, float) else 0)):
                raise WeightOutOfRange(f"weight {w} in image of {name!r} is outside (0, 1]")
        if len(ws) == 1 and not _is_one(ws[0], eps):
            raise SingletonWeightNotOne(f"single-letter image of {name!r} has weight {ws[0]}")
        for w in ws[1:-1]:
            if not _is_one(w, eps):
                raise InteriorWeightNotOne(f"interior weight {w} in image of {name!r}")


def _is_one(w: Scalar, eps: float) -> bool:
    if isinstance(w, Fraction):
        return w == 1
    return abs(w - 1) <= eps


def _item_text(sub: SymbolicSubstitution, it: WeightedLetter) -> str:
    name = sub.alphabet[it.letter]
    if it.weight.param is None and it.weight.literal == 1:
        return name
    return f"[{name}:{it.weight.text()}]"


def emit_canonical(sub: SymbolicSubstitution) -> str:
    lines = ["alphabet " + " ".join(sub.alphabet) + ";"]
    for name in sorted(sub.params):
        lines.append(f"param {name} = {sub.params[name].text};")
    for j, name in enumerate(sub.alphabet):
        lines.append(f"{name} -> {sub.format_image(j)};")
    return "\n".join(lines) + "\n"


# --- word rewriting -------------------------------------------------------------

Word = list  # list[tuple[int, Scalar]]: letter index and weight


def word(sub: SymbolicSubstitution, text: str | Sequence[str]) -> Word:
    """A word of whole letters from a string like ``"ba"`` (or a list of names)."""
    names = list(text) if isinstance(text, str) and all(len(a) == 1 for a in sub.alphabet) \
        else (text.split() if isinstance(text, str) else list(text))
    return [(sub.index(n), Fraction(1)) for n in names]


def _whole(w: Scalar, eps: float) -> bool:
    return _is_one(w, eps)


def apply_word(sub: SymbolicSubstitution, w: Word, eps: float = DEFAULT_EPS) -> Word:
    """Apply the substitution to every letter and merge stick-outs at junctions.

    A letter ending one image with weight r followed by the same letter with
    weight 1 - r starting the next image becomes one whole letter.  Letters
    at the two ends of ``w`` are substituted as whole letters.
    """
    out: Word = []
    for letter, _ in w:
        img = sub.image_weights(letter)
        if out:
            (pl, pw), (nl, nw) = out[-1], img[0]
            p_whole, n_whole = _whole(pw, eps), _whole(nw, eps)
            if not (p_whole and n_whole):
                total = pw + nw
                if pl != nl or not _is_one(total, eps) or p_whole or n_whole:
                    raise MergeError(
                        f"cannot join [{sub.alphabet[pl]}]_{pw} with [{sub.alphabet[nl]}]_{nw}")
                out[-1] = (pl, Fraction(1) if isinstance(total, Fraction) else 1.0)
                img = img[1:]
        out.extend(img)
    return out


def iterate_word(sub: SymbolicSubstitution, w: Word | str, n: int) -> Word:
    if isinstance(w, str):
        w = word(sub, w)
    for _ in range(n):
        w = apply_word(sub, w)
    return w


def letters(sub: SymbolicSubstitution, w: Word) -> str:
    sep = "" if all(len(a) == 1 for a in sub.alphabet) else " "
    return sep.join(sub.alphabet[i] for i, _ in w)
