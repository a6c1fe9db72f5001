"""Exact scalar expressions over chart coordinates.

Expressions are sympy trees restricted to rational constants, coordinate
symbols, ``+ - * /``, integer powers and ``sin``/``cos``/``exp``.  Rational
functions are decided exactly through their cancelled normal form; anything
transcendental falls back to seeded sampling.
"""
from __future__ import annotations

import math
import random
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterable, Mapping, Sequence

import sympy
from sympy import Expr

__all__ = [
    "Expr",
    "ExprSyntaxError",
    "UnknownSymbolError",
    "SingularPointError",
    "SamplingExhausted",
    "SampleConfig",
    "ZeroVerdict",
    "parse_expr",
    "differentiate",
    "normalize",
    "evaluate",
    "classify_zero",
    "sample_points",
    "is_transcendental",
    "symbol",
    "as_expr",
]

_IDENT = re.compile(r"[A-Za-z][A-Za-z0-9_]*")
_INT = re.compile(r"[0-9]+")
_FUNCS = {"sin": sympy.sin, "cos": sympy.cos, "exp": sympy.exp}


class ExprSyntaxError(ValueError):
    def __init__(self, message: str, position: int, token: str | None = None):
        self.position = position
        self.token = token
        where = f" at token {token!r}" if token is not None else ""
        super().__init__(f"{message}{where} (position {position})")


class UnknownSymbolError(ValueError):
    def __init__(self, name: str, position: int):
        self.name = name
        self.position = position
        super().__init__(f"unknown symbol {name!r} at position {position}")


class SingularPointError(ZeroDivisionError):
    """Raised when an expression is evaluated at one of its poles."""


class SamplingExhausted(RuntimeError):
    """Raised when the retry budget for non-singular sample points runs out."""


def symbol(name: str) -> sympy.Symbol:
    return sympy.Symbol(name)


def as_expr(value) -> Expr:
    """Coerce ints, Fractions, strings of rationals and sympy objects."""
    if isinstance(value, Fraction):
        return sympy.Rational(value.numerator, value.denominator)
    if isinstance(value, float):
        raise TypeError("floats are not exact; pass a Fraction or a string")
    return sympy.sympify(value, rational=True)


# --------------------------------------------------------------------------
# parsing


def _tokenize(text: str):
    pos = 0
    tokens = []
    while pos < len(text):
        ch = text[pos]
        if ch.isspace():
            pos += 1
            continue
        m = _IDENT.match(text, pos)
        if m:
            tokens.append(("ident", m.group(), pos))
            pos = m.end()
            continue
        m = _INT.match(text, pos)
        if m:
            tokens.append(("int", m.group(), pos))
            pos = m.end()
            continue
        if ch in "+-*/^()":
            tokens.append((ch, ch, pos))
            pos += 1
            continue
        raise ExprSyntaxError("unexpected character", pos, ch)
    tokens.append(("eof", None, len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, allowed: set[str] | None):
        self.tokens = _tokenize(text)
        self.i = 0
        self.allowed = allowed

    def peek(self):
        return self.tokens[self.i]

    def take(self, kind=None):
        tok = self.tokens[self.i]
        if kind is not None and tok[0] != kind:
            raise ExprSyntaxError(f"expected {kind!r}", tok[2], tok[1])
        self.i += 1
        return tok

    def parse(self) -> Expr:
        if self.peek()[0] == "eof":
            raise ExprSyntaxError("empty expression", 0)
        e = self.sum()
        tok = self.peek()
        if tok[0] != "eof":
            raise ExprSyntaxError("unexpected token", tok[2], tok[1])
        return e

    def sum(self) -> Expr:
        e = self.product()
        while self.peek()[0] in "+-" and self.peek()[0] != "eof":
            op = self.take()[0]
            rhs = self.product()
            e = e + rhs if op == "+" else e - rhs
        return e

    def product(self) -> Expr:
        e = self.unary()
        while self.peek()[0] in ("*", "/"):
            op = self.take()[0]
            rhs = self.unary()
            e = e * rhs if op == "*" else e / rhs
        return e

    def unary(self) -> Expr:
        if self.peek()[0] in ("+", "-"):
            op = self.take()[0]
            e = self.unary()
            return -e if op == "-" else e
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.peek()[0] == "^":
            tok = self.take()
            exponent = self.unary()
            if not (exponent.is_Integer):
                raise ExprSyntaxError("exponent must be an integer", tok[2], "^")
            return base ** exponent
        return base

    def atom(self) -> Expr:
        kind, text, pos = self.peek()
        if kind == "int":
            self.take()
            return sympy.Integer(int(text))
        if kind == "ident":
            self.take()
            if text in _FUNCS:
                if self.peek()[0] != "(":
                    raise ExprSyntaxError(f"function {text} needs an argument", pos, text)
                self.take("(")
                arg = self.sum()
                self.take(")")
                return _FUNCS[text](arg)
            if self.allowed is not None and text not in self.allowed:
                raise UnknownSymbolError(text, pos)
            return symbol(text)
        if kind == "(":
            self.take()
            e = self.sum()
            self.take(")")
            return e
        if kind == "eof":
            raise ExprSyntaxError("unexpected end of input", pos)
        raise ExprSyntaxError("unexpected token", pos, text)


def _names(chart) -> set[str] | None:
    if chart is None:
        return None
    coords = getattr(chart, "coords", chart)
    return set(coords)


def parse_expr(text: str, chart=None) -> Expr:
    """Parse ``text`` under the expression grammar.

    ``chart`` is a chart (anything with ``.coords``) or an iterable of
    coordinate names; symbols outside it raise :class:`UnknownSymbolError`.
    """
    return _Parser(text, _names(chart)).parse()


# --------------------------------------------------------------------------
# calculus and normal forms


def differentiate(e: Expr, coord) -> Expr:
    if isinstance(coord, str):
        coord = symbol(coord)
    e = as_expr(e)
    if coord not in e.free_symbols:
        return sympy.Integer(0)
    if is_transcendental(e):
        return sympy.diff(e, coord)
    gens = tuple(sorted(e.free_symbols, key=lambda s: s.name))
    el, dom = _element(e, gens)
    return el.diff(dom.gens[gens.index(coord)]).as_expr()


def normalize(e: Expr) -> Expr:
    """Cancelled rational-function normal form (numerator/denominator coprime,
    both expanded).  Transcendental subterms are treated as opaque generators."""
    e = as_expr(e)
    if e.is_Rational:
        return e
    if not is_transcendental(e):
        gens = tuple(sorted(e.free_symbols, key=lambda s: s.name))
        return _element(e, gens)[0].as_expr()
    return sympy.cancel(sympy.together(e))


def _element(e: Expr, gens):
    """e as a polynomial ring element when possible, else in the fraction field."""
    ring, field = _domains(gens)
    try:
        return ring.from_expr(e), ring
    except (ValueError, sympy.polys.polyerrors.CoercionFailed):
        return field.from_expr(e), field


@lru_cache(maxsize=256)
def _domains(gens):
    # sparse polynomial ring and its fraction field over QQ; both are much
    # cheaper than cancel(together(e)) on large residuals
    return sympy.polys.rings.ring(gens, sympy.QQ)[0], sympy.polys.fields.field(gens, sympy.QQ)[0]


def is_transcendental(e: Expr) -> bool:
    return bool(as_expr(e).has(sympy.sin, sympy.cos, sympy.exp))


# --------------------------------------------------------------------------
# evaluation


def _ev(e, point, exact: bool):
    if e.is_Integer:
        return int(e) if exact else float(int(e))
    if e.is_Rational:
        return Fraction(int(e.p), int(e.q)) if exact else int(e.p) / int(e.q)
    if e.is_Symbol:
        try:
            return point[e.name]
        except KeyError:
            raise KeyError(f"point does not cover coordinate {e.name!r}") from None
    if e.is_Add:
        total = 0
        for a in e.args:
            total += _ev(a, point, exact)
        return total
    if e.is_Mul:
        total = 1
        for a in e.args:
            total *= _ev(a, point, exact)
        return total
    if e.is_Pow:
        if not e.exp.is_Integer:
            raise ValueError(f"non-integer power in {e}")
        base = _ev(e.base, point, exact)
        k = int(e.exp)
        if k < 0:
            if base == 0:
                raise SingularPointError(f"division by zero evaluating {e}")
            if exact:
                return Fraction(1) / Fraction(base) ** (-k)
            return 1.0 / base ** (-k)
        return base ** k
    if isinstance(e, (sympy.sin, sympy.cos, sympy.exp)) or e.is_NumberSymbol:
        if exact:
            raise ValueError("exact evaluation of a transcendental expression")
        if e.is_NumberSymbol:
            return float(e)
        arg = float(_ev(e.args[0], point, exact))
        if isinstance(e, sympy.sin):
            return math.sin(arg)
        if isinstance(e, sympy.cos):
            return math.cos(arg)
        return math.exp(arg)
    if e is sympy.zoo or e is sympy.nan:
        raise SingularPointError("expression is undefined")
    raise TypeError(f"unsupported expression node {type(e).__name__}: {e}")


def evaluate(e: Expr, point: Mapping[str, object], exact: bool | None = None):
    """Evaluate at a point.

    Exact mode (the default when the expression is free of sin/cos/exp and
    every coordinate value is rational) returns a :class:`Fraction`.  Float
    mode returns a float.  Division by zero raises :class:`SingularPointError`.
    """
    e = as_expr(e)
    if exact is None:
        exact = not is_transcendental(e) and all(
            isinstance(v, (int, Fraction)) for v in point.values()
        )
    if exact:
        point = {k: Fraction(v) for k, v in point.items()}
    else:
        point = {k: float(v) for k, v in point.items()}
    try:
        value = _ev(e, point, exact)
    except ZeroDivisionError as exc:
        if isinstance(exc, SingularPointError):
            raise
        raise SingularPointError(str(exc)) from None
    return Fraction(value) if exact else float(value)


# --------------------------------------------------------------------------
# sampling and zero tests


@dataclass(frozen=True)
class SampleConfig:
    count: int = 16
    seed: int = 42
    box: Fraction = Fraction(1)
    denom: int = 1024
    tol: float = 1e-9
    max_retries: int = 100

    def __post_init__(self):
        if self.count <= 0 or self.denom <= 0 or self.tol <= 0:
            raise ValueError("count, denom and tol must be positive")
        object.__setattr__(self, "box", Fraction(self.box))
        if self.box <= 0:
            raise ValueError("box must be positive")


DEFAULT_SAMPLES = SampleConfig()


def _draw(rng: random.Random, names: Sequence[str], cfg: SampleConfig):
    point = {}
    for name in names:
        den = rng.randint(1, cfg.denom)
        bound = math.floor(cfg.box * den)
        point[name] = Fraction(rng.randint(-bound, bound), den)
    return point


def sample_points(
    names: Sequence[str],
    cfg: SampleConfig = DEFAULT_SAMPLES,
    reject: Callable[[dict], bool] | None = None,
    count: int | None = None,
    fixed: Mapping[str, Fraction] | None = None,
) -> list[dict]:
    """Deterministic rational sample points for ``names``.

    ``fixed`` pins some coordinates (e.g. ``y = 0`` on a submanifold).  Points
    for which ``reject`` returns True are redrawn; more than ``cfg.max_retries``
    redraws raise :class:`SamplingExhausted`.
    """
    rng = random.Random(cfg.seed)
    wanted = cfg.count if count is None else count
    free = [n for n in names if not fixed or n not in fixed]
    points, retries = [], 0
    while len(points) < wanted:
        p = _draw(rng, free, cfg)
        if fixed:
            p.update({k: Fraction(v) for k, v in fixed.items()})
        p = {n: p[n] for n in names}
        if reject is not None and reject(p):
            retries += 1
            if retries > cfg.max_retries:
                raise SamplingExhausted(f"no regular sample point after {retries} retries")
            continue
        points.append(p)
    return points


@dataclass(frozen=True)
class ZeroVerdict:
    kind: str  # "zero" | "nonzero" | "sampled_zero" | "unknown"
    witness: dict | None = None
    value: object = None
    note: str = ""

    ZERO = "zero"
    NONZERO = "nonzero"
    SAMPLED_ZERO = "sampled_zero"
    UNKNOWN = "unknown"

    @property
    def is_zero(self) -> bool:
        return self.kind in (self.ZERO, self.SAMPLED_ZERO)


def _free_names(e: Expr) -> list[str]:
    return sorted(s.name for s in e.free_symbols)


def _singular(exprs: Iterable[Expr], exact: bool):
    exprs = list(exprs)

    def reject(p):
        try:
            for e in exprs:
                evaluate(e, p, exact=exact)
        except (SingularPointError, OverflowError):
            return True
        return False

    return reject


def classify_zero(e, cfg: SampleConfig = DEFAULT_SAMPLES) -> ZeroVerdict:
    e = as_expr(e)
    if e == 0:
        return ZeroVerdict(ZeroVerdict.ZERO)
    n = normalize(e)
    if n == 0:
        return ZeroVerdict(ZeroVerdict.ZERO)
    names = _free_names(n)
    if not is_transcendental(n):
        num, den = sympy.fraction(n)
        simple = [{k: Fraction(v) for k in names} for v in (1, 2, -1, 3)]
        try:
            randoms = sample_points(names, cfg, reject=_singular([den], True), count=cfg.count)
        except SamplingExhausted:
            randoms = []
        for p in simple + randoms:
            try:
                d = evaluate(den, p, exact=True)
                if d == 0:
                    continue
                v = evaluate(num, p, exact=True) / d
            except SingularPointError:
                continue
            if v != 0:
                return ZeroVerdict(ZeroVerdict.NONZERO, witness=p, value=v)
        return ZeroVerdict(ZeroVerdict.UNKNOWN, note="nonzero normal form vanished at every sample")
    try:
        points = sample_points(names, cfg, reject=_singular([e], False))
    except SamplingExhausted:
        return ZeroVerdict(ZeroVerdict.UNKNOWN, note="singular points exhausted retries")
    for p in points:
        v = evaluate(e, p, exact=False)
        if not abs(v) <= cfg.tol:
            return ZeroVerdict(ZeroVerdict.NONZERO, witness=p, value=v)
    return ZeroVerdict(ZeroVerdict.SAMPLED_ZERO)
