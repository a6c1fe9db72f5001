"""Block-structured input files.

    chart { coords = [x1, x2, y1, y2] leaf = [y1, y2] }
    structure "L" {
        kind = poisson
        [x1, x2] = 1
        [y1, y2] = "1 + y1^2"
    }
    submanifold "N" { zero = [y2] }
    metric { [x1, x1] = 1 }           # unlisted diagonal entries default to 1
    samples { count = 16 seed = 42 box = 1 denom = 1024 tol = 1e-9 }

Values are bracketed lists, parenthesized groups, quoted strings, or a
single whitespace-free token.  Frames use one ``section = (v1, ..., vn | a1, ..., an)``
line per section; geometric data use ``A[y, x]``, ``sigma[u, v]`` and ``pi[a, b]``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import sympy

from .cartan import Chart, bivector, one_form, two_form, vector_field
from .courant import DiracFrame, Section, graph_of
from .coupling import GeometricData
from .expr import ExprSyntaxError, SampleConfig, UnknownSymbolError, is_transcendental, parse_expr


class InputError(ValueError):
    """Malformed or inconsistent input file."""


@dataclass
class Entry:
    key: str
    index: tuple[str, ...] | None
    value: object  # str, list[str] or Group
    line: int


@dataclass
class Group:
    text: str


@dataclass
class Block:
    kind: str
    name: str | None
    entries: list[Entry]
    line: int

    def get(self, key, default=None):
        for e in self.entries:
            if e.key == key and e.index is None:
                return e.value
        return default

    def all(self, key):
        return [e for e in self.entries if e.key == key]


class _Scanner:
    def __init__(self, text: str):
        self.text = text
        self.i = 0

    @property
    def line(self) -> int:
        return self.text.count("\n", 0, self.i) + 1

    def error(self, msg):
        return InputError(f"line {self.line}: {msg}")

    def skip(self):
        t = self.text
        while self.i < len(t):
            if t[self.i].isspace():
                self.i += 1
            elif t[self.i] == "#":
                while self.i < len(t) and t[self.i] != "\n":
                    self.i += 1
            else:
                break

    def peek(self) -> str:
        self.skip()
        return self.text[self.i] if self.i < len(self.text) else ""

    def expect(self, ch: str):
        if self.peek() != ch:
            raise self.error(f"expected {ch!r}")
        self.i += 1

    def ident(self) -> str:
        self.skip()
        j = self.i
        while j < len(self.text) and (self.text[j].isalnum() or self.text[j] == "_"):
            j += 1
        if j == self.i:
            raise self.error("expected a name")
        s, self.i = self.text[self.i:j], j
        return s

    def string(self) -> str:
        self.expect('"')
        j = self.text.find('"', self.i)
        if j < 0:
            raise self.error("unterminated string")
        s, self.i = self.text[self.i:j], j + 1
        return s

    def balanced(self, open_: str, close: str) -> str:
        self.expect(open_)
        depth, j = 1, self.i
        while j < len(self.text):
            c = self.text[j]
            if c == open_:
                depth += 1
            elif c == close:
                depth -= 1
                if depth == 0:
                    s, self.i = self.text[self.i:j], j + 1
                    return s
            j += 1
        raise self.error(f"unbalanced {open_!r}")

    def bare(self) -> str:
        self.skip()
        j = self.i
        while j < len(self.text) and not self.text[j].isspace() and self.text[j] not in "}#":
            j += 1
        if j == self.i:
            raise self.error("expected a value")
        s, self.i = self.text[self.i:j], j
        return s


def _split_top(text: str, sep: str) -> list[str]:
    out, depth, cur = [], 0, []
    for c in text:
        if c == "(":
            depth += 1
        elif c == ")":
            depth -= 1
        if c == sep and depth == 0:
            out.append("".join(cur))
            cur = []
        else:
            cur.append(c)
    out.append("".join(cur))
    return [s.strip() for s in out]


def _list(text: str) -> list[str]:
    items = _split_top(text, ",")
    return [] if items == [""] else items


def parse_blocks(text: str) -> list[Block]:
    sc = _Scanner(text)
    blocks = []
    while sc.peek():
        line = sc.line
        kind = sc.ident()
        name = sc.string() if sc.peek() == '"' else None
        sc.expect("{")
        entries = []
        while sc.peek() != "}":
            if not sc.peek():
                raise sc.error(f"block {kind!r} is not closed")
            eline = sc.line
            key = "" if sc.peek() == "[" else sc.ident()
            index = tuple(_list(sc.balanced("[", "]"))) if sc.peek() == "[" else None
            sc.expect("=")
            c = sc.peek()
            if c == "[":
                value = _list(sc.balanced("[", "]"))
            elif c == "(":
                value = Group(sc.balanced("(", ")"))
            elif c == '"':
                value = sc.string()
            else:
                value = sc.bare()
            entries.append(Entry(key, index, value, eline))
        sc.expect("}")
        blocks.append(Block(kind, name, entries, line))
    return blocks


@dataclass
class Problem:
    chart: Chart
    structures: dict = field(default_factory=dict)  # name -> (kind, object)
    submanifolds: dict = field(default_factory=dict)  # name -> tuple of zero coordinates
    metric: sympy.Matrix | None = None
    samples: SampleConfig = field(default_factory=SampleConfig)
    exprs: list = field(default_factory=list)

    def structure(self, name: str | None = None):
        if not self.structures:
            raise InputError("no structure block")
        if name is None:
            return next(iter(self.structures.items()))
        if name not in self.structures:
            raise InputError(f"no structure named {name!r}")
        return name, self.structures[name]


def _expr(problem: Problem, text, line: int):
    if not isinstance(text, str):
        raise InputError(f"line {line}: expected an expression")
    try:
        e = parse_expr(text, problem.chart.coords)
    except (ExprSyntaxError, UnknownSymbolError) as exc:
        raise InputError(f"line {line}: {exc}") from None
    problem.exprs.append(e)
    return e


def _coords(problem: Problem, names, line: int, allowed=None) -> tuple[str, ...]:
    allowed = problem.chart.coords if allowed is None else allowed
    for n in names:
        if n not in allowed:
            raise InputError(f"line {line}: {n!r} is not a declared coordinate here")
    return tuple(names)


def _chart(b: Block) -> Chart:
    coords = b.get("coords")
    leaf = b.get("leaf", [])
    if not isinstance(coords, list) or not isinstance(leaf, list):
        raise InputError(f"line {b.line}: chart needs list-valued coords and leaf")
    undeclared = [y for y in leaf if y not in coords]
    if undeclared:
        raise InputError(f"line {b.line}: leaf coordinate(s) {undeclared} not declared in coords")
    try:
        return Chart(tuple(coords), tuple(leaf))
    except ValueError as exc:
        raise InputError(f"line {b.line}: {exc}") from None


def _pair_table(problem: Problem, b: Block, key: str, allowed) -> dict:
    out = {}
    for e in b.entries:
        if e.key != key or e.index is None:
            continue
        if len(e.index) != 2:
            raise InputError(f"line {e.line}: expected two indices")
        out[_coords(problem, e.index, e.line, allowed)] = _expr(problem, e.value, e.line)
    return out


def _structure(problem: Problem, b: Block):
    kind = b.get("kind")
    ch = problem.chart
    if kind in ("poisson", "presymplectic"):
        comps = _pair_table(problem, b, "", ch.coords)
        return kind, (bivector if kind == "poisson" else two_form)(ch, comps)
    if kind == "frame":
        secs = []
        for e in b.all("section"):
            if not isinstance(e.value, Group):
                raise InputError(f"line {e.line}: section must be (vector | form)")
            parts = _split_top(e.value.text, "|")
            if len(parts) != 2:
                raise InputError(f"line {e.line}: section needs exactly one '|'")
            v, a = _list(parts[0]), _list(parts[1])
            if len(v) != ch.n or len(a) != ch.n:
                raise InputError(f"line {e.line}: section needs {ch.n} vector and {ch.n} form components")
            secs.append(Section(vector_field(ch, [_expr(problem, s, e.line) for s in v]),
                                one_form(ch, [_expr(problem, s, e.line) for s in a])))
        try:
            return kind, DiracFrame(ch, tuple(secs))
        except ValueError as exc:
            raise InputError(f"line {b.line}: {exc}") from None
    if kind == "geometric_data":
        if not ch.leaf:
            raise InputError(f"line {b.line}: geometric data need a chart with leaf coordinates")
        A = _pair_table(problem, b, "A", None)
        for y, x in A:
            if y not in ch.leaf or x not in ch.transverse:
                raise InputError(f"line {b.line}: A is indexed A[leaf, transverse]")
        try:
            return kind, GeometricData.of(ch, A, _pair_table(problem, b, "sigma", ch.transverse),
                                          _pair_table(problem, b, "pi", ch.leaf))
        except ValueError as exc:
            raise InputError(f"line {b.line}: {exc}") from None
    raise InputError(f"line {b.line}: unknown structure kind {kind!r}")


def _metric(problem: Problem, b: Block) -> sympy.Matrix:
    ch = problem.chart
    M = sympy.eye(ch.n)
    for e in b.entries:
        if e.index is None:
            raise InputError(f"line {e.line}: metric entries are [u, v] = expr")
        u, v = _coords(problem, e.index, e.line)
        val = _expr(problem, e.value, e.line)
        M[ch.index(u), ch.index(v)] = M[ch.index(v), ch.index(u)] = val
    return M


def _samples(b: Block) -> SampleConfig:
    kw = {}
    conv = {"count": int, "seed": int, "denom": int, "box": Fraction, "tol": float}
    for e in b.entries:
        if e.key not in conv or not isinstance(e.value, str):
            raise InputError(f"line {e.line}: unknown samples setting {e.key!r}")
        try:
            kw[e.key] = conv[e.key](e.value)
        except ValueError:
            raise InputError(f"line {e.line}: bad value for {e.key}") from None
    try:
        return SampleConfig(**kw)
    except ValueError as exc:
        raise InputError(f"line {b.line}: {exc}") from None


def load(text: str, exact_only: bool = False) -> Problem:
    blocks = parse_blocks(text)
    charts = [b for b in blocks if b.kind == "chart"]
    if len(charts) != 1:
        raise InputError("exactly one chart block is required")
    problem = Problem(_chart(charts[0]))
    for b in blocks:
        if b.kind == "chart":
            continue
        if b.kind == "structure":
            name = b.name or f"L{len(problem.structures) + 1}"
            problem.structures[name] = _structure(problem, b)
        elif b.kind == "submanifold":
            zero = b.get("zero")
            if not isinstance(zero, list) or not zero:
                raise InputError(f"line {b.line}: submanifold needs zero = [...]")
            problem.submanifolds[b.name or "N"] = _coords(problem, zero, b.line)
        elif b.kind == "metric":
            problem.metric = _metric(problem, b)
        elif b.kind == "samples":
            problem.samples = _samples(b)
        else:
            raise InputError(f"line {b.line}: unknown block {b.kind!r}")
    if exact_only and any(is_transcendental(e) for e in problem.exprs):
        raise InputError("transcendental coefficients rejected by --exact-only")
    return problem


def as_frame(kind: str, obj) -> DiracFrame:
    if kind == "frame":
        return obj
    if kind == "geometric_data":
        from .coupling import reconstruct
        return reconstruct(obj)
    return graph_of(obj)


def _fmt(e) -> str:
    return '"' + sympy.sstr(e).replace("**", "^") + '"'


def render_geometric_data(name: str, data: GeometricData) -> str:
    ch = data.chart
    lines = [f"chart {{ coords = [{', '.join(ch.coords)}] leaf = [{', '.join(ch.leaf)}] }}",
             f'structure "{name}" {{', "    kind = geometric_data"]
    for head, table in data.tables().items():
        for k, v in table.items():
            if v != 0:
                lines.append(f"    {head}[{k.replace(',', ', ')}] = {_fmt(v)}")
    lines.append("}")
    return "\n".join(lines) + "\n"
