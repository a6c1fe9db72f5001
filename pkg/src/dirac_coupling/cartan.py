"""Chart-level exterior calculus.

Conventions used throughout the package:

* wedge/evaluation is the determinant convention,
  ``(a ^ b)(X, Y) = a(X) b(Y) - a(Y) b(X)``; a k-form component
  ``w[i1<...<ik]`` equals ``w(d_i1, ..., d_ik)``;
* interior products insert into the first slot:
  ``i(X) w = w(X, ...)`` and ``i(a)(X ^ Y) = a(X) Y - a(Y) X``;
* ``sharp_P(a) = i(a) P`` and ``flat_s(X) = i(X) s``;
* the Schouten bracket of bivectors is normalised so that
  ``[P, P](df, dg, dh) = 2 * ({{f,g},h} + {{g,h},f} + {{h,f},g})`` with
  ``{f, g} = P(df, dg)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Mapping, Sequence

import sympy

from .expr import Expr, as_expr, differentiate, normalize, symbol

__all__ = [
    "Chart",
    "Multivector",
    "Form",
    "FrameSplit",
    "vector_field",
    "one_form",
    "coordinate_vector",
    "coordinate_form",
    "bivector",
    "two_form",
    "wedge",
    "interior",
    "apply_vector",
    "lie_bracket",
    "ext_d",
    "lie_derivative",
    "schouten_bracket",
    "jacobiator",
    "sharp",
    "flat",
    "bigraded_d",
]


@dataclass(frozen=True)
class Chart:
    """Ordered coordinates with a designated set of leaf coordinates.

    The foliation is span{d/dy : y in leaf}; the remaining coordinates are
    transverse.
    """

    coords: tuple[str, ...]
    leaf: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(self.coords))
        object.__setattr__(self, "leaf", tuple(self.leaf))
        if len(set(self.coords)) != len(self.coords):
            raise ValueError("chart coordinates must be distinct")
        missing = [y for y in self.leaf if y not in self.coords]
        if missing:
            raise ValueError(f"leaf coordinates {missing} are not chart coordinates")

    @property
    def n(self) -> int:
        return len(self.coords)

    @property
    def transverse(self) -> tuple[str, ...]:
        return tuple(c for c in self.coords if c not in self.leaf)

    @property
    def symbols(self) -> tuple[sympy.Symbol, ...]:
        return tuple(symbol(c) for c in self.coords)

    def index(self, name: str) -> int:
        try:
            return self.coords.index(name)
        except ValueError:
            raise KeyError(f"{name!r} is not a coordinate of this chart") from None

    def with_leaf(self, leaf: Sequence[str]) -> "Chart":
        return Chart(self.coords, tuple(leaf))


def _sort_index(idx: Sequence[int]) -> tuple[int, tuple[int, ...]] | None:
    """Sign of the sorting permutation and the sorted tuple; None on repeats."""
    idx = list(idx)
    if len(set(idx)) != len(idx):
        return None
    sign = 1
    for i in range(len(idx)):
        for j in range(len(idx) - 1 - i):
            if idx[j] > idx[j + 1]:
                idx[j], idx[j + 1] = idx[j + 1], idx[j]
                sign = -sign
    return sign, tuple(idx)


class _Alternating:
    """Sparse antisymmetric tensor; components keyed by increasing index tuples."""

    kind = ""

    def __init__(self, chart: Chart, degree: int, comps: Mapping | Iterable = ()):
        self.chart = chart
        self.degree = degree
        acc: dict[tuple[int, ...], Expr] = {}
        items = comps.items() if isinstance(comps, Mapping) else comps
        for key, value in items:
            key = tuple(chart.index(k) if isinstance(k, str) else k for k in key)
            if len(key) != degree:
                raise ValueError(f"index {key} has wrong length for degree {degree}")
            sorted_ = _sort_index(key)
            if sorted_ is None:
                continue
            sign, key = sorted_
            acc[key] = acc.get(key, sympy.Integer(0)) + sign * as_expr(value)
        self._comps = {k: v for k, v in acc.items() if v != 0}

    @property
    def comps(self) -> dict[tuple[int, ...], Expr]:
        return dict(self._comps)

    def __getitem__(self, key) -> Expr:
        key = tuple(self.chart.index(k) if isinstance(k, str) else k for k in key)
        sorted_ = _sort_index(key)
        if sorted_ is None:
            return sympy.Integer(0)
        sign, key = sorted_
        return sign * self._comps.get(key, sympy.Integer(0))

    def component(self, *names) -> Expr:
        return self[names]

    def _new(self, comps):
        return type(self)(self.chart, self.degree, comps)

    def _check(self, other):
        if type(other) is not type(self) or other.chart.coords != self.chart.coords:
            raise ValueError("chart or type mismatch")
        if other.degree != self.degree:
            raise ValueError("degree mismatch")

    def __add__(self, other):
        self._check(other)
        comps = dict(self._comps)
        for k, v in other._comps.items():
            comps[k] = comps.get(k, 0) + v
        return self._new(comps)

    def __neg__(self):
        return self._new({k: -v for k, v in self._comps.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, f) -> "_Alternating":
        f = as_expr(f)
        return self._new({k: f * v for k, v in self._comps.items()})

    def __rmul__(self, f):
        return self.scale(f)

    def map(self, fn) -> "_Alternating":
        return self._new({k: fn(v) for k, v in self._comps.items()})

    def simplify(self):
        return self.map(normalize)

    def subs(self, values: Mapping) -> "_Alternating":
        rep = {symbol(k) if isinstance(k, str) else k: as_expr(v) for k, v in values.items()}
        return self.map(lambda e: e.xreplace(rep))

    def entries(self) -> list[Expr]:
        return list(self._comps.values())

    def is_structurally_zero(self) -> bool:
        return all(normalize(v) == 0 for v in self._comps.values())

    def dense(self) -> list[Expr]:
        """All C(n, k) components in lexicographic index order."""
        return [self._comps.get(k, sympy.Integer(0)) for k in combinations(range(self.chart.n), self.degree)]

    def __repr__(self):
        if not self._comps:
            return f"{type(self).__name__}(0)"
        parts = []
        for k in sorted(self._comps):
            basis = self._basis_label(k)
            parts.append(f"({self._comps[k]})*{basis}" if basis else f"{self._comps[k]}")
        return f"{type(self).__name__}({' + '.join(parts)})"


class Multivector(_Alternating):
    kind = "multivector"

    def _basis_label(self, key):
        return "^".join(f"d/d{self.chart.coords[i]}" for i in key)

    def __call__(self, *forms: "Form") -> Expr:
        """Evaluate on 1-forms (determinant convention)."""
        if len(forms) != self.degree:
            raise ValueError("wrong number of arguments")
        t = self
        for a in forms:
            t = interior(a, t)
        return t[()]


class Form(_Alternating):
    kind = "form"

    def _basis_label(self, key):
        return "^".join(f"d{self.chart.coords[i]}" for i in key)

    def __call__(self, *vectors: Multivector) -> Expr:
        if len(vectors) != self.degree:
            raise ValueError("wrong number of arguments")
        t = self
        for v in vectors:
            t = interior(v, t)
        return t[()]


# --------------------------------------------------------------------------
# constructors


def vector_field(chart: Chart, comps: Mapping[str, object] | Sequence) -> Multivector:
    if isinstance(comps, Mapping):
        return Multivector(chart, 1, {(k,): v for k, v in comps.items()})
    return Multivector(chart, 1, {(i,): v for i, v in enumerate(comps)})


def one_form(chart: Chart, comps: Mapping[str, object] | Sequence) -> Form:
    if isinstance(comps, Mapping):
        return Form(chart, 1, {(k,): v for k, v in comps.items()})
    return Form(chart, 1, {(i,): v for i, v in enumerate(comps)})


def coordinate_vector(chart: Chart, name: str) -> Multivector:
    return vector_field(chart, {name: 1})


def coordinate_form(chart: Chart, name: str) -> Form:
    return one_form(chart, {name: 1})


def bivector(chart: Chart, comps: Mapping[tuple[str, str], object]) -> Multivector:
    return Multivector(chart, 2, comps)


def two_form(chart: Chart, comps: Mapping[tuple[str, str], object]) -> Form:
    return Form(chart, 2, comps)


def scalar(chart: Chart, value, kind=Form) -> _Alternating:
    return kind(chart, 0, {(): value})


# --------------------------------------------------------------------------
# algebra


def wedge(a: _Alternating, b: _Alternating) -> _Alternating:
    if type(a) is not type(b) or a.chart.coords != b.chart.coords:
        raise ValueError("wedge needs two forms or two multivectors on one chart")
    if a.degree + b.degree > a.chart.n:
        return type(a)(a.chart, a.degree + b.degree, {})
    comps: dict = {}
    for ka, va in a._comps.items():
        for kb, vb in b._comps.items():
            sorted_ = _sort_index(ka + kb)
            if sorted_ is None:
                continue
            sign, key = sorted_
            comps[key] = comps.get(key, 0) + sign * va * vb
    return type(a)(a.chart, a.degree + b.degree, comps)


def interior(a: _Alternating, t: _Alternating) -> _Alternating:
    """Insert a vector into a form, or a 1-form into a multivector (first slot)."""
    if a.degree != 1 or type(a) is type(t):
        raise ValueError("interior product needs a degree-1 argument of the dual kind")
    if a.chart.coords != t.chart.coords:
        raise ValueError("chart mismatch")
    if t.degree == 0:
        raise ValueError("interior product of a degree-0 object")
    comps: dict = {}
    for key, v in t._comps.items():
        for pos, i in enumerate(key):
            ai = a._comps.get((i,))
            if ai is None:
                continue
            rest = key[:pos] + key[pos + 1:]
            sign = -1 if pos % 2 else 1
            comps[rest] = comps.get(rest, 0) + sign * ai * v
    return type(t)(t.chart, t.degree - 1, comps)


def apply_vector(X: Multivector, f) -> Expr:
    """Directional derivative X(f)."""
    f = as_expr(f)
    total = sympy.Integer(0)
    for (i,), xi in X._comps.items():
        total += xi * differentiate(f, X.chart.coords[i])
    return total


def lie_bracket(X: Multivector, Y: Multivector) -> Multivector:
    if X.chart.coords != Y.chart.coords:
        raise ValueError("chart mismatch")
    if X.degree != 1 or Y.degree != 1:
        raise ValueError("lie_bracket takes vector fields")
    chart = X.chart
    comps = {}
    for i in range(chart.n):
        c = apply_vector(X, Y[(i,)]) - apply_vector(Y, X[(i,)])
        if c != 0:
            comps[(i,)] = c
    return Multivector(chart, 1, comps)


def ext_d(w: Form) -> Form:
    if not isinstance(w, Form):
        raise TypeError("ext_d takes a differential form")
    chart = w.chart
    comps: dict = {}
    for key, v in w._comps.items():
        for j, name in enumerate(chart.coords):
            if j in key:
                continue
            dv = differentiate(v, name)
            if dv == 0:
                continue
            sign, new = _sort_index((j,) + key)
            comps[new] = comps.get(new, 0) + sign * dv
    return Form(chart, w.degree + 1, {k: (v) for k, v in comps.items()})


def _lie_multivector(X: Multivector, T: Multivector) -> Multivector:
    chart = X.chart
    dX = {(i, j): differentiate(X[(j,)], chart.coords[i]) for i in range(chart.n) for j in range(chart.n)}
    comps: dict = {}
    for key, f in T._comps.items():
        xf = apply_vector(X, f)
        if xf != 0:
            comps[key] = comps.get(key, 0) + xf
        # [X, d_i] = -sum_j (d_i X^j) d_j
        for pos, i in enumerate(key):
            for j in range(chart.n):
                c = dX[(i, j)]
                if c == 0:
                    continue
                sorted_ = _sort_index(key[:pos] + (j,) + key[pos + 1:])
                if sorted_ is None:
                    continue
                sign, new = sorted_
                comps[new] = comps.get(new, 0) - sign * c * f
    return Multivector(chart, T.degree, {k: (v) for k, v in comps.items()})


def lie_derivative(X: Multivector, t):
    """L_X on functions, forms (Cartan's formula) or multivectors (bracket)."""
    if isinstance(t, Form):
        if t.degree == 0:
            return Form(t.chart, 0, {(): apply_vector(X, t[()])})
        return interior(X, ext_d(t)) + ext_d(interior(X, t))
    if isinstance(t, Multivector):
        if X.chart.coords != t.chart.coords:
            raise ValueError("chart mismatch")
        if t.degree == 0:
            return Multivector(t.chart, 0, {(): apply_vector(X, t[()])})
        return _lie_multivector(X, t)
    return apply_vector(X, t)


def jacobiator(P: Multivector) -> Multivector:
    """Trivector J(f,g,h) = {{f,g},h} + {{g,h},f} + {{h,f},g} of {f,g} = P(df,dg)."""
    return schouten_bracket(P, P).scale(sympy.Rational(1, 2))


def schouten_bracket(P: Multivector, Q: Multivector) -> Multivector:
    """Schouten bracket of two bivectors (symmetric in P, Q)."""
    if P.degree != 2 or Q.degree != 2:
        raise ValueError("schouten_bracket is implemented for bivectors")
    if P.chart.coords != Q.chart.coords:
        raise ValueError("chart mismatch")
    chart = P.chart
    n = chart.n
    names = chart.coords

    def term(A, B, i, j, k):
        # sum_l A^{lk} d_l B^{ij}
        total = sympy.Integer(0)
        bij = B[(i, j)]
        if bij == 0:
            return total
        for l in range(n):
            alk = A[(l, k)]
            if alk != 0:
                total += alk * differentiate(bij, names[l])
        return total

    comps = {}
    for i, j, k in combinations(range(n), 3):
        c = sympy.Integer(0)
        for a, b, cc in ((i, j, k), (j, k, i), (k, i, j)):
            c += term(P, Q, a, b, cc) + term(Q, P, a, b, cc)
        if c != 0:
            comps[(i, j, k)] = c
    return Multivector(chart, 3, comps)


def sharp(P: Multivector, a: Form) -> Multivector:
    return interior(a, P)


def flat(s: Form, X: Multivector) -> Form:
    return interior(X, s)


# --------------------------------------------------------------------------
# frame splits and the bigraded exterior derivative


@dataclass(frozen=True)
class FrameSplit:
    """Normal bundle H given as a graph over the transverse coordinates.

    ``A[(y, x)]`` is the coefficient of d/dy in X_x = d/dx + sum_y A[y, x] d/dy.
    The foliation is F = span{d/dy}; H* = ann F = span{dx}, F* = ann H =
    span{lambda^y = dy - sum_x A[y, x] dx}.
    """

    chart: Chart
    A: Mapping[tuple[str, str], Expr] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for (y, x), v in dict(self.A).items():
            if y not in self.chart.leaf or x not in self.chart.transverse:
                raise ValueError(f"A[{y}, {x}] must pair a leaf with a transverse coordinate")
            v = as_expr(v)
            if v != 0:
                clean[(y, x)] = v
        object.__setattr__(self, "A", clean)

    @property
    def q(self) -> int:
        return len(self.chart.transverse)

    @property
    def p(self) -> int:
        return len(self.chart.leaf)

    def coeff(self, y: str, x: str) -> Expr:
        return self.A.get((y, x), sympy.Integer(0))

    def horizontal(self, x: str) -> Multivector:
        comps = {x: 1}
        for y in self.chart.leaf:
            comps[y] = self.coeff(y, x)
        return vector_field(self.chart, comps)

    def leaf_vector(self, y: str) -> Multivector:
        return coordinate_vector(self.chart, y)

    def dx(self, x: str) -> Form:
        return coordinate_form(self.chart, x)

    def lam(self, y: str) -> Form:
        comps = {y: 1}
        for x in self.chart.transverse:
            comps[x] = -self.coeff(y, x)
        return one_form(self.chart, comps)

    def frame(self) -> list[Multivector]:
        return [self.horizontal(x) for x in self.chart.transverse] + [self.leaf_vector(y) for y in self.chart.leaf]

    def coframe(self) -> list[Form]:
        return [self.dx(x) for x in self.chart.transverse] + [self.lam(y) for y in self.chart.leaf]

    def pr_F(self, Z: Multivector) -> Multivector:
        comps = {}
        for y in self.chart.leaf:
            comps[y] = Z.component(y) - sum((Z.component(x) * self.coeff(y, x) for x in self.chart.transverse), sympy.Integer(0))
        return vector_field(self.chart, comps)

    def pr_H(self, Z: Multivector) -> Multivector:
        return Z - self.pr_F(Z)

    def split_form(self, a: Form) -> tuple[Form, Form]:
        """1-form a = (part in ann F) + (part in ann H)."""
        h = one_form(self.chart, {x: a(self.horizontal(x)) for x in self.chart.transverse})
        f = Form(self.chart, 1, {})
        for y in self.chart.leaf:
            f = f + self.lam(y).scale(a.component(y))
        return h, f

    def bigraded_components(self, w: Form) -> dict[tuple[int, ...], Expr]:
        """Components of w in the coframe (dx..., lambda...), keyed by frame positions."""
        frame = self.frame()
        out = {}
        for key in combinations(range(len(frame)), w.degree):
            t = w
            for i in key:
                t = interior(frame[i], t)
            v = t[()]
            if v != 0:
                out[key] = v
        return out

    def bidegree(self, key: Sequence[int]) -> tuple[int, int]:
        r = sum(1 for i in key if i < self.q)
        return r, len(key) - r

    def pure_part(self, w: Form, bideg: tuple[int, int]) -> Form:
        """The bidegree-(r, s) component of w, as a coordinate form."""
        coframe = self.coframe()
        out = Form(self.chart, w.degree, {})
        for key, v in self.bigraded_components(w).items():
            if self.bidegree(key) != bideg:
                continue
            t = Form(self.chart, 0, {(): v})
            for i in key:
                t = wedge(t, coframe[i])
            out = out + t
        return out

    def bigraded_parts(self, w: Form) -> dict[tuple[int, int], Form]:
        parts: dict[tuple[int, int], Form] = {}
        for r in range(w.degree + 1):
            s = w.degree - r
            part = self.pure_part(w, (r, s))
            if part._comps:
                parts[(r, s)] = part
        return parts


def bigraded_d(w: Form, split: FrameSplit) -> tuple[Form, Form, Form]:
    """(d'w, d''w, del w): the bidegree (1,0), (0,1), (2,-1) pieces of dw."""
    chart = split.chart
    zero = Form(chart, w.degree + 1, {})
    d1, d2, d3 = zero, zero, zero
    for (r, s), part in split.bigraded_parts(w).items():
        dw = ext_d(part)
        d1 = d1 + split.pure_part(dw, (r + 1, s))
        d2 = d2 + split.pure_part(dw, (r, s + 1))
        if s >= 1:
            d3 = d3 + split.pure_part(dw, (r + 2, s - 1))
    return d1, d2, d3
