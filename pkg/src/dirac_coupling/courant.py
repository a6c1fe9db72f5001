"""The standard Courant algebroid TM + T*M on a chart.

``g((X,a),(Y,b)) = (b(X) + a(Y))/2`` and ``w((X,a),(Y,b)) = (a(Y) - b(X))/2``;
the bracket is ``([X,Y], L_X b - L_Y a + d w)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, combinations_with_replacement, product
from typing import Mapping, Sequence

import sympy

from . import linalg
from .cartan import (
    Chart,
    Form,
    Multivector,
    coordinate_form,
    coordinate_vector,
    ext_d,
    interior,
    lie_bracket,
    lie_derivative,
    one_form,
    vector_field,
)
from .expr import (
    DEFAULT_SAMPLES,
    Expr,
    SampleConfig,
    SamplingExhausted,
    SingularPointError,
    as_expr,
    evaluate,
    normalize,
    sample_points,
)
from .report import FAIL, INVALID, PASS, UNKNOWN, CheckRecord, VerificationReport, Witness, zero_check

HALF = sympy.Rational(1, 2)


@dataclass(frozen=True)
class Section:
    """A pair (vector field, 1-form) on one chart."""

    vector: Multivector
    form: Form

    def __post_init__(self):
        if self.vector.chart.coords != self.form.chart.coords:
            raise ValueError("vector and form parts live on different charts")
        if self.vector.degree != 1 or self.form.degree != 1:
            raise ValueError("a section is a vector field plus a 1-form")

    @property
    def chart(self) -> Chart:
        return self.vector.chart

    @classmethod
    def zero(cls, chart: Chart) -> "Section":
        return cls(vector_field(chart, {}), one_form(chart, {}))

    @classmethod
    def of(cls, chart: Chart, vector: Mapping | Sequence = (), form: Mapping | Sequence = ()) -> "Section":
        return cls(vector_field(chart, vector), one_form(chart, form))

    def __add__(self, other: "Section") -> "Section":
        return Section(self.vector + other.vector, self.form + other.form)

    def __sub__(self, other: "Section") -> "Section":
        return Section(self.vector - other.vector, self.form - other.form)

    def __neg__(self):
        return Section(-self.vector, -self.form)

    def scale(self, f) -> "Section":
        return Section(self.vector.scale(f), self.form.scale(f))

    def map(self, fn) -> "Section":
        return Section(self.vector.map(fn), self.form.map(fn))

    def simplify(self) -> "Section":
        return self.map(normalize)

    def subs(self, values: Mapping) -> "Section":
        return Section(self.vector.subs(values), self.form.subs(values))

    def entries(self) -> list[Expr]:
        n = self.chart.n
        return [self.vector[(i,)] for i in range(n)] + [self.form[(i,)] for i in range(n)]

    def values_at(self, point: Mapping) -> list:
        # Fractions when possible, floats once sin/cos/exp appear
        return [evaluate(e, point) for e in self.entries()]

    def __repr__(self):
        return f"Section({self.vector!r}, {self.form!r})"


def anchor(s: Section) -> Multivector:
    return s.vector


def pairing(s1: Section, s2: Section) -> tuple[Expr, Expr]:
    """(g, w) of two sections."""
    if s1.chart.coords != s2.chart.coords:
        raise ValueError("chart mismatch")
    a_y = s1.form(s2.vector)
    b_x = s2.form(s1.vector)
    return HALF * (b_x + a_y), HALF * (a_y - b_x)


def g(s1: Section, s2: Section) -> Expr:
    return pairing(s1, s2)[0]


def courant_bracket(s1: Section, s2: Section) -> Section:
    if s1.chart.coords != s2.chart.coords:
        raise ValueError("chart mismatch")
    _, w = pairing(s1, s2)
    form = lie_derivative(s1.vector, s2.form) - lie_derivative(s2.vector, s1.form) + ext_d(Form(s1.chart, 0, {(): w}))
    return Section(lie_bracket(s1.vector, s2.vector), form)


def partial_f(f, chart: Chart) -> Section:
    """The section (0, df), characterised by g(c, partial f) = (rho c) f / 2."""
    return Section(vector_field(chart, {}), ext_d(Form(chart, 0, {(): as_expr(f)})))


# --------------------------------------------------------------------------
# frames


@dataclass(frozen=True)
class DiracFrame:
    """n sections presenting a (candidate) maximal isotropic subbundle."""

    chart: Chart
    sections: tuple[Section, ...]
    origin: str = "frame"
    meta: Mapping = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "sections", tuple(self.sections))
        if len(self.sections) != self.chart.n:
            raise ValueError(f"a frame on an {self.chart.n}-dimensional chart needs {self.chart.n} sections")
        for s in self.sections:
            if s.chart.coords != self.chart.coords:
                raise ValueError("section lives on another chart")

    def __iter__(self):
        return iter(self.sections)

    def __len__(self):
        return len(self.sections)

    def entries(self) -> list[Expr]:
        return [e for s in self.sections for e in s.entries()]

    def matrix_at(self, point: Mapping) -> list[list[Fraction]]:
        return [s.values_at(point) for s in self.sections]

    def is_singular_at(self, point: Mapping) -> bool:
        try:
            self.matrix_at(point)
        except SingularPointError:
            return True
        return False

    def points(self, cfg: SampleConfig = DEFAULT_SAMPLES, fixed: Mapping | None = None, count: int | None = None):
        return sample_points(self.chart.coords, cfg, reject=self.is_singular_at, fixed=fixed, count=count)

    def with_chart(self, chart: Chart) -> "DiracFrame":
        secs = [Section(type(s.vector)(chart, 1, s.vector.comps), type(s.form)(chart, 1, s.form.comps)) for s in self.sections]
        return DiracFrame(chart, tuple(secs), self.origin, self.meta)


def graph_of_bivector(P: Multivector) -> DiracFrame:
    chart = P.chart
    secs = []
    for name in chart.coords:
        a = coordinate_form(chart, name)
        secs.append(Section(interior(a, P), a))
    return DiracFrame(chart, tuple(secs), "poisson", {"P": P})


def graph_of_form(tau: Form) -> DiracFrame:
    chart = tau.chart
    secs = []
    for name in chart.coords:
        X = coordinate_vector(chart, name)
        secs.append(Section(X, interior(X, tau)))
    return DiracFrame(chart, tuple(secs), "presymplectic", {"tau": tau})


def graph_of(obj) -> DiracFrame:
    """Graph of sharp_P for a bivector P, or of flat_tau for a 2-form tau."""
    if isinstance(obj, Multivector) and obj.degree == 2:
        return graph_of_bivector(obj)
    if isinstance(obj, Form) and obj.degree == 2:
        return graph_of_form(obj)
    raise TypeError("graph_of takes a bivector or a 2-form")


# --------------------------------------------------------------------------
# verdicts


def _rank_record(L: DiracFrame, cfg: SampleConfig) -> CheckRecord:
    try:
        pts = L.points(cfg)
    except SamplingExhausted:
        return CheckRecord("rank", "maximal-rank", UNKNOWN, details={"reason": "no regular sample points"})
    bad = []
    for p in pts:
        r = linalg.any_rank(L.matrix_at(p), cfg.tol)
        if r != L.chart.n:
            bad.append(Witness(p, {"rank": r}))
    return CheckRecord("rank", "maximal-rank", FAIL if bad else PASS, bad, {"points": len(pts)})


def check_almost_dirac(L: DiracFrame, cfg: SampleConfig = DEFAULT_SAMPLES) -> VerificationReport:
    rep = VerificationReport()
    pairs = {}
    for i, j in combinations_with_replacement(range(len(L)), 2):
        pairs[f"g(l{i},l{j})"] = g(L.sections[i], L.sections[j])
    rep.add(zero_check("isotropy", "isotropy", pairs, cfg))
    rep.add(_rank_record(L, cfg))
    return rep


def closure_exprs(L: DiracFrame) -> dict[str, Expr]:
    out = {}
    secs = L.sections
    for i, j in combinations(range(len(secs)), 2):
        br = courant_bracket(secs[i], secs[j])
        for k in range(len(secs)):
            out[f"g([l{i},l{j}],l{k})"] = g(br, secs[k])
    return out


def check_dirac(L: DiracFrame, cfg: SampleConfig = DEFAULT_SAMPLES) -> VerificationReport:
    rep = VerificationReport()
    rep.extend(check_almost_dirac(L, cfg), prefix="almost_dirac.")
    if rep.status != PASS:
        rep.add(CheckRecord("closure", "bracket-closure", INVALID, details={"reason": "not an almost Dirac structure"}))
        return rep
    rep.add(zero_check("closure", "bracket-closure", closure_exprs(L), cfg))
    return rep


def _section_residuals(prefix: str, s: Section) -> dict[str, Expr]:
    out = {}
    names = s.chart.coords
    for i, name in enumerate(names):
        out[f"{prefix}.d/d{name}"] = s.vector[(i,)]
        out[f"{prefix}.d{name}"] = s.form[(i,)]
    return out


def check_courant_axioms(sections: Sequence[Section], f=None, cfg: SampleConfig = DEFAULT_SAMPLES) -> VerificationReport:
    """Residuals of the anchor, Jacobi-anomaly and metric-invariance axioms
    (and the Leibniz rule with the function ``f``) over the given sections."""
    secs = list(sections)
    if not secs:
        raise ValueError("need at least one section")
    chart = secs[0].chart
    idx = range(len(secs))
    br = {}

    def bracket(i, j):
        if (i, j) not in br:
            # the bracket is skew, so the swapped pair is a sign flip
            br[(i, j)] = -br[(j, i)] if (j, i) in br else courant_bracket(secs[i], secs[j])
        return br[(i, j)]

    anchor_res = {}
    for i, j in combinations(idx, 2):
        diff = bracket(i, j).vector - lie_bracket(secs[i].vector, secs[j].vector)
        for k in range(chart.n):
            anchor_res[f"rho[c{i},c{j}]-[X{i},X{j}].{chart.coords[k]}"] = diff[(k,)]

    jacobi_res = {}
    for i, j, k in combinations(idx, 3):
        cyc = [(i, j, k), (j, k, i), (k, i, j)]
        lhs = Section.zero(chart)
        T = sympy.Integer(0)
        for a, b, c in cyc:
            lhs = lhs + courant_bracket(bracket(a, b), secs[c])
            T += g(bracket(a, b), secs[c])
        res = lhs - partial_f(sympy.Rational(1, 3) * T, chart)
        jacobi_res.update(_section_residuals(f"jac(c{i},c{j},c{k})", res))

    invariance_res = {}
    for c, i, j in product(idx, combinations_with_replacement(idx, 2), [None]):
        i, j = i
        sc, s1, s2 = secs[c], secs[i], secs[j]
        lhs = lie_derivative(sc.vector, g(s1, s2))
        t1 = bracket(c, i) + partial_f(g(sc, s1), chart)
        t2 = bracket(c, j) + partial_f(g(sc, s2), chart)
        invariance_res[f"inv(c{c};c{i},c{j})"] = lhs - g(t1, s2) - g(s1, t2)

    rep = VerificationReport()
    rep.add(zero_check("axiom_anchor", "anchor-homomorphism", anchor_res, cfg))
    rep.add(zero_check("axiom_jacobi", "jacobi-anomaly", jacobi_res, cfg))
    rep.add(zero_check("axiom_invariance", "metric-invariance", invariance_res, cfg))
    if f is not None:
        f = as_expr(f)
        leib = {}
        for i, j in product(idx, idx):
            s1, s2 = secs[i], secs[j]
            lhs = courant_bracket(s1, s2.scale(f))
            rhs = bracket(i, j).scale(f) + s2.scale(lie_derivative(s1.vector, f)) - partial_f(f, chart).scale(g(s1, s2))
            leib.update(_section_residuals(f"leibniz(c{i},c{j})", lhs - rhs))
        rep.add(zero_check("leibniz", "leibniz-rule", leib, cfg))
    return rep


# --------------------------------------------------------------------------
# pointwise data


def fiber_g(r1: Sequence[Fraction], r2: Sequence[Fraction]) -> Fraction:
    n = len(r1) // 2
    return Fraction(1, 2) * (
        sum(r2[n + i] * r1[i] for i in range(n)) + sum(r1[n + i] * r2[i] for i in range(n))
    )


@dataclass(frozen=True)
class PointSubspace:
    """A subspace of one fiber of TM + T*M, rows (X | a) with exact entries."""

    point: Mapping
    rows: tuple[tuple[Fraction, ...], ...]
    n: int

    def __post_init__(self):
        basis = linalg.span_basis([list(r) for r in self.rows]) if self.rows else []
        object.__setattr__(self, "rows", tuple(tuple(r) for r in basis))

    @classmethod
    def of(cls, point, rows, n) -> "PointSubspace":
        return cls(dict(point), tuple(tuple(Fraction(v) for v in r) for r in rows), n)

    @property
    def dim(self) -> int:
        return len(self.rows)

    def is_isotropic(self) -> bool:
        return all(fiber_g(a, b) == 0 for a, b in combinations_with_replacement(self.rows, 2))

    def is_maximal_isotropic(self) -> bool:
        return self.dim == self.n and self.is_isotropic()

    def same_as(self, other: "PointSubspace") -> bool:
        return self.n == other.n and list(self.rows) == list(other.rows)

    def contains(self, v: Sequence) -> bool:
        return linalg.contains([list(r) for r in self.rows], list(v))


def fiber_at(L: DiracFrame, point: Mapping) -> PointSubspace:
    return PointSubspace.of(point, L.matrix_at(point), L.chart.n)


@dataclass(frozen=True)
class CharacteristicData:
    point: Mapping
    lplus: list[list[Fraction]]  # basis of the tangent projection
    omega: list[list[Fraction]]  # induced 2-form on that basis
    kernel: list[list[Fraction]]  # basis of L n TM (vectors)
    cokernel: list[list[Fraction]]  # basis of L n T*M (covectors)


def characteristic_data_at(L: DiracFrame, point: Mapping) -> CharacteristicData:
    """(L+, w+, K = L n TM) at a point.

    w+(X1, X2) = a1(X2) for any (X1, a1) in L; isotropy makes the choice
    of a1 irrelevant.
    """
    rows = L.matrix_at(point)
    return characteristic_data_of(PointSubspace.of(point, rows, L.chart.n))


def characteristic_data_of(Lp: PointSubspace) -> CharacteristicData:
    n = Lp.n
    rows = [list(r) for r in Lp.rows]
    vec = [r[:n] for r in rows]
    lplus, _ = linalg.rref(vec)
    omega = []
    pre = []
    for b in lplus:
        # xi with sum xi_i vec_i = b
        xi = _solve_left(vec, b)
        pre.append(linalg.combine(xi, rows)[n:])
    for a in pre:
        omega.append([sum(a[k] * b[k] for k in range(n)) for b in lplus])
    K = [linalg.combine(xi, rows)[:n] for xi in linalg.left_kernel(rows, range(n, 2 * n))]
    Kstar = [linalg.combine(xi, rows)[n:] for xi in linalg.left_kernel(rows, range(n))]
    return CharacteristicData(dict(Lp.point), lplus, omega, linalg.span_basis(K), linalg.span_basis(Kstar))


def _solve_left(rows: Sequence[Sequence[Fraction]], target: Sequence[Fraction]) -> list[Fraction]:
    """Some xi with xi @ rows = target (target assumed in the row space)."""
    m = len(rows)
    width = len(target)
    # columns of the transposed system: unknown xi (m), equations per column
    aug = [[Fraction(rows[i][c]) for i in range(m)] + [Fraction(target[c])] for c in range(width)]
    red, pivots = linalg.rref(aug)
    if m in pivots:
        raise ValueError("target is not in the row space")
    xi = [Fraction(0)] * m
    for r, pc in enumerate(pivots):
        xi[pc] = red[r][m]
    return xi


@dataclass(frozen=True)
class DWBasis:
    """Block basis (l_u + A^b_u f_b, alpha_uv lambda^v), (B^ab f_b, phi^a - A^a_v lambda^v)."""

    horizontal: list[list[Fraction]]  # l_u
    complement: list[list[Fraction]]  # f_a
    A: list[list[Fraction]]  # A[u][b]
    B: list[list[Fraction]]  # B[a][b]
    alpha: list[list[Fraction]]  # alpha[u][v]
    rows: list[list[Fraction]]  # the basis, in coordinates (X | a)


def dw_basis_at(Lp: PointSubspace, complement: Sequence[Sequence] | None = None,
                horizontal: Sequence[Sequence] | None = None) -> DWBasis:
    """Block basis of a maximal isotropic subspace relative to W = U + V.

    U defaults to the tangent projection L+ and V (``complement``) to the
    coordinate complement of L+ chosen greedily.  Requires L n (V + ann V) = 0.
    """
    n = Lp.n
    if not Lp.is_maximal_isotropic():
        raise ValueError("subspace is not maximal isotropic")
    rows = [list(r) for r in Lp.rows]
    U = [list(map(Fraction, r)) for r in horizontal] if horizontal is not None else linalg.rref([r[:n] for r in rows])[0]
    if complement is None:
        V = []
        for i in range(n):
            e = [Fraction(int(i == j)) for j in range(n)]
            if linalg.rank(U + V + [e]) > len(U) + len(V):
                V.append(e)
    else:
        V = [list(map(Fraction, r)) for r in complement]
    q, p = len(U), len(V)
    if q + p != n or linalg.rank(U + V) != n:
        raise ValueError("horizontal part and complement do not form a basis")
    basis = U + V  # rows are basis vectors of W
    # coordinates: X = c @ basis  and  form components on the basis vectors
    coords = []
    for r in rows:
        c = _solve_left(basis, r[:n])
        a_on = [sum(r[n + k] * b[k] for k in range(n)) for b in basis]
        coords.append((c, a_on))
    M = [c[:q] + a_on[q:] for c, a_on in coords]
    if linalg.rank(M) != n:
        raise ValueError("subspace meets V + ann V; no block basis for this complement")
    out_rows, A, B, alpha = [], [], [], []
    for t in range(n):
        target = [Fraction(int(t == j)) for j in range(n)]
        xi = _solve_left(M, target)
        row = linalg.combine(xi, rows)
        out_rows.append(row)
        c = linalg.combine(xi, [cc for cc, _ in coords])
        a_on = linalg.combine(xi, [aa for _, aa in coords])
        if t < q:
            A.append(c[q:])
            alpha.append(a_on[:q])
        else:
            B.append(c[q:])
            if a_on[:q] != [-A[u][t - q] for u in range(q)]:
                raise AssertionError("block basis inconsistent with isotropy")
    return DWBasis(U, V, A, B, alpha, out_rows)
