"""Coordinate submanifolds N = {y = 0} with normal bundle span{d/dy}: pointwise
pull-back and push-forward, properness, the bracket on A_N, the second
fundamental form, and the contravariant derivative of a Poisson structure."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, combinations_with_replacement, product
from typing import Mapping, Sequence

import sympy

from . import linalg
from .cartan import (
    Chart,
    Form,
    Multivector,
    apply_vector,
    coordinate_form,
    coordinate_vector,
    ext_d,
    interior,
    lie_bracket,
    lie_derivative,
    one_form,
    vector_field,
)
from .courant import DiracFrame, PointSubspace, Section, check_dirac, courant_bracket, g
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
    symbol,
)
from .report import FAIL, INVALID, PASS, UNKNOWN, CheckRecord, VerificationReport, Witness, zero_check


@dataclass(frozen=True)
class NormalizedSubmanifold:
    """N = {y = 0} for the listed coordinates y, normalized by span{d/dy}."""

    chart: Chart
    zero: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "zero", tuple(self.zero))
        for y in self.zero:
            self.chart.index(y)
        if not self.zero:
            raise ValueError("a submanifold needs at least one vanishing coordinate")

    @property
    def tangent(self) -> tuple[str, ...]:
        return tuple(c for c in self.chart.coords if c not in self.zero)

    @property
    def dim(self) -> int:
        return len(self.tangent)

    @property
    def n_chart(self) -> Chart:
        return Chart(self.tangent)

    def restrict(self, e) -> Expr:
        return normalize(as_expr(e).subs({symbol(y): 0 for y in self.zero}))

    def restrict_section(self, s: Section) -> Section:
        return s.map(self.restrict)

    def contains(self, point: Mapping) -> bool:
        return all(Fraction(point[y]) == 0 for y in self.zero)

    def points(self, L: DiracFrame, cfg: SampleConfig = DEFAULT_SAMPLES) -> list[dict]:
        return sample_points(self.chart.coords, cfg, reject=L.is_singular_at, fixed={y: 0 for y in self.zero})

    def columns(self):
        ch = self.chart
        n = ch.n
        t = [ch.index(c) for c in self.tangent]
        z = [ch.index(c) for c in self.zero]
        return t, z, [n + i for i in t], [n + i for i in z]

    def to_n(self, s: Section) -> Section:
        """Pull a section along N back to the chart of N: (X, a) -> (X, i*a)."""
        s = self.restrict_section(s)
        ch = self.n_chart
        return Section(vector_field(ch, {c: s.vector.component(c) for c in self.tangent}),
                       one_form(ch, {c: s.form.component(c) for c in self.tangent}))


@dataclass(frozen=True)
class Metric:
    """Riemannian metric g_ij on vectors; the cometric g^ij pairs 1-forms."""

    chart: Chart
    matrix: sympy.Matrix

    def __post_init__(self):
        M = sympy.Matrix(self.matrix).applyfunc(as_expr)
        if M.shape != (self.chart.n, self.chart.n):
            raise ValueError("metric matrix has the wrong size")
        if any(normalize(M[i, j] - M[j, i]) != 0 for i in range(M.rows) for j in range(i)):
            raise ValueError("metric is not symmetric")
        object.__setattr__(self, "matrix", M)

    @classmethod
    def euclidean(cls, chart: Chart) -> "Metric":
        return cls(chart, sympy.eye(chart.n))

    @property
    def inverse(self) -> sympy.Matrix:
        return self.matrix.inv(method="LU").applyfunc(normalize)

    def co(self, a: Form, b: Form) -> Expr:
        G = self.inverse
        n = self.chart.n
        return sum((G[i, j] * a[(i,)] * b[(j,)] for i in range(n) for j in range(n)), sympy.Integer(0))

    def degenerate_at(self, point: Mapping) -> bool:
        try:
            return evaluate(self.matrix.det(), point) == 0
        except SingularPointError:
            return True


# --------------------------------------------------------------------------
# pointwise restriction


def _fiber_rows(L: DiracFrame, N: NormalizedSubmanifold, p: Mapping):
    if not N.contains(p):
        raise ValueError("point is not on the submanifold")
    return L.matrix_at(p)


def _tangent_part(row, N: NormalizedSubmanifold):
    t, _, tf, _ = N.columns()
    return [row[c] for c in t] + [row[c] for c in tf]


def restrict_at_point(L: DiracFrame, N: NormalizedSubmanifold, p: Mapping, direction: str) -> PointSubspace:
    """Pull-back {(Z, i*a) : (Z, a) in L_p, Z tangent} or push-forward
    {(pr Z, i*a) : (Z, a) in L_p, a in ann(nu N)} at a point of N."""
    rows = _fiber_rows(L, N, p)
    t, z, tf, zf = N.columns()
    if direction == "pullback":
        cols = z
    elif direction == "pushforward":
        cols = zf
    else:
        raise ValueError("direction is 'pullback' or 'pushforward'")
    out = [_tangent_part(linalg.combine(xi, rows), N) for xi in linalg.left_kernel(rows, cols)]
    return PointSubspace.of(p, out, N.dim)


def _membership_exprs(parts: Sequence[Section], L: DiracFrame, N: NormalizedSubmanifold, tag: str) -> dict:
    out = {}
    for i, part in enumerate(parts):
        for j, s in enumerate(L.sections):
            out[f"g({tag}(l{i}),l{j})|N"] = N.restrict(g(part, s))
    return out


def _split_parts(s: Section, N: NormalizedSubmanifold):
    ch = N.chart
    tv = vector_field(ch, {c: s.vector.component(c) for c in N.tangent})
    tf = one_form(ch, {c: s.form.component(c) for c in N.tangent})
    nv = vector_field(ch, {c: s.vector.component(c) for c in N.zero})
    nf = one_form(ch, {c: s.form.component(c) for c in N.zero})
    return Section(tv, tf), Section(nv, nf)


def kernel_and_properness(L: DiracFrame, N: NormalizedSubmanifold, cfg: SampleConfig = DEFAULT_SAMPLES) -> VerificationReport:
    rep = VerificationReport()
    try:
        pts = N.points(L, cfg)
    except SamplingExhausted:
        rep.add(CheckRecord("properly_normalized", "properly-normalized", UNKNOWN, details={"reason": "no regular points on N"}))
        return rep
    t, z, tf, zf = N.columns()
    kdims = []
    for p in pts:
        rows = L.matrix_at(p)
        K = [[r[c] for c in t] for r in (linalg.combine(xi, rows) for xi in linalg.left_kernel(rows, z + tf))]
        kdims.append(len(linalg.span_basis(K)) if K else 0)
    rep.data["dim_K"] = kdims
    parts = [_split_parts(s, N) for s in L.sections]
    exprs = _membership_exprs([a for a, _ in parts], L, N, "T") | _membership_exprs([b for _, b in parts], L, N, "nu")
    rep.add(zero_check("properly_normalized", "properly-normalized", exprs, cfg))
    P = L.meta.get("P") if L.origin == "poisson" else None
    if P is not None:
        bad = []
        for p in pts:
            sh = [[evaluate(interior(coordinate_form(N.chart, y), P).component(c), p) for c in N.chart.coords] for y in N.zero]
            basis = linalg.span_basis(sh) if sh else []
            TN = [[int(j == i) for j in range(N.chart.n)] for i in t]
            meet = len(basis) + len(TN) - linalg.rank(basis + TN) if basis else 0
            if meet:
                vecs = {f"sharp(d{y})": interior(coordinate_form(N.chart, y), P) for y in N.zero}
                bad.append(Witness(p, {k: repr(v.subs({symbol(y): 0 for y in N.zero})) for k, v in vecs.items()} | {"dim": meet}))
        rep.add(CheckRecord("poisson_kernel", "poisson-dirac-kernel", FAIL if bad else PASS, bad, {"points": len(pts)}))
    return rep


# --------------------------------------------------------------------------
# induced structure


def _greedy_frame(sections: Sequence[Section], N: NormalizedSubmanifold, p: Mapping) -> list[Section]:
    chosen, rows = [], []
    for s in sections:
        r = s.values_at({c: p[c] for c in N.tangent})
        if linalg.rank(rows + [r]) > len(rows):
            rows.append(r)
            chosen.append(s)
    return chosen


def induced_structure(L: DiracFrame, N: NormalizedSubmanifold, cfg: SampleConfig = DEFAULT_SAMPLES):
    """(frame of i*L on N, report).  Requires N properly normalized."""
    rep = VerificationReport()
    pr = kernel_and_properness(L, N, cfg)
    rep.extend(pr, prefix="properness.")
    if pr["properly_normalized"].status != PASS:
        rep.add(CheckRecord("induced_frame", "induced-structure", INVALID, details={"reason": "not properly normalized"}))
        return None, rep
    pts = N.points(L, cfg)
    cand = [N.to_n(_split_parts(s, N)[0]) for s in L.sections]
    chosen = _greedy_frame(cand, N, pts[0])
    frame = None
    if len(chosen) == N.dim:
        frame = DiracFrame(N.n_chart, tuple(c.simplify() for c in chosen), "induced", {"ambient": L})
    bad_eq, bad_ex = [], []
    t, z, tf, zf = N.columns()
    for p in pts:
        pull = restrict_at_point(L, N, p, "pullback")
        push = restrict_at_point(L, N, p, "pushforward")
        if not pull.same_as(push):
            bad_eq.append(Witness(p, {"pullback": len(pull.rows), "pushforward": len(push.rows)}))
        rows = L.matrix_at(p)
        a_n = len(linalg.left_kernel(rows, z))
        ker = len(linalg.left_kernel(rows, t + z + tf))
        if a_n != ker + N.dim:
            bad_ex.append(Witness(p, {"dim A_N": a_n, "dim L n ann TN": ker, "dim N": N.dim}))
    rep.add(CheckRecord("pullback_equals_pushforward", "pullback-pushforward", FAIL if bad_eq else PASS, bad_eq))
    rep.add(CheckRecord("exact_sequence", "exact-sequence", FAIL if bad_ex else PASS, bad_ex))
    if frame is None:
        rep.add(CheckRecord("induced_frame", "induced-structure", UNKNOWN, details={"reason": "no frame of full rank found"}))
        return None, rep
    rep.extend(check_dirac(frame, cfg), prefix="induced.")
    return frame, rep


# --------------------------------------------------------------------------
# A_N and its bracket


def a_n_spanning_set(L: DiracFrame, N: NormalizedSubmanifold) -> list[list[Expr]]:
    """Coefficient vectors c over the frame of L with sum c_i l_i|N tangent to N."""
    rows = [[N.restrict(s.vector.component(y)) for y in N.zero] for s in L.sections]
    M = sympy.Matrix(rows).T
    out = []
    for v in M.nullspace():
        v = [normalize(e) for e in v]
        den = sympy.lcm([sympy.fraction(sympy.together(e))[1] for e in v])
        out.append([normalize(e * den) for e in v])
    return out


_EXTENSIONS = {
    "constant": lambda N: sympy.Integer(1),
    "scaled": lambda N: 1 + symbol(N.zero[0]) ** 2,
}


def _combination(L: DiracFrame, coeffs: Sequence, factor=1) -> Section:
    acc = Section.zero(L.chart)
    for c, s in zip(coeffs, L.sections):
        c = as_expr(c) * factor
        if c != 0:
            acc = acc + s.scale(c)
    return acc


def _check_tangent(L, N, coeffs, label) -> dict:
    s = _combination(L, coeffs)
    return {f"{label}.d/d{y}|N": N.restrict(s.vector.component(y)) for y in N.zero}


@dataclass
class BracketA:
    value: Section  # along N, ambient components
    by_recipe: dict
    report: VerificationReport


def bracket_A(L: DiracFrame, N: NormalizedSubmanifold, c1: Sequence, c2: Sequence,
              recipes: Sequence[str] = ("constant", "scaled"), cfg: SampleConfig = DEFAULT_SAMPLES) -> BracketA:
    """Bracket of two sections of A_N given by coefficient vectors over the
    frame of L (functions of the tangent coordinates)."""
    if len(c1) != len(L) or len(c2) != len(L):
        raise ValueError("coefficient vectors must match the frame length")
    rep = VerificationReport()
    rec = rep.add(zero_check("membership", "a-n-membership", _check_tangent(L, N, c1, "s1") | _check_tangent(L, N, c2, "s2"), cfg))
    if rec.status != PASS:
        raise ValueError("section is not in A_N: vector part leaves N")
    by = {}
    for r in recipes:
        f = _EXTENSIONS[r](N)
        br = courant_bracket(_combination(L, c1, f), _combination(L, c2, f))
        by[r] = N.restrict_section(br)
    first = by[recipes[0]]
    diffs = {}
    for r in recipes[1:]:
        for k, (a, b) in enumerate(zip(first.entries(), by[r].entries())):
            d = normalize(a - b)
            if d != 0:
                diffs[f"{r}#{k}"] = d
    rep.add(CheckRecord("extension_independence", "extension-independence", FAIL if diffs else PASS,
                        [Witness(None, diffs)] if diffs else [], {"recipes": list(recipes)}))
    # image under (X, a) -> (X, i*a) against the induced bracket on N
    s1 = N.to_n(_combination(L, c1))
    s2 = N.to_n(_combination(L, c2))
    lhs = N.to_n(first)
    rhs = courant_bracket(s1, s2)
    res = {f"#{k}": a - b for k, (a, b) in enumerate(zip(lhs.entries(), rhs.entries()))}
    rep.add(zero_check("morphism", "hrl-morphism", res, cfg))
    return BracketA(first, by, rep)


@dataclass
class SecondFundamentalForm:
    gauss: dict  # normal coordinate -> B(s1, s2)(d/dy)
    direct: dict
    poisson: dict | None
    report: VerificationReport


def second_fundamental_form(L: DiracFrame, N: NormalizedSubmanifold, c1: Sequence, c2: Sequence,
                            cfg: SampleConfig = DEFAULT_SAMPLES) -> SecondFundamentalForm:
    """B(s1, s2) three ways: the normal form part of the A_N bracket, the direct
    formula Z(lam(Y)) - lam([Z, Y]) + mu([Z, X]), and for Poisson frames
    -(L_Z P)(a, b), which comes out with the opposite sign."""
    br = bracket_A(L, N, c1, c2, cfg=cfg)
    rep = VerificationReport()
    rep.extend(br.report, prefix="bracket.")
    gauss = {y: N.restrict(br.value.form.component(y)) for y in N.zero}
    s1, s2 = _combination(L, c1), _combination(L, c2)
    X, Y = s1.vector, s2.vector
    lam, _ = _split_forms(s1.form, N)
    mu, _ = _split_forms(s2.form, N)
    direct = {}
    for y in N.zero:
        Z = coordinate_vector(N.chart, y)
        val = apply_vector(Z, lam(Y)) - lam(lie_bracket(Z, Y)) + mu(lie_bracket(Z, X))
        direct[y] = N.restrict(val)
    rep.add(zero_check("gauss_vs_direct", "second-fundamental-form", {y: gauss[y] - direct[y] for y in N.zero}, cfg))
    poisson = None
    P = L.meta.get("P") if L.origin == "poisson" else None
    if P is not None:
        poisson = {}
        for y in N.zero:
            LZ = lie_derivative(coordinate_vector(N.chart, y), P)
            poisson[y] = N.restrict(-LZ(lam, mu))
        rep.add(zero_check("poisson_opposite_sign", "second-fundamental-form-poisson",
                           {y: poisson[y] + gauss[y] for y in N.zero}, cfg, {"relation": "B_poisson = -B_gauss"}))
    return SecondFundamentalForm(gauss, direct, poisson, rep)


def _split_forms(a: Form, N: NormalizedSubmanifold) -> tuple[Form, Form]:
    ch = N.chart
    return (one_form(ch, {c: a.component(c) for c in N.tangent}),
            one_form(ch, {c: a.component(c) for c in N.zero}))


def cosymplectic_verdicts(L: DiracFrame, N: NormalizedSubmanifold, cfg: SampleConfig = DEFAULT_SAMPLES) -> VerificationReport:
    rep = VerificationReport()
    try:
        pts = N.points(L, cfg)
    except SamplingExhausted:
        rep.add(CheckRecord("cosymplectic", "cosymplectic", UNKNOWN, details={"reason": "no regular points on N"}))
        return rep
    t, z, tf, zf = N.columns()
    n = N.chart.n
    TN = [[int(j == i) for j in range(n)] for i in t]
    bad = []
    for p in pts:
        rows = L.matrix_at(p)
        H = [linalg.combine(xi, rows)[:n] for xi in linalg.left_kernel(rows, tf)]
        H = linalg.span_basis(H) if H else []
        if len(H) != len(z) or linalg.rank(H + TN) != n:
            bad.append(Witness(p, {"dim H": len(H), "rank(H+TN)": linalg.rank(H + TN)}))
    rep.add(CheckRecord("cosymplectic", "cosymplectic", FAIL if bad else PASS, bad, {"points": len(pts)}))
    pr = kernel_and_properness(L, N, cfg)
    if pr["properly_normalized"].status != PASS:
        rep.add(CheckRecord("totally_dirac", "totally-dirac", FAIL, details={"reason": "not properly normalized"}))
        return rep
    span = a_n_spanning_set(L, N)
    exprs = {}
    for i, j in combinations(range(len(span)), 2):
        sff = second_fundamental_form(L, N, span[i], span[j], cfg)
        for y, v in sff.gauss.items():
            exprs[f"B(s{i},s{j})(d/d{y})"] = v
    rep.add(zero_check("totally_dirac", "totally-dirac", exprs, cfg, {"sections": len(span)}))
    return rep


# --------------------------------------------------------------------------
# contravariant derivative


def cotangent_bracket(P: Multivector, a: Form, b: Form) -> Form:
    """{a, b}_P = L_{#a} b - L_{#b} a - d P(a, b)."""
    return lie_derivative(interior(a, P), b) - lie_derivative(interior(b, P), a) - ext_d(Form(P.chart, 0, {(): P(a, b)}))


def contravariant_derivative(P: Multivector, metric: Metric, a: Form, b: Form) -> Form:
    """D_a b from 2g(D_a b, c) = #a g(b,c) + #b g(c,a) - #c g(a,b)
    + g({a,b},c) + g({c,a},b) + g({c,b},a), solved with the metric."""
    ch = P.chart
    n = ch.n
    G = metric.matrix
    sa, sb = interior(a, P), interior(b, P)
    ab = cotangent_bracket(P, a, b)
    R = []
    for k in range(n):
        c = coordinate_form(ch, ch.coords[k])
        sc = interior(c, P)
        val = (apply_vector(sa, metric.co(b, c)) + apply_vector(sb, metric.co(c, a)) - apply_vector(sc, metric.co(a, b))
               + metric.co(ab, c) + metric.co(cotangent_bracket(P, c, a), b) + metric.co(cotangent_bracket(P, c, b), a))
        R.append(val)
    comps = {}
    for i in range(n):
        comps[ch.coords[i]] = normalize(sympy.Rational(1, 2) * sum((R[k] * G[k, i] for k in range(n)), sympy.Integer(0)))
    return one_form(ch, comps)


def connection_residuals(P: Multivector, metric: Metric) -> tuple[dict, dict]:
    """Metric-compatibility and torsion residuals over coordinate 1-forms."""
    ch = P.chart
    basis = [coordinate_form(ch, c) for c in ch.coords]
    D = {(i, j): contravariant_derivative(P, metric, basis[i], basis[j]) for i in range(ch.n) for j in range(ch.n)}
    compat, torsion = {}, {}
    for k, (i, j) in product(range(ch.n), combinations_with_replacement(range(ch.n), 2)):
        lhs = apply_vector(interior(basis[k], P), metric.co(basis[i], basis[j]))
        compat[f"c={ch.coords[k]};{ch.coords[i]},{ch.coords[j]}"] = lhs - metric.co(D[(k, i)], basis[j]) - metric.co(basis[i], D[(k, j)])
    for i, j in combinations(range(ch.n), 2):
        diff = D[(i, j)] - D[(j, i)] - cotangent_bracket(P, basis[i], basis[j])
        for c in ch.coords:
            torsion[f"{ch.coords[i]},{ch.coords[j]}.d{c}"] = diff.component(c)
    return compat, torsion


@dataclass
class GaussSplit:
    d_pn: Form  # D^{P,N}_a b along N (ambient components)
    d_pi: Form  # D^Pi_a b (tangent components)
    psi: Form
    psi_swapped: Form
    report: VerificationReport


def gauss_split(P: Multivector, metric: Metric, N: NormalizedSubmanifold, a: Form, b: Form,
                cfg: SampleConfig = DEFAULT_SAMPLES) -> GaussSplit:
    """Psi(a, b) = D^{P,N}_a b - D^Pi_a b for tangent 1-forms a, b along N."""
    from .courant import graph_of

    rep = VerificationReport()
    ch = P.chart
    for f in (a, b):
        if any(ch.coords[k[0]] in N.zero for k in f.comps):
            raise ValueError("arguments must be tangent 1-forms of N")
    orth = {f"g(d/d{u},d/d{y})|N": metric.matrix[ch.index(u), ch.index(y)] for u in N.tangent for y in N.zero}
    rec = rep.add(zero_check("normal_orthogonal", "normal-orthogonality", {k: N.restrict(v) for k, v in orth.items()}, cfg))
    L = graph_of(P)
    prop = kernel_and_properness(L, N, cfg)
    rep.extend(prop, prefix="properness.")
    if rec.status != PASS or prop.status != PASS:
        rep.add(CheckRecord("gauss_split", "gauss-split", INVALID, details={"reason": "preconditions failed"}))
        zero = one_form(ch, {})
        return GaussSplit(zero, zero, zero, zero, rep)
    # D^{P,N} with two extensions
    f = _EXTENSIONS["scaled"](N)
    dpn = {}
    for key, (x, y) in {"ab": (a, b), "ba": (b, a)}.items():
        d1 = contravariant_derivative(P, metric, x, y).map(N.restrict)
        d2 = contravariant_derivative(P, metric, x.scale(f), y.scale(f)).map(N.restrict)
        dpn[key] = (d1, d2)
    diffs = {f"{key}.d{c}": dpn[key][0].component(c) - dpn[key][1].component(c) for key in dpn for c in ch.coords}
    rep.add(zero_check("extension_independence", "extension-independence", diffs, cfg))
    # induced Poisson structure and metric on N
    nch = N.n_chart
    Pi = Multivector(nch, 2, {(u, v): N.restrict(P[(u, v)]) for u, v in combinations(N.tangent, 2)})
    gN = Metric(nch, sympy.Matrix([[N.restrict(metric.matrix[ch.index(u), ch.index(v)]) for v in N.tangent] for u in N.tangent]))
    to_n = lambda w: one_form(nch, {c: N.restrict(w.component(c)) for c in N.tangent})
    up = lambda w: one_form(ch, {c: w.component(c) for c in N.tangent})
    dpi = {"ab": up(contravariant_derivative(Pi, gN, to_n(a), to_n(b))),
           "ba": up(contravariant_derivative(Pi, gN, to_n(b), to_n(a)))}
    psi = {k: (dpn[k][0] - dpi[k]).map(normalize) for k in dpn}
    # B from the A_N bracket (coefficients over the graph frame are the form components)
    ca = [a.component(c) for c in ch.coords]
    cb = [b.component(c) for c in ch.coords]
    sff = second_fundamental_form(L, N, ca, cb, cfg)
    rep.extend(sff.report, prefix="sff.")
    tangential = {f"Psi(a,b).d{c}": psi["ab"].component(c) for c in N.tangent}
    rep.add(zero_check("psi_tangential", "gauss-split-tangential", tangential, cfg))
    # -2 g(Psi(a,b), dy) = g(B(a,b), dy), B taken from the Poisson formula
    scub = {}
    skew = {}
    for y in N.zero:
        dy = coordinate_form(ch, y)
        lhs = -2 * metric.co(psi["ab"], dy)
        Bform = one_form(ch, {z: sff.poisson[z] for z in N.zero})
        scub[f"d{y}"] = N.restrict(lhs - metric.co(Bform, dy))
        skew[f"d{y}"] = sympy.Rational(1, 2) * (psi["ab"].component(y) - psi["ba"].component(y)) - sympy.Rational(1, 2) * sff.gauss[y]
    rep.add(zero_check("psi_from_B", "gauss-split-normal", scub, cfg))
    rep.add(zero_check("skew_psi_half_B", "gauss-split-skew", skew, cfg))
    return GaussSplit(dpn["ab"][0], dpi["ab"], psi["ab"], psi["ba"], rep)
