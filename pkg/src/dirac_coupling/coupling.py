"""Coupling decompositions relative to the foliation F = span{d/dy} of an
adapted chart: the normal distribution H(L, F), geometric data (H, sigma, Pi),
reconstruction, and the integrability condition sets."""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, product
from typing import Mapping, Sequence

import sympy

from . import linalg
from .cartan import (
    Chart,
    Form,
    FrameSplit,
    Multivector,
    bigraded_d,
    bivector,
    ext_d,
    interior,
    lie_bracket,
    lie_derivative,
    schouten_bracket,
    two_form,
    wedge,
)
from .courant import DiracFrame, Section, check_almost_dirac, g
from .expr import DEFAULT_SAMPLES, Expr, SampleConfig, SamplingExhausted, as_expr, normalize
from .report import FAIL, INVALID, PASS, UNKNOWN, CheckRecord, VerificationReport, Witness, render_value, zero_check


def _require_foliation(chart: Chart):
    if not chart.leaf:
        raise ValueError("chart declares no leaf coordinates")


def _scalar_form(chart: Chart, f) -> Form:
    return Form(chart, 0, {(): as_expr(f)})


@dataclass(frozen=True)
class GeometricData:
    """(H, sigma, Pi): H is the split's horizontal frame, sigma lives on
    dx^u ^ dx^v and Pi on d/dy^a ^ d/dy^b."""

    split: FrameSplit
    sigma: Form
    pi: Multivector

    def __post_init__(self):
        chart = self.split.chart
        tr = {chart.index(x) for x in chart.transverse}
        lf = {chart.index(y) for y in chart.leaf}
        if self.sigma.degree != 2 or self.pi.degree != 2:
            raise ValueError("sigma must be a 2-form and pi a bivector")
        if any(not set(k) <= tr for k in self.sigma.comps):
            raise ValueError("sigma has components outside dx ^ dx")
        if any(not set(k) <= lf for k in self.pi.comps):
            raise ValueError("pi has components outside d/dy ^ d/dy")

    @property
    def chart(self) -> Chart:
        return self.split.chart

    @classmethod
    def of(cls, chart: Chart, A: Mapping | None = None, sigma: Mapping | None = None,
           pi: Mapping | None = None) -> "GeometricData":
        return cls(FrameSplit(chart, dict(A or {})), two_form(chart, dict(sigma or {})), bivector(chart, dict(pi or {})))

    def sigma_uv(self, u: str, v: str) -> Expr:
        return self.sigma[(u, v)]

    def pi_ab(self, a: str, b: str) -> Expr:
        return self.pi[(a, b)]

    def tables(self) -> dict:
        ch = self.chart
        return {
            "A": {f"{y},{x}": self.split.coeff(y, x) for y in ch.leaf for x in ch.transverse},
            "sigma": {f"{u},{v}": self.sigma[(u, v)] for u, v in combinations(ch.transverse, 2)},
            "pi": {f"{a},{b}": self.pi[(a, b)] for a, b in combinations(ch.leaf, 2)},
        }


def reconstruct(data: GeometricData, origin: str = "geometric_data") -> DiracFrame:
    """L = {(X, i(X)sigma)} + {(i(lambda)Pi, lambda)}."""
    split = data.split
    secs = []
    for x in data.chart.transverse:
        X = split.horizontal(x)
        secs.append(Section(X, interior(X, data.sigma)))
    for y in data.chart.leaf:
        lam = split.lam(y)
        secs.append(Section(interior(lam, data.pi), lam))
    return DiracFrame(data.chart, tuple(secs), origin, {"data": data})


# --------------------------------------------------------------------------
# pointwise structure


def _cols(chart: Chart):
    n = chart.n
    xv = [chart.index(x) for x in chart.transverse]
    yv = [chart.index(y) for y in chart.leaf]
    return xv, yv, [n + i for i in xv], [n + i for i in yv]


def _points(L: DiracFrame, cfg: SampleConfig):
    try:
        return L.points(cfg), None
    except SamplingExhausted as exc:
        return [], str(exc)


def normal_distribution(L: DiracFrame, cfg: SampleConfig = DEFAULT_SAMPLES) -> VerificationReport:
    """H = tangent projection of L n (TM + ann F) and K* = {theta : (Y, theta) in L, Y in F}
    at every sample point."""
    chart = L.chart
    _require_foliation(chart)
    n, q, p = chart.n, len(chart.transverse), len(chart.leaf)
    xv, yv, xf, yf = _cols(chart)
    pts, err = _points(L, cfg)
    rep = VerificationReport()
    if err:
        rep.add(CheckRecord("normal_distribution", "normal-distribution", UNKNOWN, details={"reason": err}))
        return rep
    dims, bad_h, bad_k = [], [], []
    bases = []
    annF = [[int(j == i) for j in range(n)] for i in xv]
    Fbasis = [[int(j == i) for j in range(n)] for i in yv]
    for pt in pts:
        rows = L.matrix_at(pt)
        htil = [linalg.combine(xi, rows) for xi in linalg.left_kernel(rows, yf)]
        H = linalg.span_basis([r[:n] for r in htil]) if htil else []
        meet = len(H) + p - linalg.rank(H + Fbasis) if H else 0
        kst = [linalg.combine(xi, rows)[n:] for xi in linalg.left_kernel(rows, xv)]
        K = linalg.span_basis(kst) if kst else []
        dual = len(K) == p and linalg.rank(annF + K) == n
        dims.append({"dim_H": len(H), "dim_HnF": meet, "dim_K*": len(K)})
        bases.append(H)
        if len(H) != q or meet:
            bad_h.append(Witness(pt, {"dim_H": len(H), "dim_HnF": meet}))
        if not dual:
            bad_k.append(Witness(pt, {"dim_K*": len(K), "rank(annF+K*)": linalg.rank(annF + K) if K else q}))
    rep.add(CheckRecord("normal_distribution", "normal-distribution", FAIL if bad_h else PASS, bad_h,
                        {"points": len(pts), "q": q}))
    rep.add(CheckRecord("conormal_duality", "conormal-duality", FAIL if bad_k else PASS, bad_k,
                        {"points": len(pts), "p": p}))
    constant = all(linalg.same_row_space(b, bases[0]) for b in bases) if bases and bases[0] else False
    rep.data["dims"] = dims
    if constant:
        rep.data["H_basis"] = [[render_value(v) for v in r] for r in bases[0]]
    return rep


def _mixed_matrix(L: DiracFrame) -> sympy.Matrix:
    """Rows: each section's transverse vector components, then its leaf form components."""
    ch = L.chart
    rows = []
    for s in L.sections:
        rows.append([s.vector.component(x) for x in ch.transverse] + [s.form.component(y) for y in ch.leaf])
    return sympy.Matrix(rows)


def is_coupling(L: DiracFrame, cfg: SampleConfig = DEFAULT_SAMPLES) -> VerificationReport:
    """PASS iff L n (F + ann F) = 0 at every sample point."""
    chart = L.chart
    _require_foliation(chart)
    n = chart.n
    xv, yv, xf, yf = _cols(chart)
    rep = VerificationReport()
    pts, err = _points(L, cfg)
    if err:
        rep.add(CheckRecord("coupling", "coupling-transversality", UNKNOWN, details={"reason": err}))
        return rep
    bad = []
    for pt in pts:
        rows = L.matrix_at(pt)
        sub = [[r[c] for c in xv + yf] for r in rows]
        meet = n - linalg.any_rank(sub, cfg.tol)
        if meet:
            bad.append(Witness(pt, {"dim(L n (F+annF))": meet}))
    rec = rep.add(CheckRecord("coupling", "coupling-transversality", FAIL if bad else PASS, bad, {"points": len(pts)}))
    if rec.passed:
        try:
            data = extract_geometric_data(L, cfg, checked=True)
        except (ValueError, ZeroDivisionError):
            data = None
        if data is not None:
            rep.data["H"] = {x: repr(data.split.horizontal(x)) for x in chart.transverse}
    return rep


def _inverse(M: sympy.Matrix) -> sympy.Matrix:
    inv = M.inv(method="LU")
    return inv.applyfunc(normalize)


def extract_geometric_data(L: DiracFrame, cfg: SampleConfig = DEFAULT_SAMPLES, checked: bool = False) -> GeometricData:
    """Read (H, sigma, Pi) off a coupling frame.

    With M the matrix of transverse vector and leaf form components, the rows
    of M^-1 L are (X_u, i(X_u)sigma) followed by (i(lambda^a)Pi, lambda^a).
    """
    chart = L.chart
    _require_foliation(chart)
    if not checked and not is_coupling(L, cfg).passed:
        raise ValueError("structure is not coupling for this foliation")
    M = _mixed_matrix(L)
    if M.det() == 0 or normalize(M.det()) == 0:
        raise ValueError("structure is not coupling for this foliation")
    inv = _inverse(M)
    n, q = chart.n, len(chart.transverse)
    new = []
    for i in range(n):
        acc = Section.zero(chart)
        for j, s in enumerate(L.sections):
            c = inv[i, j]
            if c != 0:
                acc = acc + s.scale(c)
        new.append(acc.simplify())
    A, sigma, pi = {}, {}, {}
    for i, x in enumerate(chart.transverse):
        X, a = new[i].vector, new[i].form
        for y in chart.leaf:
            A[(y, x)] = X.component(y)
        for v in chart.transverse[i + 1:]:
            sigma[(x, v)] = a.component(v)
    for k, y in enumerate(chart.leaf):
        Y = new[q + k].vector
        for b in chart.leaf[k + 1:]:
            pi[(y, b)] = Y.component(b)
    return GeometricData.of(chart, A, sigma, pi)


@dataclass
class AlmostCouplingSplit:
    report: VerificationReport
    lh: list[Section]
    lf: list[Section]
    split: FrameSplit


def _h_part(s: Section, split: FrameSplit) -> Section:
    fh, _ = split.split_form(s.form)
    return Section(split.pr_H(s.vector), fh)


def _f_part(s: Section, split: FrameSplit) -> Section:
    _, ff = split.split_form(s.form)
    return Section(split.pr_F(s.vector), ff)


def decompose_almost_coupling(L: DiracFrame, split: FrameSplit, cfg: SampleConfig = DEFAULT_SAMPLES) -> AlmostCouplingSplit:
    """Split every section into its (H + H*) and (F + F*) parts and test that
    both parts lie in L (g-orthogonality to the frame, L being maximal isotropic)."""
    if split.chart.coords != L.chart.coords:
        raise ValueError("split and frame use different charts")
    rep = VerificationReport()
    rep.extend(check_almost_dirac(L, cfg), prefix="almost_dirac.")
    if rep.status != PASS:
        rep.add(CheckRecord("almost_coupling", "almost-coupling", INVALID, details={"reason": "not an almost Dirac structure"}))
        return AlmostCouplingSplit(rep, [], [], split)
    lh = [_h_part(s, split).simplify() for s in L.sections]
    lf = [_f_part(s, split).simplify() for s in L.sections]
    exprs = {}
    for i, part in enumerate(lh):
        for j, s in enumerate(L.sections):
            exprs[f"g(H(l{i}),l{j})"] = g(part, s)
    for i, part in enumerate(lf):
        for j, s in enumerate(L.sections):
            exprs[f"g(F(l{i}),l{j})"] = g(part, s)
    rep.add(zero_check("almost_coupling", "almost-coupling", exprs, cfg))
    keep = lambda secs: [s for s in secs if not (s.vector.is_structurally_zero() and s.form.is_structurally_zero())]
    return AlmostCouplingSplit(rep, keep(lh), keep(lf), split)


# --------------------------------------------------------------------------
# integrability


def _d2(w: Form, split: FrameSplit) -> Form:
    return bigraded_d(w, split)[1]


def _d1(w: Form, split: FrameSplit) -> Form:
    return bigraded_d(w, split)[0]


def _vector_residual(label: str, Z: Multivector) -> dict[str, Expr]:
    return {f"{label}.d/d{c}": Z.component(c) for c in Z.chart.coords}


def _bivector_residual(label: str, T: Multivector) -> dict[str, Expr]:
    ch = T.chart
    return {f"{label}.{a}^{b}": T[(a, b)] for a, b in combinations(ch.coords, 2)}


def data_conditions(data: GeometricData) -> dict[str, dict[str, Expr]]:
    split, chart = data.split, data.chart
    xs, ys = chart.transverse, chart.leaf
    Xs = {x: split.horizontal(x) for x in xs}
    lam = {y: split.lam(y) for y in ys}
    c1, c2, c3, c4 = {}, {}, {}, {}
    if len(ys) >= 3:
        PP = schouten_bracket(data.pi, data.pi)
        for a, b, c in combinations(ys, 3):
            c1[f"[Pi,Pi](l{a},l{b},l{c})"] = PP(lam[a], lam[b], lam[c])
    if len(xs) >= 3:
        ds = ext_d(data.sigma)
        for u, v, w in combinations(xs, 3):
            c2[f"dsigma(X{u},X{v},X{w})"] = ds(Xs[u], Xs[v], Xs[w])
    for u, v in combinations(xs, 2):
        suv = data.sigma(Xs[u], Xs[v])
        rhs = interior(_d2(_scalar_form(chart, suv), split), data.pi)
        c3.update(_vector_residual(f"[X{u},X{v}]-sharp(d''sigma{u}{v})", lie_bracket(Xs[u], Xs[v]) - rhs))
    for u in xs:
        c4.update(_bivector_residual(f"L_X{u}Pi", lie_derivative(Xs[u], data.pi)))
    return {"i": c1, "ii": c2, "iii": c3, "iv": c4}


_DATA_ANCHORS = {
    "i": "leaf-tangent-poisson",
    "ii": "sigma-closed-on-H",
    "iii": "curvature-identity",
    "iv": "pi-invariance",
}


def almost_coupling_conditions(lh: Sequence[Section], lf: Sequence[Section], split: FrameSplit) -> dict[str, dict[str, Expr]]:
    """The four conditions on sections (X, a) of L_H and (Y, lam) of L_F."""
    chart = split.chart
    c1, c2, c3, c4 = {}, {}, {}, {}
    H = list(lh)
    F = list(lf)
    for i, j, k in product(range(len(H)), repeat=3):
        if not (i < j < k):
            continue
        total = sympy.Integer(0)
        for a, b, c in ((i, j, k), (j, k, i), (k, i, j)):
            Xa, Xb, Xc = H[a].vector, H[b].vector, H[c].vector
            total += lie_derivative(Xa, H[b].form(Xc)) + H[a].form(lie_bracket(Xb, Xc))
        c1[f"cyc(h{i},h{j},h{k})"] = total
    for i, j in product(range(len(H)), repeat=2):
        if i == j:
            continue
        for k, (Y, lam) in enumerate((s.vector, s.form) for s in F):
            X1, a1 = H[i].vector, H[i].form
            X2, a2 = H[j].vector, H[j].form
            lhs = lie_derivative(Y, a2)(X1) + a1(lie_bracket(Y, X2))
            c2[f"(h{i},h{j};f{k})"] = lhs - lam(lie_bracket(X1, X2))
    for i in range(len(H)):
        X = H[i].vector
        for j, k in product(range(len(F)), repeat=2):
            if j == k:
                continue
            Y1, l1 = F[j].vector, F[j].form
            Y2, l2 = F[k].vector, F[k].form
            c3[f"(h{i};f{j},f{k})"] = lie_derivative(X, l1)(Y2) + l2(lie_bracket(X, Y1))
    for j, k in combinations(range(len(F)), 2):
        Y1, l1 = F[j].vector, F[j].form
        Y2, l2 = F[k].vector, F[k].form
        form = interior(Y1, _d2(l2, split)) - interior(Y2, _d2(l1, split)) + _d2(_scalar_form(chart, l2(Y1)), split)
        S = Section(lie_bracket(Y1, Y2), form)
        for m, s in enumerate(F):
            c4[f"g(B(f{j},f{k}),f{m})"] = g(S, s)
    return {"1": c1, "2": c2, "3": c3, "4": c4}


_AC_ANCHORS = {"1": "horizontal-closure", "2": "mixed-closure-h", "3": "mixed-closure-f", "4": "leafwise-dirac"}


def _poisson_parts(P: Multivector, split: FrameSplit):
    chart = split.chart
    xs, ys = chart.transverse, chart.leaf
    Xs = {x: split.horizontal(x) for x in xs}
    lam = {y: split.lam(y) for y in ys}
    dx = {x: split.dx(x) for x in xs}
    P1 = Multivector(chart, 2, {})
    for u, v in combinations(xs, 2):
        P1 = P1 + wedge(Xs[u], Xs[v]).scale(P(dx[u], dx[v]))
    P2 = Multivector(chart, 2, {})
    for a, b in combinations(ys, 2):
        P2 = P2 + bivector(chart, {(a, b): P(lam[a], lam[b])})
    mixed = {f"P(d{u},lambda_{a})": P(dx[u], lam[a]) for u in xs for a in ys}
    return P1.simplify(), P2.simplify(), mixed


def poisson_conditions(P: Multivector, split: FrameSplit) -> dict[str, dict[str, Expr]]:
    """Conditions on P = P' + P'' (bidegrees (2,0) and (0,2)) over the
    coframe dx^u of ann F and lambda^a of ann H."""
    chart = split.chart
    P1, P2, _ = _poisson_parts(P, split)
    hs = [split.dx(x) for x in chart.transverse]
    fs = [split.lam(y) for y in chart.leaf]
    sh1 = lambda a: interior(a, P1)
    sh2 = lambda a: interior(a, P2)
    c1, c2, c3, c4 = {}, {}, {}, {}
    for (i, a), (j, b), (k, c) in product(enumerate(hs), repeat=3):
        if not i < j:
            continue
        lhs = lie_derivative(sh1(c), P1)(a, b)
        c1[f"(d{k};d{i},d{j})"] = lhs - _d1(c, split)(sh1(a), sh1(b))
    for (i, a), (j, b), (k, lam) in product(enumerate(hs), enumerate(hs), enumerate(fs)):
        if not i < j:
            continue
        lhs = lie_derivative(sh2(lam), P1)(a, b)
        c2[f"(l{k};d{i},d{j})"] = lhs + lam(lie_bracket(sh1(a), sh1(b)))
    for (k, c), (i, lam), (j, mu) in product(enumerate(hs), enumerate(fs), enumerate(fs)):
        if not i < j:
            continue
        c3[f"(d{k};l{i},l{j})"] = lie_derivative(sh1(c), P2)(lam, mu)
    for (k, nu), (i, lam), (j, mu) in product(enumerate(fs), repeat=3):
        if not i < j:
            continue
        lhs = lie_derivative(sh2(nu), P2)(lam, mu)
        c4[f"(l{k};l{i},l{j})"] = lhs - _d2(nu, split)(sh2(lam), sh2(mu))
    return {"1": c1, "2": c2, "3": c3, "4": c4}


_POISSON_ANCHORS = {"1": "poisson-horizontal", "2": "poisson-mixed-h", "3": "poisson-mixed-f", "4": "poisson-leafwise"}


def _tau_parts(tau: Form, split: FrameSplit):
    parts = split.bigraded_parts(tau)
    zero = Form(split.chart, 2, {})
    mixed = parts.get((1, 1), zero)
    return parts.get((2, 0), zero), parts.get((0, 2), zero), mixed


def presymplectic_conditions(tau: Form, split: FrameSplit) -> dict[str, dict[str, Expr]]:
    """d''tau'' = 0, d'tau' = 0, d''tau' + del tau'' = 0, d'tau'' = 0, componentwise
    in the bigraded coframe."""
    t1, t2, _ = _tau_parts(tau, split)
    d1a, d2a, _ = bigraded_d(t1, split)
    d1b, d2b, delb = bigraded_d(t2, split)
    comps = lambda w, lab: {f"{lab}{k}": v for k, v in split.bigraded_components(w).items()} or {lab: sympy.Integer(0)}
    return {
        "1": comps(d2b, "d''tau''"),
        "2": comps(d1a, "d'tau'"),
        "3": comps(d2a + delb, "d''tau'+del tau''"),
        "4": comps(d1b, "d'tau''"),
    }


def presymplectic_projectable_conditions(tau: Form, split: FrameSplit) -> dict[str, dict[str, Expr]]:
    """The projectable-lift form: d'tau' = 0, d''(tau'(X1,X2)) = flat_tau''(pr_F[X1,X2]),
    L_X tau'' = 0 on leaf vectors, together with leafwise closedness of tau''."""
    chart = split.chart
    t1, t2, _ = _tau_parts(tau, split)
    xs, ys = chart.transverse, chart.leaf
    Xs = {x: split.horizontal(x) for x in xs}
    Ys = {y: split.leaf_vector(y) for y in ys}
    c1 = {f"d''tau''{k}": v for k, v in split.bigraded_components(_d2(t2, split)).items()}
    c2 = {f"d'tau'{k}": v for k, v in split.bigraded_components(_d1(t1, split)).items()}
    c3, c4 = {}, {}
    for u, v in combinations(xs, 2):
        lhs = _d2(_scalar_form(chart, t1(Xs[u], Xs[v])), split)
        rhs = interior(split.pr_F(lie_bracket(Xs[u], Xs[v])), t2)
        for y in ys:
            c3[f"(X{u},X{v}).{y}"] = (lhs - rhs)(Ys[y])
    for u in xs:
        Lt = lie_derivative(Xs[u], t2)
        for a, b in combinations(ys, 2):
            c4[f"L_X{u}tau''({a},{b})"] = Lt(Ys[a], Ys[b])
    return {"1": c1, "2": c2, "3": c3, "4": c4}


_PRESYMP_ANCHORS = {"1": "leafwise-closed", "2": "horizontal-closed", "3": "mixed-closed", "4": "tau-invariance"}


def check_integrability(obj, mode: str, split: FrameSplit | None = None,
                        cfg: SampleConfig = DEFAULT_SAMPLES) -> VerificationReport:
    """Per-condition verdicts for one of the modes

    ``data``            obj is GeometricData (conditions i-iv)
    ``almost_coupling`` obj is a DiracFrame or an (L_H, L_F) pair, with ``split``
    ``poisson``         obj is a bivector, with ``split``
    ``presymplectic``   obj is a 2-form, with ``split``
    """
    rep = VerificationReport()
    if mode == "data":
        if not isinstance(obj, GeometricData):
            raise TypeError("mode 'data' expects GeometricData")
        conds, anchors = data_conditions(obj), _DATA_ANCHORS
    elif mode in ("almost_coupling", "almost-coupling"):
        if split is None:
            raise TypeError("mode 'almost_coupling' needs a split")
        if isinstance(obj, DiracFrame):
            dec = decompose_almost_coupling(obj, split, cfg)
            rep.extend(dec.report, prefix="decomposition.")
            if dec.report.status != PASS:
                for key, anchor in _AC_ANCHORS.items():
                    rep.add(CheckRecord(f"condition_{key}", anchor, INVALID, details={"reason": "not almost coupling"}))
                return rep
            lh, lf = dec.lh, dec.lf
        else:
            lh, lf = obj
        conds, anchors = almost_coupling_conditions(lh, lf, split), _AC_ANCHORS
    elif mode == "poisson":
        if split is None or not isinstance(obj, Multivector) or obj.degree != 2:
            raise TypeError("mode 'poisson' expects a bivector and a split")
        _, _, mixed = _poisson_parts(obj, split)
        rec = rep.add(zero_check("almost_coupling", "almost-coupling", mixed, cfg))
        if rec.status != PASS:
            rec.status = INVALID
            return rep
        conds, anchors = poisson_conditions(obj, split), _POISSON_ANCHORS
    elif mode == "presymplectic":
        if split is None or not isinstance(obj, Form) or obj.degree != 2:
            raise TypeError("mode 'presymplectic' expects a 2-form and a split")
        _, _, mixed = _tau_parts(obj, split)
        rec = rep.add(zero_check("almost_coupling", "almost-coupling",
                                 {f"tau{k}": v for k, v in split.bigraded_components(mixed).items()}, cfg))
        if rec.status != PASS:
            rec.status = INVALID
            return rep
        conds, anchors = presymplectic_conditions(obj, split), _PRESYMP_ANCHORS
    else:
        raise ValueError(f"unknown mode {mode!r}")
    for key, exprs in conds.items():
        details = {} if exprs else {"vacuous": True}
        rep.add(zero_check(f"condition_{key}", anchors[key], exprs, cfg, details))
    return rep
