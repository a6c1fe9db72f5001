"""Dirac structures near a presymplectic leaf S = {y = 0}.

The chart's leaf coordinates are the normal coordinates y; the remaining
coordinates x run along S.  Around S the structure is presented by the basis

    H_u = (d/dx^u + A^b_u d/dy^b, alpha_uv dx^v)
    V^a = (B^ab d/dy^b, dy^a - A^a_v dx^v)

which is the reconstruction of the geometric data (A, sigma = alpha, Pi = B).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Mapping, Sequence

import sympy

from . import linalg
from .cartan import Chart
from .coupling import GeometricData, extract_geometric_data, is_coupling, reconstruct
from .courant import DiracFrame, Section, characteristic_data_at, courant_bracket, g
from .expr import (
    DEFAULT_SAMPLES,
    Expr,
    SampleConfig,
    SamplingExhausted,
    as_expr,
    differentiate,
    normalize,
    sample_points,
    symbol,
)
from .report import FAIL, PASS, UNKNOWN, CheckRecord, VerificationReport, Witness, zero_check


class LeafConditionError(ValueError):
    """S = {y = 0} is not a presymplectic leaf of the presented structure."""


def _at_zero(e: Expr, names: Sequence[str]) -> Expr:
    return normalize(as_expr(e).subs({symbol(y): 0 for y in names}))


@dataclass(frozen=True)
class LeafPresentation:
    chart: Chart
    A: Mapping[tuple[str, str], Expr]  # (y, x) -> A^y_x
    B: Mapping[tuple[str, str], Expr]  # (a, b), a < b in chart order
    alpha: Mapping[tuple[str, str], Expr]  # (u, v), u < v in chart order
    report: VerificationReport = field(default_factory=VerificationReport, compare=False)

    @property
    def xs(self) -> tuple[str, ...]:
        return self.chart.transverse

    @property
    def ys(self) -> tuple[str, ...]:
        return self.chart.leaf

    def data(self) -> GeometricData:
        return GeometricData.of(self.chart, dict(self.A), dict(self.alpha), dict(self.B))

    def frame(self) -> DiracFrame:
        return reconstruct(self.data(), origin="leaf_presentation")

    @classmethod
    def from_data(cls, data: GeometricData, report: VerificationReport | None = None) -> "LeafPresentation":
        t = data.chart
        A = {(y, x): data.split.coeff(y, x) for y in t.leaf for x in t.transverse}
        B = {(a, b): data.pi[(a, b)] for a, b in combinations(t.leaf, 2)}
        al = {(u, v): data.sigma[(u, v)] for u, v in combinations(t.transverse, 2)}
        return cls(t, A, B, al, report or VerificationReport())

    def entry(self, kind: str, key: tuple[str, str]) -> Expr:
        table = {"A": self.A, "B": self.B, "alpha": self.alpha}[kind]
        if key in table:
            return as_expr(table[key])
        if kind != "A" and (key[1], key[0]) in table:
            return -as_expr(table[(key[1], key[0])])
        return sympy.Integer(0)


def _near_leaf_points(L: DiracFrame, cfg: SampleConfig, ys, shrink: int):
    small = SampleConfig(count=cfg.count, seed=cfg.seed + shrink, box=cfg.box / (8 ** shrink),
                         denom=cfg.denom * (8 ** shrink), tol=cfg.tol, max_retries=cfg.max_retries)
    try:
        pts = sample_points(L.chart.coords, cfg, reject=L.is_singular_at, fixed={y: 0 for y in ys})
        if shrink:
            pts = pts + sample_points(L.chart.coords, small, reject=L.is_singular_at)
        return pts
    except SamplingExhausted:
        return None


def dw_coefficients(source, cfg: SampleConfig = DEFAULT_SAMPLES) -> LeafPresentation:
    """A, B, alpha around S = {y = 0}, read off a coupling frame or geometric data.

    Raises :class:`LeafConditionError` when B or A do not vanish on S.
    """
    rep = VerificationReport()
    if isinstance(source, GeometricData):
        data = source
    elif isinstance(source, DiracFrame):
        cp = is_coupling(source, cfg)
        rep.extend(cp, prefix="source.")
        if not cp.passed:
            raise LeafConditionError("structure is not coupling with respect to the normal coordinates")
        data = extract_geometric_data(source, cfg, checked=True)
    else:
        raise TypeError("expected a DiracFrame or GeometricData")
    pres = LeafPresentation.from_data(data, rep)
    ys = pres.ys
    if not ys:
        raise LeafConditionError("no normal coordinates declared")
    bad_b = {f"B[{a},{b}]": v for (a, b), v in pres.B.items() if _at_zero(v, ys) != 0}
    if bad_b:
        raise LeafConditionError(f"Pi does not vanish on S: {bad_b}")
    bad_a = {f"A[{y},{x}]": v for (y, x), v in pres.A.items() if _at_zero(v, ys) != 0}
    if bad_a:
        raise LeafConditionError(f"H is not tangent to S along S: {bad_a}")
    rep.add(CheckRecord("vanishing_on_leaf", "vanishing-on-leaf", PASS))
    # coupling along S and on a shrinking box around it
    L = pres.frame()
    for shrink in (0, 1):
        pts = _near_leaf_points(L, cfg, ys, shrink)
        cid = "coupling_on_leaf" if shrink == 0 else "coupling_near_leaf"
        if pts is None:
            rep.add(CheckRecord(cid, "coupling-near-leaf", UNKNOWN, details={"reason": "no regular points"}))
            continue
        n = L.chart.n
        xv = [L.chart.index(x) for x in pres.xs]
        bad = []
        for p in pts:
            rows = L.matrix_at(p)
            full = rows + [[int(j == i) for j in range(2 * n)] for i in [L.chart.index(y) for y in ys] + [n + i for i in xv]]
            r = linalg.any_rank(full, cfg.tol)
            if r != 2 * n:
                bad.append(Witness(p, {"rank": r}))
        rep.add(CheckRecord(cid, "coupling-near-leaf", FAIL if bad else PASS, bad, {"points": len(pts)}))
    return pres


# --------------------------------------------------------------------------
# leaf algebroid


_RECIPES = {
    "constant": lambda ys: sympy.Integer(1),
    "scaled": lambda ys: 1 + symbol(ys[0]) ** 2,
    "affine": lambda ys: 1 + symbol(ys[0]),
}


@dataclass
class LeafAlgebroid:
    table: dict  # (name_i, name_j) -> {basis name: coefficient on S}
    by_recipe: dict
    report: VerificationReport


def _basis(pres: LeafPresentation) -> dict[str, Section]:
    L = pres.frame()
    names = [f"H_{x}" for x in pres.xs] + [f"V_{y}" for y in pres.ys]
    return dict(zip(names, L.sections))


def _decompose_on_leaf(s: Section, pres: LeafPresentation, basis: dict[str, Section]):
    """Coefficients of a section of L|_S on the basis restricted to S, plus the residual."""
    zero = {symbol(y): 0 for y in pres.ys}
    s0 = s.subs(zero).simplify()
    coeffs = {}
    rest = s0
    for x in pres.xs:
        c = normalize(s0.vector.component(x))
        coeffs[f"H_{x}"] = c
        rest = rest - basis[f"H_{x}"].subs(zero).scale(c)
    for y in pres.ys:
        c = normalize(rest.form.component(y))
        coeffs[f"V_{y}"] = c
        rest = rest - basis[f"V_{y}"].subs(zero).scale(c)
    return coeffs, rest.simplify()


def leaf_algebroid(pres: LeafPresentation, recipes: Sequence[str] = ("constant", "scaled"),
                   cfg: SampleConfig = DEFAULT_SAMPLES) -> LeafAlgebroid:
    """Brackets of the basis of L|_S computed from extensions, compared across
    extension recipes and against the derivative formulas
    [V^a,V^b] = dB^ab/dy^c V^c, [H_u,V^a] = dA^a_u/dy^c V^c, [H_u,H_v] = dalpha_uv/dy^c V^c."""
    basis = _basis(pres)
    names = list(basis)
    rep = VerificationReport()
    by_recipe = {}
    leftover = {}
    for recipe in recipes:
        f = _RECIPES[recipe](pres.ys)
        table = {}
        for a, b in combinations(names, 2):
            br = courant_bracket(basis[a].scale(f), basis[b].scale(f))
            coeffs, rest = _decompose_on_leaf(br, pres, basis)
            table[(a, b)] = coeffs
            for k, v in zip(range(2 * pres.chart.n), rest.entries()):
                leftover[f"{recipe}:[{a},{b}]#{k}"] = v
        by_recipe[recipe] = table
    rep.add(zero_check("bracket_in_L", "leaf-algebroid-closure", leftover, cfg))
    first = by_recipe[recipes[0]]
    diffs = {}
    for recipe in recipes[1:]:
        for key, coeffs in by_recipe[recipe].items():
            for nm, v in coeffs.items():
                d = normalize(v - first[key][nm])
                if d != 0:
                    diffs[f"{recipe}:{key}:{nm}"] = d
    rep.add(CheckRecord("extension_independence", "extension-independence", FAIL if diffs else PASS,
                        [Witness(None, diffs)] if diffs else [], {"recipes": list(recipes)}))
    expected = expected_brackets(pres)
    res = {}
    for key, coeffs in first.items():
        for nm, v in coeffs.items():
            res[f"{key}:{nm}"] = v - expected[key].get(nm, 0)
    rep.add(zero_check("structure_formulas", "leaf-bracket-formulas", res, cfg))
    return LeafAlgebroid(first, by_recipe, rep)


def expected_brackets(pres: LeafPresentation) -> dict:
    ys, xs = pres.ys, pres.xs
    zero = {symbol(y): 0 for y in ys}
    d0 = lambda e, c: normalize(differentiate(as_expr(e), c).subs(zero))
    out = {}
    names = [f"H_{x}" for x in xs] + [f"V_{y}" for y in ys]
    for a, b in combinations(names, 2):
        ka, ia = a.split("_", 1)
        kb, ib = b.split("_", 1)
        if ka == "V" and kb == "V":
            e = pres.entry("B", (ia, ib))
        elif ka == "H" and kb == "V":
            e = pres.entry("A", (ib, ia))
        elif ka == "V" and kb == "H":
            e = -pres.entry("A", (ia, ib))
        else:
            e = pres.entry("alpha", (ia, ib))
        out[(a, b)] = {f"H_{x}": sympy.Integer(0) for x in xs} | {f"V_{c}": d0(e, c) for c in ys}
    return out


# --------------------------------------------------------------------------
# linear model


def _fiber_names(chart: Chart, count: int, stem: str = "eta") -> list[str]:
    taken = set(chart.coords)
    out, k = [], 1
    while len(out) < count:
        name = f"{stem}{k}"
        if name not in taken:
            out.append(name)
        k += 1
    return out


@dataclass(frozen=True)
class LinearModel:
    """First-order data along S in fiber coordinates eta:

    Gamma[(a, u, c)] = dA^a_u/dy^c, C[(a, b, c)] = dB^ab/dy^c,
    varpi[(u, v)] = alpha_uv(x, 0), R[(u, v, c)] = dalpha_uv/dy^c, all at y = 0.
    The model's geometric data are A^a_u = Gamma^a_uc eta^c,
    sigma_uv = varpi_uv + R_uvc eta^c and Pi^ab = C^ab_c eta^c.
    """

    xs: tuple[str, ...]
    etas: tuple[str, ...]
    Gamma: Mapping[tuple[str, str, str], Expr]
    C: Mapping[tuple[str, str, str], Expr]
    varpi: Mapping[tuple[str, str], Expr]
    R: Mapping[tuple[str, str, str], Expr]

    @property
    def chart(self) -> Chart:
        return Chart(self.xs + self.etas, self.etas)

    def _lin(self, table, head) -> Expr:
        return sum((as_expr(table.get(head + (c,), 0)) * symbol(c) for c in self.etas), sympy.Integer(0))

    def data(self) -> GeometricData:
        A, s, P = {}, {}, {}
        for a in self.etas:
            for u in self.xs:
                A[(a, u)] = self._lin(self.Gamma, (a, u))
        for u, v in combinations(self.xs, 2):
            s[(u, v)] = as_expr(self.varpi.get((u, v), 0)) + self._lin(self.R, (u, v))
        for a, b in combinations(self.etas, 2):
            P[(a, b)] = self._lin(self.C, (a, b))
        return GeometricData.of(self.chart, A, s, P)

    def frame(self) -> DiracFrame:
        return reconstruct(self.data(), origin="linear_model")

    def presentation(self) -> LeafPresentation:
        return LeafPresentation.from_data(self.data())


def linear_model(pres: LeafPresentation, fiber: Sequence[str] | None = None) -> LinearModel:
    ys, xs = pres.ys, pres.xs
    etas = tuple(fiber) if fiber is not None else tuple(_fiber_names(pres.chart, len(ys)))
    if len(etas) != len(ys):
        raise ValueError("one fiber coordinate per normal coordinate")
    if set(etas) & set(xs):
        raise ValueError("fiber coordinates collide with leaf coordinates")
    zero = {symbol(y): 0 for y in ys}
    d0 = lambda e, y: normalize(differentiate(as_expr(e), y).subs(zero))
    Gamma, C, varpi, R = {}, {}, {}, {}
    for (ya, u), e in pres.A.items():
        for yc, ec in zip(ys, etas):
            v = d0(e, yc)
            if v != 0:
                Gamma[(etas[ys.index(ya)], u, ec)] = v
    for (a, b), e in pres.B.items():
        for yc, ec in zip(ys, etas):
            v = d0(e, yc)
            if v != 0:
                C[(etas[ys.index(a)], etas[ys.index(b)], ec)] = v
    for (u, v_), e in pres.alpha.items():
        w0 = _at_zero(e, ys)
        if w0 != 0:
            varpi[(u, v_)] = w0
        for yc, ec in zip(ys, etas):
            v = d0(e, yc)
            if v != 0:
                R[(u, v_, ec)] = v
    return LinearModel(xs, etas, Gamma, C, varpi, R)


def linearize(pres: LeafPresentation, fiber: Sequence[str] | None = None) -> DiracFrame:
    """Frame of the linear model on the normal bundle, in coordinates (x, eta)."""
    model = linear_model(pres, fiber)
    L = model.frame()
    return DiracFrame(L.chart, L.sections, "linear_model", {"model": model})


def check_linear_approximation(pres: LeafPresentation, model: LinearModel,
                               cfg: SampleConfig = DEFAULT_SAMPLES) -> VerificationReport:
    """Zeroth and first y-derivatives at y = 0 of (presentation - model), per coefficient."""
    ys, xs = pres.ys, pres.xs
    if tuple(model.xs) != tuple(xs) or len(model.etas) != len(ys):
        raise ValueError("model and presentation live on different leaf charts")
    rename = {symbol(e): symbol(y) for e, y in zip(model.etas, ys)}
    md = model.data()
    e2y = dict(zip(model.etas, ys))
    pairs = {}
    for y in ys:
        for x in xs:
            pairs[f"A[{y},{x}]"] = (pres.entry("A", (y, x)), md.split.coeff(_inv(e2y, y), x))
    for a, b in combinations(ys, 2):
        pairs[f"B[{a},{b}]"] = (pres.entry("B", (a, b)), md.pi[(_inv(e2y, a), _inv(e2y, b))])
    for u, v in combinations(xs, 2):
        pairs[f"alpha[{u},{v}]"] = (pres.entry("alpha", (u, v)), md.sigma[(u, v)])
    zero = {symbol(y): 0 for y in ys}
    exprs = {}
    for label, (c, m) in pairs.items():
        diff = as_expr(c) - as_expr(m).subs(rename)
        exprs[f"{label}|y=0"] = diff.subs(zero)
        for y in ys:
            exprs[f"d{label}/d{y}|y=0"] = differentiate(diff, y).subs(zero)
    rep = VerificationReport()
    rep.add(zero_check("taylor_order_1", "linear-approximation", exprs, cfg))
    return rep


def _inv(m: Mapping[str, str], y: str) -> str:
    return next(k for k, v in m.items() if v == y)


# --------------------------------------------------------------------------
# locally reducible normal form


def _probe_points(L: DiracFrame, cfg: SampleConfig) -> list[dict]:
    """Sample points plus copies with one coordinate zeroed and the origin;
    rank jumps tend to sit on coordinate hyperplanes."""
    pts = L.points(cfg)
    extra = [{c: Fraction(0) for c in L.chart.coords}]
    for p in pts[:4]:
        for c in L.chart.coords:
            q = dict(p)
            q[c] = Fraction(0)
            extra.append(q)
    return pts + [p for p in extra if not L.is_singular_at(p)]


def reducible_normal_form_check(L: DiracFrame, cfg: SampleConfig = DEFAULT_SAMPLES) -> VerificationReport:
    """Constant rank of K = L n TM, coordinate spanning of K, and invariance of L
    along the coordinates spanning K."""
    rep = VerificationReport()
    try:
        pts = _probe_points(L, cfg)
    except SamplingExhausted:
        rep.add(CheckRecord("kernel_rank", "kernel-constant-rank", UNKNOWN, details={"reason": "no regular points"}))
        return rep
    ranks, kernels = [], []
    for p in pts:
        cd = characteristic_data_at(L, p)
        ranks.append(len(cd.kernel))
        kernels.append(cd.kernel)
    distinct = sorted(set(ranks))
    if len(distinct) > 1:
        wit = [Witness(pts[ranks.index(r)], {"rank K": r}) for r in distinct]
        rep.add(CheckRecord("kernel_rank", "kernel-constant-rank", FAIL, wit,
                            {"verdict": "not locally reducible", "ranks": distinct}))
        return rep
    k = distinct[0]
    rep.add(CheckRecord("kernel_rank", "kernel-constant-rank", PASS, details={"rank": k}))
    n = L.chart.n
    zs = None
    for K in kernels:
        cols = [c for c in range(n) if any(r[c] != 0 for r in K)]
        spanned = len(cols) == k and linalg.same_row_space(K, [[int(j == c) for j in range(n)] for c in cols]) if k else True
        if not spanned or (zs is not None and cols != zs):
            rep.add(CheckRecord("kernel_coordinates", "kernel-coordinate-spanned", UNKNOWN,
                                details={"reason": "K is not spanned by coordinate fields"}))
            return rep
        zs = cols
    znames = [L.chart.coords[c] for c in zs or []]
    rep.add(CheckRecord("kernel_coordinates", "kernel-coordinate-spanned", PASS, details={"z": znames}))
    exprs = {}
    for z in znames:
        for i, s in enumerate(L.sections):
            ds = s.map(lambda e: differentiate(e, z))
            for j, t in enumerate(L.sections):
                exprs[f"g(d{z} l{i},l{j})"] = g(ds, t)
    rep.add(zero_check("z_invariance", "z-invariance", exprs, cfg, {"z": znames}))
    return rep
