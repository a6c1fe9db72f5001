"""Named example structures used by the tests and the CLI smoke runs."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .cartan import Chart, Form, FrameSplit, Multivector, bivector, interior, two_form
from .courant import DiracFrame, Section, graph_of
from .coupling import GeometricData
from .expr import parse_expr


def _E(s):
    return parse_expr(s) if isinstance(s, str) else s


R2 = Chart(("x", "y"))
R3 = Chart(("x1", "x2", "x3"))
R4 = Chart(("x1", "x2", "x3", "x4"))
BLOCK = Chart(("x1", "x2", "y1", "y2"), ("y1", "y2"))


@dataclass(frozen=True)
class Fixture:
    name: str
    build: Callable[[], object]
    dirac: bool  # expected verdict of check_dirac on its graph/frame

    def frame(self) -> DiracFrame:
        obj = self.build()
        if isinstance(obj, DiracFrame):
            return obj
        if isinstance(obj, GeometricData):
            from .coupling import reconstruct
            return reconstruct(obj)
        return graph_of(obj)


def symplectic_plane() -> Form:
    return two_form(R2, {("x", "y"): 1})


def constant_poisson() -> Multivector:
    return bivector(R4, {("x1", "x2"): 1, ("x3", "x4"): 1})


def so3_dual(chart: Chart = R3) -> Multivector:
    a, b, c = chart.coords
    return bivector(chart, {(a, b): _E(c), (b, c): _E(a), (c, a): _E(b)})


def non_jacobi() -> Multivector:
    return bivector(R4, {("x1", "x2"): 1, ("x3", "x4"): _E("x1")})


def block_tau() -> Form:
    return two_form(BLOCK, {("x1", "x2"): 1, ("y1", "y2"): 1})


def block_poisson() -> Multivector:
    return bivector(BLOCK, {("x1", "x2"): 1, ("y1", "y2"): 1})


def x2_form() -> Form:
    return two_form(R3, {("x1", "x2"): _E("x2")})


def not_closed() -> Form:
    return two_form(R3, {("x1", "x2"): _E("x3")})


def x3_poisson() -> Multivector:
    return bivector(R3, {("x1", "x2"): _E("x3")})


def geometric_data(sigma="1+x1^2", pi="1+y1^2", A=None) -> GeometricData:
    return GeometricData.of(BLOCK, {k: _E(v) for k, v in (A or {}).items()},
                            {("x1", "x2"): _E(sigma)}, {("y1", "y2"): _E(pi)})


def almost_coupling_frame(A: dict, sigma, leaf: Callable[[FrameSplit], list[Section]],
                          chart: Chart = BLOCK) -> tuple[DiracFrame, FrameSplit]:
    """Frame (X_u, i(X_u)sigma) for horizontal lifts X_u, followed by leaf sections."""
    split = FrameSplit(chart, {k: _E(v) for k, v in A.items()})
    sg = two_form(chart, {k: _E(v) for k, v in sigma.items()})
    secs = [Section(split.horizontal(x), interior(split.horizontal(x), sg)) for x in chart.transverse]
    secs += leaf(split)
    return DiracFrame(chart, tuple(secs), "frame"), split


def _mixed_leaf(split: FrameSplit) -> list[Section]:
    ch = split.chart
    zero_v, zero_f = Multivector(ch, 1, {}), Form(ch, 1, {})
    return [Section(split.leaf_vector("y1"), zero_f), Section(zero_v, split.lam("y2"))]


def _twisted_leaf(split: FrameSplit) -> list[Section]:
    return [Section(split.leaf_vector("y1"), split.lam("y2").scale(_E("x1"))),
            Section(split.leaf_vector("y2"), split.lam("y1").scale(_E("-x1")))]


def _presymplectic_leaf(rho: str):
    def leaf(split: FrameSplit) -> list[Section]:
        t = two_form(split.chart, {("y1", "y2"): _E(rho), ("y2", "y3"): 1})
        return [Section(split.leaf_vector(y), interior(split.leaf_vector(y), t)) for y in split.chart.leaf]
    return leaf


LEAF3 = Chart(("x1", "y1", "y2", "y3"), ("y1", "y2", "y3"))

# (name, A, sigma, leaf, chart, expected check_dirac verdict)
ALMOST_COUPLING = [
    ("scaled_sigma", {}, {("x1", "x2"): "1+x1^2"}, _mixed_leaf, BLOCK, True),
    ("connection_x2", {("y1", "x1"): "x2"}, {("x1", "x2"): "1"}, _mixed_leaf, BLOCK, True),
    ("connection_y2", {("y2", "x1"): "x2"}, {("x1", "x2"): "1"}, _mixed_leaf, BLOCK, False),
    ("sigma_y2", {}, {("x1", "x2"): "y2"}, _mixed_leaf, BLOCK, True),
    ("sigma_y1", {}, {("x1", "x2"): "y1"}, _mixed_leaf, BLOCK, False),
    ("twisted_leaf", {}, {("x1", "x2"): "1"}, _twisted_leaf, BLOCK, False),
    ("leaf_closed", {}, {}, _presymplectic_leaf("y1"), LEAF3, True),
    ("leaf_not_closed", {}, {}, _presymplectic_leaf("y3"), LEAF3, False),
]


def almost_coupling_catalog():
    for name, A, sigma, leaf, chart, ok in ALMOST_COUPLING:
        L, split = almost_coupling_frame(A, sigma, leaf, chart)
        yield name, L, split, ok


CATALOG = {
    f.name: f
    for f in [
        Fixture("symplectic_plane", symplectic_plane, True),
        Fixture("constant_poisson", constant_poisson, True),
        Fixture("so3_dual", so3_dual, True),
        Fixture("non_jacobi", non_jacobi, False),
        Fixture("block_tau", block_tau, True),
        Fixture("block_poisson", block_poisson, True),
        Fixture("x2_form", x2_form, True),
        Fixture("not_closed", not_closed, False),
        Fixture("x3_poisson", x3_poisson, True),
        Fixture("geometric_data", geometric_data, True),
    ]
}
