from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from dirac_coupling import catalog as cat
from dirac_coupling.cartan import apply_vector, bivector, coordinate_form, one_form, two_form
from dirac_coupling.courant import Section, graph_of
from dirac_coupling.expr import normalize
from dirac_coupling.submanifold import (
    Metric,
    NormalizedSubmanifold,
    a_n_spanning_set,
    bracket_A,
    connection_residuals,
    contravariant_derivative,
    cosymplectic_verdicts,
    gauss_split,
    induced_structure,
    kernel_and_properness,
    restrict_at_point,
    second_fundamental_form,
)

R3 = cat.R3
x1, x2, x3 = R3.symbols
PLANE = NormalizedSubmanifold(R3, ("x3",))


def same(s1, s2):
    return all(normalize(a - b) == 0 for a, b in zip(s1.entries(), s2.entries()))


def test_submanifold_basics():
    assert PLANE.tangent == ("x1", "x2") and PLANE.dim == 2
    assert PLANE.restrict(x1 + x3 * x2) == x1
    assert PLANE.contains({"x1": 3, "x2": 1, "x3": 0})
    assert PLANE.columns() == ([0, 1], [2], [3, 4], [5])
    with pytest.raises(ValueError):
        NormalizedSubmanifold(R3, ())
    with pytest.raises(KeyError):
        NormalizedSubmanifold(R3, ("w",))
    s = Section.of(R3, {"x1": x3 + 1, "x3": 1}, {"x2": x1, "x3": 5})
    t = PLANE.to_n(s)
    assert t.chart.coords == ("x1", "x2") and t.vector.component("x1") == 1 and t.form.component("x2") == x1


def test_x3_poisson_on_plane():
    L = graph_of(cat.x3_poisson())
    rep = kernel_and_properness(L, PLANE)
    assert rep.passed and set(rep.data["dim_K"]) == {0}
    frame, ind = induced_structure(L, PLANE)
    assert frame is not None and ind.passed
    assert a_n_spanning_set(L, PLANE) == [[1, 0, 0], [0, 1, 0], [0, 0, 1]]
    br = bracket_A(L, PLANE, [1, 0, 0], [0, 1, 0])
    assert br.report.passed
    assert same(br.value, Section.of(R3, form={"x3": 1}))
    sff = second_fundamental_form(L, PLANE, [1, 0, 0], [0, 1, 0])
    assert sff.gauss == {"x3": 1} == sff.direct and sff.poisson == {"x3": -1}
    verdicts = cosymplectic_verdicts(L, PLANE)
    assert verdicts["cosymplectic"].status == "fail" and verdicts["totally_dirac"].status == "fail"


def test_lie_poisson_plane_is_not_proper():
    rep = kernel_and_properness(graph_of(cat.so3_dual()), PLANE)
    assert rep["properly_normalized"].status == "fail"
    rec = rep["poisson_kernel"]
    assert rec.status == "fail" and rec.witnesses
    _, ind = induced_structure(graph_of(cat.so3_dual()), PLANE)
    assert ind["induced_frame"].status == "invalid"


def test_cosymplectic_block():
    P = bivector(cat.R4, {("x1", "x2"): 1, ("x3", "x4"): 1})
    N = NormalizedSubmanifold(cat.R4, ("x3", "x4"))
    assert cosymplectic_verdicts(graph_of(P), N).passed


def test_symplectic_line_restrictions():
    L = graph_of(two_form(cat.R2, {("x", "y"): 1}))
    N = NormalizedSubmanifold(cat.R2, ("y",))
    p = {"x": Fraction(1, 3), "y": Fraction(0)}
    back = restrict_at_point(L, N, p, "pullback")
    fwd = restrict_at_point(L, N, p, "pushforward")
    assert back.rows == ((1, 0),) and fwd.rows == ((0, 1),)
    assert back.is_maximal_isotropic() and fwd.is_maximal_isotropic()
    rep = kernel_and_properness(L, N)
    assert set(rep.data["dim_K"]) == {1}
    with pytest.raises(ValueError):
        restrict_at_point(L, N, p, "sideways")


COEFFS = [0, 1, -1, x1, x2, x3, x1 * x3, x2 - x3]


@settings(max_examples=20, deadline=None)
@given(st.lists(st.sampled_from(COEFFS), min_size=3, max_size=3),
       st.tuples(st.fractions(-2, 2, max_denominator=5), st.fractions(-2, 2, max_denominator=5)),
       st.booleans())
def test_restrictions_are_maximal_isotropic(cs, pt, form):
    keys = [("x1", "x2"), ("x1", "x3"), ("x2", "x3")]
    obj = (two_form if form else bivector)(R3, dict(zip(keys, cs)))
    L = graph_of(obj)
    p = {"x1": pt[0], "x2": pt[1], "x3": Fraction(0)}
    for direction in ("pullback", "pushforward"):
        sub = restrict_at_point(L, PLANE, p, direction)
        assert sub.n == 2 and sub.is_maximal_isotropic()


def test_bracket_leibniz_on_block():
    P = bivector(cat.R4, {("x1", "x2"): 1 + x1**2, ("x3", "x4"): 1})
    L = graph_of(P)
    N = NormalizedSubmanifold(cat.R4, ("x3", "x4"))
    span = a_n_spanning_set(L, N)
    assert len(span) == 2
    f = x2 * x1
    c1, c2 = span
    base = bracket_A(L, N, c1, c2).value
    scaled = bracket_A(L, N, c1, [f * c for c in c2]).value
    s1 = sum((L.sections[i].scale(c) for i, c in enumerate(c1) if c), Section.zero(cat.R4))
    s2 = sum((L.sections[i].scale(c) for i, c in enumerate(c2) if c), Section.zero(cat.R4))
    rhs = base.scale(f) + N.restrict_section(s2).scale(N.restrict(apply_vector(s1.vector, f)))
    assert same(scaled, N.restrict_section(rhs))


def test_bracket_rejects_normal_sections():
    L = graph_of(cat.so3_dual())
    with pytest.raises(ValueError):
        bracket_A(L, PLANE, [1, 0, 0], [0, 0, 1])
    with pytest.raises(ValueError):
        bracket_A(L, PLANE, [1, 0], [0, 1, 0])


# metrics and the contravariant derivative


def test_metric_validation():
    with pytest.raises(ValueError):
        Metric(R3, sympy.Matrix([[1, 1, 0], [0, 1, 0], [0, 0, 1]]))
    with pytest.raises(ValueError):
        Metric(R3, sympy.eye(2))
    m = Metric(R3, sympy.diag(1, 2, 1 + x1**2))
    assert normalize(m.co(coordinate_form(R3, "x2"), coordinate_form(R3, "x2")) - sympy.Rational(1, 2)) == 0
    assert not m.degenerate_at({"x1": 0, "x2": 0, "x3": 0})
    assert Metric(R3, sympy.diag(1, 1, x1)).degenerate_at({"x1": 0, "x2": 1, "x3": 1})


def test_contravariant_derivative_example():
    D = contravariant_derivative(cat.x3_poisson(), Metric.euclidean(R3),
                                 coordinate_form(R3, "x1"), coordinate_form(R3, "x2"))
    assert D.component("x3") == sympy.Rational(1, 2)
    assert D.component("x1") == 0 and D.component("x2") == 0


METRICS = [sympy.eye(3), sympy.diag(1, 2, 3), sympy.Matrix([[2, 1, 0], [1, 2, 0], [0, 0, 1 + x3**2]])]


@settings(max_examples=10, deadline=None)
@given(st.lists(st.sampled_from(COEFFS), min_size=3, max_size=3), st.sampled_from(range(3)))
def test_contravariant_connection_is_levi_civita(cs, mi):
    P = bivector(R3, dict(zip([("x1", "x2"), ("x1", "x3"), ("x2", "x3")], cs)))
    compat, torsion = connection_residuals(P, Metric(R3, METRICS[mi]))
    assert all(normalize(v) == 0 for v in compat.values())
    assert all(normalize(v) == 0 for v in torsion.values())


def test_gauss_split_example():
    gs = gauss_split(cat.x3_poisson(), Metric.euclidean(R3), PLANE,
                     coordinate_form(R3, "x1"), coordinate_form(R3, "x2"))
    assert gs.report.passed
    assert same(Section(Section.zero(R3).vector, gs.psi), Section.of(R3, form={"x3": sympy.Rational(1, 2)}))
    assert same(Section(Section.zero(R3).vector, gs.psi_swapped), Section.of(R3, form={"x3": -sympy.Rational(1, 2)}))


def test_gauss_split_needs_orthogonal_normal():
    m = Metric(R3, sympy.Matrix([[1, 0, 1], [0, 1, 0], [1, 0, 3]]))
    gs = gauss_split(cat.x3_poisson(), m, PLANE, coordinate_form(R3, "x1"), one_form(R3, {"x2": 1}))
    assert gs.report["normal_orthogonal"].status == "fail"
    assert gs.report.status in ("fail", "invalid")
