import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

import fd_oracle as fd
from dirac_coupling.cartan import (
    Chart,
    Form,
    FrameSplit,
    Multivector,
    bigraded_d,
    bivector,
    coordinate_form,
    coordinate_vector,
    ext_d,
    interior,
    jacobiator,
    lie_bracket,
    lie_derivative,
    one_form,
    schouten_bracket,
    sharp,
    two_form,
    vector_field,
    wedge,
)
from dirac_coupling.expr import normalize

R3 = Chart(("x", "y", "z"))
x, y, z = R3.symbols


def zero(t):
    return all(normalize(v) == 0 for v in t.comps.values())


@st.composite
def poly(draw):
    e = sympy.Integer(0)
    for _ in range(draw(st.integers(1, 3))):
        mono = sympy.Integer(draw(st.integers(-3, 3)))
        for s in draw(st.lists(st.sampled_from([x, y, z]), max_size=2)):
            mono *= s
        e += mono
    return e


def fields(draw_kind, degree):
    keys = {1: [(0,), (1,), (2,)], 2: [(0, 1), (0, 2), (1, 2)], 3: [(0, 1, 2)]}[degree]
    return st.lists(poly(), min_size=len(keys), max_size=len(keys)).map(
        lambda cs: draw_kind(R3, degree, dict(zip(keys, cs))))


vectors = fields(Multivector, 1)
forms1 = fields(Form, 1)
forms2 = fields(Form, 2)
bivectors = fields(Multivector, 2)

# conventions


def test_wedge_is_determinant():
    dx, dy = coordinate_form(R3, "x"), coordinate_form(R3, "y")
    X, Y = coordinate_vector(R3, "x"), coordinate_vector(R3, "y")
    w = wedge(dx, dy)
    assert w(X, Y) == 1 and w(Y, X) == -1
    assert w.component("x", "y") == 1 and w.component("y", "x") == -1


def test_interior_first_slot():
    w = two_form(R3, {("x", "y"): z})
    X = coordinate_vector(R3, "x")
    assert zero(interior(X, w) - one_form(R3, {"y": z}))
    P = bivector(R3, {("x", "y"): 1})
    a = coordinate_form(R3, "x")
    # i(a)(X ^ Y) = a(X) Y - a(Y) X
    assert zero(sharp(P, a) - vector_field(R3, {"y": 1}))
    assert zero(sharp(P, coordinate_form(R3, "y")) - vector_field(R3, {"x": -1}))


def test_component_antisymmetry():
    w = two_form(R3, {("y", "x"): 3})
    assert w.component("x", "y") == -3
    with pytest.raises(ValueError):
        Chart(("x", "x"))
    with pytest.raises(ValueError):
        Chart(("x", "y"), leaf=("w",))


def test_schouten_normalisation_on_so3():
    P = bivector(R3, {("x", "y"): z, ("y", "z"): x, ("z", "x"): y})
    assert zero(schouten_bracket(P, P))
    R = bivector(R3, {("x", "y"): x * z, ("y", "z"): y})
    # {{x,y},z} + {{y,z},x} + {{z,x},y} = {xz, z} + {y, x} + 0 = -xz
    assert normalize(jacobiator(R)[(0, 1, 2)] + x * z) == 0
    assert normalize(schouten_bracket(R, R)[(0, 1, 2)] + 2 * x * z) == 0


def poisson(P, f, g):
    return sum(P[(i, j)] * sympy.diff(f, a) * sympy.diff(g, b)
               for i, a in enumerate(R3.symbols) for j, b in enumerate(R3.symbols))


@settings(max_examples=15, deadline=None)
@given(bivectors)
def test_jacobiator_is_cyclic_sum(P):
    ref = poisson(P, poisson(P, x, y), z) + poisson(P, poisson(P, y, z), x) + poisson(P, poisson(P, z, x), y)
    assert normalize(jacobiator(P)[(0, 1, 2)] - ref) == 0


# identities


@settings(max_examples=25, deadline=None)
@given(forms1)
def test_d_squared_zero(w):
    assert zero(ext_d(ext_d(w)))


@settings(max_examples=25, deadline=None)
@given(vectors, forms2)
def test_cartan_formula(X, w):
    lhs = lie_derivative(X, w)
    rhs = interior(X, ext_d(w)) + ext_d(interior(X, w))
    assert zero(lhs - rhs)


@settings(max_examples=20, deadline=None)
@given(vectors, vectors, forms1)
def test_lie_commutes_with_interior(X, Y, w):
    lhs = lie_derivative(X, interior(Y, w)) - interior(Y, lie_derivative(X, w))
    assert zero(lhs - interior(lie_bracket(X, Y), w))


@settings(max_examples=20, deadline=None)
@given(vectors, vectors, vectors)
def test_lie_bracket_jacobi(X, Y, Z):
    J = lie_bracket(X, lie_bracket(Y, Z)) + lie_bracket(Y, lie_bracket(Z, X)) + lie_bracket(Z, lie_bracket(X, Y))
    assert zero(J)
    assert zero(lie_bracket(X, Y) + lie_bracket(Y, X))


@settings(max_examples=20, deadline=None)
@given(forms1, forms1)
def test_d_leibniz(a, b):
    lhs = ext_d(wedge(a, b))
    rhs = wedge(ext_d(a), b) - wedge(a, ext_d(b))
    assert zero(lhs - rhs)


# numeric oracle


PTS = fd.points(R3.coords, count=4, seed=11)


@settings(max_examples=10, deadline=None)
@given(vectors, vectors)
def test_lie_bracket_oracle(X, Y):
    br = lie_bracket(X, Y)
    for p in PTS:
        assert not fd.mismatches(fd.symbolic_at(br, p), fd.lie_bracket(X, Y, p))


@settings(max_examples=10, deadline=None)
@given(forms2)
def test_ext_d_oracle(w):
    dw = ext_d(w)
    for p in PTS:
        assert not fd.mismatches(fd.symbolic_at(dw, p), fd.ext_d(w, p))


@settings(max_examples=10, deadline=None)
@given(vectors, forms2, bivectors)
def test_lie_derivative_oracle(X, w, P):
    lw, lp = lie_derivative(X, w), lie_derivative(X, P)
    for p in PTS:
        assert not fd.mismatches(fd.symbolic_at(lw, p), fd.lie_derivative_form(X, w, p))
        assert not fd.mismatches(fd.symbolic_at(lp, p), fd.lie_derivative_bivector(X, P, p))


@settings(max_examples=10, deadline=None)
@given(bivectors)
def test_jacobiator_oracle(P):
    J = jacobiator(P)
    for p in PTS:
        assert not fd.mismatches(fd.symbolic_at(J, p), fd.half_schouten(P, p))


# bigraded calculus

FOL = Chart(("x1", "x2", "y"), leaf=("y",))
x1, x2, yy = FOL.symbols


def test_frame_split_basics():
    s = FrameSplit(FOL, {("y", "x1"): x2})
    assert zero(s.horizontal("x1") - vector_field(FOL, {"x1": 1, "y": x2}))
    assert zero(s.lam("y") - one_form(FOL, {"y": 1, "x1": -x2}))
    # coframe is dual to frame
    for i, a in enumerate(s.coframe()):
        for j, X in enumerate(s.frame()):
            assert a(X) == int(i == j)
    with pytest.raises(ValueError):
        FrameSplit(FOL, {("x1", "y"): 1})


def test_curvature_term():
    s = FrameSplit(FOL, {("y", "x1"): x2})
    d1, d2, d3 = bigraded_d(s.lam("y"), s)
    # d lambda(X1, X2) = -lambda([X1, X2]) = 1
    assert zero(d1) and zero(d2)
    assert zero(d3 - two_form(FOL, {("x1", "x2"): 1}))
    flat = FrameSplit(FOL, {("y", "x1"): x1})
    assert zero(bigraded_d(flat.lam("y"), flat)[2])


@settings(max_examples=15, deadline=None)
@given(st.lists(st.sampled_from([0, 1, x1, x2, yy, x1 * yy, x2**2]), min_size=5, max_size=5))
def test_bigraded_pieces_sum_to_d(cs):
    s = FrameSplit(FOL, {("y", "x1"): cs[0], ("y", "x2"): cs[1]})
    w = one_form(FOL, {"x1": cs[2], "x2": cs[3], "y": cs[4]})
    parts = s.bigraded_parts(w)
    assert zero(sum(parts.values(), Form(FOL, 1, {})) - w)
    d1, d2, d3 = bigraded_d(w, s)
    assert zero(d1 + d2 + d3 - ext_d(w))
