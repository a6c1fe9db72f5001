import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dirac_coupling import catalog as cat
from dirac_coupling.cartan import FrameSplit, Multivector, bivector, ext_d, schouten_bracket, two_form, wedge
from dirac_coupling.coupling import (
    GeometricData,
    check_integrability,
    decompose_almost_coupling,
    extract_geometric_data,
    is_coupling,
    normal_distribution,
    reconstruct,
)
from dirac_coupling.courant import check_almost_dirac, check_dirac, graph_of
from dirac_coupling.expr import normalize

CH = cat.BLOCK
x1, x2, y1, y2 = CH.symbols
POOL = [0, 1, -2, x1, x2, y1, y2, x1 * y2, y1**2, x2 * y1 + 1]


def zero(t):
    return all(normalize(v) == 0 for v in t.comps.values())


@st.composite
def data(draw):
    A = {(y, x): draw(st.sampled_from(POOL)) for y in CH.leaf for x in CH.transverse}
    s = draw(st.sampled_from(POOL))
    p = draw(st.sampled_from(POOL))
    # keep the reconstructed frame regular: sigma and pi only rescale a nonzero constant
    return GeometricData.of(CH, A, {("x1", "x2"): 1 + s**2}, {("y1", "y2"): 1 + p**2})


def test_geometric_data_validation():
    with pytest.raises(ValueError):
        GeometricData.of(CH, sigma={("x1", "y1"): 1})
    with pytest.raises(ValueError):
        GeometricData.of(CH, pi={("x1", "y1"): 1})
    d = GeometricData.of(CH, {("y1", "x1"): x2}, {("x1", "x2"): 3}, {("y1", "y2"): y1})
    assert d.tables() == {"A": {"y1,x1": x2, "y1,x2": 0, "y2,x1": 0, "y2,x2": 0},
                          "sigma": {"x1,x2": 3}, "pi": {"y1,y2": y1}}


@settings(max_examples=12, deadline=None)
@given(data())
def test_reconstruct_round_trip(d):
    L = reconstruct(d)
    assert check_almost_dirac(L).passed
    assert is_coupling(L).passed
    back = extract_geometric_data(L)
    for kind in ("A", "sigma", "pi"):
        for key, v in d.tables()[kind].items():
            assert normalize(back.tables()[kind][key] - v) == 0


@settings(max_examples=8, deadline=None)
@given(data())
def test_data_conditions_match_closure(d):
    L = reconstruct(d)
    assert check_dirac(L).passed == check_integrability(d, "data").passed


def test_coupling_examples():
    good = graph_of(two_form(CH, {("x1", "x2"): 1, ("y1", "y2"): 1}))
    assert is_coupling(good).passed
    nd = normal_distribution(good)
    assert nd.passed and all(row["dim_H"] == 2 for row in nd.data["dims"])
    # a form blind to the leaves: (d/dy, 0) lies in L n F
    bad = graph_of(two_form(CH, {("x1", "x2"): 1}))
    assert is_coupling(bad)["coupling"].status == "fail"
    with pytest.raises(ValueError):
        extract_geometric_data(bad)
    with pytest.raises(ValueError):
        is_coupling(graph_of(cat.so3_dual()))


def test_integrability_argument_errors():
    d = cat.geometric_data()
    with pytest.raises(TypeError):
        check_integrability(d.sigma, "data")
    with pytest.raises(TypeError):
        check_integrability(d.pi, "poisson")
    with pytest.raises(ValueError):
        check_integrability(d, "nonsense")


def test_mixed_parts_are_invalid():
    split = FrameSplit(CH)
    tau = two_form(CH, {("x1", "y1"): 1, ("x2", "y2"): 1})
    rep = check_integrability(tau, "presymplectic", split)
    assert rep["almost_coupling"].status == "invalid"
    P = bivector(CH, {("x1", "y1"): 1, ("x2", "y2"): 1})
    assert check_integrability(P, "poisson", split)["almost_coupling"].status == "invalid"
    dec = decompose_almost_coupling(graph_of(tau), FrameSplit(CH, {("y1", "x1"): 1}))
    assert dec.report["almost_coupling"].status == "fail"


COEFFS = [0, 1, x1, x2, y1, y2, x1 * y1, y2**2 + 1]


@settings(max_examples=12, deadline=None)
@given(st.lists(st.sampled_from(COEFFS), min_size=4, max_size=4))
def test_presymplectic_conditions_are_closedness(cs):
    split = FrameSplit(CH, {("y1", "x1"): cs[0], ("y2", "x2"): cs[1]})
    lam1, lam2 = split.lam("y1"), split.lam("y2")
    tau = (two_form(CH, {("x1", "x2"): cs[2]}) + wedge(lam1, lam2).scale(cs[3] + 1)).simplify()
    rep = check_integrability(tau, "presymplectic", split)
    assert rep["almost_coupling"].status == "pass"
    assert rep.passed == zero(ext_d(tau))


@settings(max_examples=12, deadline=None)
@given(st.lists(st.sampled_from(COEFFS), min_size=4, max_size=4))
def test_poisson_conditions_are_jacobi(cs):
    split = FrameSplit(CH, {("y1", "x1"): cs[0], ("y2", "x2"): cs[1]})
    X1, X2 = split.horizontal("x1"), split.horizontal("x2")
    P = (wedge(X1, X2).scale(cs[2] + 1) + bivector(CH, {("y1", "y2"): cs[3]})).simplify()
    assert isinstance(P, Multivector)
    rep = check_integrability(P, "poisson", split)
    assert rep["almost_coupling"].status == "pass"
    assert rep.passed == zero(schouten_bracket(P, P))


def test_catalog_geometric_data_passes():
    d = cat.geometric_data()
    assert check_integrability(d, "data").passed
    twisted = GeometricData.of(CH, {("y1", "x1"): x2}, {("x1", "x2"): 1}, {("y1", "y2"): 1})
    rep = check_integrability(twisted, "data")
    # [X1, X2] = -d/dy1 is not matched by d''sigma = 0
    assert rep["condition_iii"].status == "fail"
    assert rep["condition_i"].status == "pass"
