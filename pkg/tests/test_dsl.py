from fractions import Fraction

import pytest
import sympy

from dirac_coupling.cartan import Form, Multivector
from dirac_coupling.coupling import GeometricData
from dirac_coupling.courant import DiracFrame
from dirac_coupling.dsl import InputError, as_frame, load, parse_blocks, render_geometric_data

BASIC = """
# comment line
chart { coords = [x, y, z] }
structure "P" {
    kind = poisson
    [x, y] = z        # trailing comment
    [y, z] = "x"
}
structure "T" {
    kind = presymplectic
    [x, y] = 1
}
submanifold "N" { zero = [z] }
metric { [z, z] = "1 + x^2" }
samples { count = 4 seed = 9 box = 1/2 tol = 1e-6 }
"""


def test_load_basic():
    pr = load(BASIC)
    assert pr.chart.coords == ("x", "y", "z")
    kind, P = pr.structures["P"]
    assert kind == "poisson" and isinstance(P, Multivector)
    assert P[(0, 1)] == sympy.Symbol("z") and P[(1, 2)] == sympy.Symbol("x")
    assert isinstance(pr.structures["T"][1], Form)
    assert pr.submanifolds == {"N": ("z",)}
    assert pr.metric[2, 2] == 1 + sympy.Symbol("x") ** 2 and pr.metric[0, 0] == 1
    assert pr.samples.count == 4 and pr.samples.box == Fraction(1, 2) and pr.samples.tol == 1e-6
    assert pr.structure()[0] == "P" and pr.structure("T")[0] == "T"
    with pytest.raises(InputError):
        pr.structure("missing")


def test_frame_and_data_kinds():
    text = """
    chart { coords = [x1, y1] leaf = [y1] }
    structure { kind = frame
        section = (1, 0 | 0, 0)
        section = (0, 0 | 0, 1) }
    structure "D" { kind = geometric_data  A[y1, x1] = y1 }
    """
    pr = load(text)
    name, (kind, L) = pr.structure()
    assert name == "L1" and kind == "frame" and isinstance(L, DiracFrame)
    kind, D = pr.structures["D"]
    assert isinstance(D, GeometricData) and D.split.coeff("y1", "x1") == sympy.Symbol("y1")
    assert isinstance(as_frame(kind, D), DiracFrame)


@pytest.mark.parametrize("text, fragment", [
    ("structure { kind = poisson }", "chart"),
    ("chart { coords = [x] leaf = [z9] }", "not declared in coords"),
    ("chart { coords = [x, y] } structure { kind = magic }", "unknown structure kind"),
    ("chart { coords = [x, y] } structure { kind = poisson [x, w] = 1 }", "not a declared coordinate"),
    ("chart { coords = [x, y] } structure { kind = poisson [x, y] = \"x +\" }", "line 1"),
    ("chart { coords = [x, y] } structure { kind = frame section = (1, 0 | 0) section = (0,1|0,0) }", "components"),
    ("chart { coords = [x, y] } structure { kind = frame section = (1, 0, 0, 1) }", "'|'"),
    ("chart { coords = [x, y] } structure { kind = geometric_data }", "leaf"),
    ("chart { coords = [x, y] leaf = [y] } structure { kind = geometric_data A[x, y] = 1 }", "A[leaf, transverse]"),
    ("chart { coords = [x, y] } samples { count = -1 }", "positive"),
    ("chart { coords = [x, y] } samples { colour = 3 }", "unknown samples setting"),
    ("chart { coords = [x, y] } submanifold { zero = x }", "zero = [...]"),
    ("chart { coords = [x, y] } widget { }", "unknown block"),
    ("chart { coords = [x, y] } chart { coords = [x] }", "exactly one chart"),
])
def test_load_errors(text, fragment):
    with pytest.raises(InputError) as info:
        load(text)
    assert fragment in str(info.value)


def test_exact_only():
    text = 'chart { coords = [x, y] } structure { kind = poisson [x, y] = "sin(x)" }'
    assert load(text).structures
    with pytest.raises(InputError, match="exact-only"):
        load(text, exact_only=True)


def test_block_lines_and_groups():
    blocks = parse_blocks('chart { coords = [a, b] }\n\nstructure "S" {\n  k = (1 | 2)\n}\n')
    assert [b.kind for b in blocks] == ["chart", "structure"]
    assert blocks[1].name == "S" and blocks[1].line == 3
    assert blocks[1].entries[0].line == 4


def test_render_round_trip():
    text = """
    chart { coords = [x1, x2, y1, y2] leaf = [y1, y2] }
    structure "D" { kind = geometric_data
        A[y1, x1] = "y1*x2"
        sigma[x1, x2] = "1 + x1^2"
        pi[y1, y2] = "y1/2" }
    """
    D = load(text).structures["D"][1]
    again = load(render_geometric_data("D", D)).structures["D"][1]
    assert D.tables() == again.tables()
