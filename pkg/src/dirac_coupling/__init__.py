"""Symbolic checks for Dirac structures, coupling data and their leafwise and
submanifold constructions on a single coordinate chart."""
from .expr import DEFAULT_SAMPLES, SampleConfig, parse_expr
from .cartan import Chart, FrameSplit, bivector, one_form, two_form, vector_field
from .courant import DiracFrame, Section, check_dirac, courant_bracket, graph_of, pairing
from .report import VerificationReport

__all__ = [
    "Chart",
    "DEFAULT_SAMPLES",
    "DiracFrame",
    "FrameSplit",
    "SampleConfig",
    "Section",
    "VerificationReport",
    "bivector",
    "check_dirac",
    "courant_bracket",
    "graph_of",
    "one_form",
    "pairing",
    "parse_expr",
    "two_form",
    "vector_field",
]
