"""dirac-verify: run verification suites on a block-structured input file."""
from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from fractions import Fraction
from itertools import combinations

from .courant import check_courant_axioms, check_dirac
from .coupling import check_integrability, extract_geometric_data, is_coupling, normal_distribution
from .dsl import InputError, as_frame, load, render_geometric_data
from .expr import SamplingExhausted, SingularPointError, symbol
from .leafline import LeafConditionError, check_linear_approximation, dw_coefficients, linear_model
from .report import EXIT_CODES, INVALID, CheckRecord, VerificationReport
from .submanifold import (
    NormalizedSubmanifold,
    a_n_spanning_set,
    cosymplectic_verdicts,
    induced_structure,
    second_fundamental_form,
)

FORMAT_VERSION = 1
COMMANDS = ("verify", "coupling", "linearize", "submanifold", "axioms")


def _axioms(L, cfg) -> VerificationReport:
    return check_courant_axioms(L.sections[:3], f=symbol(L.chart.coords[0]), cfg=cfg)


def cmd_verify(problem, name, kind, obj, cfg):
    L = as_frame(kind, obj)
    rep = check_dirac(L, cfg)
    return rep.extend(_axioms(L, cfg), prefix="axioms.")


def cmd_axioms(problem, name, kind, obj, cfg):
    return _axioms(as_frame(kind, obj), cfg)


def cmd_coupling(problem, name, kind, obj, cfg):
    if not problem.chart.leaf:
        raise InputError("coupling needs leaf coordinates in the chart")
    L = as_frame(kind, obj)
    rep = VerificationReport()
    rep.extend(normal_distribution(L, cfg))
    cp = is_coupling(L, cfg)
    rep.extend(cp)
    if not cp.passed:
        return rep
    data = obj if kind == "geometric_data" else extract_geometric_data(L, cfg, checked=True)
    rep.data["geometric_data"] = data.tables()
    rep.extend(check_integrability(data, "data", cfg=cfg), prefix="integrability.")
    if kind in ("poisson", "presymplectic"):
        rep.extend(check_integrability(obj, kind, data.split, cfg=cfg), prefix=f"{kind}.")
    return rep


def cmd_linearize(problem, name, kind, obj, cfg):
    source = obj if kind == "geometric_data" else as_frame(kind, obj)
    try:
        pres = dw_coefficients(source, cfg)
    except LeafConditionError as exc:
        rep = VerificationReport()
        rep.add(CheckRecord("leaf", "vanishing-on-leaf", INVALID, details={"reason": str(exc)}))
        return rep
    rep = VerificationReport()
    rep.extend(pres.report, prefix="leaf.")
    model = linear_model(pres)
    rep.extend(check_linear_approximation(pres, model, cfg))
    rep.extend(check_integrability(model.data(), "data", cfg=cfg), prefix="model.")
    rep.data["model_block"] = render_geometric_data(f"{name}_linear", model.data())
    return rep


def cmd_submanifold(problem, name, kind, obj, cfg):
    if not problem.submanifolds:
        raise InputError("submanifold command needs a submanifold block")
    zero = next(iter(problem.submanifolds.values()))
    L = as_frame(kind, obj)
    N = NormalizedSubmanifold(problem.chart, zero)
    rep = VerificationReport()
    frame, ind = induced_structure(L, N, cfg)
    rep.extend(ind)
    if frame is not None:
        rep.data["induced_frame"] = [repr(s) for s in frame.sections]
        span = a_n_spanning_set(L, N)
        B = {}
        for i, j in combinations(range(len(span)), 2):
            sff = second_fundamental_form(L, N, span[i], span[j], cfg)
            rep.extend(sff.report, prefix=f"B[{i},{j}].")
            B[f"s{i},s{j}"] = sff.gauss
        rep.data["A_N"] = [[str(c) for c in v] for v in span]
        rep.data["B"] = B
    rep.extend(cosymplectic_verdicts(L, N, cfg), prefix="verdicts.")
    return rep


HANDLERS = {
    "verify": cmd_verify,
    "coupling": cmd_coupling,
    "linearize": cmd_linearize,
    "submanifold": cmd_submanifold,
    "axioms": cmd_axioms,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dirac-verify", description=__doc__)
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("input", help="block-structured input file ('-' for stdin)")
    ap.add_argument("--structure", help="structure block to use (default: the first)")
    ap.add_argument("--samples", type=int)
    ap.add_argument("--seed", type=int)
    ap.add_argument("--tol", type=float)
    ap.add_argument("--box", type=Fraction)
    ap.add_argument("--format", choices=("json", "text"), default="text")
    ap.add_argument("--exact-only", action="store_true", help="reject sin/cos/exp coefficients")
    return ap


def _emit(payload: dict, fmt: str, report: VerificationReport | None, out):
    if fmt == "json":
        out.write(json.dumps(payload, sort_keys=True, indent=2, ensure_ascii=False) + "\n")
        return
    out.write(f"{payload['command']} {payload.get('structure') or ''}".rstrip() + "\n")
    if report is not None:
        out.write(report.render_text() + "\n")
        block = report.data.get("model_block")
        if block:
            out.write(block)
    else:
        out.write(f"error: {payload['error']}\noverall: {INVALID}\n")


def run(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    payload = {"format": FORMAT_VERSION, "command": args.command}
    try:
        text = sys.stdin.read() if args.input == "-" else open(args.input, encoding="utf-8").read()
        problem = load(text, exact_only=args.exact_only)
        overrides = {k: v for k, v in (("count", args.samples), ("seed", args.seed), ("tol", args.tol), ("box", args.box))
                     if v is not None}
        cfg = dataclasses.replace(problem.samples, **overrides)
        name, (kind, obj) = problem.structure(args.structure)
        payload["structure"] = name
        report = HANDLERS[args.command](problem, name, kind, obj, cfg)
    except (InputError, OSError, ValueError, SingularPointError, SamplingExhausted) as exc:
        payload.update(status=INVALID, error=str(exc))
        _emit(payload, args.format, None, out)
        return EXIT_CODES[INVALID]
    payload.update(report.to_json())
    _emit(payload, args.format, report, out)
    return EXIT_CODES[report.status]


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
