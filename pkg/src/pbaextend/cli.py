"""Command-line front end: ``pba-extend <command> INPUT``.

Documents are JSON with ``"schema": "pba-extend/1"``.  Exact scalars are
written as ``"num/den"`` strings, floats as numbers.  Exit codes: 0 ok or
representable, 1 not representable, 2 input error, 3 method inapplicable,
4 internal error.
"""
from __future__ import annotations

import argparse
import json
import re
import sys
import time
from fractions import Fraction
from itertools import combinations
from typing import Sequence

import numpy as np

from . import errors as E
from .boolean_core import Element, Measure, eps_of, generator_element, measure_from_intersections, restrict
from .extension import (
    ThreeSpec,
    ch_expression_value,
    chi_eta_intervals,
    classify_example32_facets,
    example32_spec,
    extend_bell,
    extend_three,
    extend_tree,
)
from .horn_tarski import PartialFunction, extend_full, is_partial_measure
from .polytope import CorrelationSpec, classical_representable, enumerate_facets, vertices
from .ppt import Pba, Ppt, compatibility_graph, export_dot, merge_cliques, validate_ppt
from .quantum import QuantumState, build_projection_pba, free_state_from_projections, rationalize, span_projector, projector
from .quotient import (
    build_free_ht,
    check_embeddable,
    check_property_G,
    enumerate_homomorphisms,
    ideal_relation,
    verify_empirical_quotient,
)
from .scalars import format_scalar, is_exact, to_scalar

SCHEMA = "pba-extend/1"

EXIT_OK, EXIT_NOT_REPRESENTABLE, EXIT_INPUT, EXIT_INAPPLICABLE, EXIT_INTERNAL = 0, 1, 2, 3, 4

INPUT_ERRORS = (
    E.ParseError,
    E.InvalidPba,
    E.InvalidState,
    E.NotAMeasure,
    E.MissingValue,
    E.ArityMismatch,
    E.IndexOutOfRange,
    E.NotAProjection,
    E.DimMismatch,
    E.NotPartialMeasure,
    E.NotAGeneratingSet,
    E.EmptyKeptSet,
    E.InvalidThreeSpec,
    E.ChiEtaOutOfBox,
    E.ValueOutOfBand,
)
INAPPLICABLE_ERRORS = (
    E.MethodInapplicable,
    E.WrongTopology,
    E.NotAForest,
    E.NoRunningIntersectionOrder,
    E.KsPropertyRequired,
    E.LimitExceeded,
    E.PropertyGViolated,
    E.IncompleteStates,
)


# --- parsing ------------------------------------------------------------------------


def load_document(path: str) -> dict:
    try:
        text = sys.stdin.read() if path == "-" else open(path, encoding="utf-8").read()
    except OSError as exc:
        raise E.ParseError(f"cannot read {path}: {exc.strerror}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise E.ParseError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise E.ParseError(f"{path}: top level must be an object")
    if doc.get("schema", SCHEMA) != SCHEMA:
        raise E.ParseError(f"{path}: unsupported schema {doc['schema']!r}, expected {SCHEMA!r}")
    return doc


def _arithmetic(doc: dict, args) -> str:
    mode = args.arithmetic or doc.get("arithmetic", "exact")
    if mode not in ("exact", "float"):
        raise E.ParseError(f"arithmetic must be 'exact' or 'float', got {mode!r}")
    return mode


def _scalar(x, mode: str, where: str):
    try:
        return to_scalar(x, mode)
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise E.ParseError(f"{where}: cannot read {x!r} as a number") from exc


def _names(doc: dict) -> list[str]:
    names = doc.get("generators")
    if not isinstance(names, list) or not names or not all(isinstance(s, str) and s for s in names):
        raise E.ParseError("'generators' must be a nonempty list of names")
    if len(set(names)) != len(names):
        raise E.ParseError("generator names must be distinct")
    return names


def _indices(names: list[str], listed, where: str) -> list[int]:
    if not isinstance(listed, list) or not listed:
        raise E.ParseError(f"{where}: expected a nonempty list of generator names")
    out = []
    for s in listed:
        if s not in names:
            raise E.ParseError(f"{where}: unknown generator {s!r}")
        out.append(names.index(s))
    if len(set(out)) != len(out):
        raise E.ParseError(f"{where}: repeated generator")
    return out


def _parse_measure(entry: dict, names: list[str], mode: str, where: str) -> tuple[tuple, Measure]:
    """Measure of one context; returned over the context's sorted generator order."""
    listed = _indices(names, entry.get("context"), where)
    k = len(listed)
    if "atoms" in entry:
        raw = entry["atoms"]
        if not isinstance(raw, dict):
            raise E.ParseError(f"{where}: 'atoms' must be an object")
        zero = _scalar(0, mode, where)
        w = [zero] * (1 << k)
        for key, v in raw.items():
            if len(key) != k or set(key) - {"0", "1"}:
                raise E.ParseError(f"{where}: atom key {key!r} must be {k} characters of 0/1")
            w[sum(1 << j for j, ch in enumerate(key) if ch == "1")] = _scalar(v, mode, f"{where} atom {key}")
        m = Measure(k, tuple(w))
    elif "intersections" in entry:
        raw = entry["intersections"]
        if not isinstance(raw, dict):
            raise E.ParseError(f"{where}: 'intersections' must be an object")
        vals = {}
        for key, v in raw.items():
            if key.strip() == "1":
                vals[()] = _scalar(v, mode, where)
                continue
            parts = [p.strip() for p in key.split("&")]
            local = []
            for p in parts:
                if p not in names or names.index(p) not in listed:
                    raise E.ParseError(f"{where}: {p!r} is not a generator of this context")
                local.append(listed.index(names.index(p)))
            vals[tuple(sorted(local))] = _scalar(v, mode, f"{where} {key}")
        m = measure_from_intersections(vals, k)
    else:
        raise E.ParseError(f"{where}: give either 'atoms' or 'intersections'")
    order = sorted(range(k), key=lambda j: listed[j])
    return tuple(sorted(listed)), restrict(m, order)


def parse_pba(doc: dict) -> Pba:
    names = _names(doc)
    ctxs = doc.get("contexts")
    if not isinstance(ctxs, list) or not ctxs:
        raise E.ParseError("'contexts' must be a nonempty list of generator-name lists")
    contexts = [tuple(sorted(_indices(names, c, f"contexts[{i}]"))) for i, c in enumerate(ctxs)]
    return Pba(len(names), contexts, tuple(names))


def parse_ppt(doc: dict, mode: str, validate: bool = True) -> Ppt:
    pba = parse_pba(doc)
    entries = doc.get("measures")
    if not isinstance(entries, list):
        raise E.ParseError("'measures' must be a list with one entry per context")
    state = {}
    for i, entry in enumerate(entries):
        if not isinstance(entry, dict):
            raise E.ParseError(f"measures[{i}] must be an object")
        c, m = _parse_measure(entry, list(pba.names), mode, f"measures[{i}]")
        if c not in pba.contexts:
            raise E.InvalidState(f"measures[{i}]: {list(_label(pba, c))} is not one of the listed contexts")
        if c in state:
            raise E.InvalidState(f"measures[{i}]: second measure for context {list(_label(pba, c))}")
        state[c] = m
    missing = [c for c in pba.contexts if c not in state]
    if missing:
        raise E.InvalidState(f"no measure for context {list(_label(pba, missing[0]))}")
    ppt = Ppt(pba, state)
    if validate:
        report = validate_ppt(ppt)
        if not report.ok:
            raise E.InvalidState("; ".join(_named(pba, msg) for msg in report.messages))
    return ppt


def _label(pba: Pba, gens) -> tuple:
    return tuple(pba.label(i) for i in gens)


def _named(pba: Pba, msg: str) -> str:
    return re.sub(r"\(([\d, ]+)\)", lambda m: "(" + ",".join(pba.label(int(x)) for x in m.group(1).split(",") if x.strip()) + ")", msg)


# element expressions: ~ & | ( ) 1 0 and generator names
_TOKEN = re.compile(r"\s*(?:([A-Za-z_][A-Za-z0-9_]*)|(\d+)|(.))")


def parse_expression(text: str, names: Sequence[str]) -> Element:
    k = len(names)
    tokens = []
    for m in _TOKEN.finditer(text):
        name, num, sym = m.groups()
        if name:
            if name not in names:
                raise E.ParseError(f"unknown generator {name!r} in {text!r}")
            tokens.append(("gen", names.index(name)))
        elif num:
            if num not in ("0", "1"):
                raise E.ParseError(f"unexpected number {num!r} in {text!r}")
            tokens.append(("const", int(num)))
        elif sym and not sym.isspace():
            if sym not in "~&|()":
                raise E.ParseError(f"unexpected character {sym!r} in {text!r}")
            tokens.append((sym, None))
    pos = 0

    def peek():
        return tokens[pos][0] if pos < len(tokens) else None

    def take():
        nonlocal pos
        pos += 1
        return tokens[pos - 1]

    def expr():
        e = term()
        while peek() == "|":
            take()
            e = e | term()
        return e

    def term():
        e = factor()
        while peek() == "&":
            take()
            e = e & factor()
        return e

    def factor():
        kind = peek()
        if kind == "~":
            take()
            return ~factor()
        if kind == "(":
            take()
            e = expr()
            if peek() != ")":
                raise E.ParseError(f"missing ')' in {text!r}")
            take()
            return e
        if kind == "gen":
            return generator_element(take()[1], k)
        if kind == "const":
            return Element.one(k) if take()[1] else Element.zero(k)
        raise E.ParseError(f"malformed expression {text!r}")

    if not tokens:
        raise E.ParseError("empty expression")
    e = expr()
    if pos != len(tokens):
        raise E.ParseError(f"trailing input in {text!r}")
    return e


def parse_partial_function(doc: dict, mode: str) -> tuple[PartialFunction, list[str]]:
    names = _names(doc)
    raw = doc.get("values")
    if not isinstance(raw, dict) or not raw:
        raise E.ParseError("'values' must map element expressions to numbers")
    vals = {}
    for key, v in raw.items():
        e = parse_expression(key, names)
        x = _scalar(v, mode, f"values[{key!r}]")
        if e in vals and vals[e] != x:
            raise E.ParseError(f"two values given for the element {key!r}")
        vals[e] = x
    one = Element.one(len(names))
    vals.setdefault(one, _scalar(1, mode, "unit"))
    return PartialFunction(len(names), vals), names


def _complex(x, where: str) -> complex:
    try:
        if isinstance(x, list) and len(x) == 2:
            return complex(float(x[0]), float(x[1]))
        if isinstance(x, str):
            return complex(x.replace(" ", ""))
        if isinstance(x, (int, float)) and not isinstance(x, bool):
            return complex(x)
    except ValueError:
        pass
    raise E.ParseError(f"{where}: cannot read {x!r} as a complex number")


def _matrix(rows, where: str) -> np.ndarray:
    if isinstance(rows, dict):
        # {"dim": d, "re": [[...]], "im": [[...]]}
        if "re" not in rows:
            raise E.ParseError(f"{where}: matrix object needs 're'")
        re_part = np.array(rows["re"], dtype=float)
        im_part = np.array(rows.get("im", np.zeros_like(re_part)), dtype=float)
        if re_part.ndim != 2 or re_part.shape[0] != re_part.shape[1] or im_part.shape != re_part.shape:
            raise E.ParseError(f"{where}: 're' and 'im' must be equal square matrices")
        if "dim" in rows and rows["dim"] != re_part.shape[0]:
            raise E.ParseError(f"{where}: 'dim' does not match the matrix size")
        return re_part + 1j * im_part
    if not isinstance(rows, list) or not rows or not all(isinstance(r, list) and len(r) == len(rows) for r in rows):
        raise E.ParseError(f"{where}: expected a square matrix")
    return np.array([[_complex(x, where) for x in r] for r in rows], dtype=complex)


def _vector(v, where: str) -> np.ndarray:
    if not isinstance(v, list) or not v:
        raise E.ParseError(f"{where}: expected a vector")
    return np.array([_complex(x, where) for x in v], dtype=complex)


def parse_quantum(doc: dict) -> tuple[list, list]:
    projs = doc.get("projections")
    if not isinstance(projs, list) or not projs:
        raise E.ParseError("'projections' must be a nonempty list")
    items = []
    for i, p in enumerate(projs):
        where = f"projections[{i}]"
        if not isinstance(p, dict) or not isinstance(p.get("name"), str):
            raise E.ParseError(f"{where}: need a 'name'")
        if "matrix" in p:
            m = _matrix(p["matrix"], where)
        elif "vector" in p:
            m = projector(_vector(p["vector"], where))
        elif "span" in p:
            m = span_projector([_vector(v, where) for v in p["span"]])
        else:
            raise E.ParseError(f"{where}: give 'matrix', 'vector' or 'span'")
        items.append((p["name"], m))
    if len({n for n, _ in items}) != len(items):
        raise E.ParseError("projection names must be distinct")
    states = []
    for i, s in enumerate(doc.get("states", [])):
        where = f"states[{i}]"
        try:
            if "vector" in s:
                states.append(QuantumState.pure(_vector(s["vector"], where)))
            elif "density" in s:
                states.append(QuantumState.mixed(_matrix(s["density"], where)))
            else:
                raise E.ParseError(f"{where}: give 'vector' or 'density'")
        except ValueError as exc:
            if isinstance(exc, E.PbaError):
                raise
            raise E.ParseError(f"{where}: {exc}") from exc
    return items, states


def parse_spec(doc: dict) -> tuple[CorrelationSpec, list[str]]:
    if doc.get("builtin") == "example32":
        return example32_spec(), ["x1", "x2", "x3", "s"]
    names = _names(doc)
    if "monomials" in doc:
        mons = [tuple(_indices(names, m, f"monomials[{i}]")) for i, m in enumerate(doc["monomials"])]
        try:
            return CorrelationSpec(len(names), mons), names
        except ValueError as exc:
            raise E.ParseError(str(exc)) from exc
    pba = parse_pba(doc)
    return CorrelationSpec.from_contexts(pba.n, pba.contexts), names


# --- output ------------------------------------------------------------------------------


def atom_key(a: int, k: int) -> str:
    return "".join(str(b) for b in eps_of(a, k))


def measure_doc(m: Measure, names: Sequence[str]) -> dict:
    return {"generators": list(names), "atoms": {atom_key(a, m.arity): format_scalar(w) for a, w in enumerate(m.weights)}}


def ppt_doc(ppt: Ppt, arithmetic: str) -> dict:
    pba = ppt.pba
    return {
        "schema": SCHEMA,
        "arithmetic": arithmetic,
        "generators": [pba.label(i) for i in range(pba.n)],
        "contexts": [list(_label(pba, c)) for c in pba.contexts],
        "measures": [
            {"context": list(_label(pba, c)), "atoms": {atom_key(a, len(c)): format_scalar(w) for a, w in enumerate(ppt.state[c].weights)}}
            for c in pba.contexts
        ],
    }


def monomial_name(s: Sequence[int], names: Sequence[str]) -> str:
    return "&".join(names[i] for i in s)


def certificate_doc(cert, names: Sequence[str]) -> dict:
    if not cert.verify():
        raise E.InternalInconsistency("certificate failed re-verification")
    if cert.feasible:
        return {
            "type": "convex-combination",
            "weights": {atom_key(a, cert.spec.n): format_scalar(w) for a, w in enumerate(cert.weights) if w},
        }
    return {
        "type": "separator",
        "coefficients": {monomial_name(s, names): c for s, c in zip(cert.spec.monomials, cert.separator) if c},
        "offset": cert.offset,
        "violation": format_scalar(cert.violation) if all(is_exact(x) for x in cert.p) else float(cert.violation),
        "inequality": " + ".join(f"{c}*[{monomial_name(s, names)}]" for s, c in zip(cert.spec.monomials, cert.separator) if c)
        + f" <= {cert.offset}",
    }


def _check_extension(m: Measure, ppt: Ppt, tol) -> None:
    for c in ppt.pba.contexts:
        r = restrict(m, list(c))
        if any(abs(x - y) > tol for x, y in zip(r.weights, ppt.state[c].weights)):
            raise E.InternalInconsistency(f"extension does not reproduce context {c}")


def _tol(args, mode: str):
    if args.tol is not None:
        return args.tol
    return 0 if mode == "exact" else 1e-9


def _num(x, mode: str):
    """Scalar for output: exact string, or a float when the input was float data."""
    return float(x) if mode == "float" else format_scalar(x)


def _result(command: str, verdict: str, **fields) -> dict:
    return {"schema": SCHEMA, "command": command, "verdict": verdict, **fields}


# --- commands --------------------------------------------------------------------------------


def cmd_check(doc: dict, args) -> tuple[dict, int]:
    mode = _arithmetic(doc, args)
    ppt = parse_ppt(doc, mode)
    names = list(ppt.pba.names)
    diagnostics = []
    cert = classical_representable(ppt, args.tol)
    out = {}
    if cert.feasible:
        try:
            m = extend_tree(ppt)
            method = "tree"
        except (E.NotAForest, E.WrongTopology, E.NoRunningIntersectionOrder, E.KsPropertyRequired) as exc:
            diagnostics.append(f"tree gluing not applicable: {exc}")
            m = cert.measure()
            method = "lp"
        _check_extension(m, ppt, _tol(args, mode) or 0)
        out["extension"] = measure_doc(m, names)
        out["method"] = method
    out["certificate"] = certificate_doc(cert, names)
    out["diagnostics"] = diagnostics
    verdict = "representable" if cert.feasible else "not representable"
    return _result("check", verdict, **out), EXIT_OK if cert.feasible else EXIT_NOT_REPRESENTABLE


def _three_spec(ppt: Ppt) -> tuple[ThreeSpec, tuple]:
    pba = ppt.pba
    if pba.n != 3 or len(pba.contexts) != 2 or any(len(c) != 2 for c in pba.contexts):
        raise E.MethodInapplicable("method 'three' needs three generators in two two-element contexts")
    (s,) = set(pba.contexts[0]) & set(pba.contexts[1])
    a, b = sorted(set(range(3)) - {s})
    try:
        spec = ThreeSpec(ppt.value((a,)), ppt.value((b,)), ppt.value((s,)), ppt.value((a, s)), ppt.value((b, s)))
    except E.InvalidThreeSpec as exc:
        raise E.InvalidState(str(exc)) from exc
    return spec, (a, b, s)


def cmd_extend(doc: dict, args) -> tuple[dict, int]:
    mode = _arithmetic(doc, args)
    ppt = parse_ppt(doc, mode)
    names = list(ppt.pba.names)
    method = args.method
    tol = _tol(args, mode)
    out: dict = {"method": method}
    if method == "tree":
        m = extend_tree(ppt, tol=args.tol)
    elif method == "three":
        spec, (a, b, s) = _three_spec(ppt)
        box = chi_eta_intervals(spec)
        chi = _scalar(args.chi, mode, "--chi") if args.chi is not None else None
        eta = _scalar(args.eta, mode, "--eta") if args.eta is not None else None
        local = extend_three(spec, chi, eta)
        out["box"] = {k: format_scalar(v) for k, v in vars(box).items()}
        out["lambda"] = {
            atom_key(i, 3): format_scalar(w) for i, w in enumerate(local.weights)
        }
        out["lambda_generators"] = [names[a], names[b], names[s]]
        order = [(a, b, s).index(g) for g in range(3)]
        m = restrict(local, order)
    elif method == "glue":
        try:
            m = extend_bell(ppt)
        except E.NotExtensible as exc:
            res = exc.certificate
            out["alphas"] = {names[s]: _num(v, mode) for s, v in res.alphas.items()}
            out["betas"] = {names[s]: _num(v, mode) for s, v in res.betas.items()}
            out["pair"] = [names[i] for i in res.pair]
            return _result("extend", "not representable", **out), EXIT_NOT_REPRESENTABLE
    elif method == "lp":
        cert = classical_representable(ppt, args.tol)
        out["certificate"] = certificate_doc(cert, names)
        if not cert.feasible:
            return _result("extend", "not representable", **out), EXIT_NOT_REPRESENTABLE
        m = cert.measure()
    elif method == "ht":
        spec = CorrelationSpec.from_contexts(ppt.pba.n, ppt.pba.contexts)
        f = PartialFunction.from_correlations(spec, ppt.correlation_vector(spec))
        try:
            m = extend_full(f, args.tol)
        except E.NotExtensible as exc:
            out["certificate"] = _ht_certificate(exc.certificate, names)
            return _result("extend", "not representable", **out), EXIT_NOT_REPRESENTABLE
    else:  # argparse restricts the choices
        raise E.MethodInapplicable(method)
    _check_extension(m, ppt, tol)
    out["extension"] = measure_doc(m, names)
    return _result("extend", "representable", **out), EXIT_OK


def _element_name(e: Element, names: Sequence[str]) -> str:
    k = e.arity
    if e.mask == (1 << (1 << k)) - 1:
        return "1"
    if e.mask == 0:
        return "0"
    for r in range(1, k + 1):
        for sub in combinations(range(k), r):
            if e.mask == sum(1 << a for a in range(1 << k) if all((a >> i) & 1 for i in sub)):
                return "&".join(names[i] for i in sub)
    return " | ".join("&".join(("" if (a >> i) & 1 else "~") + names[i] for i in range(k)) for a in e.atoms())


def _ht_certificate(cert, names) -> dict:
    if not isinstance(cert, dict) or "weights" not in cert:
        return {"type": "residual", **{k: format_scalar(v) for k, v in (cert or {}).items()}}
    return {
        "type": "farkas",
        "weights": {_element_name(e, names): format_scalar(v) for e, v in cert["weights"].items()},
        "value": format_scalar(cert["value"]),
    }


def cmd_bell(doc: dict, args) -> tuple[dict, int]:
    from .extension import chsh_condition

    mode = _arithmetic(doc, args)
    ppt = parse_ppt(doc, mode)
    names = list(ppt.pba.names)
    res = chsh_condition(ppt)
    value, pair, form = ch_expression_value(ppt)
    cert = classical_representable(ppt, args.tol)
    verts = vertices(cert.spec)
    out = {
        "chsh_condition": res.holds,
        "pair": [names[i] for i in res.pair],
        "alphas": {names[s]: _num(v, mode) for s, v in res.alphas.items()},
        "betas": {names[s]: _num(v, mode) for s, v in res.betas.items()},
        "ch_value": _num(value, mode),
        "ch_special_pair": [names[i] for i in pair],
        "ch_form": form,
        "certificate": certificate_doc(cert, names),
    }
    if not cert.feasible:
        out["separator_checked_vertices"] = len(verts)
    verdict = "representable" if cert.feasible else "not representable"
    return _result("bell", verdict, **out), EXIT_OK if cert.feasible else EXIT_NOT_REPRESENTABLE


def cmd_facets(doc: dict, args) -> tuple[dict, int]:
    spec, names = parse_spec(doc)
    facets = enumerate_facets(spec)
    out = {
        "dimension": spec.dim,
        "vertices": len(vertices(spec)),
        "count": len(facets),
        "monomials": [monomial_name(s, names) for s in spec.monomials],
        "facets": [
            {"coefficients": list(f.coeffs), "sense": f.sense, "rhs": f.rhs, "text": f.render(spec, names)} for f in facets
        ],
    }
    if args.classify:
        groups = classify_example32_facets(facets, spec)
        out["groups"] = {k: len(v) for k, v in groups.items()}
        out["relevant"] = sum(len(groups[k]) for k in ("type1", "type2", "type3", "type4"))
    return _result("facets", "ok", **out), EXIT_OK


def cmd_ht(doc: dict, args) -> tuple[dict, int]:
    mode = _arithmetic(doc, args)
    if "values" in doc:
        f, names = parse_partial_function(doc, mode)
    else:
        ppt = parse_ppt(doc, mode, validate=False)
        names = list(ppt.pba.names)
        spec = CorrelationSpec.from_contexts(ppt.pba.n, ppt.pba.contexts)
        f = PartialFunction.from_correlations(spec, ppt.correlation_vector(spec))
    verdict = is_partial_measure(f, args.max_len, args.tol)
    out: dict = {"max_len": args.max_len, "bounded": True}
    if not verdict.passed:
        a, b, fa, fb = verdict.witness
        out["witness"] = {
            "left": [_element_name(e, names) for e in a],
            "right": [_element_name(e, names) for e in b],
            "left_sum": format_scalar(fa),
            "right_sum": format_scalar(fb),
        }
        return _result("ht", "fail", **out), EXIT_NOT_REPRESENTABLE
    try:
        m = extend_full(f, args.tol)
        out["extension"] = measure_doc(m, names)
        return _result("ht", "pass-bounded", **out), EXIT_OK
    except E.NotExtensible as exc:
        # the bounded search passed but the exact LP refutes extensibility
        out["certificate"] = _ht_certificate(exc.certificate, names)
        out["diagnostics"] = ["sequence search passed at this bound; the exact LP finds no extension"]
        return _result("ht", "fail", **out), EXIT_NOT_REPRESENTABLE


def cmd_quotient(doc: dict, args) -> tuple[dict, int]:
    if "projections" not in doc:
        # classical document: identify elements null under the given state
        mode = _arithmetic(doc, args)
        ppt = parse_ppt(doc, mode)
        rel = ideal_relation([ppt])
        report = verify_empirical_quotient([ppt], rel, seed=args.seed)
        out = {"conditions": _conditions(report)}
        return _result("quotient", "ok" if report.ok else "rejected", **out), EXIT_OK if report.ok else EXIT_NOT_REPRESENTABLE
    items, states = parse_quantum(doc)
    if not states:
        raise E.ParseError("'states' must list at least one state")
    target = build_projection_pba(items)
    gens = None
    if "generators" in doc:
        labels = [lbl for lbl, _ in items]
        gens = [items[i] for i in _indices(labels, doc["generators"], "generators")]
    pg = check_property_G(target, gens)
    out: dict = {"property_G": {"ok": pg.ok, "bounded": pg.bounded, "reason": pg.reason}}
    # truth assignments of the projection algebra do not depend on (G)
    out.update(_assignments(target))
    if not pg.ok:
        out["property_G"]["contexts"] = [list(_label(target.pba, c)) for c in pg.witness]
        return _result("quotient", "rejected", **out), EXIT_NOT_REPRESENTABLE
    ht = build_free_ht(target, states, gens)
    report = verify_empirical_quotient(ht, seed=args.seed)
    out.update(_assignments(ht.generators))
    out["conditions"] = _conditions(report)
    out["free_ppts"] = [ppt_doc(p, "float") for p in ht.ppts]
    return _result("quotient", "ok" if report.ok else "rejected", **out), EXIT_OK if report.ok else EXIT_NOT_REPRESENTABLE


def _assignments(structure) -> dict:
    homs = enumerate_homomorphisms(structure)
    ok, _, witness = check_embeddable(structure)
    out = {"homomorphisms": len(homs), "embeddable": ok}
    if witness:
        c, a = witness
        out["embedding_witness"] = {"context": list(_label(structure.pba, c)), "atom": atom_key(a, len(c))}
    return out


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (bool, str, int)) or x is None:
        return x
    if isinstance(x, Fraction):
        return format_scalar(x)
    if isinstance(x, (float, np.floating)):
        return float(x)
    return str(x)


def _conditions(report) -> dict:
    return {k: {"ok": ok, "witness": _jsonable(w)} for k, (ok, w) in report.results.items()}


def cmd_graph(doc: dict, args) -> tuple[dict, int]:
    pba = parse_pba(doc)
    g = compatibility_graph(pba)
    if args.merge:
        g = merge_cliques(g, pba)
    dot = export_dot(g)
    out = {"nodes": [list(_label(pba, v)) for v in g.nodes], "edges": [list(e) for e in sorted(g.edges)]}
    if args.dot and args.dot != "-":
        with open(args.dot, "w", encoding="utf-8") as fh:
            fh.write(dot)
        out["dot_file"] = args.dot
    else:
        out["dot"] = dot
    return _result("graph", "ok", **out), EXIT_OK


def cmd_quantum(doc: dict, args) -> tuple[dict, int]:
    items, states = parse_quantum(doc)
    if len(states) != 1:
        raise E.ParseError("'states' must hold exactly one state")
    ppt = free_state_from_projections(items, states[0])
    if args.snap:
        ppt = rationalize(ppt, args.snap)
        return ppt_doc(ppt, "exact"), EXIT_OK
    return ppt_doc(ppt, "float"), EXIT_OK


COMMANDS = {
    "check": (cmd_check, "decide classical representability of a PPT document"),
    "extend": (cmd_extend, "build a classical extension with a chosen method"),
    "bell": (cmd_bell, "interval condition, CH value and separator for a Bell-square PPT"),
    "facets": (cmd_facets, "facets of a correlation polytope"),
    "ht": (cmd_ht, "bounded partial-measure test and extension of a partial function"),
    "quotient": (cmd_quotient, "free PPT and empirical quotient checks for projections"),
    "graph": (cmd_graph, "compatibility graph, optionally as DOT"),
    "quantum": (cmd_quantum, "PPT document from projections and a state"),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("input", help="JSON document ('-' for stdin)")
    common.add_argument("--arithmetic", choices=("exact", "float"), default=None, help="overrides the document (default exact)")
    common.add_argument("--tol", type=float, default=None, help="absolute tolerance in float mode (default 1e-9)")
    common.add_argument("--max-len", type=int, default=4, help="sequence length bound for the partial-measure test")
    common.add_argument("--seed", type=int, default=0, help="seed for sampled checks")
    common.add_argument("--snap", type=int, default=None, metavar="DENOM", help="rationalize quantum values to this denominator")
    common.add_argument("--timings", action="store_true", help="include wall-clock timings in the output")
    common.add_argument("-o", "--output", default="-", help="result file (default stdout)")

    parser = argparse.ArgumentParser(prog="pba-extend", description="Classical extensions of partial probability theories.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, parents=[common], help=help_text)
        if name == "extend":
            p.add_argument("--method", choices=("tree", "three", "glue", "lp", "ht"), default="lp")
            p.add_argument("--chi", default=None, help="chi for --method three (default: box midpoint)")
            p.add_argument("--eta", default=None, help="eta for --method three (default: box midpoint)")
        if name == "facets":
            p.add_argument("--classify", action="store_true", help="group facets by their unknown-monomial pattern")
        if name == "graph":
            p.add_argument("--dot", default=None, help="write DOT here ('-' embeds it in the JSON)")
            p.add_argument("--merge", action="store_true", help="merge compatible cliques into single nodes")
    return parser


def _emit(result: dict, path: str) -> None:
    text = json.dumps(result, indent=2) + "\n"
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def run(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    handler = COMMANDS[args.command][0]
    start = time.perf_counter()
    try:
        doc = load_document(args.input)
        result, code = handler(doc, args)
    except INPUT_ERRORS as exc:
        return _fail(args, exc, EXIT_INPUT)
    except INAPPLICABLE_ERRORS as exc:
        return _fail(args, exc, EXIT_INAPPLICABLE)
    except Exception as exc:  # noqa: BLE001 - the exit-code contract covers everything else
        return _fail(args, exc, EXIT_INTERNAL)
    if args.timings:
        result["timings"] = {"total_seconds": round(time.perf_counter() - start, 6)}
    _emit(result, args.output)
    return code


def _fail(args, exc: Exception, code: int) -> int:
    kind = {EXIT_INPUT: "input error", EXIT_INAPPLICABLE: "method inapplicable", EXIT_INTERNAL: "internal error"}[code]
    print(f"pba-extend: {kind}: {type(exc).__name__}: {exc}", file=sys.stderr)
    _emit({"schema": SCHEMA, "command": args.command, "verdict": "error", "error": {"kind": kind, "type": type(exc).__name__, "message": str(exc)}}, args.output)
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
