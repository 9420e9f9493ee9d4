"""Batch command-line surface: parse documents, dispatch to the library,
write a deterministic report/v1 JSON document.

Exit codes: 0 success; 1 a checked property fails; 2 schema/validation
failure; 3 enumeration budget exhausted.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import __version__, jsonio
from .classify import check_equivalence_preservation, refute_semiflexible, transport_splitting
from .errors import EnumerationBudgetExceeded, PieKitError, SchemaError
from .fincat import classify_morphism, free_category_on_graph, is_free_on_graph
from .limits import compile_pie, eval_pie, pseudo_limit, strict_limit
from .sf2monad import (
    Signature,
    check_algebra,
    enumerate_algebras,
    enumerate_omega,
    eval_free_algebra,
    eval_zk,
    underlying_set_monad_signature,
)
from .weights import Decomposition, is_pie_weight

EXIT_OK = 0
EXIT_PROPERTY_FAILURE = 1
EXIT_VALIDATION = 2
EXIT_BUDGET = 3


def _read_doc(path):
    if path == "-":
        return json.load(sys.stdin)
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def _certificate_json(cert):
    enc = jsonio.encode_ident
    if isinstance(cert, Decomposition):
        return {
            "kind": "decomposition",
            "components": [
                {"initial": [enc(c.initial[0]), enc(c.initial[1])],
                 "elements": [[enc(j), enc(x)] for (j, x) in c.elements],
                 "connecting": {f"{enc(j)}|{enc(x)}": enc(f)
                                for (j, x), f in sorted(c.connecting.items(),
                                                        key=lambda kv: (enc(kv[0][0]), enc(kv[0][1])))}}
                for c in cert.components
            ],
        }
    return {
        "kind": "refutation",
        "component": [[enc(j), enc(x)] for (j, x) in cert.component],
        "failures": {f"{enc(j)}|{enc(x)}": {
            "target": [enc(t[0]), enc(t[1])],
            "arrows": [[enc(a[0]), enc(a[1])] for a in arrows]}
            for (j, x), (t, arrows) in sorted(cert.failures.items(),
                                              key=lambda kv: (enc(kv[0][0]), enc(kv[0][1])))},
    }


def _category_summary(cat, include_tables):
    out = {"objects": cat.n_objects(), "morphisms": cat.n_morphisms()}
    if include_tables:
        out["category"] = jsonio.fincat_to_json(cat)
    return out


# -- command handlers --------------------------------------------------------


def _cmd_check_weight(args):
    weight = jsonio.load_weight(_read_doc(args.weight))
    pie, cert = is_pie_weight(weight)
    return EXIT_OK, {"verdict": "pie" if pie else "not-pie",
                     "certificate": _certificate_json(cert)}


def _cmd_limit(args):
    weight = jsonio.load_weight(_read_doc(args.weight))
    diagram = jsonio.load_diagram(_read_doc(args.diagram))
    if args.kind == "strict":
        lim = strict_limit(weight, diagram, args.budget)
    else:
        lim = pseudo_limit(weight, diagram, args.budget)
    return EXIT_OK, {"kind": args.kind, **_category_summary(lim.cat, args.tables)}


def _cmd_compile_pie(args):
    weight = jsonio.load_weight(_read_doc(args.weight))
    pie, cert = is_pie_weight(weight)
    if not pie:
        return EXIT_PROPERTY_FAILURE, {"verdict": "not-pie",
                                       "certificate": _certificate_json(cert)}
    expr = compile_pie(weight, cert)
    return EXIT_OK, {"verdict": "pie", "expression": jsonio.pieexpr_to_json(expr)}


def _cmd_eval_pie(args):
    expr = jsonio.load_pieexpr(_read_doc(args.expr))
    diagram = jsonio.load_diagram(_read_doc(args.diagram))
    ev = eval_pie(expr, diagram, args.budget)
    return EXIT_OK, _category_summary(ev.cat, args.tables)


def _cmd_free_cat(args):
    if args.graph:
        graph = jsonio.load_graph(_read_doc(args.graph))
        cat = free_category_on_graph(graph)
        return EXIT_OK, {"kind": "free-category",
                         **_category_summary(cat, args.tables or True)}
    cat = jsonio.load_fincat(_read_doc(args.category))
    decision = is_free_on_graph(cat)
    out = {"kind": "freeness", "free": decision.free}
    if decision.free:
        out["graph"] = jsonio.graph_to_json(decision.graph)
    else:
        out["reason"] = decision.reason
        if decision.cycle is not None:
            out["cycle"] = [jsonio.encode_ident(e) for e in decision.cycle]
        if decision.morphism is not None:
            out["morphism"] = jsonio.encode_ident(decision.morphism)
            out["factorisations"] = [[jsonio.encode_ident(a) for a in path]
                                     for path in (decision.factorisations or ())]
    return EXIT_OK, out


def _cmd_classify_functor(args):
    functor = jsonio.load_functor(_read_doc(args.functor))
    cls = classify_morphism(functor)
    flags = {k: getattr(cls, k) for k in
             ("fully_faithful", "full", "objective", "essentially_surjective",
              "equivalence", "surjective_equivalence", "injective_equivalence",
              "isomorphism")}
    return EXIT_OK, {"flags": flags}


def _cmd_refute_semiflexible(args):
    weight = jsonio.load_weight(_read_doc(args.weight))
    pie, _ = is_pie_weight(weight)
    if pie:
        return EXIT_OK, {"verdict": "pie", "witness": None,
                         "grammar_version": f"g{args.grammar_level}"}
    report = refute_semiflexible(weight, args.grammar_level, args.budget)
    out = {"verdict": report.verdict,
           "grammar_version": report.grammar_version,
           "diagrams_searched": report.diagrams_searched,
           "budget_used": report.budget_used,
           "witness": None}
    if report.witness is not None:
        out["witness"] = {
            "diagram": jsonio.weight_to_json(report.witness.diagram, "diagram"),
            "pseudocone_index": report.witness.pseudocone_index,
            "failed_property": report.witness.failed_property,
        }
    return EXIT_OK, out


def _cmd_preserve(args):
    weight = jsonio.load_weight(_read_doc(args.weight))
    dmap = jsonio.load_diagram_map(_read_doc(args.map))
    report = check_equivalence_preservation(weight, dmap, args.mode, args.budget)
    code = EXIT_OK if report.conclusion_holds else EXIT_PROPERTY_FAILURE
    return code, {"mode": report.mode,
                  "hypothesis_pointwise": {jsonio.encode_ident(j): ok
                                           for j, ok in report.hypothesis_pointwise.items()},
                  "conclusion_holds": report.conclusion_holds,
                  "source_objects": report.source_objects,
                  "target_objects": report.target_objects}


def _cmd_transport(args):
    weight = jsonio.load_weight(_read_doc(args.weight))
    dmap = jsonio.load_diagram_map(_read_doc(args.map))
    sections = jsonio.load_sections(_read_doc(args.sections), dmap)
    result = transport_splitting(weight, dmap, sections, args.budget)
    composed = result.section.then(result.induced).is_identity_functor()
    code = EXIT_OK if composed else EXIT_PROPERTY_FAILURE
    return code, {"composes_to_identity": composed,
                  "section_objects": {str(k): str(v)
                                      for k, v in sorted(result.section.obj_map.items())},
                  "source_objects": result.source_limit.cat.n_objects(),
                  "target_objects": result.target_limit.cat.n_objects()}


def _cmd_omega(args):
    arities = [int(a) for a in args.arities.split(",") if a != ""]
    trees = enumerate_omega(args.bound, arities, args.budget)
    return EXIT_OK, {"bound": args.bound, "arities": sorted(set(arities)),
                     "count": len(trees),
                     "trees": [repr(t) for t in trees],
                     "leaves": [t.leaves for t in trees]}


def _cmd_zk(args):
    signature = jsonio.load_signature(_read_doc(args.signature))
    result = eval_zk(signature, args.n, args.bound, args.budget)
    return EXIT_OK, {"n": args.n, "bound": args.bound,
                     "object_count": result.cat.n_objects(),
                     "morphism_count": result.cat.n_morphisms(),
                     "complete": result.complete}


def _cmd_free_algebra(args):
    signature = jsonio.load_signature(_read_doc(args.signature))
    carrier = jsonio.load_fincat(_read_doc(args.carrier))
    result = eval_free_algebra(signature, carrier, args.bound, args.budget)
    return EXIT_OK, {"bound": args.bound,
                     "object_count": result.cat.n_objects(),
                     "morphism_count": result.cat.n_morphisms(),
                     "complete": result.complete}


def _cmd_check_algebra(args):
    presentation = jsonio.load_presentation(_read_doc(args.presentation))
    alg = jsonio.load_algebra(_read_doc(args.algebra), presentation)
    report = check_algebra(presentation, alg)
    code = EXIT_OK if report.all_hold else EXIT_PROPERTY_FAILURE
    equations = {}
    for r in report.equations:
        entry = {"holds": r.holds}
        if r.first_failure is not None:
            objs, lhs, rhs = r.first_failure
            entry["first_failure"] = {
                "component": [jsonio.encode_ident(o) for o in objs],
                "lhs": jsonio.encode_ident(lhs), "rhs": jsonio.encode_ident(rhs)}
        equations[r.name] = entry
    return code, {"all_hold": report.all_hold, "equations": equations}


def _cmd_enumerate_algebras(args):
    presentation = jsonio.load_presentation(_read_doc(args.presentation))
    carrier = jsonio.load_fincat(_read_doc(args.carrier))
    algebras = enumerate_algebras(presentation, carrier, args.budget)
    return EXIT_OK, {"count": len(algebras)}


def _cmd_set_monad_signature(args):
    presentation = jsonio.load_presentation(_read_doc(args.presentation))
    signature, verification = underlying_set_monad_signature(
        presentation, args.n, args.bound, args.budget)
    code = EXIT_OK if verification.counts_match and verification.bijection_ok \
        else EXIT_PROPERTY_FAILURE
    return code, {"signature": {str(n): list(names) for n, names in sorted(signature.items())},
                  "verification": {
                      "bound": verification.bound, "n": verification.n,
                      "zk_object_count": verification.zk_object_count,
                      "closure_term_count": verification.closure_term_count,
                      "counts_match": verification.counts_match,
                      "bijection_ok": verification.bijection_ok}}


# -- wiring --------------------------------------------------------------------


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="piekit",
        description="finite 2-dimensional category theory: pie weights, "
                    "weighted limits, pie presentations")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, handler, **arguments):
        p = sub.add_parser(name)
        p.set_defaults(handler=handler)
        p.add_argument("--budget", type=int, default=10**6)
        p.add_argument("--out", default=None, help="write the report here instead of stdout")
        p.add_argument("--seed", type=int, default=0,
                       help="seed recorded in the report (no command is randomized)")
        for arg, kw in arguments.items():
            p.add_argument(arg, **kw)
        return p

    add("check-weight", _cmd_check_weight, **{"--weight": dict(required=True)})
    p = add("limit", _cmd_limit, **{"--weight": dict(required=True),
                                    "--diagram": dict(required=True),
                                    "--tables": dict(action="store_true")})
    p.add_argument("kind", choices=["strict", "pseudo"])
    add("compile-pie", _cmd_compile_pie, **{"--weight": dict(required=True)})
    add("eval-pie", _cmd_eval_pie, **{"--expr": dict(required=True),
                                      "--diagram": dict(required=True),
                                      "--tables": dict(action="store_true")})
    add("free-cat", _cmd_free_cat, **{"--graph": dict(default=None),
                                      "--category": dict(default=None),
                                      "--tables": dict(action="store_true")})
    add("classify-functor", _cmd_classify_functor, **{"--functor": dict(required=True)})
    add("refute-semiflexible", _cmd_refute_semiflexible,
        **{"--weight": dict(required=True),
           "--grammar-level": dict(type=int, default=1, dest="grammar_level")})
    p = add("preserve", _cmd_preserve, **{"--weight": dict(required=True),
                                          "--map": dict(required=True)})
    p.add_argument("mode", choices=["equivalence", "surjective", "injective"])
    add("transport", _cmd_transport, **{"--weight": dict(required=True),
                                        "--map": dict(required=True),
                                        "--sections": dict(required=True)})
    add("omega", _cmd_omega, **{"--bound": dict(type=int, required=True),
                                "--arities": dict(required=True)})
    add("zk", _cmd_zk, **{"--signature": dict(required=True),
                          "--n": dict(type=int, required=True),
                          "--bound": dict(type=int, required=True)})
    add("free-algebra", _cmd_free_algebra, **{"--signature": dict(required=True),
                                              "--carrier": dict(required=True),
                                              "--bound": dict(type=int, required=True)})
    add("check-algebra", _cmd_check_algebra, **{"--presentation": dict(required=True),
                                                "--algebra": dict(required=True)})
    add("enumerate-algebras", _cmd_enumerate_algebras,
        **{"--presentation": dict(required=True), "--carrier": dict(required=True)})
    add("set-monad-signature", _cmd_set_monad_signature,
        **{"--presentation": dict(required=True),
           "--n": dict(type=int, required=True),
           "--bound": dict(type=int, required=True)})
    return parser


def _config_json(args):
    skip = {"handler", "out", "command"}
    out = {}
    for key, value in sorted(vars(args).items()):
        if key in skip or value is None:
            continue
        out[key] = value
    return out


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.command == "free-cat" and not args.graph and not args.category:
        parser.error("free-cat needs --graph or --category")
    try:
        code, result = args.handler(args)
    except SchemaError as exc:
        code, result = EXIT_VALIDATION, {"error": "schema", "detail": str(exc)}
    except EnumerationBudgetExceeded as exc:
        code, result = EXIT_BUDGET, {"error": "budget-exhausted", "detail": str(exc)}
    except PieKitError as exc:
        code, result = EXIT_VALIDATION, {"error": type(exc).__name__, "detail": str(exc)}
    report = {
        "schema": "report/v1",
        "tool": "piekit",
        "version": __version__,
        "command": args.command,
        "config": _config_json(args),
        "exit_code": code,
        "result": result,
    }
    text = jsonio.dumps_report(report)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    raise SystemExit(main())
