"""Versioned JSON schemas (strict: unknown fields rejected) and the
s-expression term language for presentations.

Structured identifiers of constructed categories are stringified
canonically on export; loading keeps identifiers as the strings found in
the document, so export/load round-trips are isomorphism-preserving and
byte-deterministic rather than identifier-preserving.
"""

from __future__ import annotations

import json

from .errors import SchemaError
from .fincat import FinCat, FinFunctor, FinGraph, validate_category
from .weights import CatWeight
from .limits import (
    CellRef,
    Diagram,
    DiagramMap,
    EquifierNode,
    IdCell,
    InserterNode,
    Leg,
    PieExpr,
    ProductNode,
    VCompCell,
    WhiskerCell,
)
from .sf2monad import (
    HOLE,
    OpTerm,
    PiePresentation,
    Signature,
    TransTerm,
    ctx_cell,
    gen_cell,
    id_cell,
    op,
    var,
    vcomp,
)

SCHEMAS = {
    "fincat": "fincat/v1",
    "graph": "graph/v1",
    "weight": "weight/v1",
    "diagram": "diagram/v1",
    "pieexpr": "pieexpr/v1",
    "signature": "signature/v1",
    "presentation": "presentation/v1",
    "functor": "functor/v1",
    "diagram_map": "diagram-map/v1",
    "algebra": "algebra/v1",
    "report": "report/v1",
}


def _check_fields(doc, what, required, optional=()):
    if not isinstance(doc, dict):
        raise SchemaError(f"{what}: expected a JSON object")
    unknown = sorted(set(doc) - set(required) - set(optional) - {"schema"})
    if unknown:
        raise SchemaError(f"{what}: unknown fields {unknown}")
    missing = sorted(set(required) - set(doc))
    if missing:
        raise SchemaError(f"{what}: missing fields {missing}")


def _check_schema_tag(doc, tag):
    if "schema" in doc and doc["schema"] != tag:
        raise SchemaError(f"expected schema {tag!r}, found {doc['schema']!r}")


def encode_ident(x):
    """Canonical string form of an identifier for JSON export."""
    if isinstance(x, str):
        return x
    return repr(x)


def _encode_map(pairs):
    out = {}
    for k, v in pairs:
        ek = encode_ident(k)
        if ek in out:
            raise SchemaError(f"identifier encoding collision at {ek!r}")
        out[ek] = encode_ident(v)
    return out


# -- categories and graphs --------------------------------------------------


def fincat_to_json(cat):
    enc = encode_ident
    ids = {m: enc(m) for m in cat.morphisms}
    if len(set(ids.values())) != len(ids):
        raise SchemaError("morphism identifier encoding collision")
    return {
        "schema": SCHEMAS["fincat"],
        "objects": [enc(x) for x in cat.objects],
        "morphisms": [{"id": ids[m], "src": enc(cat.src[m]), "dst": enc(cat.dst[m])}
                      for m in cat.morphisms],
        "identities": {enc(x): ids[i] for x, i in sorted(cat.identity.items(),
                                                         key=lambda kv: enc(kv[0]))},
        "composition": [[ids[g], ids[f], ids[gf]]
                        for (g, f), gf in sorted(cat.table.items(),
                                                 key=lambda kv: (ids[kv[0][0]], ids[kv[0][1]]))],
    }


def load_fincat(doc, what="fincat"):
    _check_fields(doc, what, ("objects", "morphisms", "identities", "composition"))
    _check_schema_tag(doc, SCHEMAS["fincat"])
    morphisms = []
    for entry in doc["morphisms"]:
        _check_fields(entry, f"{what}.morphisms[]", ("id", "src", "dst"))
        morphisms.append((entry["id"], entry["src"], entry["dst"]))
    table = {}
    for row in doc["composition"]:
        if not isinstance(row, list) or len(row) != 3:
            raise SchemaError(f"{what}: composition rows are [g, f, gf] triples")
        table[(row[0], row[1])] = row[2]
    return validate_category(doc["objects"], morphisms, doc["identities"], table)


def graph_to_json(graph):
    enc = encode_ident
    return {
        "schema": SCHEMAS["graph"],
        "vertices": [enc(v) for v in graph.vertices],
        "edges": [{"id": enc(e), "src": enc(a), "dst": enc(b)} for (e, a, b) in graph.edges],
    }


def load_graph(doc, what="graph"):
    _check_fields(doc, what, ("vertices", "edges"))
    _check_schema_tag(doc, SCHEMAS["graph"])
    edges = []
    for entry in doc["edges"]:
        _check_fields(entry, f"{what}.edges[]", ("id", "src", "dst"))
        edges.append((entry["id"], entry["src"], entry["dst"]))
    return FinGraph(tuple(doc["vertices"]), tuple(edges))


# -- functors ----------------------------------------------------------------


def functor_maps_to_json(functor):
    return {
        "objects": _encode_map(functor.obj_map.items()),
        "morphisms": _encode_map(functor.mor_map.items()),
    }


def functor_to_json(functor):
    return {
        "schema": SCHEMAS["functor"],
        "domain": fincat_to_json(functor.domain),
        "codomain": fincat_to_json(functor.codomain),
        **functor_maps_to_json(functor),
    }


def _load_functor_maps(doc, domain, codomain, what):
    _check_fields(doc, what, ("objects", "morphisms"))
    return FinFunctor(domain, codomain, doc["objects"], doc["morphisms"])


def load_functor(doc, what="functor"):
    _check_fields(doc, what, ("domain", "codomain", "objects", "morphisms"))
    _check_schema_tag(doc, SCHEMAS["functor"])
    domain = load_fincat(doc["domain"], f"{what}.domain")
    codomain = load_fincat(doc["codomain"], f"{what}.codomain")
    return FinFunctor(domain, codomain, doc["objects"], doc["morphisms"])


# -- weights and diagrams -----------------------------------------------------


def weight_to_json(weight, tag="weight"):
    enc = encode_ident
    return {
        "schema": SCHEMAS[tag],
        "index": fincat_to_json(weight.index),
        "values": {enc(j): fincat_to_json(weight.values[j]) for j in weight.index.objects},
        "action": {enc(f): functor_maps_to_json(weight.action[f])
                   for f in weight.index.morphisms},
    }


def _load_cat_valued(doc, cls, tag, what):
    _check_fields(doc, what, ("index", "values", "action"))
    _check_schema_tag(doc, SCHEMAS[tag])
    index = load_fincat(doc["index"], f"{what}.index")
    values = {}
    for j in index.objects:
        if j not in doc["values"]:
            raise SchemaError(f"{what}: missing value at index object {j!r}")
        values[j] = load_fincat(doc["values"][j], f"{what}.values[{j}]")
    extra = sorted(set(doc["values"]) - set(index.objects))
    if extra:
        raise SchemaError(f"{what}: values at undeclared index objects {extra}")
    action = {}
    for f in index.morphisms:
        if f not in doc["action"]:
            raise SchemaError(f"{what}: missing action at index morphism {f!r}")
        action[f] = _load_functor_maps(doc["action"][f], values[index.src[f]],
                                       values[index.dst[f]], f"{what}.action[{f}]")
    return cls(index, values, action)


def load_weight(doc, what="weight"):
    return _load_cat_valued(doc, CatWeight, "weight", what)


def load_diagram(doc, what="diagram"):
    return _load_cat_valued(doc, Diagram, "diagram", what)


def diagram_map_to_json(dmap):
    enc = encode_ident
    return {
        "schema": SCHEMAS["diagram_map"],
        "source": weight_to_json(dmap.source, "diagram"),
        "target": weight_to_json(dmap.target, "diagram"),
        "components": {enc(j): functor_maps_to_json(c) for j, c in dmap.components.items()},
    }


def load_diagram_map(doc, what="diagram-map"):
    _check_fields(doc, what, ("source", "target", "components"))
    _check_schema_tag(doc, SCHEMAS["diagram_map"])
    source = load_diagram(doc["source"], f"{what}.source")
    target = load_diagram(doc["target"], f"{what}.target")
    components = {}
    for j in source.index.objects:
        if j not in doc["components"]:
            raise SchemaError(f"{what}: missing component at {j!r}")
        components[j] = _load_functor_maps(doc["components"][j], source.values[j],
                                           target.values[j], f"{what}.components[{j}]")
    return DiagramMap(source, target, components)


def load_sections(doc, dmap, what="sections"):
    if not isinstance(doc, dict):
        raise SchemaError(f"{what}: expected an object keyed by index objects")
    sections = {}
    for j in dmap.source.index.objects:
        if j not in doc:
            raise SchemaError(f"{what}: missing section at {j!r}")
        sections[j] = _load_functor_maps(doc[j], dmap.target.values[j],
                                         dmap.source.values[j], f"{what}[{j}]")
    return sections


# -- pie expressions ----------------------------------------------------------


def _leg_to_json(leg):
    return {"proj": leg.factor, "action": encode_ident(leg.action)}


def _cell_to_json(cell):
    if isinstance(cell, CellRef):
        return {"kappa": cell.kappa}
    if isinstance(cell, IdCell):
        return {"id": _leg_to_json(cell.leg)}
    if isinstance(cell, WhiskerCell):
        return {"whisker": encode_ident(cell.action), "cell": _cell_to_json(cell.cell)}
    if isinstance(cell, VCompCell):
        return {"vcomp": [_cell_to_json(cell.first), _cell_to_json(cell.second)]}
    raise SchemaError(f"unknown cell term {cell!r}")


def pieexpr_to_json(expr):
    nodes = []
    for node in expr.nodes:
        if isinstance(node, ProductNode):
            nodes.append({"kind": "product",
                          "factors": [encode_ident(j) for j in node.factors]})
        elif isinstance(node, InserterNode):
            nodes.append({"kind": "inserter", "left": _leg_to_json(node.left),
                          "right": _leg_to_json(node.right)})
        elif isinstance(node, EquifierNode):
            nodes.append({"kind": "equifier", "lhs": _cell_to_json(node.lhs),
                          "rhs": _cell_to_json(node.rhs)})
    return {"schema": SCHEMAS["pieexpr"], "index": fincat_to_json(expr.index),
            "nodes": nodes}


def _load_leg(doc, what):
    _check_fields(doc, what, ("proj", "action"))
    return Leg(factor=doc["proj"], action=doc["action"])


def _load_cell(doc, what):
    if not isinstance(doc, dict) or len(set(doc) - {"schema"}) == 0:
        raise SchemaError(f"{what}: expected a cell object")
    if "kappa" in doc:
        _check_fields(doc, what, ("kappa",))
        return CellRef(doc["kappa"])
    if "id" in doc:
        _check_fields(doc, what, ("id",))
        return IdCell(_load_leg(doc["id"], f"{what}.id"))
    if "whisker" in doc:
        _check_fields(doc, what, ("whisker", "cell"))
        return WhiskerCell(doc["whisker"], _load_cell(doc["cell"], f"{what}.cell"))
    if "vcomp" in doc:
        _check_fields(doc, what, ("vcomp",))
        if not isinstance(doc["vcomp"], list) or len(doc["vcomp"]) != 2:
            raise SchemaError(f"{what}: vcomp takes two cells")
        return VCompCell(_load_cell(doc["vcomp"][0], f"{what}.vcomp[0]"),
                         _load_cell(doc["vcomp"][1], f"{what}.vcomp[1]"))
    raise SchemaError(f"{what}: unknown cell kind {sorted(doc)}")


def load_pieexpr(doc, what="pieexpr"):
    _check_fields(doc, what, ("index", "nodes"))
    _check_schema_tag(doc, SCHEMAS["pieexpr"])
    index = load_fincat(doc["index"], f"{what}.index")
    nodes = []
    for i, nd in enumerate(doc["nodes"]):
        where = f"{what}.nodes[{i}]"
        if not isinstance(nd, dict) or "kind" not in nd:
            raise SchemaError(f"{where}: expected a node with a kind")
        if nd["kind"] == "product":
            _check_fields(nd, where, ("kind", "factors"))
            nodes.append(ProductNode(tuple(nd["factors"])))
        elif nd["kind"] == "inserter":
            _check_fields(nd, where, ("kind", "left", "right"))
            nodes.append(InserterNode(_load_leg(nd["left"], f"{where}.left"),
                                      _load_leg(nd["right"], f"{where}.right")))
        elif nd["kind"] == "equifier":
            _check_fields(nd, where, ("kind", "lhs", "rhs"))
            nodes.append(EquifierNode(_load_cell(nd["lhs"], f"{where}.lhs"),
                                      _load_cell(nd["rhs"], f"{where}.rhs")))
        else:
            raise SchemaError(f"{where}: unknown node kind {nd['kind']!r}")
    return PieExpr(index=index, nodes=tuple(nodes)).check()


# -- signatures and presentations ----------------------------------------------


def signature_to_json(signature):
    return {"schema": SCHEMAS["signature"],
            "arities": {str(n): fincat_to_json(c) for n, c in sorted(signature.arities.items())}}


def load_signature(doc, what="signature"):
    _check_fields(doc, what, ("arities",))
    _check_schema_tag(doc, SCHEMAS["signature"])
    arities = {}
    for n, sub in doc["arities"].items():
        try:
            arity = int(n)
        except ValueError:
            raise SchemaError(f"{what}: arity keys are naturals, found {n!r}")
        arities[arity] = load_fincat(sub, f"{what}.arities[{n}]")
    return Signature(arities)


# -- the s-expression term language ---------------------------------------------


def parse_sexp(text):
    """One s-expression: atoms and parenthesised lists."""
    tokens = text.replace("(", " ( ").replace(")", " ) ").split()

    def read(pos):
        if pos >= len(tokens):
            raise SchemaError("unexpected end of term")
        tok = tokens[pos]
        if tok == "(":
            out = []
            pos += 1
            while pos < len(tokens) and tokens[pos] != ")":
                item, pos = read(pos)
                out.append(item)
            if pos >= len(tokens):
                raise SchemaError("unbalanced parentheses in term")
            return out, pos + 1
        if tok == ")":
            raise SchemaError("unbalanced parentheses in term")
        return tok, pos + 1

    expr, end = read(0)
    if end != len(tokens):
        raise SchemaError(f"trailing tokens in term: {' '.join(tokens[end:])}")
    return expr


def _op_term_from_sexp(sx, allow_hole):
    if isinstance(sx, str):
        if sx == "?":
            if not allow_hole:
                raise SchemaError("hole outside a context term")
            return OpTerm(HOLE)
        if sx.startswith("_"):
            return var()
        raise SchemaError(f"bare atom {sx!r} is not a variable; apply operations as (op ...)")
    if not sx:
        raise SchemaError("empty term")
    head, rest = sx[0], sx[1:]
    if not isinstance(head, str) or head.startswith("_") or head == "?":
        raise SchemaError(f"operation symbol expected, found {head!r}")
    return OpTerm(head, tuple(_op_term_from_sexp(c, allow_hole) for c in rest))


def _check_variable_order(sx, allow_hole):
    seen = []

    def walk(s):
        if isinstance(s, str):
            if s.startswith("_"):
                seen.append(s)
            return
        for c in s[1:]:
            walk(c)

    walk(sx)
    expected = [f"_{i + 1}" for i in range(len(seen))]
    if seen != expected:
        raise SchemaError(
            f"variables must read _1.._k left to right; found {seen}, expected {expected}")


def parse_op_term(text, allow_hole=False):
    """An operation term like (m _1 (m _2 _3)); variables are positional
    and must read _1.._k left to right, ? marks the hole of a context."""
    sx = parse_sexp(text) if isinstance(text, str) else text
    _check_variable_order(sx, allow_hole)
    term = _op_term_from_sexp(sx, allow_hole)
    if allow_hole and term.holes() != 1:
        raise SchemaError("context terms carry exactly one hole ?")
    if not allow_hole and term.holes() != 0:
        raise SchemaError("hole outside a context term")
    return term


def parse_trans_term(text):
    """(id t) | (gen name t1 ... tk) | (vcomp u v) | (ctx hole-term u).

    Variables read _1.._k left to right: through a standalone operation
    term, and jointly across a generator's argument list."""
    sx = parse_sexp(text) if isinstance(text, str) else text
    if not isinstance(sx, list) or not sx:
        raise SchemaError("transformation terms are lists")
    head = sx[0]
    if head == "id":
        if len(sx) != 2:
            raise SchemaError("(id t) takes one operation term")
        return id_cell(parse_op_term(sx[1]))
    if head == "gen":
        if len(sx) < 2:
            raise SchemaError("(gen name t1 ... tk) needs a generator name")
        _check_variable_order(["..."] + sx[2:], allow_hole=False)
        return gen_cell(sx[1], *[_op_term_from_sexp(t, False) for t in sx[2:]])
    if head == "vcomp":
        if len(sx) != 3:
            raise SchemaError("(vcomp u v) takes two transformation terms")
        return vcomp(parse_trans_term(sx[1]), parse_trans_term(sx[2]))
    if head == "ctx":
        if len(sx) != 3:
            raise SchemaError("(ctx hole-term u) takes a context and a transformation term")
        return ctx_cell(parse_op_term(sx[1], allow_hole=True), parse_trans_term(sx[2]))
    raise SchemaError(f"unknown transformation term head {head!r}")


def op_term_to_sexp(term, counter=None):
    if counter is None:
        counter = [0]
    if term.is_hole():
        return "?"
    if term.is_leaf():
        counter[0] += 1
        return f"_{counter[0]}"
    return "(" + " ".join([str(term.op)] +
                          [op_term_to_sexp(c, counter) for c in term.children]) + ")"


def trans_term_to_sexp(term):
    if term.kind == "id":
        return f"(id {op_term_to_sexp(term.term)})"
    if term.kind == "gen":
        counter = [0]
        args = " ".join(op_term_to_sexp(t, counter) for t in term.args)
        return f"(gen {term.name}" + (f" {args})" if args else ")")
    if term.kind == "vcomp":
        return f"(vcomp {trans_term_to_sexp(term.first)} {trans_term_to_sexp(term.second)})"
    if term.kind == "ctx":
        return f"(ctx {op_term_to_sexp(term.context)} {trans_term_to_sexp(term.inner)})"
    raise SchemaError(f"unknown transformation term kind {term.kind!r}")


def presentation_to_json(presentation):
    return {
        "schema": SCHEMAS["presentation"],
        "sigma1": {str(n): list(names) for n, names in sorted(presentation.sigma1.items())},
        "sigma2": {name: {"arity": arity,
                          "source": op_term_to_sexp(s),
                          "target": op_term_to_sexp(t)}
                   for name, (arity, s, t) in sorted(presentation.sigma2.items())},
        "sigma3": {name: {"lhs": trans_term_to_sexp(lhs), "rhs": trans_term_to_sexp(rhs)}
                   for name, (lhs, rhs) in sorted(presentation.sigma3.items())},
    }


def load_presentation(doc, what="presentation"):
    _check_fields(doc, what, ("sigma1",), ("sigma2", "sigma3"))
    _check_schema_tag(doc, SCHEMAS["presentation"])
    sigma1 = {}
    for n, names in doc["sigma1"].items():
        try:
            sigma1[int(n)] = tuple(names)
        except ValueError:
            raise SchemaError(f"{what}: sigma1 keys are naturals, found {n!r}")
    sigma2 = {}
    for name, gen in doc.get("sigma2", {}).items():
        _check_fields(gen, f"{what}.sigma2[{name}]", ("arity", "source", "target"))
        sigma2[name] = (gen["arity"], parse_op_term(gen["source"]), parse_op_term(gen["target"]))
    sigma3 = {}
    for name, eq in doc.get("sigma3", {}).items():
        _check_fields(eq, f"{what}.sigma3[{name}]", ("lhs", "rhs"))
        sigma3[name] = (parse_trans_term(eq["lhs"]), parse_trans_term(eq["rhs"]))
    return PiePresentation(sigma1, sigma2, sigma3)


# -- algebra structures ----------------------------------------------------------


def load_algebra(doc, presentation, what="algebra"):
    """algebra/v1: carrier plus tabulated operation and transformation
    maps; power-category keys are JSON arrays of identifiers."""
    from .sf2monad import AlgebraStructure, FinNatTrans, eval_derived_op

    _check_fields(doc, what, ("carrier", "operations"), ("transformations",))
    _check_schema_tag(doc, SCHEMAS["algebra"])
    carrier = load_fincat(doc["carrier"], f"{what}.carrier")
    alg = AlgebraStructure(presentation, carrier, {}, {}, check=False)
    operations = {}
    for n, names in presentation.sigma1.items():
        for name in names:
            if name not in doc["operations"]:
                raise SchemaError(f"{what}: missing operation {name!r}")
            table = doc["operations"][name]
            _check_fields(table, f"{what}.operations[{name}]", ("objects", "morphisms"))
            dom = alg.power(n)
            obj_map = {tuple(r[0]): r[1] for r in table["objects"]}
            mor_map = {tuple(r[0]): r[1] for r in table["morphisms"]}
            operations[name] = FinFunctor(dom, carrier, obj_map, mor_map)
    alg.operations = operations
    transformations = {}
    for name, (arity, s, t) in presentation.sigma2.items():
        rows = doc.get("transformations", {}).get(name)
        if rows is None:
            raise SchemaError(f"{what}: missing transformation {name!r}")
        comps = {tuple(r[0]): r[1] for r in rows}
        source = eval_derived_op(s, alg)
        target = eval_derived_op(t, alg)
        transformations[name] = FinNatTrans(source, target, comps)
    return AlgebraStructure(presentation, carrier, operations, transformations)


def dumps_report(report):
    """Deterministic, byte-identical serialisation of a report."""
    return json.dumps(report, sort_keys=True, indent=2) + "\n"
