"""Strict and pseudo weighted limits in Cat by cone enumeration, the
primitive pie constructions, and the compiler from pie weights to
product/inserter/equifier expressions with its evaluator.

The strict limit {W, D} is computed as the category of cones at the
terminal apex: strictly natural families of functors W(j) -> D(j) and
modifications between them, which in Cat is [J, Cat](W, D).  Cone and
pseudocone categories use integer object identifiers in enumeration
order with morphism identifiers (src, components, dst) synthesised from
the modification data, so all outputs are reproducible.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .errors import Budget, CertificateMismatch, TypeMismatch
from .fincat import (
    FinCat,
    FinFunctor,
    FinNatTrans,
    all_functors,
    all_nat_trans,
    product_category,
)
from .weights import CatWeight, Decomposition, WeightMap, is_pie_weight, ob_presheaf

DEFAULT_CONE_BUDGET = 10**7


class Diagram(CatWeight):
    """A diagram J -> Cat; structurally a Cat-valued functor like a
    weight, kept as its own type for clarity at call sites."""


class DiagramMap(WeightMap):
    """A strictly natural family of functors between parallel diagrams."""


# -- strict limits --------------------------------------------------------


def _check_same_index(weight, diagram):
    if weight.index != diagram.index:
        raise TypeMismatch("weight and diagram live over different index categories")


def _cone_encoding(index, cone):
    return tuple(cone[j].encode() for j in index.objects)


def _mod_encoding(index, weight, comps):
    return tuple(tuple(comps[j][w] for w in weight.values[j].objects)
                 for j in index.objects)


@dataclass
class ConeCategory:
    """The category of strict cones and modifications, with the cone data
    needed to build induced functors."""

    cat: FinCat
    weight: CatWeight
    diagram: Diagram
    cones: tuple            # index object j -> FinFunctor, per cone
    index_of: dict          # cone encoding -> integer object id

    def cone(self, i):
        return self.cones[i]

    def object_of(self, cone):
        return self.index_of[_cone_encoding(self.weight.index, cone)]

    def morphism_id(self, src, comps, dst):
        return (src, _mod_encoding(self.weight.index, self.weight, comps), dst)


def _strict_cones(weight, diagram, budget):
    J = weight.index
    per_object = []
    for j in J.objects:
        per_object.append(all_functors(weight.values[j], diagram.values[j], budget=budget))
    cones = []
    non_ids = J.non_identities()
    for family in itertools.product(*per_object):
        budget.spend()
        cone = dict(zip(J.objects, family))
        if all(cone[J.src[f]].then(diagram.action[f]) ==
               weight.action[f].then(cone[J.dst[f]]) for f in non_ids):
            cones.append(cone)
    return cones


def _modifications(weight, diagram, alpha, beta, budget):
    """All modifications alpha -> beta as component dicts j -> {w: mor}."""
    J = weight.index
    pools = []
    for j in J.objects:
        nat = all_nat_trans(alpha[j], beta[j], budget=budget)
        pools.append([t.components for t in nat])
        if not pools[-1]:
            return []
    out = []
    non_ids = J.non_identities()
    for family in itertools.product(*pools):
        budget.spend()
        comps = dict(zip(J.objects, family))
        ok = True
        for f in non_ids:
            j, k = J.src[f], J.dst[f]
            Df, Wf = diagram.action[f], weight.action[f]
            if any(Df.mor_map[comps[j][w]] != comps[k][Wf.obj_map[w]]
                   for w in weight.values[j].objects):
                ok = False
                break
        if ok:
            out.append(comps)
    return out


def strict_limit(weight, diagram, budget_limit=DEFAULT_CONE_BUDGET):
    """Exhaustively enumerate strict cones and modifications; the object
    count of the result is the number of strict cones."""
    _check_same_index(weight, diagram)
    budget = Budget(budget_limit, "strict_limit")
    J = weight.index
    cones = _strict_cones(weight, diagram, budget)
    encodings = [_cone_encoding(J, c) for c in cones]
    index_of = {enc: i for i, enc in enumerate(encodings)}
    objects = list(range(len(cones)))
    morphisms = []
    mod_data = {}
    for i_src, alpha in enumerate(cones):
        for i_dst, beta in enumerate(cones):
            for comps in _modifications(weight, diagram, alpha, beta, budget):
                mid = (i_src, _mod_encoding(J, weight, comps), i_dst)
                morphisms.append((mid, i_src, i_dst))
                mod_data[mid] = comps
    identity = {}
    for i, alpha in enumerate(cones):
        comps = {j: {w: diagram.values[j].identity[alpha[j].obj_map[w]]
                     for w in weight.values[j].objects} for j in J.objects}
        identity[i] = (i, _mod_encoding(J, weight, comps), i)
    table = _modification_table(J, weight, diagram, morphisms, mod_data)
    cat = FinCat(objects, morphisms, identity, table, name="strict-limit")
    return ConeCategory(cat=cat, weight=weight, diagram=diagram,
                        cones=tuple(cones), index_of=index_of)


def _modification_table(J, weight, diagram, morphisms, mod_data):
    by_dst = {}
    for entry in morphisms:
        by_dst.setdefault(entry[2], []).append(entry)
    table = {}
    for (gid, gs, gd) in morphisms:
        for (fid, fs, fd) in by_dst.get(gs, ()):
            comps = {j: {w: diagram.values[j].table[(mod_data[gid][j][w], mod_data[fid][j][w])]
                         for w in weight.values[j].objects} for j in J.objects}
            table[(gid, fid)] = (fs, _mod_encoding(J, weight, comps), gd)
    return table


# -- pseudo limits --------------------------------------------------------


def _coherence_cell_pools(weight, diagram, cone, budget, include_identities):
    """Per index morphism, the invertible candidate cells
    D(f) . alpha_j => alpha_k . W(f)."""
    J = weight.index
    mors = J.morphisms if include_identities else J.non_identities()
    pools = {}
    for f in mors:
        j, k = J.src[f], J.dst[f]
        source = cone[j].then(diagram.action[f])
        target = weight.action[f].then(cone[k])
        pools[f] = all_nat_trans(source, target, invertible_only=True, budget=budget)
        if not pools[f]:
            return None
    return pools


def _coherent(weight, diagram, cells, skip_identity_pairs=True):
    """Check the composition coherence law; `cells` maps every index
    morphism (identities included) to its 2-cell.  Pairs involving an
    identity hold automatically once the identity cells are identities,
    so they are skipped unless asked for."""
    J = weight.index
    for (g, f), gf in J.table.items():
        if skip_identity_pairs and (J.is_identity(f) or J.is_identity(g)):
            continue
        lhs = cells[gf]
        rhs = cells[f].whisker_left(diagram.action[g]).then(
            cells[g].whisker_right(weight.action[f]))
        if lhs != rhs:
            return False
    return True


def _identity_cell(weight, diagram, cone, j):
    return FinNatTrans.identity(cone[j])


@dataclass
class PsConeCategory:
    """The category of pseudocones and their modifications."""

    cat: FinCat
    weight: CatWeight
    diagram: Diagram
    cones: tuple            # (functor family dict, cell dict over non-identity index morphisms)
    index_of: dict

    def object_of(self, cone, cells):
        return self.index_of[self._encoding(cone, cells)]

    def _encoding(self, cone, cells):
        J = self.weight.index
        return (_cone_encoding(J, cone),
                tuple(cells[f].encode() for f in J.non_identities()))

    def morphism_id(self, src, comps, dst):
        return (src, _mod_encoding(self.weight.index, self.weight, comps), dst)


def pseudo_limit(weight, diagram, budget_limit=DEFAULT_CONE_BUDGET,
                 assume_identity_cells=True):
    """Enumerate pseudocones (functor families with invertible coherence
    cells satisfying the unit and composition laws) and their
    modifications.

    With assume_identity_cells the definitional constraint cell(id) = id
    is pre-applied; switching it off enumerates identity-morphism cells
    too and lets the coherence laws force them, which yields the same
    category.
    """
    _check_same_index(weight, diagram)
    budget = Budget(budget_limit, "pseudo_limit")
    J = weight.index
    per_object = [all_functors(weight.values[j], diagram.values[j], budget=budget)
                  for j in J.objects]
    non_ids = J.non_identities()
    pseudocones = []
    for family in itertools.product(*per_object):
        budget.spend()
        cone = dict(zip(J.objects, family))
        pools = _coherence_cell_pools(weight, diagram, cone, budget,
                                      include_identities=not assume_identity_cells)
        if pools is None:
            continue
        enum_mors = non_ids if assume_identity_cells else J.morphisms
        for choice in itertools.product(*(pools[f] for f in enum_mors)):
            budget.spend()
            cells = dict(zip(enum_mors, choice))
            if assume_identity_cells:
                for j in J.objects:
                    cells[J.identity[j]] = _identity_cell(weight, diagram, cone, j)
            if _coherent(weight, diagram, cells,
                         skip_identity_pairs=assume_identity_cells):
                pseudocones.append((cone, {f: cells[f] for f in non_ids}))
    encodings = []
    for cone, cells in pseudocones:
        encodings.append((_cone_encoding(J, cone),
                          tuple(cells[f].encode() for f in non_ids)))
    index_of = {enc: i for i, enc in enumerate(encodings)}
    objects = list(range(len(pseudocones)))
    morphisms = []
    mod_data = {}
    for i_src, (alpha, acell) in enumerate(pseudocones):
        for i_dst, (beta, bcell) in enumerate(pseudocones):
            for comps in _ps_modifications(weight, diagram, alpha, acell, beta, bcell, budget):
                mid = (i_src, _mod_encoding(J, weight, comps), i_dst)
                morphisms.append((mid, i_src, i_dst))
                mod_data[mid] = comps
    identity = {}
    for i, (alpha, _) in enumerate(pseudocones):
        comps = {j: {w: diagram.values[j].identity[alpha[j].obj_map[w]]
                     for w in weight.values[j].objects} for j in J.objects}
        identity[i] = (i, _mod_encoding(J, weight, comps), i)
    table = _modification_table(J, weight, diagram, morphisms, mod_data)
    cat = FinCat(objects, morphisms, identity, table, name="pseudo-limit")
    return PsConeCategory(cat=cat, weight=weight, diagram=diagram,
                          cones=tuple(pseudocones), index_of=index_of)


def _ps_modifications(weight, diagram, alpha, acell, beta, bcell, budget):
    """Modifications of pseudocones: families m_j compatible with the
    coherence cells at every index morphism."""
    J = weight.index
    pools = []
    for j in J.objects:
        nat = all_nat_trans(alpha[j], beta[j], budget=budget)
        pools.append(nat)
        if not nat:
            return []
    out = []
    non_ids = J.non_identities()
    for family in itertools.product(*pools):
        budget.spend()
        m = dict(zip(J.objects, family))
        ok = True
        for f in non_ids:
            j, k = J.src[f], J.dst[f]
            lhs = m[j].whisker_left(diagram.action[f]).then(bcell[f])
            rhs = acell[f].then(m[k].whisker_right(weight.action[f]))
            if lhs != rhs:
                ok = False
                break
        if ok:
            out.append({j: dict(m[j].components) for j in J.objects})
    return out


def comparison_inclusion(weight, diagram, strict=None, pseudo=None,
                         budget_limit=DEFAULT_CONE_BUDGET):
    """The functor from the strict to the pseudo cone category sending a
    cone to itself with identity coherence cells."""
    strict = strict or strict_limit(weight, diagram, budget_limit)
    pseudo = pseudo or pseudo_limit(weight, diagram, budget_limit)
    J = weight.index
    obj_map = {}
    for i, cone in enumerate(strict.cones):
        cells = {f: FinNatTrans(
            cone[J.src[f]].then(diagram.action[f]),
            weight.action[f].then(cone[J.dst[f]]),
            {w: diagram.values[J.dst[f]].identity[
                diagram.action[f].obj_map[cone[J.src[f]].obj_map[w]]]
             for w in weight.values[J.src[f]].objects},
            check=False) for f in J.non_identities()}
        obj_map[i] = pseudo.object_of(cone, cells)
    mor_map = {}
    for m in strict.cat.morphisms:
        src, comps, dst = m
        mor_map[m] = (obj_map[src], comps, obj_map[dst])
    return FinFunctor(strict.cat, pseudo.cat, obj_map, mor_map)


# -- primitive pie constructions ------------------------------------------


@dataclass
class ProductResult:
    cat: FinCat
    projections: tuple


@dataclass
class InserterResult:
    """Universal category of pairs (a, phi: Fa -> Ga) with the projection
    and the inserted 2-cell F.P => G.P."""

    cat: FinCat
    projection: FinFunctor
    inserted: FinNatTrans


@dataclass
class EquifierResult:
    cat: FinCat
    inclusion: FinFunctor


def pie_product(factors):
    cat, projections = product_category(factors)
    return ProductResult(cat, tuple(projections))


def pie_inserter(F, G):
    if F.domain != G.domain or F.codomain != G.codomain:
        raise TypeMismatch("inserter needs parallel functors")
    A, B = F.domain, F.codomain
    objects = [(a, chi) for a in A.objects for chi in B.hom(F.obj_map[a], G.obj_map[a])]
    morphisms = []
    for f in A.morphisms:
        a, a2 = A.src[f], A.dst[f]
        for chi in B.hom(F.obj_map[a], G.obj_map[a]):
            for chi2 in B.hom(F.obj_map[a2], G.obj_map[a2]):
                if B.table[(chi2, F.mor_map[f])] == B.table[(G.mor_map[f], chi)]:
                    morphisms.append(((f, chi, chi2), (a, chi), (a2, chi2)))
    identity = {(a, chi): (A.identity[a], chi, chi) for (a, chi) in objects}
    table = {}
    ids = [m[0] for m in morphisms]
    by_tgt = {}
    for (f, c1, c2) in ids:
        by_tgt.setdefault((A.dst[f], c2), []).append((f, c1, c2))
    for (g, d1, d2) in ids:
        for (f, c1, c2) in by_tgt.get((A.src[g], d1), ()):
            table[((g, d1, d2), (f, c1, c2))] = (A.table[(g, f)], c1, d2)
    cat = FinCat(objects, morphisms, identity, table, name="inserter")
    projection = FinFunctor(cat, A, {(a, chi): a for (a, chi) in objects},
                            {m: m[0] for m in ids}, check=False)
    inserted = FinNatTrans(projection.then(F), projection.then(G),
                           {(a, chi): chi for (a, chi) in objects})
    return InserterResult(cat, projection, inserted)


def pie_equifier(phi, psi):
    if phi.source != psi.source or phi.target != psi.target:
        raise TypeMismatch("equifier needs parallel natural transformations")
    A = phi.source.domain
    keep = [a for a in A.objects if phi.components[a] == psi.components[a]]
    keep_set = set(keep)
    morphisms = [(m, A.src[m], A.dst[m]) for m in A.morphisms
                 if A.src[m] in keep_set and A.dst[m] in keep_set]
    identity = {a: A.identity[a] for a in keep}
    table = {(g, f): gf for (g, f), gf in A.table.items()
             if A.src[f] in keep_set and A.dst[f] in keep_set and A.dst[g] in keep_set}
    cat = FinCat(keep, morphisms, identity, table, name="equifier")
    inclusion = FinFunctor(cat, A, {a: a for a in keep},
                           {m: m for (m, _, _) in morphisms}, check=False)
    return EquifierResult(cat, inclusion)


def primitive_pie(kind, *args):
    if kind == "product":
        return pie_product(*args)
    if kind == "inserter":
        return pie_inserter(*args)
    if kind == "equifier":
        return pie_equifier(*args)
    raise TypeMismatch(f"unknown primitive pie kind {kind!r}")


# -- pie expressions -------------------------------------------------------


@dataclass(frozen=True)
class Leg:
    """A leg term D(action) . pi_factor into the diagram value at the
    action's target."""

    factor: int
    action: object


@dataclass(frozen=True)
class CellRef:
    kappa: int


@dataclass(frozen=True)
class IdCell:
    leg: Leg


@dataclass(frozen=True)
class WhiskerCell:
    action: object
    cell: object


@dataclass(frozen=True)
class VCompCell:
    first: object
    second: object


@dataclass(frozen=True)
class ProductNode:
    factors: tuple  # index objects


@dataclass(frozen=True)
class InserterNode:
    left: Leg
    right: Leg


@dataclass(frozen=True)
class EquifierNode:
    lhs: object
    rhs: object


@dataclass(frozen=True)
class PieExpr:
    """A well-scoped product/inserter/equifier expression over an index
    category: one leading Product node, then Inserters introducing
    numbered 2-cells, then Equifiers referencing them."""

    index: FinCat
    nodes: tuple

    def check(self):
        if not self.nodes or not isinstance(self.nodes[0], ProductNode):
            raise TypeMismatch("expression must start with its Product node")
        factors = self.nodes[0].factors
        if any(j not in self.index.objects for j in factors):
            raise TypeMismatch("product factor outside the index")
        kappas = 0

        def check_leg(leg):
            if not (0 <= leg.factor < len(factors)):
                raise TypeMismatch(f"leg factor {leg.factor} out of scope")
            if leg.action not in self.index.src:
                raise TypeMismatch(f"leg action {leg.action!r} outside the index")
            if self.index.src[leg.action] != factors[leg.factor]:
                raise TypeMismatch(f"leg action {leg.action!r} does not start at its factor")

        def check_cell(cell):
            if isinstance(cell, CellRef):
                if not (0 <= cell.kappa < kappas):
                    raise TypeMismatch(f"cell reference {cell.kappa} out of scope")
            elif isinstance(cell, IdCell):
                check_leg(cell.leg)
            elif isinstance(cell, WhiskerCell):
                if cell.action not in self.index.src:
                    raise TypeMismatch(f"whisker action {cell.action!r} outside the index")
                check_cell(cell.cell)
            elif isinstance(cell, VCompCell):
                check_cell(cell.first)
                check_cell(cell.second)
            else:
                raise TypeMismatch(f"unknown cell term {cell!r}")

        for node in self.nodes[1:]:
            if isinstance(node, ProductNode):
                raise TypeMismatch("only one Product node is allowed, first")
            if isinstance(node, InserterNode):
                check_leg(node.left)
                check_leg(node.right)
                kappas += 1
            elif isinstance(node, EquifierNode):
                check_cell(node.lhs)
                check_cell(node.rhs)
            else:
                raise TypeMismatch(f"unknown node {node!r}")
        return self


def inserted_cell_order(weight):
    """(index object, morphism) pairs naming the inserted 2-cells in
    canonical order: index objects first, then the value category's
    declared morphism order."""
    out = []
    for j in weight.index.objects:
        Wj = weight.values[j]
        for m in Wj.morphisms:
            if not Wj.is_identity(m):
                out.append((j, m))
    return tuple(out)


def compile_pie(weight, cert):
    """Compile a pie weight's limit into a PieExpr, following its
    decomposition certificate.

    One Product factor per component; one Inserter per non-identity
    morphism of each value category; Equifiers imposing functoriality of
    the inserted cells on composable pairs and naturality along every
    index morphism, with identity morphisms contributing identity cells.
    """
    if not isinstance(cert, Decomposition):
        raise CertificateMismatch("compile_pie needs a Decomposition certificate")
    from .weights import verify_certificate
    if not verify_certificate(ob_presheaf(weight), cert):
        raise CertificateMismatch("certificate does not verify against the weight")
    J = weight.index
    factor_of = {}
    connecting = {}
    for i, comp in enumerate(cert.components):
        for el in comp.elements:
            factor_of[el] = i
            connecting[el] = comp.connecting[el]

    def leg_of(el):
        return Leg(factor=factor_of[el], action=connecting[el])

    nodes = [ProductNode(tuple(comp.initial[0] for comp in cert.components))]
    kappa = {}
    order = inserted_cell_order(weight)
    for n, (j, m) in enumerate(order):
        Wj = weight.values[j]
        nodes.append(InserterNode(left=leg_of((j, Wj.src[m])), right=leg_of((j, Wj.dst[m]))))
        kappa[(j, m)] = n

    def cell_of(j, m):
        Wj = weight.values[j]
        if Wj.is_identity(m):
            return IdCell(leg_of((j, Wj.src[m])))
        return CellRef(kappa[(j, m)])

    # (E1) functoriality of the cells on composable pairs
    for j in J.objects:
        Wj = weight.values[j]
        non_ids = [m for m in Wj.morphisms if not Wj.is_identity(m)]
        for m1 in non_ids:
            for m2 in non_ids:
                if Wj.dst[m1] == Wj.src[m2]:
                    composite = Wj.table[(m2, m1)]
                    nodes.append(EquifierNode(
                        lhs=cell_of(j, composite),
                        rhs=VCompCell(CellRef(kappa[(j, m1)]), CellRef(kappa[(j, m2)])),
                    ))
    # (E2) naturality of the cells along index morphisms
    for g in J.non_identities():
        j, k = J.src[g], J.dst[g]
        Wg = weight.action[g]
        Wj = weight.values[j]
        for m in Wj.morphisms:
            if Wj.is_identity(m):
                continue
            nodes.append(EquifierNode(
                lhs=cell_of(k, Wg.mor_map[m]),
                rhs=WhiskerCell(g, CellRef(kappa[(j, m)])),
            ))
    return PieExpr(index=J, nodes=tuple(nodes)).check()


@dataclass
class PieEvaluation:
    """The folded value of a PieExpr on a diagram: the resulting category
    with rebased component projections and inserted cells."""

    cat: FinCat
    expr: PieExpr
    diagram: Diagram
    projections: tuple      # factor i -> FinFunctor cat -> D(j_i)
    cells: tuple            # kappa n -> FinNatTrans

    def leg(self, leg):
        return self.projections[leg.factor].then(self.diagram.action[leg.action])

    def cell(self, cell):
        if isinstance(cell, CellRef):
            return self.cells[cell.kappa]
        if isinstance(cell, IdCell):
            return FinNatTrans.identity(self.leg(cell.leg))
        if isinstance(cell, WhiskerCell):
            return self.cell(cell.cell).whisker_left(self.diagram.action[cell.action])
        if isinstance(cell, VCompCell):
            return self.cell(cell.first).then(self.cell(cell.second))
        raise TypeMismatch(f"unknown cell term {cell!r}")


def eval_pie(expr, diagram, budget_limit=DEFAULT_CONE_BUDGET):
    """Fold a PieExpr over a diagram through the primitive constructions,
    rebasing projections and inserted cells at each step."""
    expr.check()
    if expr.index != diagram.index:
        raise TypeMismatch("expression scoped to a different index category")
    budget = Budget(budget_limit, "eval_pie")
    product_node = expr.nodes[0]
    result = pie_product([diagram.values[j] for j in product_node.factors])
    state = PieEvaluation(cat=result.cat, expr=expr, diagram=diagram,
                          projections=tuple(result.projections), cells=())
    for node in expr.nodes[1:]:
        budget.spend(max(1, state.cat.n_morphisms()))
        if isinstance(node, InserterNode):
            u, v = state.leg(node.left), state.leg(node.right)
            if u.codomain != v.codomain:
                raise TypeMismatch("inserter legs target different diagram values")
            ins = pie_inserter(u, v)
            q = ins.projection
            state = PieEvaluation(
                cat=ins.cat, expr=expr, diagram=diagram,
                projections=tuple(q.then(p) for p in state.projections),
                cells=tuple(c.whisker_right(q) for c in state.cells) + (ins.inserted,),
            )
        elif isinstance(node, EquifierNode):
            lhs, rhs = state.cell(node.lhs), state.cell(node.rhs)
            if lhs.source != rhs.source or lhs.target != rhs.target:
                raise TypeMismatch("equified cells are not parallel")
            eq = pie_equifier(lhs, rhs)
            q = eq.inclusion
            state = PieEvaluation(
                cat=eq.cat, expr=expr, diagram=diagram,
                projections=tuple(q.then(p) for p in state.projections),
                cells=tuple(c.whisker_right(q) for c in state.cells),
            )
    return state


def assembly_functor(weight, cert, evaluation, cone_category):
    """The canonical comparison from an evaluated pie expression to the
    strict cone category: each object's projections and cell components
    assemble into a cone.  Verified functorial; bijective for the
    compiled expression of the certificate."""
    J = weight.index
    D = evaluation.diagram
    factor_of, connecting = {}, {}
    for i, comp in enumerate(cert.components):
        for el in comp.elements:
            factor_of[el] = i
            connecting[el] = comp.connecting[el]
    legs = {el: evaluation.projections[factor_of[el]].then(D.action[connecting[el]])
            for el in factor_of}
    kappa_of = {pair: n for n, pair in enumerate(inserted_cell_order(weight))}

    def cone_at(o):
        cone = {}
        for j in J.objects:
            Wj, Dj = weight.values[j], D.values[j]
            obj_map = {w: legs[(j, w)].obj_map[o] for w in Wj.objects}
            mor_map = {}
            for m in Wj.morphisms:
                if Wj.is_identity(m):
                    mor_map[m] = Dj.identity[obj_map[Wj.src[m]]]
                else:
                    mor_map[m] = evaluation.cells[kappa_of[(j, m)]].components[o]
            cone[j] = FinFunctor(Wj, Dj, obj_map, mor_map)
        return cone

    obj_map = {o: cone_category.object_of(cone_at(o)) for o in evaluation.cat.objects}
    mor_map = {}
    for h in evaluation.cat.morphisms:
        src, dst = evaluation.cat.src[h], evaluation.cat.dst[h]
        comps = {j: {w: legs[(j, w)].mor_map[h] for w in weight.values[j].objects}
                 for j in J.objects}
        mor_map[h] = cone_category.morphism_id(obj_map[src], comps, obj_map[dst])
    return FinFunctor(evaluation.cat, cone_category.cat, obj_map, mor_map)


def induced_cone_functor(weight, dmap, source_limit, target_limit):
    """{W, f}: the functor of strict cone categories induced by a
    pointwise map of diagrams (post-composition of cones and whiskering
    of modifications)."""
    J = weight.index
    obj_map = {}
    for i, cone in enumerate(source_limit.cones):
        image = {j: cone[j].then(dmap.components[j]) for j in J.objects}
        obj_map[i] = target_limit.object_of(image)
    mor_map = {}
    for m in source_limit.cat.morphisms:
        src, comps, dst = m
        image = {j: {w: dmap.components[j].mor_map[comps[J.objects.index(j)][wi]]
                     for wi, w in enumerate(weight.values[j].objects)}
                 for j in J.objects}
        mor_map[m] = target_limit.morphism_id(obj_map[src], image, obj_map[dst])
    return FinFunctor(source_limit.cat, target_limit.cat, obj_map, mor_map)


def eval_with_transport(weight, cert, expr, diagram, codiagram, dmap, sections):
    """Evaluate a compiled expression over both ends of a pointwise split
    surjective equivalence of diagrams, building the stagewise comparison
    phi and its exact section sigma.

    Sections lift through Product nodes componentwise, through Inserter
    nodes by the unique preimage under the fully faithful component, and
    through Equifier nodes by restriction.  Returns (evaluation over the
    source, evaluation over the target, phi, sigma) with phi . sigma the
    identity on the nose.
    """
    expr.check()
    product_node = expr.nodes[0]
    factors = product_node.factors
    resD = pie_product([diagram.values[j] for j in factors])
    resE = pie_product([codiagram.values[j] for j in factors])
    stateD = PieEvaluation(cat=resD.cat, expr=expr, diagram=diagram,
                           projections=tuple(resD.projections), cells=())
    stateE = PieEvaluation(cat=resE.cat, expr=expr, diagram=codiagram,
                           projections=tuple(resE.projections), cells=())
    phi = FinFunctor(
        resD.cat, resE.cat,
        {o: tuple(dmap.components[j].obj_map[oi] for j, oi in zip(factors, o))
         for o in resD.cat.objects},
        {m: tuple(dmap.components[j].mor_map[mi] for j, mi in zip(factors, m))
         for m in resD.cat.morphisms},
        check=False)
    sigma = FinFunctor(
        resE.cat, resD.cat,
        {o: tuple(sections[j].obj_map[oi] for j, oi in zip(factors, o))
         for o in resE.cat.objects},
        {m: tuple(sections[j].mor_map[mi] for j, mi in zip(factors, m))
         for m in resE.cat.morphisms},
        check=False)

    for node in expr.nodes[1:]:
        if isinstance(node, InserterNode):
            j = expr.index.dst[node.left.action]
            fj = dmap.components[j]
            uD, vD = stateD.leg(node.left), stateD.leg(node.right)
            uE, vE = stateE.leg(node.left), stateE.leg(node.right)
            insD = pie_inserter(uD, vD)
            insE = pie_inserter(uE, vE)
            phi_obj = {(a, chi): (phi.obj_map[a], fj.mor_map[chi])
                       for (a, chi) in insD.cat.objects}
            phi_mor = {(h, c1, c2): (phi.mor_map[h], fj.mor_map[c1], fj.mor_map[c2])
                       for (h, c1, c2) in insD.cat.morphisms}
            new_phi = FinFunctor(insD.cat, insE.cat, phi_obj, phi_mor, check=False)
            Dj = diagram.values[j]
            sig_obj = {}
            for (a2, chi2) in insE.cat.objects:
                back = sigma.obj_map[a2]
                lift = [c for c in Dj.hom(uD.obj_map[back], vD.obj_map[back])
                        if fj.mor_map[c] == chi2]
                if len(lift) != 1:
                    raise TypeMismatch("section lift through inserter is not unique; "
                                       "component is not fully faithful")
                sig_obj[(a2, chi2)] = (back, lift[0])
            sig_mor = {}
            for (h2, c1, c2) in insE.cat.morphisms:
                srco = insE.cat.src[(h2, c1, c2)]
                dsto = insE.cat.dst[(h2, c1, c2)]
                sig_mor[(h2, c1, c2)] = (sigma.mor_map[h2],
                                         sig_obj[srco][1], sig_obj[dsto][1])
            new_sigma = FinFunctor(insE.cat, insD.cat, sig_obj, sig_mor)
            qD, qE = insD.projection, insE.projection
            stateD = PieEvaluation(cat=insD.cat, expr=expr, diagram=diagram,
                                   projections=tuple(qD.then(p) for p in stateD.projections),
                                   cells=tuple(c.whisker_right(qD) for c in stateD.cells)
                                   + (insD.inserted,))
            stateE = PieEvaluation(cat=insE.cat, expr=expr, diagram=codiagram,
                                   projections=tuple(qE.then(p) for p in stateE.projections),
                                   cells=tuple(c.whisker_right(qE) for c in stateE.cells)
                                   + (insE.inserted,))
            phi, sigma = new_phi, new_sigma
        elif isinstance(node, EquifierNode):
            eqD = pie_equifier(stateD.cell(node.lhs), stateD.cell(node.rhs))
            eqE = pie_equifier(stateE.cell(node.lhs), stateE.cell(node.rhs))
            keepD = set(eqD.cat.objects)
            keepE = set(eqE.cat.objects)
            if any(phi.obj_map[o] not in keepE for o in keepD):
                raise TypeMismatch("comparison does not restrict through the equifier")
            if any(sigma.obj_map[o] not in keepD for o in keepE):
                raise TypeMismatch("section does not restrict through the equifier")
            new_phi = FinFunctor(eqD.cat, eqE.cat,
                                 {o: phi.obj_map[o] for o in eqD.cat.objects},
                                 {m: phi.mor_map[m] for m in eqD.cat.morphisms},
                                 check=False)
            new_sigma = FinFunctor(eqE.cat, eqD.cat,
                                   {o: sigma.obj_map[o] for o in eqE.cat.objects},
                                   {m: sigma.mor_map[m] for m in eqE.cat.morphisms},
                                   check=False)
            qD, qE = eqD.inclusion, eqE.inclusion
            stateD = PieEvaluation(cat=eqD.cat, expr=expr, diagram=diagram,
                                   projections=tuple(qD.then(p) for p in stateD.projections),
                                   cells=tuple(c.whisker_right(qD) for c in stateD.cells))
            stateE = PieEvaluation(cat=eqE.cat, expr=expr, diagram=codiagram,
                                   projections=tuple(qE.then(p) for p in stateE.projections),
                                   cells=tuple(c.whisker_right(qE) for c in stateE.cells))
            phi, sigma = new_phi, new_sigma
    return stateD, stateE, phi, sigma
