"""Cone enumeration, primitive pie constructions, and the compiler
oracle: evaluated expressions isomorphic to enumerated limits."""

import itertools

import pytest

from piekit import fincat as fc
from piekit import limits as lm
from piekit import weights as wt
from piekit.errors import CertificateMismatch, TypeMismatch

from conftest import (
    cotensor_by_arrow_weight,
    cotensor_by_parallel_pair_weight,
    diagrams_over,
    equalizer_counterexample,
)


# -- oracle: the comma category built directly --------------------------------


def comma_category(F, G):
    A, B, C = F.domain, G.domain, F.codomain
    objs = [(a, b, m) for a in A.objects for b in B.objects
            for m in C.hom(F.obj_map[a], G.obj_map[b])]
    mors = []
    for f in A.morphisms:
        for g in B.morphisms:
            for (a, b, m) in objs:
                if A.src[f] != a or B.src[g] != b:
                    continue
                for m2 in C.hom(F.obj_map[A.dst[f]], G.obj_map[B.dst[g]]):
                    if C.table[(m2, F.mor_map[f])] == C.table[(G.mor_map[g], m)]:
                        mors.append(((f, g, m, m2), (a, b, m),
                                     (A.dst[f], B.dst[g], m2)))
    ident = {(a, b, m): (A.identity[a], B.identity[b], m, m) for (a, b, m) in objs}
    table = {}
    by_dst = {}
    for entry in mors:
        by_dst.setdefault(entry[2], []).append(entry)
    for (g2, s2, d2) in mors:
        for (g1, s1, d1) in by_dst.get(s2, ()):
            table[(g2, g1)] = (A.table[(g2[0], g1[0])], B.table[(g2[1], g1[1])],
                               g1[2], g2[3])
    return fc.FinCat(objs, mors, ident, table)


def make_diagram(W, values, actions):
    J = W.index
    action = {J.identity[j]: fc.FinFunctor.identity(values[j]) for j in J.objects}
    action.update(actions)
    return lm.Diagram(J, values, action)


# -- strict limits ----------------------------------------------------------------


def test_identity_weight_limit_is_the_value():
    W = wt.named_weight("product", n=1)
    chain3 = fc.chain_category(3)
    D = make_diagram(W, {"x0": chain3}, {})
    L = lm.strict_limit(W, D)
    assert fc.compare_categories(L.cat, chain3, "iso").found


def test_product_weight_limit_is_the_product():
    W = wt.named_weight("product", n=2)
    two, chain3 = fc.arrow_category(), fc.chain_category(3)
    D = make_diagram(W, {"x0": two, "x1": chain3}, {})
    L = lm.strict_limit(W, D)
    prod, _ = fc.product_category([two, chain3])
    assert fc.compare_categories(L.cat, prod, "iso").found


def test_inserter_weight_limit_matches_primitive():
    W = wt.named_weight("inserter")
    two, chain3 = fc.arrow_category(), fc.chain_category(3)
    functors = fc.all_functors(two, chain3)
    F, G = functors[1], functors[2]
    D = make_diagram(W, {"a": two, "b": chain3}, {"s": F, "t": G})
    L = lm.strict_limit(W, D)
    ins = lm.pie_inserter(F, G)
    assert fc.compare_categories(L.cat, ins.cat, "iso").found


def test_mismatched_index_rejected():
    W = wt.named_weight("product", n=2)
    D = make_diagram(wt.named_weight("product", n=1),
                     {"x0": fc.terminal_category()}, {})
    with pytest.raises(TypeMismatch):
        lm.strict_limit(W, D)


# -- pseudo limits ------------------------------------------------------------------


def test_pseudo_limit_over_one_object_index():
    W = cotensor_by_arrow_weight()
    chain3 = fc.chain_category(3)
    D = make_diagram(W, {"*": chain3}, {})
    Ls, Lp = lm.strict_limit(W, D), lm.pseudo_limit(W, D)
    inc = lm.comparison_inclusion(W, D, Ls, Lp)
    assert fc.classify_morphism(inc).isomorphism


def test_equalizer_counterexample_strict_empty_pseudo_not():
    W, D = equalizer_counterexample()
    Ls, Lp = lm.strict_limit(W, D), lm.pseudo_limit(W, D)
    assert Ls.cat.n_objects() == 0
    assert Lp.cat.n_objects() > 0
    inc = lm.comparison_inclusion(W, D, Ls, Lp)
    cls = fc.classify_morphism(inc)
    assert cls.fully_faithful and not cls.essentially_surjective


def test_product_weight_comparison_is_surjective_equivalence():
    W = wt.named_weight("product", n=2)
    two, I = fc.arrow_category(), fc.walking_iso_category()
    D = make_diagram(W, {"x0": two, "x1": I}, {})
    inc = lm.comparison_inclusion(W, D)
    cls = fc.classify_morphism(inc)
    assert cls.surjective_equivalence


def test_pseudo_count_at_least_strict_on_corpus(pie_corpus):
    for W, D in pie_corpus[:20]:
        Ls, Lp = lm.strict_limit(W, D), lm.pseudo_limit(W, D)
        assert Lp.cat.n_objects() >= Ls.cat.n_objects()


def test_unit_coherence_pruning_is_sound():
    E = fc.free_idempotent_category()
    I = fc.walking_iso_category()
    Wr = wt.named_weight("representable", index=E, at="o")
    collapse = fc.FinFunctor(I, I, {0: 0, 1: 0},
                             {"i0": "i0", "i1": "i0", "u": "i0", "w": "i0"})
    D = make_diagram(Wr, {"o": I}, {"e": collapse})
    pruned = lm.pseudo_limit(Wr, D, assume_identity_cells=True)
    unpruned = lm.pseudo_limit(Wr, D, assume_identity_cells=False)
    assert pruned.cat == unpruned.cat
    W, D = equalizer_counterexample()
    assert lm.pseudo_limit(W, D, assume_identity_cells=True).cat == \
        lm.pseudo_limit(W, D, assume_identity_cells=False).cat


# -- primitive pie ----------------------------------------------------------------------


def test_empty_product_is_terminal():
    res = lm.pie_product([])
    assert res.cat.n_objects() == 1 and res.cat.n_morphisms() == 1


def test_inserter_over_point_domain():
    one, chain3 = fc.terminal_category(), fc.chain_category(3)
    F = fc.FinFunctor(one, chain3, {"*": 0}, {"id": (0, 0)})
    G = fc.FinFunctor(one, chain3, {"*": 2}, {"id": (2, 2)})
    ins = lm.pie_inserter(F, G)
    assert ins.cat.n_objects() == len(chain3.hom(0, 2))
    ins.inserted.check()


def test_inserter_rejects_non_parallel():
    one, two = fc.terminal_category(), fc.arrow_category()
    F = fc.FinFunctor(one, two, {"*": 0}, {"id": "i0"})
    G = fc.FinFunctor.identity(two)
    with pytest.raises(TypeMismatch):
        lm.pie_inserter(F, G)


def test_equifier_of_equal_cells_is_everything():
    two, chain3 = fc.arrow_category(), fc.chain_category(3)
    F, G = fc.all_functors(two, chain3)[1], fc.all_functors(two, chain3)[2]
    cells = fc.all_nat_trans(F, G)
    if not cells:
        pytest.skip("no cells between the chosen functors")
    phi = cells[0]
    eq = lm.pie_equifier(phi, phi)
    assert set(eq.cat.objects) == set(two.objects)


def test_equifier_filters_objects():
    one, I = fc.terminal_category(), fc.walking_iso_category()
    d2 = fc.discrete_category([0, 1])
    F = fc.FinFunctor(d2, I, {0: 0, 1: 1},
                      {d2.identity[0]: "i0", d2.identity[1]: "i1"})
    phi = fc.FinNatTrans(F, F, {0: "i0", 1: "i1"})
    idem = fc.FinNatTrans(F, F, {0: "i0", 1: "i1"})
    eq = lm.pie_equifier(phi, idem)
    assert set(eq.cat.objects) == {0, 1}


# -- compile and eval ----------------------------------------------------------------------


def test_compile_product_weight_is_product_only():
    W = wt.named_weight("product", n=2)
    pie, cert = wt.is_pie_weight(W)
    expr = lm.compile_pie(W, cert)
    assert len(expr.nodes) == 1
    assert isinstance(expr.nodes[0], lm.ProductNode)
    assert len(expr.nodes[0].factors) == 2


def test_compile_inserter_weight_shape():
    W = wt.named_weight("inserter")
    pie, cert = wt.is_pie_weight(W)
    expr = lm.compile_pie(W, cert)
    kinds = [type(n).__name__ for n in expr.nodes]
    assert kinds == ["ProductNode", "InserterNode"]


def test_compile_rejects_foreign_certificate():
    W = wt.named_weight("inserter")
    W2 = wt.named_weight("comma")
    _, cert2 = wt.is_pie_weight(W2)
    with pytest.raises(CertificateMismatch):
        lm.compile_pie(W, cert2)
    _, refutation = wt.is_pie_weight(wt.named_weight("equalizer"))
    with pytest.raises(CertificateMismatch):
        lm.compile_pie(W, refutation)


def test_eval_compiled_comma_is_the_comma_category():
    W = wt.named_weight("comma")
    two, d2, chain3 = fc.arrow_category(), fc.discrete_category([0, 1]), fc.chain_category(3)
    F = fc.all_functors(two, chain3)[2]
    G = fc.all_functors(d2, chain3)[1]
    D = make_diagram(W, {"a": two, "b": d2, "c": chain3}, {"f": F, "g": G})
    pie, cert = wt.is_pie_weight(W)
    ev = lm.eval_pie(lm.compile_pie(W, cert), D)
    oracle = comma_category(F, G)
    assert fc.compare_categories(ev.cat, oracle, "iso").found
    assert fc.compare_categories(ev.cat, lm.strict_limit(W, D).cat, "iso").found


def test_eval_compiled_cotensor_by_arrow_is_arrow_category_of_value():
    W = cotensor_by_arrow_weight()
    chain3 = fc.chain_category(3)
    D = make_diagram(W, {"*": chain3}, {})
    pie, cert = wt.is_pie_weight(W)
    expr = lm.compile_pie(W, cert)
    # two components, one inserter spanning them
    assert len(expr.nodes[0].factors) == 2
    ev = lm.eval_pie(expr, D)
    assert ev.cat.n_objects() == chain3.n_morphisms()
    assert fc.compare_categories(ev.cat, lm.strict_limit(W, D).cat, "iso").found


def test_equifier_relations_engage_on_composing_values():
    """A weight whose value category has a composable pair of
    non-identity morphisms exercises the functoriality equifiers."""
    one = fc.terminal_category()
    chain3 = fc.chain_category(3)
    W = wt.CatWeight(one, {"*": chain3}, {"id": fc.FinFunctor.identity(chain3)})
    pie, cert = wt.is_pie_weight(W)
    assert pie
    expr = lm.compile_pie(W, cert)
    assert any(isinstance(n, lm.EquifierNode) for n in expr.nodes)
    P = fc.parallel_pair_category()
    D = make_diagram(W, {"*": P}, {})
    ev = lm.eval_pie(expr, D)
    L = lm.strict_limit(W, D)
    assert fc.compare_categories(ev.cat, L.cat, "iso").found


def test_naturality_equifiers_engage_across_index():
    """Representable over the idempotent index: the action collapses the
    value, exercising the whiskering equifiers."""
    E = fc.free_idempotent_category()
    W = wt.named_weight("representable", index=E, at="o")
    I = fc.walking_iso_category()
    collapse = fc.FinFunctor(I, I, {0: 0, 1: 0},
                             {"i0": "i0", "i1": "i0", "u": "i0", "w": "i0"})
    D = make_diagram(W, {"o": I}, {"e": collapse})
    pie, cert = wt.is_pie_weight(W)
    ev = lm.eval_pie(lm.compile_pie(W, cert), D)
    L = lm.strict_limit(W, D)
    assert fc.compare_categories(ev.cat, L.cat, "iso").found


def test_compiler_oracle_across_corpus(pie_corpus):
    for W, D in pie_corpus:
        pie, cert = wt.is_pie_weight(W)
        assert pie
        ev = lm.eval_pie(lm.compile_pie(W, cert), D)
        L = lm.strict_limit(W, D)
        assert fc.compare_categories(ev.cat, L.cat, "iso").found, W.name


def test_assembly_functor_is_isomorphism(pie_corpus):
    for W, D in pie_corpus[:25]:
        pie, cert = wt.is_pie_weight(W)
        expr = lm.compile_pie(W, cert)
        ev = lm.eval_pie(expr, D)
        L = lm.strict_limit(W, D)
        asm = lm.assembly_functor(W, cert, ev, L)
        assert fc.classify_morphism(asm).isomorphism


def test_expression_scope_checks():
    J = wt.named_weight("inserter").index
    bad = lm.PieExpr(index=J, nodes=(
        lm.ProductNode(("a",)),
        lm.EquifierNode(lm.CellRef(0), lm.CellRef(0))))
    with pytest.raises(TypeMismatch):
        bad.check()
    bad = lm.PieExpr(index=J, nodes=(
        lm.ProductNode(("a",)),
        lm.InserterNode(lm.Leg(2, "s"), lm.Leg(0, "s"))))
    with pytest.raises(TypeMismatch):
        bad.check()
