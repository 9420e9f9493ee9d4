"""Category, functor and classification machinery, checked against
brute-force oracles on small instances."""

import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from piekit import fincat as fc
from piekit.errors import (
    CyclicGraph,
    EnumerationBudgetExceeded,
    IdentityLawBroken,
    MalformedTable,
    NotAssociative,
)

from conftest import square_poset, z2_category


# -- oracles ----------------------------------------------------------------


def brute_force_flags(F):
    """Classification flags straight from the definitions: hom-set
    bijection tables, object-map bijection, exhaustive inverse and
    section/retraction search over all functors."""
    A, B = F.domain, F.codomain
    faithful = all(
        len({F.mor_map[m] for m in A.hom(a, b)}) == len(A.hom(a, b))
        for a in A.objects for b in A.objects)
    full = all(
        set(B.hom(F.obj_map[a], F.obj_map[b])) <= {F.mor_map[m] for m in A.hom(a, b)}
        for a in A.objects for b in A.objects)
    ff = faithful and full
    images = [F.obj_map[a] for a in A.objects]
    objective = len(set(images)) == len(images) and set(images) == set(B.objects)
    es = all(any(B.iso_between(F.obj_map[a], b) for a in A.objects) for b in B.objects)

    def invertibly_isomorphic(P, Q):
        return any(t.is_invertible() for t in fc.all_nat_trans(P, Q))

    candidates = fc.all_functors(B, A)
    equivalence = any(
        invertibly_isomorphic(F.then(G), fc.FinFunctor.identity(A))
        and invertibly_isomorphic(G.then(F), fc.FinFunctor.identity(B))
        for G in candidates)
    surjective_eq = ff and any(S.then(F).is_identity_functor() for S in candidates)
    injective_eq = any(
        F.then(R).is_identity_functor()
        and invertibly_isomorphic(R.then(F), fc.FinFunctor.identity(B))
        for R in candidates)
    iso = ff and objective
    return dict(fully_faithful=ff, full=full, objective=objective,
                essentially_surjective=es, equivalence=equivalence,
                surjective_equivalence=surjective_eq,
                injective_equivalence=injective_eq, isomorphism=iso)


def brute_force_freeness(cat):
    """Independent freeness decision: atoms by scanning all two-step
    factorisations, paths by breadth-first search capped at the
    morphism count."""
    atoms = []
    for m in cat.morphisms:
        if cat.is_identity(m):
            continue
        if not any(gf == m and not cat.is_identity(g) and not cat.is_identity(f)
                   for (g, f), gf in cat.table.items()):
            atoms.append(m)
    cap = cat.n_morphisms()
    paths = {v: [((), cat.identity[v])] for v in cat.objects}
    frontier = [((), cat.identity[v], v) for v in cat.objects]
    all_paths = [(p, val) for v in cat.objects for (p, val) in paths[v]]
    for _ in range(cap + 1):
        new = []
        for (p, val, start) in frontier:
            if len(p) > cap:
                return dict(free=False)
            for a in atoms:
                if cat.src[a] == cat.dst[val]:
                    new.append((p + (a,), cat.table[(a, val)], start))
        all_paths.extend((p, val) for (p, val, _) in new)
        frontier = new
        if not frontier:
            break
    else:
        return dict(free=False)
    hits = {}
    for p, val in all_paths:
        hits.setdefault(val, []).append(p)
    if any(m not in hits or len(hits[m]) != 1 for m in cat.morphisms):
        return dict(free=False)
    return dict(free=True, edges=frozenset(atoms))


# -- validate_category -------------------------------------------------------


def test_validate_path_category():
    cat = fc.validate_category(
        ["a", "b"],
        [("ia", "a", "a"), ("ib", "b", "b"), ("f", "a", "b")],
        {"a": "ia", "b": "ib"},
        {("ia", "ia"): "ia", ("ib", "ib"): "ib", ("f", "ia"): "f", ("ib", "f"): "f"})
    assert cat.n_morphisms() == 3


def test_validate_identity_law_broken():
    with pytest.raises(IdentityLawBroken):
        fc.validate_category(
            ["x"], [("e", "x", "x"), ("f", "x", "x")], {"x": "e"},
            {("e", "e"): "f", ("e", "f"): "f", ("f", "e"): "f", ("f", "f"): "f"})


def test_validate_not_associative():
    with pytest.raises(NotAssociative) as err:
        fc.validate_category(
            ["x"], [("1", "x", "x"), ("p", "x", "x"), ("q", "x", "x")], {"x": "1"},
            {("1", "1"): "1", ("1", "p"): "p", ("p", "1"): "p",
             ("1", "q"): "q", ("q", "1"): "q",
             ("p", "p"): "q", ("q", "p"): "1", ("p", "q"): "p", ("q", "q"): "q"})
    assert len(err.value.triple) == 3


def test_validate_malformed():
    with pytest.raises(MalformedTable):
        fc.validate_category(["x"], [("e", "x", "y")], {"x": "e"}, {})


def test_validate_idempotent_and_total_on_library():
    cats = [fc.terminal_category(), fc.discrete_category([0, 1]), fc.arrow_category(),
            fc.parallel_pair_category(), fc.walking_iso_category(), fc.chain_category(4),
            fc.cospan_category(), fc.span_category(), fc.free_idempotent_category(),
            fc.indiscrete_category([0, 1, 2]), z2_category(), square_poset()]
    for cat in cats:
        again = fc.validate_category(
            cat.objects, [(m, cat.src[m], cat.dst[m]) for m in cat.morphisms],
            cat.identity, cat.table)
        assert again == cat
        assert again.validate() == cat


# -- free categories ----------------------------------------------------------


def test_free_category_on_path_graph():
    graph = fc.FinGraph(("a", "b", "c"), (("e1", "a", "b"), ("e2", "b", "c")))
    cat = fc.free_category_on_graph(graph)
    assert cat.n_objects() == 3
    assert cat.n_morphisms() == 6  # 3 identities, 2 edges, 1 composite
    cat.validate()


def test_free_category_on_empty_graph():
    cat = fc.free_category_on_graph(fc.FinGraph((), ()))
    assert cat.n_objects() == 0 and cat.n_morphisms() == 0


def test_free_category_rejects_loop():
    with pytest.raises(CyclicGraph) as err:
        fc.free_category_on_graph(fc.FinGraph(("v",), (("loop", "v", "v"),)))
    assert err.value.cycle == ("loop",)


def test_is_free_roundtrip_on_path():
    graph = fc.FinGraph(("a", "b", "c"), (("e1", "a", "b"), ("e2", "b", "c")))
    decision = fc.is_free_on_graph(fc.free_category_on_graph(graph))
    assert decision.free
    assert len(decision.graph.edges) == 2


def test_z2_is_not_free():
    decision = fc.is_free_on_graph(z2_category())
    assert not decision.free
    assert decision.reason == "atom-cycle"
    assert decision.cycle == ("x",)


def test_discrete_is_free_on_edgeless_graph():
    decision = fc.is_free_on_graph(fc.discrete_category([0, 1, 2]))
    assert decision.free and decision.graph.edges == ()


def test_square_poset_not_free():
    decision = fc.is_free_on_graph(square_poset())
    assert not decision.free
    assert decision.reason == "ambiguous"


FREENESS_CORPUS = [
    ("terminal", fc.terminal_category, True),
    ("discrete3", lambda: fc.discrete_category([0, 1, 2]), True),
    ("arrow", fc.arrow_category, True),
    ("parallel-pair", fc.parallel_pair_category, True),
    ("chain3", lambda: fc.chain_category(3), True),
    ("chain4", lambda: fc.chain_category(4), True),
    ("walking-iso", fc.walking_iso_category, False),
    ("idempotent", fc.free_idempotent_category, False),
    ("z2", z2_category, False),
    ("indiscrete2", lambda: fc.indiscrete_category([0, 1]), False),
    ("square-poset", square_poset, False),
]


@pytest.mark.parametrize("name,make,expected", FREENESS_CORPUS)
def test_freeness_agrees_with_brute_force(name, make, expected):
    cat = make()
    assert cat.n_objects() <= 4 and cat.n_morphisms() <= 12
    decision = fc.is_free_on_graph(cat)
    oracle = brute_force_freeness(cat)
    assert decision.free == oracle["free"] == expected
    if decision.free:
        assert frozenset(e for (e, _, _) in decision.graph.edges) == oracle["edges"]


@settings(max_examples=25, deadline=None)
@given(st.permutations(list(range(6))))
def test_freeness_invariant_under_relabeling(perm):
    cat = fc.chain_category(3)
    mor_names = {m: f"m{perm[i]}" for i, m in enumerate(cat.morphisms)}
    relabeled = cat.relabeled({x: x for x in cat.objects}, mor_names)
    assert fc.is_free_on_graph(relabeled).free


# -- classification -------------------------------------------------------------


def test_classify_discrete_into_indiscrete():
    d2, i2 = fc.discrete_category([0, 1]), fc.indiscrete_category([0, 1])
    F = fc.FinFunctor(d2, i2, {0: 0, 1: 1},
                      {d2.identity[0]: (0, 0), d2.identity[1]: (1, 1)})
    cls = fc.classify_morphism(F)
    assert cls.objective and not cls.fully_faithful


def test_classify_indiscrete_to_terminal_is_split():
    i2, one = fc.indiscrete_category([0, 1]), fc.terminal_category()
    F = fc.FinFunctor(i2, one, {0: "*", 1: "*"}, {m: "id" for m in i2.morphisms})
    cls = fc.classify_morphism(F)
    assert cls.surjective_equivalence
    # exhaustive section search oracle: both sections are valid witnesses
    sections = [S for S in fc.all_functors(one, i2) if S.then(F).is_identity_functor()]
    assert len(sections) == 2
    assert cls.section in sections
    assert cls.section.then(F).is_identity_functor()


def test_classify_point_into_discrete():
    one, d2 = fc.terminal_category(), fc.discrete_category([0, 1])
    F = fc.FinFunctor(one, d2, {"*": 0}, {"id": d2.identity[0]})
    cls = fc.classify_morphism(F)
    assert cls.fully_faithful and not cls.equivalence


def small_functor_corpus():
    """All functors between a pile of categories with <= 4 objects and
    <= 10 morphisms."""
    cats = [fc.terminal_category(), fc.discrete_category([0, 1]), fc.arrow_category(),
            fc.walking_iso_category(), fc.indiscrete_category([0, 1]),
            fc.free_idempotent_category(), z2_category(), fc.chain_category(3)]
    out = []
    for A in cats:
        for B in cats:
            out.extend(fc.all_functors(A, B))
    return out


def test_classification_agrees_with_brute_force_defs():
    for F in small_functor_corpus():
        cls = fc.classify_morphism(F)
        oracle = brute_force_flags(F)
        for flag, expected in oracle.items():
            assert getattr(cls, flag) == expected, (flag, F)


def test_classification_witnesses_verify():
    for F in small_functor_corpus():
        cls = fc.classify_morphism(F)
        if cls.equivalence:
            G = cls.pseudo_inverse
            assert cls.unit.is_invertible() and cls.counit.is_invertible()
            cls.unit.check()
            cls.counit.check()
            assert cls.unit.source.is_identity_functor()
            assert cls.unit.target == F.then(G)
            assert cls.counit.source == G.then(F)
        if cls.surjective_equivalence:
            assert cls.section.then(F).is_identity_functor()
        if cls.injective_equivalence:
            assert F.then(cls.retraction).is_identity_functor()
        if cls.isomorphism:
            assert F.then(F.inverse()).is_identity_functor()


# -- factorisation ----------------------------------------------------------------


def test_factor_identity():
    A = fc.chain_category(3)
    H, M, G = fc.factor_objective_ff(fc.FinFunctor.identity(A))
    assert fc.classify_morphism(H).isomorphism
    assert fc.classify_morphism(G).isomorphism


def test_factor_fully_faithful_gives_iso_first_leg():
    one, d2 = fc.terminal_category(), fc.discrete_category([0, 1])
    F = fc.FinFunctor(one, d2, {"*": 0}, {"id": d2.identity[0]})
    H, M, G = fc.factor_objective_ff(F)
    assert fc.classify_morphism(H).isomorphism


def test_factor_constant_functor_middle_is_indiscrete():
    d2, one = fc.discrete_category([0, 1]), fc.terminal_category()
    F = fc.FinFunctor(d2, one, {0: "*", 1: "*"}, {m: "id" for m in d2.morphisms})
    H, M, G = fc.factor_objective_ff(F)
    assert fc.compare_categories(M, fc.indiscrete_category([0, 1]), "iso").found


def test_factorisation_property_on_corpus():
    for F in small_functor_corpus():
        H, M, G = fc.factor_objective_ff(F)
        assert fc.classify_morphism(H).objective
        assert fc.classify_morphism(G).fully_faithful
        assert H.then(G) == F


# -- comparison search ----------------------------------------------------------------


def test_compare_self_iso():
    A = fc.parallel_pair_category()
    r = fc.compare_categories(A, A, "iso")
    assert r.found and r.functor.is_identity_functor()


def test_compare_indiscrete_terminal():
    i2, one = fc.indiscrete_category([0, 1]), fc.terminal_category()
    r = fc.compare_categories(i2, one, "equivalence")
    assert r.found
    r.unit.check()
    r.counit.check()
    assert r.unit.is_invertible() and r.counit.is_invertible()
    assert not fc.compare_categories(i2, one, "iso").found


def test_compare_discrete_terminal_not_equivalent():
    assert not fc.compare_categories(fc.discrete_category([0, 1]),
                                     fc.terminal_category(), "equivalence").found


def test_compare_budget_exhaustion():
    A = fc.chain_category(3)
    with pytest.raises(EnumerationBudgetExceeded):
        fc.compare_categories(A, A, "iso", budget_limit=1)


@settings(max_examples=20, deadline=None)
@given(st.permutations([0, 1, 2]), st.permutations(list(range(6))))
def test_iso_search_finds_relabelings(obj_perm, mor_perm):
    cat = fc.chain_category(3)
    obj_map = {x: f"o{obj_perm[i]}" for i, x in enumerate(cat.objects)}
    mor_map = {m: f"m{mor_perm[i]}" for i, m in enumerate(cat.morphisms)}
    relabeled = cat.relabeled(obj_map, mor_map)
    r = fc.compare_categories(cat, relabeled, "iso")
    assert r.found
    assert r.functor.then(r.inverse).is_identity_functor()
