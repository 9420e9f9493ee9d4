"""The acceptance gate: one test per criterion, each printing a pass
line on success, at the stated tolerance (exact throughout) and within
the stated wall-clock bound."""

import time

import pytest

from piekit import classify as cl
from piekit import fincat as fc
from piekit import limits as lm
from piekit import sf2monad as sf
from piekit import weights as wt

from conftest import (
    INDEX_LIBRARY,
    corpus_pairs,
    equalizer_counterexample,
    equalizer_failing_map,
    inflate_diagram,
)
from test_fincat import brute_force_freeness
from test_sf2monad import (
    count_trees_exact,
    min_tensor,
    perturbation_carrier,
    signature_map_corpus,
    truncated_free_monoid_carrier,
    truncated_free_monoid_tensor,
)


@pytest.fixture(scope="module")
def corpus():
    return corpus_pairs()


def _report(number, name, elapsed, bound=None):
    timing = f" [{elapsed:.2f}s" + (f" < {bound}s]" if bound else "]")
    print(f"ACCEPTANCE {number} ({name}): PASS{timing}")


def test_criterion_1_pie_classification_corpus():
    start = time.monotonic()
    pie_weights = [wt.named_weight("product", n=n) for n in (1, 2, 3)]
    pie_weights += [wt.named_weight(n) for n in ("inserter", "equifier", "comma")]
    for make in INDEX_LIBRARY:
        J = make()
        if J.n_objects() <= 4:
            pie_weights += [wt.named_weight("representable", index=J, at=j)
                            for j in J.objects]
    for W in pie_weights:
        pie, cert = wt.is_pie_weight(W)
        assert pie, W.name
        assert wt.verify_certificate(wt.ob_presheaf(W), cert)
    for name in ("equalizer", "idempotent_splitting"):
        W = wt.named_weight(name)
        pie, cert = wt.is_pie_weight(W)
        assert not pie
        assert isinstance(cert, wt.Refutation)
        assert wt.verify_certificate(wt.ob_presheaf(W), cert)  # replayable
    elapsed = time.monotonic() - start
    assert elapsed < 1.0
    _report(1, "pie classification corpus", elapsed, 1)


def test_criterion_2_compiler_oracle(corpus):
    start = time.monotonic()
    assert len(corpus) >= 50
    for W, D in corpus:
        assert D.index.n_objects() <= 3
        assert all(v.n_morphisms() <= 8 for v in D.values.values())
        pie, cert = wt.is_pie_weight(W)
        assert pie
        evaluated = lm.eval_pie(lm.compile_pie(W, cert), D)
        enumerated = lm.strict_limit(W, D)
        assert fc.compare_categories(evaluated.cat, enumerated.cat, "iso").found, W.name
    elapsed = time.monotonic() - start
    assert elapsed < 60.0
    _report(2, f"compiler oracle on {len(corpus)} pairs", elapsed, 60)


def test_criterion_3_bilimit_behaviour(corpus):
    start = time.monotonic()
    for W, D in corpus:
        strict = lm.strict_limit(W, D)
        pseudo = lm.pseudo_limit(W, D)
        inclusion = lm.comparison_inclusion(W, D, strict, pseudo)
        cls = fc.classify_morphism(inclusion)
        assert cls.fully_faithful, W.name
        assert cls.equivalence, W.name      # every corpus weight is pie
    W, D = equalizer_counterexample()
    strict = lm.strict_limit(W, D)
    pseudo = lm.pseudo_limit(W, D)
    inclusion = lm.comparison_inclusion(W, D, strict, pseudo)
    cls = fc.classify_morphism(inclusion)
    assert cls.fully_faithful and not cls.essentially_surjective
    elapsed = time.monotonic() - start
    assert elapsed < 30.0
    _report(3, "comparison inclusions", elapsed, 30)


def test_criterion_4_preservation_suites(corpus):
    start = time.monotonic()
    for W, D in corpus:
        inflated, dmap, sections = inflate_diagram(D)
        assert cl.check_equivalence_preservation(W, dmap, "equivalence").conclusion_holds
        assert cl.check_equivalence_preservation(W, dmap, "surjective").conclusion_holds
        smap = lm.DiagramMap(D, inflated, sections)
        assert cl.check_equivalence_preservation(W, smap, "injective").conclusion_holds
    W, dmap = equalizer_failing_map()
    assert not cl.check_equivalence_preservation(W, dmap, "equivalence").conclusion_holds
    elapsed = time.monotonic() - start
    _report(4, "preservation suites", elapsed)


def test_criterion_5_transport(corpus):
    start = time.monotonic()
    for W, D in corpus:
        inflated, dmap, sections = inflate_diagram(D)
        result = cl.transport_splitting(W, dmap, sections)
        assert result.section.then(result.induced).is_identity_functor(), W.name
        # coherence law 1: strictly natural sections transport functorially
        smap = lm.DiagramMap(D, inflated, sections)
        functorial = lm.induced_cone_functor(W, smap, result.target_limit,
                                             result.source_limit)
        assert result.section == functorial, W.name
    # coherence law 2: composable pairs compose
    for W, D in corpus[::17]:
        mid, g_map, g_sections = inflate_diagram(D)
        top, f_map, f_sections = inflate_diagram(mid)
        composite = lm.DiagramMap(top, D, {
            j: f_map.components[j].then(g_map.components[j]) for j in W.index.objects})
        composite_sections = {j: g_sections[j].then(f_sections[j])
                              for j in W.index.objects}
        s_f = cl.transport_splitting(W, f_map, f_sections)
        s_g = cl.transport_splitting(W, g_map, g_sections)
        s_gf = cl.transport_splitting(W, composite, composite_sections)
        assert s_gf.section == s_g.section.then(s_f.section), W.name
    elapsed = time.monotonic() - start
    _report(5, "coherent transport", elapsed)


def test_criterion_6_section_six_counts():
    start = time.monotonic()
    binary = sf.Signature.discrete({2: ["b"]})
    zk1 = sf.eval_zk(binary, 1, 3)
    assert zk1.cat.n_objects() == 9
    assert len(sf.term_closure({2: ["b"]}, 1, 3)) == 9
    zk2 = sf.eval_zk(binary, 2, 3)
    assert zk2.cat.n_objects() == 102
    assert len(sf.term_closure({2: ["b"]}, 2, 3)) == 102
    for arities in [(2,), (0, 2), (1,), (0, 1, 2)]:
        for bound in range(6):
            trees = sf.enumerate_omega(bound, arities)
            expected = sum(count_trees_exact(k, arities) for k in range(bound + 1))
            assert len(trees) == expected
    elapsed = time.monotonic() - start
    assert elapsed < 5.0
    _report(6, "free 2-monad counts", elapsed, 5)


def test_criterion_7_monoidal_presentation():
    start = time.monotonic()
    P = sf.monoidal_presentation()
    one = fc.terminal_category()
    tensor1 = fc.FinFunctor(fc.product_category([one, one])[0], one,
                            {("*", "*"): "*"}, {("id", "id"): "id"})
    trunc = truncated_free_monoid_carrier()
    chain3 = fc.chain_category(3)
    assert chain3.n_morphisms() == 6
    carriers = [
        (one, tensor1, "*"),
        (trunc, truncated_free_monoid_tensor(trunc), "1"),
        (chain3, min_tensor(chain3), 2),
    ]
    for carrier, tensor, unit in carriers:
        alg = sf.strict_monoidal_structure(P, carrier, tensor, unit)
        report = sf.check_algebra(P, alg)
        assert report.all_hold, carrier.name
    carrier, tensor = perturbation_carrier()
    alg = sf.strict_monoidal_structure(P, carrier, tensor, "u")
    assert sf.check_algebra(P, alg).all_hold
    perturbed_components = dict(alg.transformations["assoc"].components)
    perturbed_components[("a", "a", "a")] = "eps"
    perturbed = fc.FinNatTrans(alg.transformations["assoc"].source,
                               alg.transformations["assoc"].target,
                               perturbed_components)
    alg2 = sf.AlgebraStructure(P, carrier, alg.operations,
                               {**alg.transformations, "assoc": perturbed})
    report = sf.check_algebra(P, alg2)
    by_name = {r.name: r for r in report.equations}
    assert not by_name["pentagon"].holds
    assert by_name["pentagon"].first_failure is not None
    elapsed = time.monotonic() - start
    _report(7, "monoidal pie presentation", elapsed)


def test_criterion_8_freeness_checks():
    start = time.monotonic()
    from conftest import square_poset, z2_category
    corpus = [
        fc.terminal_category(), fc.discrete_category([0, 1, 2]),
        fc.arrow_category(), fc.parallel_pair_category(),
        fc.chain_category(3), fc.chain_category(4),
        fc.walking_iso_category(), fc.free_idempotent_category(),
        z2_category(), fc.indiscrete_category([0, 1]), square_poset(),
        fc.free_category_on_graph(fc.FinGraph(
            ("a", "b", "c"), (("e1", "a", "b"), ("e2", "a", "c")))),
    ]
    for cat in corpus:
        assert cat.n_objects() <= 4 and cat.n_morphisms() <= 12
        decision = fc.is_free_on_graph(cat)
        oracle = brute_force_freeness(cat)
        assert decision.free == oracle["free"], cat.name
        if decision.free:
            assert frozenset(e for (e, _, _) in decision.graph.edges) == oracle["edges"]
    z2_decision = fc.is_free_on_graph(z2_category())
    assert not z2_decision.free and z2_decision.reason == "atom-cycle"
    elapsed = time.monotonic() - start
    _report(8, "freeness vs atom-path oracle", elapsed)


def test_criterion_9_objectivity_preservation():
    start = time.monotonic()
    corpus = signature_map_corpus()
    assert len(corpus) >= 10
    carrier = fc.discrete_category([0])
    for smap in corpus:
        for comp in smap.components.values():
            assert fc.classify_morphism(comp).objective
        induced, src, dst = sf.induced_free_algebra_map(smap, carrier, 2)
        images = [induced.obj_map[o] for o in src.cat.objects]
        assert len(set(images)) == len(images), "induced map not injective on objects"
        assert len(images) == dst.cat.n_objects(), "induced map not surjective on objects"
    elapsed = time.monotonic() - start
    _report(9, f"objectivity preservation on {len(corpus)} maps", elapsed)
