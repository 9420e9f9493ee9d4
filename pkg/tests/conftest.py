"""Shared corpus builders: standard categories, the pie-weight corpus,
deterministic diagram assignment, and inflation helpers."""

from __future__ import annotations

import itertools

import pytest

from piekit import fincat as fc
from piekit import limits as lm
from piekit import weights as wt


def z2_category():
    return fc.monoid_category(
        ["1", "x"], "1",
        {("1", "1"): "1", ("1", "x"): "x", ("x", "1"): "x", ("x", "x"): "1"},
        name="Z2")


def square_poset():
    """The commutative square poset 2x2 (diagonal factors two ways)."""
    cat, _ = fc.product_category([fc.chain_category(2), fc.chain_category(2)])
    return cat


VALUE_LIBRARY = (
    fc.terminal_category,
    fc.arrow_category,
    fc.walking_iso_category,
    lambda: fc.discrete_category((0, 1)),
    lambda: fc.chain_category(3),
    fc.parallel_pair_category,
)

INDEX_LIBRARY = (
    fc.terminal_category,
    lambda: fc.discrete_category(("j0", "j1")),
    lambda: fc.discrete_category(("j0", "j1", "j2")),
    lambda: fc.chain_category(2),
    lambda: fc.chain_category(3),
    fc.parallel_pair_category,
    fc.cospan_category,
    fc.span_category,
    fc.free_idempotent_category,
)


def cotensor_by_arrow_weight():
    """One-object index; value the walking arrow.  Pie: two components,
    one inserter spanning them."""
    one = fc.terminal_category()
    return wt.CatWeight(one, {"*": fc.arrow_category()},
                        {"id": fc.FinFunctor.identity(fc.arrow_category())},
                        name="cotensor-arrow")


def cotensor_by_parallel_pair_weight():
    one = fc.terminal_category()
    pp = fc.parallel_pair_category()
    return wt.CatWeight(one, {"*": pp}, {"id": fc.FinFunctor.identity(pp)},
                        name="cotensor-pp")


def pie_weight_corpus():
    """The named pie weights plus representables over every library index
    with at most 4 objects, plus the cotensor weights."""
    out = [wt.named_weight("product", n=1), wt.named_weight("product", n=2),
           wt.named_weight("product", n=3), wt.named_weight("inserter"),
           wt.named_weight("equifier"), wt.named_weight("comma"),
           cotensor_by_arrow_weight(), cotensor_by_parallel_pair_weight()]
    for make in INDEX_LIBRARY:
        J = make()
        if J.n_objects() <= 4:
            for j in J.objects:
                out.append(wt.named_weight("representable", index=J, at=j))
    return out


def diagrams_over(index, count, stride=5, library=VALUE_LIBRARY):
    """The first `count` diagrams over the index, sampled with a stride
    from the canonical enumeration (value assignments in library order,
    actions exhaustively)."""
    J = index
    non_ids = J.non_identities()
    cats = [make() for make in library]

    def generate():
        for values_choice in itertools.product(range(len(cats)), repeat=len(J.objects)):
            values = {j: cats[i] for j, i in zip(J.objects, values_choice)}
            pools = []
            ok = True
            for f in non_ids:
                fs = fc.all_functors(values[J.src[f]], values[J.dst[f]])
                if not fs:
                    ok = False
                    break
                pools.append(fs)
            if not ok:
                continue
            for choice in itertools.product(*pools):
                action = dict(zip(non_ids, choice))
                for j in J.objects:
                    action[J.identity[j]] = fc.FinFunctor.identity(values[j])
                if all(action[f].then(action[g]) == action[gf]
                       for (g, f), gf in J.table.items()):
                    yield lm.Diagram(J, values, action, check=False)

    picked = []
    for i, diagram in enumerate(generate()):
        if i % stride == 0:
            picked.append(diagram)
        if len(picked) == count:
            break
    return picked


def corpus_pairs(per_weight=3):
    """(pie weight, diagram) pairs: at least 50 with default settings,
    plus a few hand-picked larger instances."""
    pairs = []
    for weight in pie_weight_corpus():
        for diagram in diagrams_over(weight.index, per_weight):
            pairs.append((weight, diagram))
    pairs.extend(_stress_pairs())
    return pairs


def _constant_actionless(J, values):
    action = {J.identity[j]: fc.FinFunctor.identity(values[j]) for j in J.objects}
    return action


def _stress_pairs():
    chain3 = fc.chain_category(3)
    pp = fc.parallel_pair_category()
    two = fc.arrow_category()
    out = []
    W = wt.named_weight("product", n=3)
    J = W.index
    values = {j: chain3 for j in J.objects}
    out.append((W, lm.Diagram(J, values, _constant_actionless(J, values))))
    W = wt.named_weight("inserter")
    J = W.index
    fs = fc.all_functors(chain3, chain3)
    values = {"a": chain3, "b": chain3}
    action = _constant_actionless(J, values)
    action["s"], action["t"] = fs[1], fs[len(fs) // 2]
    out.append((W, lm.Diagram(J, values, action)))
    W = wt.named_weight("comma")
    J = W.index
    values = {"a": two, "b": pp, "c": chain3}
    action = _constant_actionless(J, values)
    action["f"] = fc.all_functors(two, chain3)[2]
    action["g"] = fc.all_functors(pp, chain3)[1]
    out.append((W, lm.Diagram(J, values, action)))
    return out


def inflate_category(C):
    """C x I with the projection (a split surjective equivalence) and the
    canonical strictly natural section."""
    I = fc.walking_iso_category()
    prod, projs = fc.product_category([C, I])
    proj = projs[0]
    section = fc.FinFunctor(C, prod, {x: (x, 0) for x in C.objects},
                            {m: (m, "i0") for m in C.morphisms})
    return prod, proj, section


def inflate_diagram(diagram):
    """The pointwise inflated diagram with its projection map (pointwise
    split surjective equivalence) and strictly natural sections."""
    J = diagram.index
    values, projs, sections = {}, {}, {}
    for j in J.objects:
        values[j], projs[j], sections[j] = inflate_category(diagram.values[j])
    action = {}
    for f in J.morphisms:
        jsrc, jdst = J.src[f], J.dst[f]
        action[f] = fc.FinFunctor(
            values[jsrc], values[jdst],
            {o: (diagram.action[f].obj_map[o[0]], o[1]) for o in values[jsrc].objects},
            {m: (diagram.action[f].mor_map[m[0]], m[1]) for m in values[jsrc].morphisms},
            check=False)
    inflated = lm.Diagram(J, values, action, check=False)
    dmap = lm.DiagramMap(inflated, diagram, projs)
    return inflated, dmap, sections


def equalizer_counterexample():
    """The stored instance: parallel functors that are isomorphic but not
    equal, with no strictly equalizing object."""
    W = wt.named_weight("equalizer")
    J = W.index
    one = fc.terminal_category()
    I = fc.walking_iso_category()
    D = lm.Diagram(J, {"a": one, "b": I},
                   {"ia": fc.FinFunctor.identity(one),
                    "ib": fc.FinFunctor.identity(I),
                    "s": fc.FinFunctor(one, I, {"*": 0}, {"id": "i0"}),
                    "t": fc.FinFunctor(one, I, {"*": 1}, {"id": "i1"})})
    return W, D


def equalizer_failing_map():
    """A pointwise surjective equivalence out of the counterexample under
    which the equalizer-weighted limit fails to be an equivalence."""
    W, D = equalizer_counterexample()
    J = W.index
    one = fc.terminal_category()
    I = fc.walking_iso_category()
    D2 = lm.Diagram(J, {"a": one, "b": one},
                    {m: fc.FinFunctor.identity(one) for m in J.morphisms})
    collapse = fc.FinFunctor(I, one, {0: "*", 1: "*"}, {m: "id" for m in I.morphisms})
    dmap = lm.DiagramMap(D, D2, {"a": fc.FinFunctor.identity(one), "b": collapse})
    return W, dmap


@pytest.fixture(scope="session")
def pie_corpus():
    return corpus_pairs()


@pytest.fixture(scope="session")
def weight_corpus():
    return pie_weight_corpus()
