"""Cat-valued weights on a finite index category, Set-valued presheaves,
the category of elements, and the pie decision procedure.

Index categories are locally discrete (ordinary) finite categories; the
variance convention is covariant throughout (functors J -> Cat resp.
J -> Set), with colimit-style weights handled by dualising the index
explicitly.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import InvalidSection, TypeMismatch, UnknownWeightName
from .fincat import (
    FinCat,
    FinFunctor,
    arrow_category,
    classify_morphism,
    cospan_category,
    discrete_category,
    free_idempotent_category,
    parallel_pair_category,
    terminal_category,
)


class SetPresheaf:
    """A covariant Set-valued functor on a finite index category: value
    sets per object, a function per morphism."""

    __slots__ = ("index", "values", "action")

    def __init__(self, index, values, action, check=True):
        self.index = index
        self.values = {j: tuple(v) for j, v in values.items()}
        self.action = {f: dict(a) for f, a in action.items()}
        if check:
            self.check()

    def check(self):
        J = self.index
        for j in J.objects:
            if j not in self.values:
                raise TypeMismatch(f"presheaf lacks a value at {j!r}")
        for f in J.morphisms:
            act = self.action.get(f)
            if act is None:
                raise TypeMismatch(f"presheaf lacks an action at {f!r}")
            dom, cod = self.values[J.src[f]], self.values[J.dst[f]]
            if set(act.keys()) != set(dom) or not set(act.values()) <= set(cod):
                raise TypeMismatch(f"action at {f!r} is not a function between the value sets")
        for j in J.objects:
            i = J.identity[j]
            if any(self.action[i][x] != x for x in self.values[j]):
                raise TypeMismatch(f"identity at {j!r} does not act as the identity")
        for (g, f), gf in J.table.items():
            for x in self.values[J.src[f]]:
                if self.action[gf][x] != self.action[g][self.action[f][x]]:
                    raise TypeMismatch(f"functoriality fails on ({g!r}, {f!r})")
        return self

    def apply(self, f, x):
        return self.action[f][x]

    def elements(self):
        """All (j, x) pairs in canonical order."""
        return tuple((j, x) for j in self.index.objects for x in self.values[j])

    def __eq__(self, other):
        if not isinstance(other, SetPresheaf):
            return NotImplemented
        return (self.index == other.index and self.values == other.values
                and self.action == other.action)


class CatWeight:
    """A covariant Cat-valued functor on a finite index category (the
    weight of a limit): a value category per object, a functor per
    morphism, functorial on the nose."""

    __slots__ = ("index", "values", "action", "name")

    def __init__(self, index, values, action, name=None, check=True):
        self.index = index
        self.values = dict(values)
        self.action = dict(action)
        self.name = name
        if check:
            self.check()

    def check(self):
        J = self.index
        for j in J.objects:
            if j not in self.values or not isinstance(self.values[j], FinCat):
                raise TypeMismatch(f"no value category at {j!r}")
        for f in J.morphisms:
            F = self.action.get(f)
            if not isinstance(F, FinFunctor):
                raise TypeMismatch(f"no action functor at {f!r}")
            if F.domain != self.values[J.src[f]] or F.codomain != self.values[J.dst[f]]:
                raise TypeMismatch(f"action at {f!r} has wrong endpoints")
        for j in J.objects:
            if not self.action[J.identity[j]].is_identity_functor():
                raise TypeMismatch(f"identity action at {j!r} is not the identity functor")
        for (g, f), gf in J.table.items():
            if self.action[f].then(self.action[g]) != self.action[gf]:
                raise TypeMismatch(f"action not functorial on ({g!r}, {f!r})")
        return self

    def value(self, j):
        return self.values[j]

    def apply(self, f):
        return self.action[f]

    def __eq__(self, other):
        if not isinstance(other, CatWeight):
            return NotImplemented
        return (self.index == other.index and self.values == other.values
                and self.action == other.action)

    def __repr__(self):
        tag = f" {self.name}" if self.name else ""
        return f"<CatWeight{tag} on {self.index!r}>"


class WeightMap:
    """A strictly natural map of weights over a shared index."""

    __slots__ = ("source", "target", "components")

    def __init__(self, source, target, components, check=True):
        self.source = source
        self.target = target
        self.components = dict(components)
        if check:
            self.check()

    def check(self):
        if self.source.index != self.target.index:
            raise TypeMismatch("weight map endpoints live over different indices")
        J = self.source.index
        for j in J.objects:
            c = self.components.get(j)
            if not isinstance(c, FinFunctor):
                raise TypeMismatch(f"no component at {j!r}")
            if c.domain != self.source.values[j] or c.codomain != self.target.values[j]:
                raise TypeMismatch(f"component at {j!r} has wrong endpoints")
        for f in J.morphisms:
            j, k = J.src[f], J.dst[f]
            if self.source.action[f].then(self.components[k]) != \
               self.components[j].then(self.target.action[f]):
                raise TypeMismatch(f"strict naturality fails at {f!r}")
        return self


@dataclass(frozen=True)
class ElementsCategory:
    """The category of elements of a Set-presheaf, with its projection:
    objects (j, x in P(j)); morphisms (f, x) from (j, x) to (k, P(f)x)."""

    cat: FinCat
    projection: FinFunctor


def elements_category(presheaf):
    P, J = presheaf, presheaf.index
    objects = list(P.elements())
    morphisms = []
    for f in J.morphisms:
        for x in P.values[J.src[f]]:
            morphisms.append(((f, x), (J.src[f], x), (J.dst[f], P.apply(f, x))))
    identity = {(j, x): (J.identity[j], x) for (j, x) in objects}
    table = {}
    for (g, y) in [m[0] for m in morphisms]:
        for (f, x) in [m[0] for m in morphisms]:
            if J.dst[f] == J.src[g] and P.apply(f, x) == y:
                table[((g, y), (f, x))] = (J.table[(g, f)], x)
    cat = FinCat(objects, morphisms, identity, table, name="elements")
    proj = FinFunctor(cat, J,
                      {(j, x): j for (j, x) in objects},
                      {(f, x): f for (f, x) in [m[0] for m in morphisms]},
                      check=False)
    return ElementsCategory(cat, proj)


@dataclass(frozen=True)
class Component:
    """One connected component of an elements category, with its initial
    element and, for every element, the unique connecting morphism out of
    the initial one."""

    elements: tuple
    initial: tuple
    connecting: dict  # (j, x) -> index morphism f: j_i -> j with P(f)(x_i) = x


@dataclass(frozen=True)
class Decomposition:
    components: tuple


@dataclass(frozen=True)
class Refutation:
    """A component of the elements category with no initial object: for
    every candidate element, a target with zero or at least two incoming
    morphisms from the candidate."""

    component: tuple
    failures: dict  # candidate element -> (target element, tuple of elements-cat morphisms)


def _components_union_find(elements, morphisms):
    parent = {e: e for e in elements}

    def find(e):
        while parent[e] != e:
            parent[e] = parent[parent[e]]
            e = parent[e]
        return e

    for (_, a, b) in morphisms:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[rb] = ra
    groups = {}
    for e in elements:
        groups.setdefault(find(e), []).append(e)
    return [tuple(groups[r]) for r in sorted(groups, key=elements.index)]


def decompose_coproduct_of_representables(presheaf):
    """Split the elements category into connected components and search
    each for an initial object.

    Returns a Decomposition (so P is a coproduct of representables at the
    initial elements' indices) when every component has one, else a
    Refutation naming the first bad component.
    """
    P, J = presheaf, presheaf.index
    els = elements_category(P)
    E = els.cat
    elements = P.elements()
    comps = _components_union_find(list(elements), [(m, E.src[m], E.dst[m])
                                                    for m in E.morphisms])
    found = []
    for comp in comps:
        initial = None
        failures = {}
        for cand in comp:
            connecting = {}
            bad = None
            for target in comp:
                arrows = E.hom(cand, target)
                if len(arrows) != 1:
                    bad = (target, arrows)
                    break
                connecting[target] = arrows[0][0]
            if bad is None:
                initial = Component(elements=comp, initial=cand, connecting=connecting)
                break
            failures[cand] = bad
        if initial is None:
            return Refutation(component=comp, failures=failures)
        found.append(initial)
    return Decomposition(components=tuple(found))


def verify_certificate(presheaf, certificate):
    """Re-verify a certificate elementwise against a presheaf."""
    P = presheaf
    E = elements_category(P).cat
    if isinstance(certificate, Decomposition):
        seen = []
        for comp in certificate.components:
            if comp.initial not in comp.elements:
                return False
            for e in comp.elements:
                f = comp.connecting.get(e)
                if f is None:
                    return False
                arrows = E.hom(comp.initial, e)
                if arrows != ((f, comp.initial[1]),):
                    return False
            seen.extend(comp.elements)
        return sorted(map(repr, seen)) == sorted(map(repr, P.elements())) and \
            len(seen) == len(P.elements())
    if isinstance(certificate, Refutation):
        comp = certificate.component
        for cand in comp:
            target, arrows = certificate.failures.get(cand, (None, None))
            if target is None:
                return False
            if target not in comp or tuple(E.hom(cand, target)) != tuple(arrows):
                return False
            if len(arrows) == 1:
                return False
        return True
    return False


def ob_presheaf(weight):
    """The underlying Set-presheaf of a weight: object sets and object
    parts of the actions."""
    J = weight.index
    return SetPresheaf(
        J,
        {j: weight.values[j].objects for j in J.objects},
        {f: {x: weight.action[f].obj_map[x] for x in weight.values[J.src[f]].objects}
         for f in J.morphisms},
        check=False,
    )


def is_pie_weight(weight):
    """True (with certificate) iff the weight's object presheaf is a
    coproduct of representables; the weight then determines a pie limit."""
    cert = decompose_coproduct_of_representables(ob_presheaf(weight))
    return isinstance(cert, Decomposition), cert


# -- the named weight library ---------------------------------------------


def _constant_weight(index, value, name):
    return CatWeight(
        index,
        {j: value for j in index.objects},
        {f: FinFunctor.identity(value) for f in index.morphisms},
        name=name,
    )


def _pick(value_cat, obj):
    """The functor 1 -> C selecting an object."""
    one = terminal_category()
    return FinFunctor(one, value_cat, {"*": obj}, {"id": value_cat.identity[obj]},
                      check=False)


def representable_weight(index, j):
    """J(j, -) as a locally discrete Cat-weight: discrete hom-set values,
    post-composition actions."""
    J = index
    values = {k: discrete_category(J.hom(j, k)) for k in J.objects}
    action = {}
    for g in J.morphisms:
        k, k2 = J.src[g], J.dst[g]
        dom, cod = values[k], values[k2]
        obj_map = {h: J.table[(g, h)] for h in J.hom(j, k)}
        action[g] = FinFunctor(dom, cod, obj_map,
                               {dom.identity[h]: cod.identity[obj_map[h]]
                                for h in J.hom(j, k)},
                               check=False)
    return CatWeight(J, values, action, name=f"representable({J.name},{j!r})")


def named_weight(name, n=None, index=None, at=None):
    """The standard weight library.

    product(n): discrete index, constant terminal values.
    inserter:   parallel pair index a =|=> b; W(a) = 1, W(b) = the walking
                arrow, the two actions picking its endpoints.
    equifier:   as inserter but W(b) = the 2-object parallel-pair
                category, actions picking its endpoints.
    comma:      cospan a -> c <- b; W(a) = W(b) = 1, W(c) = the walking
                arrow, legs picking its endpoints.
    equalizer:  parallel pair index, constant terminal values.
    idempotent_splitting: free idempotent index, constant terminal value.
    representable: J(at, -) over index.
    """
    one = terminal_category()
    if name == "product":
        if n is None:
            raise UnknownWeightName("product weight needs n")
        idx = discrete_category([f"x{i}" for i in range(n)])
        return _constant_weight(idx, one, f"product({n})")
    if name == "inserter":
        J = _inserter_index()
        two = arrow_category()
        return CatWeight(
            J, {"a": one, "b": two},
            {J.identity["a"]: FinFunctor.identity(one),
             J.identity["b"]: FinFunctor.identity(two),
             "s": _pick(two, 0), "t": _pick(two, 1)},
            name="inserter",
        )
    if name == "equifier":
        J = _inserter_index()
        pp = parallel_pair_category()
        return CatWeight(
            J, {"a": one, "b": pp},
            {J.identity["a"]: FinFunctor.identity(one),
             J.identity["b"]: FinFunctor.identity(pp),
             "s": _pick(pp, 0), "t": _pick(pp, 1)},
            name="equifier",
        )
    if name == "comma":
        J = cospan_category()
        two = arrow_category()
        return CatWeight(
            J, {"a": one, "b": one, "c": two},
            {"ia": FinFunctor.identity(one), "ib": FinFunctor.identity(one),
             "ic": FinFunctor.identity(two),
             "f": _pick(two, 0), "g": _pick(two, 1)},
            name="comma",
        )
    if name == "equalizer":
        return _constant_weight(_inserter_index(), one, "equalizer")
    if name == "idempotent_splitting":
        return _constant_weight(free_idempotent_category(), one, "idempotent_splitting")
    if name == "representable":
        if index is None or at is None:
            raise UnknownWeightName("representable weight needs index and at")
        return representable_weight(index, at)
    raise UnknownWeightName(name)


def _inserter_index():
    """The parallel pair a =|=> b with arrows s, t."""
    return FinCat(
        ("a", "b"),
        (("ia", "a", "a"), ("ib", "b", "b"), ("s", "a", "b"), ("t", "a", "b")),
        {"a": "ia", "b": "ib"},
        {("ia", "ia"): "ia", ("ib", "ib"): "ib",
         ("s", "ia"): "s", ("ib", "s"): "s",
         ("t", "ia"): "t", ("ib", "t"): "t"},
        name="PP",
    )


def coproduct_of_representables(index, objs):
    """The weight  Sum_i J(j_i, -)  for a list of index objects, with
    canonical (i, hom-element) identifiers."""
    J = index
    values = {}
    for k in J.objects:
        ids = [(i, h) for i, j in enumerate(objs) for h in J.hom(j, k)]
        values[k] = discrete_category(ids)
    action = {}
    for g in J.morphisms:
        k, k2 = J.src[g], J.dst[g]
        dom, cod = values[k], values[k2]
        obj_map = {(i, h): (i, J.table[(g, h)]) for (i, h) in dom.objects}
        action[g] = FinFunctor(dom, cod, obj_map,
                               {dom.identity[o]: cod.identity[obj_map[o]]
                                for o in dom.objects}, check=False)
    return CatWeight(J, values, action, name="sum-of-representables")


def canonical_cover(weight, decomposition):
    """The canonical pointwise bijective-on-objects weight map from the
    certificate's coproduct of representables onto the weight."""
    J = weight.index
    objs = [c.initial[0] for c in decomposition.components]
    src = coproduct_of_representables(J, objs)
    components = {}
    for k in J.objects:
        dom = src.values[k]
        cod = weight.values[k]
        obj_map = {}
        for (i, h) in dom.objects:
            x_i = decomposition.components[i].initial[1]
            obj_map[(i, h)] = weight.action[h].obj_map[x_i]
        components[k] = FinFunctor(dom, cod, obj_map,
                                   {dom.identity[o]: cod.identity[obj_map[o]]
                                    for o in dom.objects}, check=False)
    return WeightMap(src, weight, components)


# -- pointwise classification of weight maps ------------------------------


@dataclass
class WeightMapClassification:
    pointwise: dict           # index object -> MorphismClassification
    pointwise_objective: bool
    pointwise_fully_faithful: bool
    pointwise_equivalence: bool
    pointwise_surjective_equivalence: bool
    pointwise_injective_equivalence: bool
    sections: dict | None = None   # verified supplied sections, if any


def classify_weight_map(wmap, sections=None):
    """Classify a weight map pointwise; optionally verify supplied
    pointwise sections (InvalidSection if one fails to compose to the
    identity)."""
    per = {j: classify_morphism(c) for j, c in wmap.components.items()}
    verified = None
    if sections is not None:
        verified = {}
        for j, s in sections.items():
            comp = wmap.components[j]
            if s.domain != comp.codomain or s.codomain != comp.domain:
                raise InvalidSection(f"section at {j!r} has wrong endpoints")
            if not s.then(comp).is_identity_functor():
                raise InvalidSection(f"supplied splitting at {j!r} does not compose to the identity")
            verified[j] = s
    return WeightMapClassification(
        pointwise=per,
        pointwise_objective=all(c.objective for c in per.values()),
        pointwise_fully_faithful=all(c.fully_faithful for c in per.values()),
        pointwise_equivalence=all(c.equivalence for c in per.values()),
        pointwise_surjective_equivalence=all(c.surjective_equivalence for c in per.values()),
        pointwise_injective_equivalence=all(c.injective_equivalence for c in per.values()),
        sections=verified,
    )
