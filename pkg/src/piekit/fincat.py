"""Finite categories by explicit tables, with functors, natural
transformations, graphs, freeness and factorisation machinery.

Identifiers are arbitrary hashables.  Constructed categories name their
objects and morphisms by deterministic encodings of the construction
(paths, pairs, cone data), so outputs are reproducible bit for bit.
All values are immutable once built; every operation is a pure function
of its inputs.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .errors import (
    Budget,
    CyclicGraph,
    IdentityLawBroken,
    MalformedTable,
    NonComposable,
    NotAssociative,
    TypeMismatch,
)

DEFAULT_SEARCH_BUDGET = 10**6


class FinCat:
    """A finite category: object list, morphism list with endpoints, an
    identity assignment and a total composition table on composable pairs.

    The constructor checks well-formedness of the tables (everything
    denotes, endpoints match); the category *laws* are checked by
    :func:`validate_category` / :meth:`validate`.
    """

    __slots__ = ("objects", "morphisms", "src", "dst", "identity", "table",
                 "name", "_hom", "_inverses")

    def __init__(self, objects, morphisms, identity, table, name=None):
        self.objects = tuple(objects)
        self.name = name
        if len(set(self.objects)) != len(self.objects):
            raise MalformedTable("duplicate object identifiers")
        mor_ids, src, dst = [], {}, {}
        for entry in morphisms:
            try:
                m, a, b = entry
            except (TypeError, ValueError):
                raise MalformedTable(f"morphism entry {entry!r} is not an (id, src, dst) triple")
            if m in src:
                raise MalformedTable(f"duplicate morphism identifier {m!r}")
            if a not in self.objects or b not in self.objects:
                raise MalformedTable(f"morphism {m!r} has undeclared endpoint")
            mor_ids.append(m)
            src[m] = a
            dst[m] = b
        self.morphisms = tuple(mor_ids)
        self.src = src
        self.dst = dst
        self.identity = dict(identity)
        for x in self.objects:
            i = self.identity.get(x)
            if i is None or i not in src:
                raise MalformedTable(f"object {x!r} lacks an identity morphism")
            if src[i] != x or dst[i] != x:
                raise MalformedTable(f"identity of {x!r} is not an endomorphism of it")
        self.table = dict(table)
        for (g, f), gf in self.table.items():
            if g not in src or f not in src or gf not in src:
                raise MalformedTable(f"composition entry ({g!r}, {f!r}) mentions unknown morphisms")
            if dst[f] != src[g]:
                raise MalformedTable(f"composition entry ({g!r}, {f!r}) is not composable")
            if src[gf] != src[f] or dst[gf] != dst[g]:
                raise MalformedTable(f"composite of ({g!r}, {f!r}) has mismatched endpoints")
        # totality: every composable pair has an entry (all entries are
        # composable and distinct, so matching counts suffice)
        into, outof = {}, {}
        for m in self.morphisms:
            outof[src[m]] = outof.get(src[m], 0) + 1
            into[dst[m]] = into.get(dst[m], 0) + 1
        required = sum(into.get(x, 0) * outof.get(x, 0) for x in self.objects)
        if len(self.table) != required:
            raise MalformedTable(
                f"composition table has {len(self.table)} entries; {required} composable pairs")
        self._hom = None
        self._inverses = None

    # -- basic queries ------------------------------------------------

    def hom(self, a, b):
        if self._hom is None:
            hom = {}
            for m in self.morphisms:
                hom.setdefault((self.src[m], self.dst[m]), []).append(m)
            self._hom = {k: tuple(v) for k, v in hom.items()}
        return self._hom.get((a, b), ())

    def compose(self, g, f):
        """Composite g after f."""
        try:
            return self.table[(g, f)]
        except KeyError:
            raise NonComposable(f"{g!r} after {f!r}: target of {f!r} is not source of {g!r}")

    def is_identity(self, m):
        return self.identity[self.src[m]] == m

    def non_identities(self):
        return tuple(m for m in self.morphisms if not self.is_identity(m))

    def composable_pairs(self):
        """All (g, f) with src g = dst f, in declared order of g then f."""
        return tuple(self.table.keys())

    def inverse(self, m):
        """The two-sided inverse of m, or None."""
        if self._inverses is None:
            inv = {}
            for f in self.morphisms:
                a, b = self.src[f], self.dst[f]
                for g in self.hom(b, a):
                    if self.table[(g, f)] == self.identity[a] and self.table[(f, g)] == self.identity[b]:
                        inv[f] = g
                        break
            self._inverses = inv
        return self._inverses.get(m)

    def is_iso(self, m):
        return self.inverse(m) is not None

    def iso_between(self, x, y):
        """First isomorphism x -> y in declared order, or None."""
        for m in self.hom(x, y):
            if self.is_iso(m):
                return m
        return None

    def n_objects(self):
        return len(self.objects)

    def n_morphisms(self):
        return len(self.morphisms)

    # -- laws ----------------------------------------------------------

    def validate(self):
        """Check the category laws, raising the first violation found."""
        for x in self.objects:
            i = self.identity[x]
            for f in self.morphisms:
                if self.src[f] == x and self.table[(f, i)] != f:
                    raise IdentityLawBroken(x, f"{f!r} . id != {f!r}")
                if self.dst[f] == x and self.table[(i, f)] != f:
                    raise IdentityLawBroken(x, f"id . {f!r} != {f!r}")
        for (g, f) in self.table:
            for h in self.morphisms:
                if self.src[h] == self.dst[g]:
                    if self.table[(self.table[(h, g)], f)] != self.table[(h, self.table[(g, f)])]:
                        raise NotAssociative(f, g, h)
        return self

    # -- structure -----------------------------------------------------

    def __eq__(self, other):
        if not isinstance(other, FinCat):
            return NotImplemented
        return (self.objects == other.objects and self.morphisms == other.morphisms
                and self.src == other.src and self.dst == other.dst
                and self.identity == other.identity and self.table == other.table)

    def __hash__(self):
        return hash((self.objects, self.morphisms))

    def __repr__(self):
        tag = f" {self.name}" if self.name else ""
        return f"<FinCat{tag}: {len(self.objects)} objects, {len(self.morphisms)} morphisms>"

    def relabeled(self, obj_map, mor_map, name=None):
        """The same category with identifiers renamed by the given bijections."""
        return FinCat(
            objects=[obj_map[x] for x in self.objects],
            morphisms=[(mor_map[m], obj_map[self.src[m]], obj_map[self.dst[m]]) for m in self.morphisms],
            identity={obj_map[x]: mor_map[i] for x, i in self.identity.items()},
            table={(mor_map[g], mor_map[f]): mor_map[gf] for (g, f), gf in self.table.items()},
            name=name,
        )

    def opposite(self, name=None):
        return FinCat(
            objects=self.objects,
            morphisms=[(m, self.dst[m], self.src[m]) for m in self.morphisms],
            identity=self.identity,
            table={(f, g): gf for (g, f), gf in self.table.items()},
            name=name or (f"{self.name}^op" if self.name else None),
        )


def validate_category(objects, morphisms, identity, table, name=None):
    """Build a FinCat from raw tables and check every law.

    Raises MalformedTable / IdentityLawBroken / NotAssociative with the
    offending datum; returns the validated category otherwise.
    """
    return FinCat(objects, morphisms, identity, table, name=name).validate()


# -- graphs and free categories ----------------------------------------


@dataclass(frozen=True)
class FinGraph:
    vertices: tuple
    edges: tuple  # (id, src, dst) triples

    def __post_init__(self):
        if len(set(self.vertices)) != len(self.vertices):
            raise MalformedTable("duplicate vertex identifiers")
        seen = set()
        for e, a, b in self.edges:
            if e in seen:
                raise MalformedTable(f"duplicate edge identifier {e!r}")
            seen.add(e)
            if a not in self.vertices or b not in self.vertices:
                raise MalformedTable(f"edge {e!r} has undeclared endpoint")

    def out_edges(self, v):
        return tuple((e, a, b) for (e, a, b) in self.edges if a == v)


def _find_cycle(graph):
    """A directed edge cycle of the graph, as a tuple of edge ids, or None."""
    WHITE, GREY, BLACK = 0, 1, 2
    colour = {v: WHITE for v in graph.vertices}
    stack_edges = []  # (edge id, src vertex) along the current DFS path

    def visit(v):
        colour[v] = GREY
        for (e, _, b) in graph.out_edges(v):
            if colour[b] == GREY:
                # cycle = path b ~> v along the DFS stack, then e: v -> b
                cyc = [e]
                if b != v:
                    for (e2, a2) in reversed(stack_edges):
                        cyc.append(e2)
                        if a2 == b:
                            break
                return tuple(reversed(cyc))
            if colour[b] == WHITE:
                stack_edges.append((e, v))
                got = visit(b)
                stack_edges.pop()
                if got is not None:
                    return got
        colour[v] = BLACK
        return None

    for v in graph.vertices:
        if colour[v] == WHITE:
            got = visit(v)
            if got is not None:
                return got
    return None


def free_category_on_graph(graph):
    """The free category on an acyclic graph: morphisms are edge paths,
    identified as (start vertex, tuple of edge ids); composition is path
    concatenation.  Raises CyclicGraph (with a witness) otherwise.
    """
    cycle = _find_cycle(graph)
    if cycle is not None:
        raise CyclicGraph(cycle)
    paths = []

    def extend(start, v, acc):
        paths.append((start, tuple(acc)))
        for (e, _, b) in graph.out_edges(v):
            acc.append(e)
            extend(start, b, acc)
            acc.pop()

    for v in graph.vertices:
        extend(v, v, [])
    dst_of = {e: b for (e, _, b) in graph.edges}

    def path_dst(p):
        v, es = p
        return dst_of[es[-1]] if es else v

    morphisms = [(p, p[0], path_dst(p)) for p in paths]
    identity = {v: (v, ()) for v in graph.vertices}
    table = {}
    for q in paths:
        for p in paths:
            if path_dst(p) == q[0]:
                table[(q, p)] = (p[0], p[1] + q[1])
    return FinCat(graph.vertices, morphisms, identity, table, name="free")


@dataclass(frozen=True)
class FreenessDecision:
    """Outcome of is_free_on_graph: free (with generating graph) or not
    (with a finite witness that replays)."""

    free: bool
    graph: FinGraph | None = None
    reason: str | None = None          # "atom-cycle" | "unreachable" | "ambiguous"
    cycle: tuple | None = None         # composable atom cycle
    morphism: object | None = None     # morphism with 0 or >=2 atom factorisations
    factorisations: tuple | None = None


def atoms_of(cat):
    """Non-identity morphisms admitting no factorisation into two
    non-identities, in declared order."""
    out = []
    for m in cat.non_identities():
        composite = False
        for (g, f), gf in cat.table.items():
            if gf == m and not cat.is_identity(g) and not cat.is_identity(f):
                composite = True
                break
        if not composite:
            out.append(m)
    return tuple(out)


def is_free_on_graph(cat):
    """Decide whether the category is free on a graph.

    Yes: the atom graph is acyclic and evaluation of atom paths hits every
    morphism exactly once (identities = empty paths).  No: a composable
    atom cycle, a morphism with zero atom factorisations, or one with two.
    """
    atoms = atoms_of(cat)
    graph = FinGraph(cat.objects, tuple((m, cat.src[m], cat.dst[m]) for m in atoms))
    cycle = _find_cycle(graph)
    if cycle is not None:
        return FreenessDecision(False, reason="atom-cycle", cycle=cycle)
    # acyclic: enumerate all atom paths and evaluate them
    evaluations = {}  # morphism -> list of paths
    out_atoms = {v: [m for m in atoms if cat.src[m] == v] for v in cat.objects}

    def walk(value, path):
        evaluations.setdefault(value, []).append(tuple(path))
        for m in out_atoms[cat.dst[value]]:
            path.append(m)
            walk(cat.table[(m, value)], path)
            path.pop()

    for v in cat.objects:
        walk(cat.identity[v], [])
    for m in cat.morphisms:
        hits = evaluations.get(m, [])
        if not hits:
            return FreenessDecision(False, reason="unreachable", morphism=m, factorisations=())
        if len(hits) > 1:
            return FreenessDecision(False, reason="ambiguous", morphism=m,
                                    factorisations=tuple(hits[:2]))
    return FreenessDecision(True, graph=graph)


# -- functors and natural transformations -------------------------------


class FinFunctor:
    """A functor between finite categories, given by total object and
    morphism maps.  The constructor verifies preservation of sources,
    targets, identities and every composition-table entry (pass
    check=False only for maps lawful by construction)."""

    __slots__ = ("domain", "codomain", "obj_map", "mor_map")

    def __init__(self, domain, codomain, obj_map, mor_map, check=True):
        self.domain = domain
        self.codomain = codomain
        self.obj_map = dict(obj_map)
        self.mor_map = dict(mor_map)
        if check:
            self.check()

    def check(self):
        A, B = self.domain, self.codomain
        for x in A.objects:
            if self.obj_map.get(x) not in B.identity:
                raise TypeMismatch(f"object {x!r} not mapped into the codomain")
        for m in A.morphisms:
            fm = self.mor_map.get(m)
            if fm not in B.src:
                raise TypeMismatch(f"morphism {m!r} not mapped into the codomain")
            if B.src[fm] != self.obj_map[A.src[m]] or B.dst[fm] != self.obj_map[A.dst[m]]:
                raise TypeMismatch(f"image of {m!r} has wrong endpoints")
        for x in A.objects:
            if self.mor_map[A.identity[x]] != B.identity[self.obj_map[x]]:
                raise TypeMismatch(f"identity of {x!r} not preserved")
        for (g, f), gf in A.table.items():
            if self.mor_map[gf] != B.table[(self.mor_map[g], self.mor_map[f])]:
                raise TypeMismatch(f"composition ({g!r}, {f!r}) not preserved")
        return self

    def on_obj(self, x):
        return self.obj_map[x]

    def on_mor(self, m):
        return self.mor_map[m]

    def then(self, other):
        """Diagrammatic composite: self followed by other."""
        if other.domain is not self.codomain and other.domain != self.codomain:
            raise TypeMismatch("functors not composable")
        return FinFunctor(
            self.domain, other.codomain,
            {x: other.obj_map[y] for x, y in self.obj_map.items()},
            {m: other.mor_map[n] for m, n in self.mor_map.items()},
            check=False,
        )

    @staticmethod
    def identity(cat):
        return FinFunctor(cat, cat, {x: x for x in cat.objects},
                          {m: m for m in cat.morphisms}, check=False)

    def is_identity_functor(self):
        return (self.domain == self.codomain
                and all(v == k for k, v in self.obj_map.items())
                and all(v == k for k, v in self.mor_map.items()))

    def inverse(self):
        """Inverse of an isomorphism of categories."""
        if len(set(self.obj_map.values())) != len(self.domain.objects) or \
           len(self.domain.objects) != len(self.codomain.objects):
            raise TypeMismatch("functor is not bijective on objects")
        if len(set(self.mor_map.values())) != len(self.domain.morphisms) or \
           len(self.domain.morphisms) != len(self.codomain.morphisms):
            raise TypeMismatch("functor is not bijective on morphisms")
        return FinFunctor(
            self.codomain, self.domain,
            {v: k for k, v in self.obj_map.items()},
            {v: k for k, v in self.mor_map.items()},
            check=False,
        )

    def encode(self):
        """Deterministic encoding: image tuples in domain declared order."""
        return (tuple(self.obj_map[x] for x in self.domain.objects),
                tuple(self.mor_map[m] for m in self.domain.morphisms))

    def __eq__(self, other):
        if not isinstance(other, FinFunctor):
            return NotImplemented
        return (self.domain == other.domain and self.codomain == other.codomain
                and self.obj_map == other.obj_map and self.mor_map == other.mor_map)

    def __hash__(self):
        return hash(self.encode())

    def __repr__(self):
        return f"<FinFunctor {self.domain!r} -> {self.codomain!r}>"


class FinNatTrans:
    """A natural transformation between parallel functors, given by its
    components.  The constructor checks endpoints and every naturality
    square."""

    __slots__ = ("source", "target", "components")

    def __init__(self, source, target, components, check=True):
        self.source = source
        self.target = target
        self.components = dict(components)
        if check:
            self.check()

    def check(self):
        F, G = self.source, self.target
        if F.domain != G.domain or F.codomain != G.codomain:
            raise TypeMismatch("source and target functors are not parallel")
        A, B = F.domain, F.codomain
        for a in A.objects:
            c = self.components.get(a)
            if c not in B.src:
                raise TypeMismatch(f"component at {a!r} missing or foreign")
            if B.src[c] != F.obj_map[a] or B.dst[c] != G.obj_map[a]:
                raise TypeMismatch(f"component at {a!r} has wrong endpoints")
        for m in A.morphisms:
            a, b = A.src[m], A.dst[m]
            if B.table[(G.mor_map[m], self.components[a])] != \
               B.table[(self.components[b], F.mor_map[m])]:
                raise TypeMismatch(f"naturality fails at {m!r}")
        return self

    def component(self, a):
        return self.components[a]

    def then(self, other):
        """Vertical composite: self followed by other."""
        if other.source != self.target:
            raise NonComposable("vertical composite of non-adjacent transformations")
        B = self.source.codomain
        return FinNatTrans(
            self.source, other.target,
            {a: B.table[(other.components[a], c)] for a, c in self.components.items()},
            check=False,
        )

    def whisker_left(self, H):
        """H . tau  for H out of the codomain: components H(tau_a)."""
        return FinNatTrans(
            self.source.then(H), self.target.then(H),
            {a: H.mor_map[c] for a, c in self.components.items()},
            check=False,
        )

    def whisker_right(self, K):
        """tau . K  for K into the domain: components tau_{K x}."""
        return FinNatTrans(
            K.then(self.source), K.then(self.target),
            {x: self.components[K.obj_map[x]] for x in K.domain.objects},
            check=False,
        )

    def is_invertible(self):
        B = self.source.codomain
        return all(B.is_iso(c) for c in self.components.values())

    def inverse(self):
        B = self.source.codomain
        return FinNatTrans(self.target, self.source,
                           {a: B.inverse(c) for a, c in self.components.items()},
                           check=False)

    @staticmethod
    def identity(F):
        B = F.codomain
        return FinNatTrans(F, F, {a: B.identity[F.obj_map[a]] for a in F.domain.objects},
                           check=False)

    def encode(self):
        return tuple(self.components[a] for a in self.source.domain.objects)

    def __eq__(self, other):
        if not isinstance(other, FinNatTrans):
            return NotImplemented
        return (self.source == other.source and self.target == other.target
                and self.components == other.components)

    def __repr__(self):
        return f"<FinNatTrans over {len(self.components)} objects>"


# -- standard categories -------------------------------------------------


def terminal_category():
    return FinCat(("*",), (("id", "*", "*"),), {"*": "id"}, {("id", "id"): "id"}, name="1")


def discrete_category(objs):
    objs = tuple(objs)
    return FinCat(
        objs,
        tuple((("id", x), x, x) for x in objs),
        {x: ("id", x) for x in objs},
        {((("id", x)), ("id", x)): ("id", x) for x in objs},
        name=f"discrete{len(objs)}",
    )


def arrow_category():
    """The walking arrow 2: objects 0, 1 and one non-identity 0 -> 1."""
    return FinCat(
        (0, 1),
        (("i0", 0, 0), ("i1", 1, 1), ("a", 0, 1)),
        {0: "i0", 1: "i1"},
        {("i0", "i0"): "i0", ("i1", "i1"): "i1",
         ("a", "i0"): "a", ("i1", "a"): "a"},
        name="2",
    )


def parallel_pair_category():
    """Two objects 0, 1 with two parallel arrows u, v: 0 -> 1."""
    return FinCat(
        (0, 1),
        (("i0", 0, 0), ("i1", 1, 1), ("u", 0, 1), ("v", 0, 1)),
        {0: "i0", 1: "i1"},
        {("i0", "i0"): "i0", ("i1", "i1"): "i1",
         ("u", "i0"): "u", ("i1", "u"): "u",
         ("v", "i0"): "v", ("i1", "v"): "v"},
        name="P",
    )


def walking_iso_category():
    """Two objects with a pair of mutually inverse arrows."""
    return FinCat(
        (0, 1),
        (("i0", 0, 0), ("i1", 1, 1), ("u", 0, 1), ("w", 1, 0)),
        {0: "i0", 1: "i1"},
        {("i0", "i0"): "i0", ("i1", "i1"): "i1",
         ("u", "i0"): "u", ("i1", "u"): "u",
         ("w", "i1"): "w", ("i0", "w"): "w",
         ("w", "u"): "i0", ("u", "w"): "i1"},
        name="I",
    )


def chain_category(n):
    """The poset 0 < 1 < ... < n-1 as a category."""
    objs = tuple(range(n))
    morphisms = [((i, j), i, j) for i in objs for j in objs if i <= j]
    identity = {i: (i, i) for i in objs}
    table = {}
    for (g, j1, k) in morphisms:
        for (f, i, j2) in morphisms:
            if j2 == j1:
                table[(g, f)] = (i, k)
    return FinCat(objs, morphisms, identity, table, name=f"chain{n}")


def cospan_category():
    """a -> c <- b."""
    return FinCat(
        ("a", "b", "c"),
        (("ia", "a", "a"), ("ib", "b", "b"), ("ic", "c", "c"),
         ("f", "a", "c"), ("g", "b", "c")),
        {"a": "ia", "b": "ib", "c": "ic"},
        {("ia", "ia"): "ia", ("ib", "ib"): "ib", ("ic", "ic"): "ic",
         ("f", "ia"): "f", ("ic", "f"): "f",
         ("g", "ib"): "g", ("ic", "g"): "g"},
        name="cospan",
    )


def span_category():
    """a <- c -> b."""
    return FinCat(
        ("a", "b", "c"),
        (("ia", "a", "a"), ("ib", "b", "b"), ("ic", "c", "c"),
         ("f", "c", "a"), ("g", "c", "b")),
        {"a": "ia", "b": "ib", "c": "ic"},
        {("ia", "ia"): "ia", ("ib", "ib"): "ib", ("ic", "ic"): "ic",
         ("f", "ic"): "f", ("ia", "f"): "f",
         ("g", "ic"): "g", ("ib", "g"): "g"},
        name="span",
    )


def free_idempotent_category():
    """One object with an idempotent e (e.e = e); two morphisms total."""
    return FinCat(
        ("o",),
        (("id", "o", "o"), ("e", "o", "o")),
        {"o": "id"},
        {("id", "id"): "id", ("id", "e"): "e", ("e", "id"): "e", ("e", "e"): "e"},
        name="idem",
    )


def indiscrete_category(objs):
    """Exactly one morphism between every ordered pair of objects."""
    objs = tuple(objs)
    morphisms = [((x, y), x, y) for x in objs for y in objs]
    identity = {x: (x, x) for x in objs}
    table = {}
    for x in objs:
        for y in objs:
            for z in objs:
                table[((y, z), (x, y))] = (x, z)
    return FinCat(objs, morphisms, identity, table, name=f"indiscrete{len(objs)}")


def monoid_category(elements, unit, mult, name=None):
    """The one-object category on a finite monoid (element list, unit,
    multiplication dict (a, b) -> a*b)."""
    elements = tuple(elements)
    morphisms = [(e, "*", "*") for e in elements]
    table = {(a, b): mult[(a, b)] for a in elements for b in elements}
    return FinCat(("*",), morphisms, {"*": unit}, table, name=name or "monoid")


def product_category(factors, name=None):
    """Product of finitely many categories; objects and morphisms are
    tuples.  Returns (category, projection functors)."""
    factors = tuple(factors)
    objs = list(itertools.product(*(c.objects for c in factors)))
    mors = list(itertools.product(*(c.morphisms for c in factors)))
    morphisms = [(m, tuple(c.src[mi] for c, mi in zip(factors, m)),
                  tuple(c.dst[mi] for c, mi in zip(factors, m))) for m in mors]
    identity = {o: tuple(c.identity[oi] for c, oi in zip(factors, o)) for o in objs}
    table = {}
    for g in mors:
        for f in mors:
            if all(c.dst[fi] == c.src[gi] for c, gi, fi in zip(factors, g, f)):
                table[(g, f)] = tuple(c.table[(gi, fi)] for c, gi, fi in zip(factors, g, f))
    prod = FinCat(objs, morphisms, identity, table, name=name or f"prod{len(factors)}")
    projections = [
        FinFunctor(prod, c,
                   {o: o[i] for o in prod.objects},
                   {m: m[i] for m in prod.morphisms}, check=False)
        for i, c in enumerate(factors)
    ]
    return prod, projections


# -- classification ------------------------------------------------------


@dataclass
class MorphismClassification:
    """Exact flags for a functor, with witnesses verified by direct
    composition where the flags are set.

    Witness conventions: `pseudo_inverse` G with invertible `unit`
    1 => G.F and `counit` F.G => 1; `section` S with F.S = 1 strictly;
    `retraction` R with R.F = 1 strictly.
    """

    fully_faithful: bool
    full: bool
    objective: bool
    essentially_surjective: bool
    equivalence: bool
    surjective_equivalence: bool
    injective_equivalence: bool
    isomorphism: bool
    pseudo_inverse: FinFunctor | None = None
    unit: FinNatTrans | None = None
    counit: FinNatTrans | None = None
    section: FinFunctor | None = None
    retraction: FinFunctor | None = None


def _hom_restriction_bijective(F):
    """(full, faithful) decided by inspecting every hom-set restriction."""
    A, B = F.domain, F.codomain
    full = True
    faithful = True
    for a in A.objects:
        for b in A.objects:
            images = [F.mor_map[m] for m in A.hom(a, b)]
            target = set(B.hom(F.obj_map[a], F.obj_map[b]))
            if len(set(images)) != len(images):
                faithful = False
            if not target <= set(images):
                full = False
    return full, faithful


def _pseudo_inverse_from_ff_es(F, strict_section=False, strict_retraction=False):
    """Assemble (G, unit, counit) for a fully faithful, essentially
    surjective functor, choosing preimages first in declared order.
    With strict_section, F.G = 1 on the nose (requires object
    surjectivity); with strict_retraction, G.F = 1 (requires object
    injectivity)."""
    A, B = F.domain, F.codomain
    fibre = {}
    for a in A.objects:
        fibre.setdefault(F.obj_map[a], []).append(a)
    choice = {}   # b -> (a, theta: F a -> b iso)
    for b in B.objects:
        if strict_section or b in fibre:
            if b in fibre:
                a = fibre[b][0]
                choice[b] = (a, B.identity[b])
                continue
        found = None
        for a in A.objects:
            theta = B.iso_between(F.obj_map[a], b)
            if theta is not None:
                found = (a, theta)
                break
        choice[b] = found
    if strict_retraction:
        # on the image, send F a back to a (object injectivity makes this well defined)
        for b, pre in fibre.items():
            choice[b] = (pre[0], B.identity[b])

    def preimage(a, a2, m):
        for f in A.hom(a, a2):
            if F.mor_map[f] == m:
                return f
        raise TypeMismatch("fully-faithfulness violated during witness assembly")

    obj_map = {b: choice[b][0] for b in B.objects}
    mor_map = {}
    for m in B.morphisms:
        b, b2 = B.src[m], B.dst[m]
        (a, th), (a2, th2) = choice[b], choice[b2]
        conj = B.table[(B.inverse(th2), B.table[(m, th)])]
        mor_map[m] = preimage(a, a2, conj)
    G = FinFunctor(B, A, obj_map, mor_map)
    counit = FinNatTrans(G.then(F), FinFunctor.identity(B),
                         {b: choice[b][1] for b in B.objects})
    unit = FinNatTrans(FinFunctor.identity(A), F.then(G),
                       {a: preimage(a, choice[F.obj_map[a]][0],
                                    B.inverse(choice[F.obj_map[a]][1]))
                        for a in A.objects})
    return G, unit, counit


def classify_morphism(F):
    """Decide every flag of the classification exactly by finite search,
    returning verified witnesses where flags hold."""
    A, B = F.domain, F.codomain
    full, faithful = _hom_restriction_bijective(F)
    ff = full and faithful
    obj_images = [F.obj_map[a] for a in A.objects]
    obj_injective = len(set(obj_images)) == len(obj_images)
    obj_surjective = set(obj_images) == set(B.objects)
    objective = obj_injective and obj_surjective
    es = all(any(B.iso_between(F.obj_map[a], b) is not None for a in A.objects)
             for b in B.objects)
    equivalence = ff and es
    surj_eq = ff and obj_surjective
    inj_eq = equivalence and obj_injective
    iso = ff and objective

    cls = MorphismClassification(
        fully_faithful=ff, full=full, objective=objective,
        essentially_surjective=es, equivalence=equivalence,
        surjective_equivalence=surj_eq, injective_equivalence=inj_eq,
        isomorphism=iso,
    )
    if equivalence:
        G, unit, counit = _pseudo_inverse_from_ff_es(F)
        cls.pseudo_inverse, cls.unit, cls.counit = G, unit, counit
    if surj_eq:
        S, _, _ = _pseudo_inverse_from_ff_es(F, strict_section=True)
        assert all(S.then(F).obj_map[b] == b for b in B.objects)
        cls.section = S
    if inj_eq:
        R, _, _ = _pseudo_inverse_from_ff_es(F, strict_retraction=True)
        assert all(F.then(R).obj_map[a] == a for a in A.objects)
        cls.retraction = R
    return cls


def factor_objective_ff(F):
    """Canonical (objective, fully faithful) factorisation F = G . H.

    The middle category M keeps the domain's objects and takes hom-sets
    from the codomain; morphism identifiers of M are (a, m, a') triples
    derived from the codomain's morphism names."""
    A, B = F.domain, F.codomain
    morphisms = []
    for a in A.objects:
        for a2 in A.objects:
            for m in B.hom(F.obj_map[a], F.obj_map[a2]):
                morphisms.append(((a, m, a2), a, a2))
    identity = {a: (a, B.identity[F.obj_map[a]], a) for a in A.objects}
    table = {}
    for ((g, b1, b2)) in morphisms:
        for ((f, a1, a2)) in morphisms:
            if a2 == b1:
                table[(g, f)] = (a1, B.table[(g[1], f[1])], b2)
    M = FinCat(A.objects, morphisms, identity, table, name="of-factor")
    H = FinFunctor(A, M, {a: a for a in A.objects},
                   {m: (A.src[m], F.mor_map[m], A.dst[m]) for m in A.morphisms})
    G = FinFunctor(M, B, {a: F.obj_map[a] for a in A.objects},
                   {t: t[1] for t in M.morphisms})
    return H, M, G


# -- functor enumeration and comparison search ---------------------------


def all_functors(A, B, budget=None):
    """All functors A -> B in canonical order (object images first,
    declared order throughout)."""
    budget = budget or Budget(DEFAULT_SEARCH_BUDGET, "all_functors")
    non_ids = A.non_identities()
    out = []
    for obj_images in itertools.product(B.objects, repeat=len(A.objects)):
        budget.spend()
        obj_map = dict(zip(A.objects, obj_images))
        candidates = []
        ok = True
        for m in non_ids:
            cand = B.hom(obj_map[A.src[m]], obj_map[A.dst[m]])
            if not cand:
                ok = False
                break
            candidates.append(cand)
        if not ok:
            continue
        for choice in itertools.product(*candidates):
            budget.spend()
            mor_map = dict(zip(non_ids, choice))
            for x in A.objects:
                mor_map[A.identity[x]] = B.identity[obj_map[x]]
            if all(mor_map[gf] == B.table[(mor_map[g], mor_map[f])]
                   for (g, f), gf in A.table.items()):
                out.append(FinFunctor(A, B, obj_map, mor_map, check=False))
    return out


def all_nat_trans(F, G, invertible_only=False, budget=None):
    """All natural transformations F => G in canonical component order."""
    budget = budget or Budget(DEFAULT_SEARCH_BUDGET, "all_nat_trans")
    A, B = F.domain, F.codomain
    pools = []
    for a in A.objects:
        pool = [c for c in B.hom(F.obj_map[a], G.obj_map[a])
                if not invertible_only or B.is_iso(c)]
        if not pool:
            return []
        pools.append(pool)
    out = []
    objs = A.objects
    non_ids = A.non_identities()

    def natural(components):
        for m in non_ids:
            a, b = A.src[m], A.dst[m]
            if B.table[(G.mor_map[m], components[a])] != B.table[(components[b], F.mor_map[m])]:
                return False
        return True

    for choice in itertools.product(*pools):
        budget.spend()
        components = dict(zip(objs, choice))
        if natural(components):
            out.append(FinNatTrans(F, G, components, check=False))
    return out


@dataclass
class ComparisonResult:
    """Outcome of compare_categories: a witness, or an exhaustion record."""

    found: bool
    mode: str
    functor: FinFunctor | None = None
    inverse: FinFunctor | None = None      # iso mode
    pseudo_inverse: FinFunctor | None = None
    unit: FinNatTrans | None = None
    counit: FinNatTrans | None = None
    nodes: int = 0


def _object_fingerprints(C):
    sizes = {}
    for a in C.objects:
        for b in C.objects:
            sizes[(a, b)] = len(C.hom(a, b))
    return {
        a: (sizes[(a, a)],
            tuple(sorted(sizes[(a, b)] for b in C.objects)),
            tuple(sorted(sizes[(b, a)] for b in C.objects)))
        for a in C.objects
    }


def _search_hom_bijective_functor(A, B, injective_objects, budget, extra_obj_maps_first=()):
    """Backtracking search for a functor A -> B bijective on each hom-set;
    with injective_objects it is an isomorphism candidate.  Returns the
    first witness in canonical order, or None on exhaustion."""
    fpA = _object_fingerprints(A)
    fpB = _object_fingerprints(B)
    objsA = A.objects
    non_ids = A.non_identities()

    def hom_sizes_ok(obj_map, a, b_img, assigned):
        for a2, b2 in assigned:
            if len(A.hom(a, a2)) != len(B.hom(b_img, b2)):
                return False
            if len(A.hom(a2, a)) != len(B.hom(b2, b_img)):
                return False
        return len(A.hom(a, a)) == len(B.hom(b_img, b_img))

    def try_object_map(obj_map):
        # morphism stage with composition propagation
        psi = {}
        used = {}   # (a, a2) -> set of used images, for per-hom injectivity
        for x in objsA:
            psi[A.identity[x]] = B.identity[obj_map[x]]
            used.setdefault((x, x), set()).add(B.identity[obj_map[x]])

        def hom_key(m):
            return (A.src[m], A.dst[m])

        def assign(m, im, log):
            queue = [(m, im)]
            while queue:
                m0, im0 = queue.pop()
                prev = psi.get(m0)
                if prev is not None:
                    if prev != im0:
                        return False
                    continue
                key = hom_key(m0)
                bucket = used.setdefault(key, set())
                if im0 in bucket:
                    return False
                if B.src[im0] != obj_map[A.src[m0]] or B.dst[im0] != obj_map[A.dst[m0]]:
                    return False
                psi[m0] = im0
                bucket.add(im0)
                log.append((m0, key))
                for g, gm in list(psi.items()):
                    if A.dst[m0] == A.src[g]:
                        queue.append((A.table[(g, m0)], B.table[(gm, im0)]))
                    if A.dst[g] == A.src[m0]:
                        queue.append((A.table[(m0, g)], B.table[(im0, gm)]))
            return True

        def undo(log, upto):
            while len(log) > upto:
                m0, key = log.pop()
                used[key].discard(psi.pop(m0))

        log = []

        def rec(i):
            while i < len(non_ids) and non_ids[i] in psi:
                i += 1
            if i == len(non_ids):
                # per-hom bijectivity: counts must match
                for a in objsA:
                    for b in objsA:
                        if len(A.hom(a, b)) != len(B.hom(obj_map[a], obj_map[b])):
                            return False
                return True
            m = non_ids[i]
            for cand in B.hom(obj_map[A.src[m]], obj_map[A.dst[m]]):
                budget.spend()
                mark = len(log)
                if assign(m, cand, log) and rec(i + 1):
                    return True
                undo(log, mark)
            return False

        if rec(0):
            mor_map = dict(psi)
            return FinFunctor(A, B, dict(obj_map), mor_map, check=False)
        return None

    for pre in extra_obj_maps_first:
        budget.spend()
        if all(hom_sizes_ok(pre, a, pre[a], [(a2, pre[a2]) for a2 in objsA if a2 != a])
               for a in objsA):
            got = try_object_map(pre)
            if got is not None:
                return got

    def rec_obj(i, obj_map, used_objs):
        if i == len(objsA):
            return try_object_map(obj_map)
        a = objsA[i]
        for b in B.objects:
            budget.spend()
            if injective_objects and b in used_objs:
                continue
            if fpA[a] != fpB[b]:
                continue
            if not hom_sizes_ok(obj_map, a, b, list(obj_map.items())):
                continue
            obj_map[a] = b
            used_objs.add(b)
            got = rec_obj(i + 1, obj_map, used_objs)
            if got is not None:
                return got
            del obj_map[a]
            used_objs.discard(b)
        return None

    return rec_obj(0, {}, set())


def compare_categories(A, B, mode="iso", budget_limit=DEFAULT_SEARCH_BUDGET):
    """Backtracking search for an isomorphism or an equivalence A ~ B.

    Returns a ComparisonResult carrying the first witness in canonical
    order (for equivalences: functor, pseudo-inverse and invertible unit
    and counit), or an exhaustion record.  Raises
    EnumerationBudgetExceeded when the node budget is hit.
    """
    if mode not in ("iso", "equivalence"):
        raise ValueError(f"unknown comparison mode {mode!r}")
    budget = Budget(budget_limit, f"compare_categories[{mode}]")
    if mode == "iso":
        if len(A.objects) != len(B.objects) or len(A.morphisms) != len(B.morphisms):
            return ComparisonResult(False, mode, nodes=budget.used)
        aligned = ()
        if len(A.objects) == len(B.objects):
            aligned = (dict(zip(A.objects, B.objects)),)
        F = _search_hom_bijective_functor(A, B, injective_objects=True,
                                          budget=budget, extra_obj_maps_first=aligned)
        if F is None:
            return ComparisonResult(False, mode, nodes=budget.used)
        return ComparisonResult(True, mode, functor=F, inverse=F.inverse(),
                                nodes=budget.used)
    # equivalence: a fully faithful functor whose image meets every iso class
    F = _search_equivalence(A, B, budget)
    if F is None:
        return ComparisonResult(False, mode, nodes=budget.used)
    G, unit, counit = _pseudo_inverse_from_ff_es(F)
    return ComparisonResult(True, mode, functor=F, pseudo_inverse=G,
                            unit=unit, counit=counit, nodes=budget.used)


def _search_equivalence(A, B, budget):
    objsA = A.objects
    non_ids = A.non_identities()
    if bool(objsA) != bool(B.objects):
        return None
    if not objsA:
        return FinFunctor(A, B, {}, {}, check=False)

    def try_obj_map(obj_map):
        # essential surjectivity first (cheap)
        for b in B.objects:
            if all(B.iso_between(obj_map[a], b) is None for a in objsA):
                return None
        pools = []
        for m in non_ids:
            pools.append(B.hom(obj_map[A.src[m]], obj_map[A.dst[m]]))
        for choice in itertools.product(*pools):
            budget.spend()
            mor_map = dict(zip(non_ids, choice))
            for x in objsA:
                mor_map[A.identity[x]] = B.identity[obj_map[x]]
            if not all(mor_map[gf] == B.table[(mor_map[g], mor_map[f])]
                       for (g, f), gf in A.table.items()):
                continue
            F = FinFunctor(A, B, dict(obj_map), mor_map, check=False)
            full, faithful = _hom_restriction_bijective(F)
            if full and faithful:
                return F
        return None

    for obj_images in itertools.product(B.objects, repeat=len(objsA)):
        budget.spend()
        obj_map = dict(zip(objsA, obj_images))
        if any(len(A.hom(a, a2)) != len(B.hom(obj_map[a], obj_map[a2]))
               for a in objsA for a2 in objsA):
            continue
        F = try_obj_map(obj_map)
        if F is not None:
            return F
    return None
