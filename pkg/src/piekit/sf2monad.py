"""The free strongly-finitary 2-monad engine: arity-indexed signatures,
the inductive tree set with its leaf count and representable-sum
invariants, the truncated free-algebra formula, pie presentations with
derived operations and transformations, algebra checking on finite
categories, and the induced Set-monad signature.

All section-6 objects are infinite untruncated; truncation is by
internal-node count, which is exact below the bound since the formulas
are graded coproducts, and every output records its bound.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache

from .errors import (
    ArityMismatch,
    Budget,
    NonComposable,
    ShapeMismatch,
    TypeMismatch,
)
from .fincat import (
    FinCat,
    FinFunctor,
    FinNatTrans,
    all_functors,
    all_nat_trans,
    discrete_category,
    product_category,
)

DEFAULT_TREE_BUDGET = 10**6


# -- signatures ------------------------------------------------------------


class Signature:
    """A finite-support map arity -> FinCat; absent arities mean the
    empty category."""

    __slots__ = ("arities",)

    def __init__(self, arities):
        self.arities = {}
        for n, cat in sorted(arities.items()):
            if not isinstance(n, int) or n < 0:
                raise ShapeMismatch(f"arity {n!r} is not a natural number")
            if not isinstance(cat, FinCat):
                raise ShapeMismatch(f"value at arity {n} is not a FinCat")
            if cat.objects:
                self.arities[n] = cat

    @staticmethod
    def discrete(symbols):
        """Signature.discrete({2: ["m"], 0: ["e"]})"""
        return Signature({n: discrete_category(tuple(names))
                          for n, names in symbols.items() if names})

    def support(self):
        return tuple(sorted(self.arities))

    def at(self, n):
        return self.arities.get(n)

    def symbol_arity(self, symbol):
        for n, cat in self.arities.items():
            if symbol in cat.objects:
                return n
        raise ShapeMismatch(f"unknown symbol {symbol!r}")

    def __eq__(self, other):
        if not isinstance(other, Signature):
            return NotImplemented
        return self.arities == other.arities


class SignatureMap:
    """A pointwise functor between signatures with the same support."""

    __slots__ = ("source", "target", "components")

    def __init__(self, source, target, components, check=True):
        self.source = source
        self.target = target
        self.components = dict(components)
        if check:
            for n in source.support():
                c = self.components.get(n)
                if c is None or c.domain != source.at(n):
                    raise ShapeMismatch(f"signature map lacks a valid component at arity {n}")
                if target.at(n) is None or c.codomain != target.at(n):
                    raise ShapeMismatch(f"signature map component at arity {n} lands outside the target")


# -- inductive trees -------------------------------------------------------


@dataclass(frozen=True)
class OmegaTree:
    """A finite planar tree: a leaf, or a node with an ordered tuple of
    subtrees (the node's arity is the tuple length)."""

    children: tuple | None = None   # None = leaf

    def is_leaf(self):
        return self.children is None

    @property
    def leaves(self):
        """The number of leaves (the tree's exponent over the carrier)."""
        if self.is_leaf():
            return 1
        return sum(c.leaves for c in self.children)

    @property
    def nodes(self):
        if self.is_leaf():
            return 0
        return 1 + sum(c.nodes for c in self.children)

    def hat(self):
        """The formal sum of representables, one per internal node:
        a sorted (arity, multiplicity) tuple."""
        counts = {}

        def walk(t):
            if t.is_leaf():
                return
            counts[len(t.children)] = counts.get(len(t.children), 0) + 1
            for c in t.children:
                walk(c)

        walk(self)
        return tuple(sorted(counts.items()))

    def node_arities(self):
        """Arities of internal nodes in preorder."""
        out = []

        def walk(t):
            if t.is_leaf():
                return
            out.append(len(t.children))
            for c in t.children:
                walk(c)

        walk(self)
        return tuple(out)

    def __repr__(self):
        if self.is_leaf():
            return "*"
        return "(" + " ".join(map(repr, self.children)) + ")"


LEAF = OmegaTree()


def _compositions(total, parts):
    if parts == 0:
        if total == 0:
            yield ()
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def enumerate_omega(max_nodes, arities, budget_limit=DEFAULT_TREE_BUDGET):
    """All trees with at most max_nodes internal nodes whose node arities
    lie in the given set, in canonical order (node count, then arity,
    then children lexicographically).

    The unrestricted inductive set is infinite at every positive node
    bound, so the arity set (a signature's support) is explicit.
    """
    if max_nodes < 0:
        raise ArityMismatch("max_nodes must be nonnegative")
    budget = Budget(budget_limit, "enumerate_omega")
    arities = tuple(sorted(set(arities)))
    exact = {0: [LEAF]}
    for k in range(1, max_nodes + 1):
        level = []
        for m in arities:
            for comp in _compositions(k - 1, m):
                for children in itertools.product(*(exact[c] for c in comp)):
                    budget.spend()
                    level.append(OmegaTree(children))
        exact[k] = level
    out = []
    for k in range(max_nodes + 1):
        out.extend(exact[k])
    return out


# -- the truncated free-algebra formula ------------------------------------


@dataclass
class TruncatedFreeAlgebra:
    """The coproduct, over trees within the node bound, of the labelling
    category times the carrier power.  `complete` records whether the
    bound already exhausts every labellable tree."""

    cat: FinCat
    signature: Signature
    carrier: FinCat
    bound: int
    complete: bool
    trees: tuple

    def object_count(self):
        return self.cat.n_objects()


def _labellings(signature, tree):
    """Objects of the labelling category: one signature object per
    internal node, in preorder."""
    pools = []
    for n in tree.node_arities():
        cat = signature.at(n)
        if cat is None:
            return []
        pools.append(cat.objects)
    return list(itertools.product(*pools))


def _labelling_morphisms(signature, tree):
    pools = []
    for n in tree.node_arities():
        cat = signature.at(n)
        if cat is None:
            return []
        pools.append(cat.morphisms)
    return list(itertools.product(*pools))


def eval_free_algebra(signature, carrier, max_nodes, budget_limit=DEFAULT_TREE_BUDGET):
    """The free algebra on the carrier, truncated at the node bound:
    objects (tree, node labels, leaf objects), morphisms the summandwise
    pairs of signature and carrier morphisms."""
    budget = Budget(budget_limit, "eval_free_algebra")
    trees = enumerate_omega(max_nodes, signature.support(), budget_limit)
    sig_cats = {n: signature.at(n) for n in signature.support()}
    objects, morphisms, identity, table = [], [], {}, {}
    kept_trees = []
    for tree in trees:
        labels = _labellings(signature, tree)
        if not labels:
            continue
        kept_trees.append(tree)
        arity_list = tree.node_arities()
        lmors = _labelling_morphisms(signature, tree)
        leaf_objs = list(itertools.product(carrier.objects, repeat=tree.leaves))
        leaf_mors = list(itertools.product(carrier.morphisms, repeat=tree.leaves))
        summand_objs = []
        for lab in labels:
            for cs in leaf_objs:
                budget.spend()
                summand_objs.append((tree, lab, cs))
        objects.extend(summand_objs)
        summand_mors = []
        for lm in lmors:
            for cm in leaf_mors:
                budget.spend()
                src = (tree,
                       tuple(sig_cats[n].src[m] for n, m in zip(arity_list, lm)),
                       tuple(carrier.src[m] for m in cm))
                dst = (tree,
                       tuple(sig_cats[n].dst[m] for n, m in zip(arity_list, lm)),
                       tuple(carrier.dst[m] for m in cm))
                mid = (tree, lm, cm)
                morphisms.append((mid, src, dst))
                summand_mors.append((mid, src, dst))
        for (tree_, lab, cs) in summand_objs:
            identity[(tree_, lab, cs)] = (
                tree_,
                tuple(sig_cats[n].identity[x] for n, x in zip(arity_list, lab)),
                tuple(carrier.identity[c] for c in cs))
        by_dst = {}
        for entry in summand_mors:
            by_dst.setdefault(entry[2], []).append(entry)
        for (gid, gs, gd) in summand_mors:
            for (fid, fs, fd) in by_dst.get(gs, ()):
                table[(gid, fid)] = (
                    tree,
                    tuple(sig_cats[n].table[(gm, fm)]
                          for n, gm, fm in zip(arity_list, gid[1], fid[1])),
                    tuple(carrier.table[(gm, fm)] for gm, fm in zip(gid[2], fid[2])))
    cat = FinCat(objects, morphisms, identity, table, name=f"free@{max_nodes}")
    next_level = enumerate_omega(max_nodes + 1, signature.support(), budget_limit)
    complete = all(t.nodes <= max_nodes or not _labellings(signature, t)
                   for t in next_level)
    return TruncatedFreeAlgebra(cat=cat, signature=signature, carrier=carrier,
                                bound=max_nodes, complete=complete,
                                trees=tuple(kept_trees))


def eval_zk(signature, n, max_nodes, budget_limit=DEFAULT_TREE_BUDGET):
    """The free 2-monad's value at the discrete category n, truncated:
    the free algebra on n seen as variables."""
    return eval_free_algebra(signature, discrete_category(tuple(range(n))),
                             max_nodes, budget_limit)


def zk_object_count(signature, n, max_nodes):
    """Closed form: sum over trees of |labellings| * n^leaves."""
    total = 0
    for tree in enumerate_omega(max_nodes, signature.support()):
        total += len(_labellings(signature, tree)) * (n ** tree.leaves)
    return total


def induced_free_algebra_map(sig_map, carrier, max_nodes, budget_limit=DEFAULT_TREE_BUDGET):
    """The map of truncated free algebras induced by a signature map:
    relabel the nodes, keep the tree and the leaf data."""
    src = eval_free_algebra(sig_map.source, carrier, max_nodes, budget_limit)
    dst = eval_free_algebra(sig_map.target, carrier, max_nodes, budget_limit)
    obj_map = {}
    for (tree, lab, cs) in src.cat.objects:
        arity_list = tree.node_arities()
        obj_map[(tree, lab, cs)] = (
            tree, tuple(sig_map.components[n].obj_map[x] for n, x in zip(arity_list, lab)), cs)
    mor_map = {}
    for (tree, lm, cm) in src.cat.morphisms:
        arity_list = tree.node_arities()
        mor_map[(tree, lm, cm)] = (
            tree, tuple(sig_map.components[n].mor_map[x] for n, x in zip(arity_list, lm)), cm)
    return FinFunctor(src.cat, dst.cat, obj_map, mor_map), src, dst


# -- the independent closure oracle ----------------------------------------


def term_closure(symbols, n_vars, max_nodes):
    """Freely apply the symbols to variables and deduplicate: the set of
    syntactic terms in n variables with at most max_nodes operation
    nodes.  Independent of the tree-sum formula; used to cross-check it."""
    terms = {("var", i): 0 for i in range(n_vars)}
    frontier = list(terms)
    while True:
        new = {}
        for arity, names in sorted(symbols.items()):
            for name in names:
                for children in itertools.product(terms, repeat=arity):
                    size = 1 + sum(terms[c] for c in children)
                    if size <= max_nodes:
                        t = ("op", name, children)
                        if t not in terms and t not in new:
                            new[t] = size
        if not new:
            return frozenset(terms)
        terms.update(new)


# -- operation terms --------------------------------------------------------


@dataclass(frozen=True)
class Hole:
    """The unique hole of a one-hole context."""


HOLE = Hole()


@dataclass(frozen=True)
class OpTerm:
    """A labelled tree over a discrete operation signature; leaves are
    variables assigned positionally left to right (terms are linear), so
    the arity is the leaf count.  op None marks a leaf; op HOLE marks
    the hole of a context."""

    op: object = None
    children: tuple = ()

    def is_leaf(self):
        return self.op is None

    def is_hole(self):
        return isinstance(self.op, Hole)

    @property
    def arity(self):
        if self.is_leaf() or self.is_hole():
            return 1
        return sum(c.arity for c in self.children)

    def nodes(self):
        if self.is_leaf() or self.is_hole():
            return 0
        return 1 + sum(c.nodes() for c in self.children)

    def holes(self):
        if self.is_hole():
            return 1
        if self.is_leaf():
            return 0
        return sum(c.holes() for c in self.children)

    def subst(self, args):
        """Graft args into the leaves, left to right."""
        args = list(args)

        def walk(t):
            if t.is_hole():
                raise TypeMismatch("cannot substitute into a context; plug it first")
            if t.is_leaf():
                return args.pop(0)
            return OpTerm(t.op, tuple(walk(c) for c in t.children))

        if len(args) != self.arity:
            raise ArityMismatch(f"term of arity {self.arity} applied to {len(args)} arguments")
        out = walk(self)
        assert not args
        return out

    def plug(self, term):
        """Fill the unique hole with a term."""
        if self.holes() != 1:
            raise TypeMismatch("plug needs exactly one hole")

        def walk(t):
            if t.is_hole():
                return term
            if t.is_leaf():
                return t
            return OpTerm(t.op, tuple(walk(c) for c in t.children))

        return walk(self)

    def hole_offset(self):
        """Number of leaf positions strictly before the hole."""
        state = {"seen": 0, "found": None}

        def walk(t):
            if state["found"] is not None:
                return
            if t.is_hole():
                state["found"] = state["seen"]
                return
            if t.is_leaf():
                state["seen"] += 1
                return
            for c in t.children:
                walk(c)

        walk(self)
        if state["found"] is None:
            raise TypeMismatch("context has no hole")
        return state["found"]

    def check_labels(self, signature):
        """Labels respect arities: every node symbol lies in the
        signature at the node's arity."""
        if self.is_leaf() or self.is_hole():
            return self
        cat = signature.at(len(self.children))
        if cat is None or self.op not in cat.objects:
            raise ShapeMismatch(f"symbol {self.op!r} is not an operation of arity {len(self.children)}")
        for c in self.children:
            c.check_labels(signature)
        return self

    def __repr__(self):
        if self.is_hole():
            return "?"
        if self.is_leaf():
            return "_"
        return f"({self.op} " + " ".join(map(repr, self.children)) + ")"


def var():
    return OpTerm()


def op(symbol, *children):
    return OpTerm(symbol, tuple(children))


# -- transformation terms ---------------------------------------------------


@dataclass(frozen=True)
class TransTerm:
    """A two-dimensional term: identity of an operation term, a basic
    generator instantiated with operation-term arguments, a vertical
    composite, or a 2-cell placed inside a one-hole operation context."""

    kind: str                # "id" | "gen" | "vcomp" | "ctx"
    term: OpTerm | None = None
    name: object = None
    args: tuple = ()
    first: object = None
    second: object = None
    context: OpTerm | None = None
    inner: object = None


def id_cell(term):
    return TransTerm("id", term=term)


def gen_cell(name, *args):
    return TransTerm("gen", name=name, args=tuple(args))


def vcomp(first, second):
    return TransTerm("vcomp", first=first, second=second)


def ctx_cell(context, inner):
    return TransTerm("ctx", context=context, inner=inner)


def trans_endpoints(tau, presentation):
    """The source and target operation terms of a transformation term;
    NonComposable if a vertical composite fails to match up."""
    if tau.kind == "id":
        return tau.term, tau.term
    if tau.kind == "gen":
        arity, s, t = presentation.generator(tau.name)
        if len(tau.args) != arity:
            raise ArityMismatch(f"generator {tau.name!r} of arity {arity} got {len(tau.args)} arguments")
        return s.subst(tau.args), t.subst(tau.args)
    if tau.kind == "vcomp":
        s1, t1 = trans_endpoints(tau.first, presentation)
        s2, t2 = trans_endpoints(tau.second, presentation)
        if t1 != s2:
            raise NonComposable("vertical composite of non-adjacent transformation terms")
        return s1, t2
    if tau.kind == "ctx":
        if tau.context.holes() != 1:
            raise TypeMismatch("context must have exactly one hole")
        s, t = trans_endpoints(tau.inner, presentation)
        return tau.context.plug(s), tau.context.plug(t)
    raise TypeMismatch(f"unknown transformation term kind {tau.kind!r}")


# -- pie presentations ------------------------------------------------------


class PiePresentation:
    """(Sigma1; Sigma2 with source/target derived-operation terms; Sigma3
    with parallel pairs of derived-transformation terms)."""

    __slots__ = ("sigma1", "sigma2", "sigma3")

    def __init__(self, sigma1, sigma2, sigma3):
        self.sigma1 = {int(n): tuple(names) for n, names in sorted(sigma1.items()) if names}
        self.sigma2 = dict(sigma2)   # name -> (arity, source OpTerm, target OpTerm)
        self.sigma3 = dict(sigma3)   # name -> (TransTerm, TransTerm)
        sig = self.op_signature()
        for name, (arity, s, t) in self.sigma2.items():
            if s.arity != arity or t.arity != arity:
                raise ShapeMismatch(f"generator {name!r}: source/target arity does not match {arity}")
            s.check_labels(sig)
            t.check_labels(sig)
        for name, (lhs, rhs) in self.sigma3.items():
            ls, lt = trans_endpoints(lhs, self)
            rs, rt = trans_endpoints(rhs, self)
            if ls != rs or lt != rt:
                raise ShapeMismatch(f"equation {name!r}: sides are not parallel")

    def op_signature(self):
        return Signature.discrete(self.sigma1)

    def generator(self, name):
        try:
            return self.sigma2[name]
        except KeyError:
            raise ShapeMismatch(f"unknown transformation generator {name!r}")

    def operation_names(self):
        return [(n, name) for n, names in self.sigma1.items() for name in names]


# -- algebra structures ------------------------------------------------------


class AlgebraStructure:
    """A carrier with a functor per basic operation and a natural
    transformation per basic generator, the latter's endpoints equal on
    the nose to the evaluated derived source and target operations."""

    def __init__(self, presentation, carrier, operations, transformations, check=True):
        self.presentation = presentation
        self.carrier = carrier
        self.operations = dict(operations)
        self.transformations = dict(transformations)
        self._powers = {}
        if check:
            self.check_shape()

    def power(self, n):
        if n not in self._powers:
            self._powers[n] = product_category([self.carrier] * n)[0]
        return self._powers[n]

    def check_shape(self):
        P = self.presentation
        for n, names in P.sigma1.items():
            for name in names:
                F = self.operations.get(name)
                if F is None:
                    raise ShapeMismatch(f"missing operation {name!r}")
                if F.domain != self.power(n) or F.codomain != self.carrier:
                    raise ShapeMismatch(f"operation {name!r} is not a functor C^{n} -> C")
        if set(self.operations) != {name for names in P.sigma1.values() for name in names}:
            raise ShapeMismatch("operations do not match the presentation's symbols")
        for name, (arity, s, t) in P.sigma2.items():
            tr = self.transformations.get(name)
            if tr is None:
                raise ShapeMismatch(f"missing transformation {name!r}")
            if tr.source != eval_derived_op(s, self) or tr.target != eval_derived_op(t, self):
                raise ShapeMismatch(
                    f"transformation {name!r} endpoints differ from the evaluated terms")
        if set(self.transformations) != set(P.sigma2):
            raise ShapeMismatch("transformations do not match the presentation's generators")
        return self


def _split_by_arity(values, terms):
    out = []
    i = 0
    for t in terms:
        out.append(tuple(values[i:i + t.arity]))
        i += t.arity
    if i != len(values):
        raise ArityMismatch("argument tuple length does not match the term arities")
    return out


def term_on_objects(term, alg, objs):
    if term.is_leaf():
        if len(objs) != 1:
            raise ArityMismatch("leaf consumes exactly one object")
        return objs[0]
    segments = _split_by_arity(objs, term.children)
    child_objs = tuple(term_on_objects(c, alg, seg) for c, seg in zip(term.children, segments))
    return alg.operations[term.op].obj_map[child_objs]


def term_on_morphisms(term, alg, mors):
    if term.is_leaf():
        if len(mors) != 1:
            raise ArityMismatch("leaf consumes exactly one morphism")
        return mors[0]
    segments = _split_by_arity(mors, term.children)
    child_mors = tuple(term_on_morphisms(c, alg, seg) for c, seg in zip(term.children, segments))
    return alg.operations[term.op].mor_map[child_mors]


def eval_derived_op(term, alg):
    """The derived operation of a term: leaves become projections, nodes
    the assigned basic operations composed with their children."""
    term.check_labels(alg.presentation.op_signature())
    k = term.arity
    dom = alg.power(k)
    obj_map = {o: term_on_objects(term, alg, o) for o in dom.objects}
    mor_map = {m: term_on_morphisms(term, alg, m) for m in dom.morphisms}
    return FinFunctor(dom, alg.carrier, obj_map, mor_map)


def trans_component(tau, alg, objs):
    """The component of an evaluated transformation term at a tuple of
    carrier objects (lazily, without materialising carrier powers)."""
    P = alg.presentation
    C = alg.carrier
    if tau.kind == "id":
        return C.identity[term_on_objects(tau.term, alg, objs)]
    if tau.kind == "gen":
        segments = _split_by_arity(objs, tau.args)
        arg_objs = tuple(term_on_objects(t, alg, seg)
                         for t, seg in zip(tau.args, segments))
        return alg.transformations[tau.name].components[arg_objs]
    if tau.kind == "vcomp":
        c1 = trans_component(tau.first, alg, objs)
        c2 = trans_component(tau.second, alg, objs)
        return C.table[(c2, c1)]
    if tau.kind == "ctx":
        ctx, inner = tau.context, tau.inner
        s_in, _ = trans_endpoints(inner, P)
        offset = ctx.hole_offset()
        hole_arity = s_in.arity
        before, hole_objs = objs[:offset], objs[offset:offset + hole_arity]
        after = objs[offset + hole_arity:]
        inner_mor = trans_component(inner, alg, hole_objs)
        stream = list(before) + [None] + list(after)

        def walk(t, pos):
            # returns (morphism, next position)
            if t.is_hole():
                return inner_mor, pos + 1
            if t.is_leaf():
                return C.identity[stream[pos]], pos + 1
            child_mors = []
            for c in t.children:
                m, pos = walk(c, pos)
                child_mors.append(m)
            return alg.operations[t.op].mor_map[tuple(child_mors)], pos

        mor, _ = walk(ctx, 0)
        return mor
    raise TypeMismatch(f"unknown transformation term kind {tau.kind!r}")


def eval_derived_transformation(tau, alg):
    """Materialise an evaluated transformation term as a FinNatTrans
    between the evaluated endpoint operations."""
    s, t = trans_endpoints(tau, alg.presentation)
    source = eval_derived_op(s, alg)
    target = eval_derived_op(t, alg)
    dom = alg.power(s.arity)
    comps = {o: trans_component(tau, alg, o) for o in dom.objects}
    return FinNatTrans(source, target, comps)


# -- checking and enumeration -----------------------------------------------


@dataclass
class EquationResult:
    name: str
    holds: bool
    first_failure: tuple | None   # (object tuple, lhs component, rhs component)


@dataclass
class AlgebraReport:
    shape_ok: bool
    naturality_ok: bool
    equations: tuple
    all_hold: bool


def check_algebra(presentation, alg, recheck_shape=True):
    """Verify the structure invariants, then evaluate both sides of every
    equation and compare componentwise; the report names the first
    differing component per failing equation."""
    if alg.presentation is not presentation and alg.presentation != presentation:
        raise ShapeMismatch("algebra was built for a different presentation")
    if recheck_shape:
        alg.check_shape()
        for name, tr in alg.transformations.items():
            tr.check()
    results = []
    C = alg.carrier
    for name, (lhs, rhs) in presentation.sigma3.items():
        s, _ = trans_endpoints(lhs, presentation)
        k = s.arity
        failure = None
        for objs in itertools.product(C.objects, repeat=k):
            c1 = trans_component(lhs, alg, objs)
            c2 = trans_component(rhs, alg, objs)
            if c1 != c2:
                failure = (objs, c1, c2)
                break
        results.append(EquationResult(name=name, holds=failure is None,
                                      first_failure=failure))
    return AlgebraReport(shape_ok=True, naturality_ok=True,
                         equations=tuple(results),
                         all_hold=all(r.holds for r in results))


def enumerate_algebras(presentation, carrier, budget_limit=DEFAULT_TREE_BUDGET):
    """Exhaustively enumerate algebra structures on the carrier passing
    check_algebra, in deterministic order."""
    budget = Budget(budget_limit, "enumerate_algebras")
    P = presentation
    symbols = P.operation_names()
    probe = AlgebraStructure(P, carrier, {}, {}, check=False)
    pools = []
    for n, name in symbols:
        pools.append(all_functors(probe.power(n), carrier, budget=budget))
    out = []
    for ops_choice in itertools.product(*pools):
        budget.spend()
        operations = {name: F for (n, name), F in zip(symbols, ops_choice)}
        alg0 = AlgebraStructure(P, carrier, operations, {}, check=False)
        alg0._powers = probe._powers
        gen_pools = []
        feasible = True
        for gname, (arity, s, t) in P.sigma2.items():
            source = eval_derived_op(s, alg0)
            target = eval_derived_op(t, alg0)
            nats = all_nat_trans(source, target, budget=budget)
            if not nats:
                feasible = False
                break
            gen_pools.append((gname, nats))
        if not feasible:
            continue
        for trans_choice in itertools.product(*(nats for _, nats in gen_pools)):
            budget.spend()
            transformations = {gname: tr for (gname, _), tr in zip(gen_pools, trans_choice)}
            alg = AlgebraStructure(P, carrier, operations, transformations, check=False)
            alg._powers = probe._powers
            if check_algebra(P, alg, recheck_shape=False).all_hold:
                out.append(alg)
    return out


# -- the induced Set-monad signature ----------------------------------------


@dataclass
class SetMonadVerification:
    bound: int
    n: int
    zk_object_count: int
    closure_term_count: int
    counts_match: bool
    bijection_ok: bool


def underlying_set_monad_signature(presentation, n, max_nodes,
                                   budget_limit=DEFAULT_TREE_BUDGET):
    """The object part of Sigma1 as the signature of the induced
    Set-monad (coinserters and coequifiers are objective, so they do not
    change objects), verified by comparing the truncated object set at n
    against the independent term-closure enumeration."""
    signature = {n_: list(names) for n_, names in presentation.sigma1.items()}
    zk = eval_zk(presentation.op_signature(), n, max_nodes, budget_limit)
    closure = term_closure(signature, n, max_nodes)

    def as_term(tree, labels, leaf_vars):
        labels = list(labels)
        leaves = list(leaf_vars)

        def walk(t):
            if t.is_leaf():
                return ("var", leaves.pop(0))
            name = labels.pop(0)
            return ("op", name, tuple(walk(c) for c in t.children))

        return walk(tree)

    images = {as_term(tree, lab, cs) for (tree, lab, cs) in zk.cat.objects}
    verification = SetMonadVerification(
        bound=max_nodes, n=n,
        zk_object_count=zk.cat.n_objects(),
        closure_term_count=len(closure),
        counts_match=zk.cat.n_objects() == len(closure),
        bijection_ok=images == set(closure) and len(images) == zk.cat.n_objects(),
    )
    return signature, verification


# -- the monoidal pie presentation ------------------------------------------


def monoidal_presentation():
    """Binary and nullary operations; associator and unitors; pentagon
    and triangle equations."""
    _ = var
    m, e = "m", "e"
    sigma1 = {2: ["m"], 0: ["e"]}
    sigma2 = {
        "assoc": (3, op(m, op(m, _(), _()), _()), op(m, _(), op(m, _(), _()))),
        "lunit": (1, op(m, op(e), _()), _()),
        "runit": (1, op(m, _(), op(e)), _()),
    }
    pentagon_lhs = vcomp(
        ctx_cell(op(m, OpTerm(HOLE), _()), gen_cell("assoc", _(), _(), _())),
        vcomp(
            gen_cell("assoc", _(), op(m, _(), _()), _()),
            ctx_cell(op(m, _(), OpTerm(HOLE)), gen_cell("assoc", _(), _(), _())),
        ),
    )
    pentagon_rhs = vcomp(
        gen_cell("assoc", op(m, _(), _()), _(), _()),
        gen_cell("assoc", _(), _(), op(m, _(), _())),
    )
    triangle_lhs = vcomp(
        gen_cell("assoc", _(), op(e), _()),
        ctx_cell(op(m, _(), OpTerm(HOLE)), gen_cell("lunit", _())),
    )
    triangle_rhs = ctx_cell(op(m, OpTerm(HOLE), _()), gen_cell("runit", _()))
    sigma3 = {
        "pentagon": (pentagon_lhs, pentagon_rhs),
        "triangle": (triangle_lhs, triangle_rhs),
    }
    return PiePresentation(sigma1, sigma2, sigma3)


def strict_monoidal_structure(presentation, carrier, tensor, unit_obj):
    """An AlgebraStructure with all-identity constraint cells on a
    strictly associative and unital tensor."""
    unit = FinFunctor(product_category([])[0], carrier,
                      {(): unit_obj}, {(): carrier.identity[unit_obj]})
    operations = {"m": tensor, "e": unit}
    alg = AlgebraStructure(presentation, carrier, operations, {}, check=False)
    transformations = {}
    for name, (arity, s, t) in presentation.sigma2.items():
        source = eval_derived_op(s, alg)
        target = eval_derived_op(t, alg)
        if source != target:
            raise TypeMismatch(f"carrier is not strict: endpoints of {name!r} differ")
        transformations[name] = FinNatTrans.identity(source)
    out = AlgebraStructure(presentation, carrier, operations, transformations, check=False)
    out._powers = alg._powers
    return out.check_shape()
