"""Executable, desk-scale forms of the weight characterisation theorems:
a semiflexibility refuter over a bounded diagram grammar, equivalence
preservation suites for the weighted limit functor, and coherent
transport of pointwise splittings for pie weights.

Semiflexibility has no finite decision procedure here; verdicts are
three-valued: pie, not-semiflexible (with a replayable witness), or
inconclusive within the search bounds.  A None from refute_semiflexible
is never reported as "semiflexible".
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .errors import Budget, EnumerationBudgetExceeded, InvalidSection, ModeMismatch, NotPie
from .fincat import (
    FinFunctor,
    arrow_category,
    chain_category,
    classify_morphism,
    discrete_category,
    parallel_pair_category,
    terminal_category,
    walking_iso_category,
)
from .limits import (
    Diagram,
    DiagramMap,
    assembly_functor,
    comparison_inclusion,
    compile_pie,
    eval_with_transport,
    induced_cone_functor,
    pseudo_limit,
    strict_limit,
)
from .weights import is_pie_weight

GRAMMAR_LIBRARIES = {
    1: (terminal_category, arrow_category, walking_iso_category,
        lambda: discrete_category((0, 1))),
    2: (terminal_category, arrow_category, walking_iso_category,
        lambda: discrete_category((0, 1)), parallel_pair_category,
        lambda: chain_category(3)),
}

DEFAULT_REFUTER_BUDGET = 10**6


@dataclass
class Witness:
    """A diagram and a pseudocone with no isomorphic strict cone; replays
    by recomputing both limit categories on the stored data."""

    weight: object
    diagram: Diagram
    pseudocone_index: int
    pseudocone_encoding: object
    failed_property: str
    grammar_version: str
    diagrams_searched: int
    budget_used: int


@dataclass
class SemiflexibilityReport:
    verdict: str                 # "not-semiflexible" | "inconclusive"
    witness: Witness | None
    grammar_version: str
    diagrams_searched: int
    budget_used: int
    budget_exhausted: bool = False


def _grammar_diagrams(index, grammar_level, budget):
    """All diagrams over the index with values in the grammar library and
    exhaustively enumerated actions, in canonical order."""
    library = [make() for make in GRAMMAR_LIBRARIES[grammar_level]]
    J = index
    non_ids = J.non_identities()
    from .fincat import all_functors
    for values_choice in itertools.product(range(len(library)), repeat=len(J.objects)):
        budget.spend()
        values = {j: library[i] for j, i in zip(J.objects, values_choice)}
        pools = []
        feasible = True
        for f in non_ids:
            fs = all_functors(values[J.src[f]], values[J.dst[f]], budget=budget)
            if not fs:
                feasible = False
                break
            pools.append(fs)
        if not feasible:
            continue
        for choice in itertools.product(*pools):
            budget.spend()
            action = dict(zip(non_ids, choice))
            for j in J.objects:
                action[J.identity[j]] = FinFunctor.identity(values[j])
            if all(action[f].then(action[g]) == action[gf]
                   for (g, f), gf in J.table.items()):
                yield Diagram(J, values, action, check=False)


def _essential_surjectivity_failure(weight, diagram, budget_limit):
    """First pseudocone with no isomorphic strict cone, or None."""
    strict = strict_limit(weight, diagram, budget_limit)
    pseudo = pseudo_limit(weight, diagram, budget_limit)
    inclusion = comparison_inclusion(weight, diagram, strict, pseudo)
    image = [inclusion.obj_map[s] for s in strict.cat.objects]
    for p in pseudo.cat.objects:
        if all(pseudo.cat.iso_between(s, p) is None for s in image):
            return p, pseudo
    return None


def refute_semiflexible(weight, grammar_level=1, budget_limit=DEFAULT_REFUTER_BUDGET):
    """Search diagrams over the bounded grammar for a pseudocone that is
    isomorphic to no strict cone; a hit proves the weight is not
    semiflexible.  None is inconclusive, annotated with the bounds."""
    version = f"g{grammar_level}"
    budget = Budget(budget_limit, "refute_semiflexible")
    searched = 0
    exhausted = False
    try:
        for diagram in _grammar_diagrams(weight.index, grammar_level, budget):
            searched += 1
            failure = _essential_surjectivity_failure(weight, diagram, budget_limit)
            if failure is not None:
                p, pseudo = failure
                witness = Witness(
                    weight=weight, diagram=diagram, pseudocone_index=p,
                    pseudocone_encoding=pseudo._encoding(*pseudo.cones[p]),
                    failed_property="no strict cone isomorphic to this pseudocone",
                    grammar_version=version, diagrams_searched=searched,
                    budget_used=budget.used,
                )
                return SemiflexibilityReport("not-semiflexible", witness, version,
                                             searched, budget.used)
    except EnumerationBudgetExceeded:
        exhausted = True
    return SemiflexibilityReport("inconclusive", None, version, searched,
                                 budget.used, budget_exhausted=exhausted)


def replay_witness(witness, budget_limit=DEFAULT_REFUTER_BUDGET):
    """Re-run the failed check on the stored data; True iff the failure
    reproduces exactly (same pseudocone, still no isomorphic strict cone)."""
    failure = _essential_surjectivity_failure(witness.weight, witness.diagram, budget_limit)
    if failure is None:
        return False
    p, pseudo = failure
    return (p == witness.pseudocone_index
            and pseudo._encoding(*pseudo.cones[p]) == witness.pseudocone_encoding)


# -- preservation suites ---------------------------------------------------


@dataclass
class PreservationReport:
    mode: str
    hypothesis_pointwise: dict       # index object -> bool
    conclusion_holds: bool
    induced: FinFunctor
    classification: object
    source_objects: int
    target_objects: int


_MODE_FLAGS = {
    "equivalence": ("equivalence", "equivalence"),
    "surjective": ("surjective_equivalence", "surjective_equivalence"),
    "injective": ("injective_equivalence", "injective_equivalence"),
}


def check_equivalence_preservation(weight, dmap, mode, budget_limit=10**7):
    """Compute {W, f} between strict limits and classify it; the report
    states whether the mode's conclusion holds on this instance.

    ModeMismatch if the diagram map fails the pointwise hypothesis."""
    if mode not in _MODE_FLAGS:
        raise ModeMismatch(f"unknown mode {mode!r}")
    hyp_flag, concl_flag = _MODE_FLAGS[mode]
    pointwise = {j: classify_morphism(c) for j, c in dmap.components.items()}
    hypothesis = {j: getattr(c, hyp_flag) for j, c in pointwise.items()}
    if not all(hypothesis.values()):
        bad = [j for j, ok in hypothesis.items() if not ok]
        raise ModeMismatch(f"components at {bad!r} fail the pointwise {mode} hypothesis")
    source = strict_limit(weight, dmap.source, budget_limit)
    target = strict_limit(weight, dmap.target, budget_limit)
    induced = induced_cone_functor(weight, dmap, source, target)
    cls = classify_morphism(induced)
    return PreservationReport(
        mode=mode, hypothesis_pointwise=hypothesis,
        conclusion_holds=getattr(cls, concl_flag),
        induced=induced, classification=cls,
        source_objects=source.cat.n_objects(), target_objects=target.cat.n_objects(),
    )


# -- coherent transport of splittings --------------------------------------


@dataclass
class TransportResult:
    section: FinFunctor          # section of {W, f}, exact
    induced: FinFunctor          # {W, f}
    source_limit: object
    target_limit: object


def transport_splitting(weight, dmap, sections, budget_limit=10**7):
    """Construct the section of {W, f} for a pie weight and a pointwise
    split surjective equivalence f, compositionally through the compiled
    pie expression.

    The output composes with {W, f} to the identity exactly, sends the
    functorial image of a strictly natural section to itself, and is
    compositional in f.
    """
    pie, cert = is_pie_weight(weight)
    if not pie:
        raise NotPie(f"{weight!r} is not a pie weight")
    for j, f_j in dmap.components.items():
        cls = classify_morphism(f_j)
        if not cls.surjective_equivalence:
            raise ModeMismatch(f"component at {j!r} is not a surjective equivalence")
        s = sections.get(j)
        if s is None or s.domain != f_j.codomain or s.codomain != f_j.domain:
            raise InvalidSection(f"missing or ill-typed section at {j!r}")
        if not s.then(f_j).is_identity_functor():
            raise InvalidSection(f"supplied splitting at {j!r} does not compose to the identity")
    expr = compile_pie(weight, cert)
    evalD, evalE, phi, sigma = eval_with_transport(
        weight, cert, expr, dmap.source, dmap.target, dmap, sections)
    if not sigma.then(phi).is_identity_functor():
        raise InvalidSection("stagewise section failed to split the comparison")
    source = strict_limit(weight, dmap.source, budget_limit)
    target = strict_limit(weight, dmap.target, budget_limit)
    asm_src = assembly_functor(weight, cert, evalD, source)
    asm_tgt = assembly_functor(weight, cert, evalE, target)
    section = asm_tgt.inverse().then(sigma).then(asm_src)
    induced = induced_cone_functor(weight, dmap, source, target)
    composite = section.then(induced)
    if not composite.is_identity_functor():
        raise InvalidSection("constructed section does not compose to the identity")
    return TransportResult(section=section, induced=induced,
                           source_limit=source, target_limit=target)
