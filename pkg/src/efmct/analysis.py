"""Pairwise conflict detection for edit rules.

Pipeline per rule pair: enumerate minimal application contexts by gluing the
left-hand sides over every type-conforming overlap, drop ill-formed
contexts, pre-filter structurally independent ones, then try to close the
diamond in both application orders and prove the results equivalent with
solver support.  Solver indecision anywhere a proof is needed counts as a
conflict, keeping the verdict sound.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from . import formula as F
from .efm import check_wellformed, efm_type_graph
from .formula import Formula, Substitution
from .gluing import Overlap, glue
from .graph import Morphism, SymbolicGraph
from .matching import find_isomorphisms
from .rules import ApplicationResult, ApplyStatus, SymbolicRule, apply, find_rule_matches
from .smt import SatResult, SolverConfig, Validity, ValidityVerdict, check_validity
from .sorts import Variable


class AnalysisError(Exception):
    pass


@dataclass
class OverlapContext:
    """A minimal host graph with embeddings of both left-hand sides."""

    ac: SymbolicGraph
    m1: Morphism
    m2: Morphism
    overlap: Overlap


def enumerate_overlaps(lhs1: SymbolicGraph, lhs2: SymbolicGraph) -> list[OverlapContext]:
    """One context per non-empty consistent identification of parts of lhs2
    with parts of lhs1, deduplicated up to isomorphism of (ac, m1, m2).

    Links are identified exactly when both endpoints are; leaving such a link
    unidentified would duplicate it between the same objects, which the
    no-parallel-links rule forbids.  Disjoint (empty) overlaps are excluded:
    they commute trivially.
    """
    ids1 = sorted(lhs1.objects)
    ids2 = sorted(lhs2.objects)

    assignments: list[dict[str, str]] = []

    def extend(k: int, current: dict[str, str]) -> None:
        if k == len(ids2):
            if current:
                assignments.append(dict(current))
            return
        o2 = ids2[k]
        extend(k + 1, current)
        for o1 in ids1:
            if lhs1.objects[o1] == lhs2.objects[o2] and o1 not in current.values():
                current[o2] = o1
                extend(k + 1, current)
                del current[o2]

    extend(0, {})

    shapes1 = lhs1.links_between()
    contexts: list[OverlapContext] = []
    for p in assignments:
        link_pairs = []
        for l2 in sorted(lhs2.links):
            link = lhs2.links[l2]
            if link.source in p and link.target in p:
                l1 = shapes1.get((link.type, p[link.source], p[link.target]))
                if l1 is not None:
                    link_pairs.append((l1, l2))
        overlap = Overlap.of([(o1, o2) for o2, o1 in p.items()], link_pairs)
        ac, m1, m2 = glue(lhs1, lhs2, overlap)
        candidate = OverlapContext(ac, m1, m2, overlap)
        if not any(_contexts_isomorphic(candidate, seen) for seen in contexts):
            contexts.append(candidate)
    contexts.sort(key=lambda c: (-c.overlap.size(), c.overlap.object_pairs, c.overlap.link_pairs))
    return contexts


def _contexts_isomorphic(c1: OverlapContext, c2: OverlapContext) -> bool:
    """Whether an isomorphism ac1 -> ac2 commuting with both matches exists.

    The matches are jointly surjective, so a commuting map is pointwise
    forced; it remains to build it and check it is a graph isomorphism.
    """
    if c1.overlap.size() != c2.overlap.size():
        return False
    if len(c1.ac.objects) != len(c2.ac.objects) or len(c1.ac.links) != len(c2.ac.links):
        return False
    phi_obj: dict[str, str] = {}
    phi_link: dict[str, str] = {}
    for ours, theirs in ((c1.m1, c2.m1), (c1.m2, c2.m2)):
        for x, img in ours.object_map.items():
            want = theirs.object_map[x]
            if phi_obj.setdefault(img, want) != want:
                return False
        for x, img in ours.link_map.items():
            want = theirs.link_map[x]
            if phi_link.setdefault(img, want) != want:
                return False
    phi = Morphism(c1.ac, c2.ac, phi_obj, phi_link)
    return not phi.check()


def filter_wellformed(
    contexts: list[OverlapContext],
) -> tuple[list[OverlapContext], list[tuple[OverlapContext, list[str]]]]:
    """Partition contexts by the builtin well-formedness constraints."""
    kept: list[OverlapContext] = []
    dropped: list[tuple[OverlapContext, list[str]]] = []
    for ctx in contexts:
        violations = check_wellformed(ctx.ac)
        if violations:
            dropped.append((ctx, sorted({name for name, _ in violations})))
        else:
            kept.append(ctx)
    return kept, dropped


class CpaKind(Enum):
    POTENTIAL_CONFLICT = "potential-conflict"
    INDEPENDENT = "independent"


@dataclass
class CpaResult:
    kind: CpaKind
    reasons: list[str] = field(default_factory=list)


def cpa_filter(r1: SymbolicRule, r2: SymbolicRule, ctx: OverlapContext) -> CpaResult:
    """Structural pre-filter: delete-use and reassign-use interactions.

    A reassignment (or slot deletion) counts whenever the two match images
    share any element, since the later rule's variable substitution then
    depends on the application order.
    """
    reasons: list[str] = []

    def deleted_elements(r: SymbolicRule, m: Morphism) -> set[str]:
        return {m.object_map[o] for o in r.deleted_objects()} | {
            m.link_map[l] for l in r.deleted_links()
        }

    img1 = ctx.m1.object_image() | ctx.m1.link_image()
    img2 = ctx.m2.object_image() | ctx.m2.link_image()
    shared = sorted(ctx.m1.object_image() & ctx.m2.object_image())

    for (ra, ma, other_img, rb) in ((r1, ctx.m1, img2, r2), (r2, ctx.m2, img1, r1)):
        used = sorted(deleted_elements(ra, ma) & other_img)
        if used:
            reasons.append(
                f"delete-use: {ra.name} deletes {', '.join(used)} inside the match image of {rb.name}"
            )
    if shared:
        for (ra, ma) in ((r1, ctx.m1), (r2, ctx.m2)):
            touched = [f"{ma.object_map[o]}.{attr}" for o, attr in ra.reassigned_slots()]
            touched += [
                f"{ma.object_map[o]}.{attr}"
                for o in ra.deleted_objects()
                for attr in sorted(ra.lhs.slots.get(o, {}))
            ]
            if touched:
                reasons.append(
                    f"reassign-use: {ra.name} reassigns or deletes slots "
                    f"{', '.join(sorted(touched))} while the matches share {', '.join(shared)}"
                )
    if reasons:
        return CpaResult(CpaKind.POTENTIAL_CONFLICT, reasons)
    return CpaResult(CpaKind.INDEPENDENT)


def auxiliary_vars(result_graph: SymbolicGraph, base: SymbolicGraph) -> set[Variable]:
    """Variables of the result assigned to no slot and absent from the base context."""
    assigned = {v for _, _, v in result_graph.slot_items()}
    out = set()
    for v in result_graph.variables.values():
        if v in assigned:
            continue
        if base.variables.get(v.id) == v:
            continue
        out.add(v)
    return out


class Equivalence(Enum):
    EQUIVALENT = "equivalent"
    NOT_EQUIVALENT = "not-equivalent"
    UNKNOWN = "unknown"


@dataclass
class EquivalenceCheck:
    verdict: Equivalence
    solver: ValidityVerdict | None = None
    query: Formula | None = None
    sigma: dict[str, str] = field(default_factory=dict)
    aux12: tuple[str, ...] = ()
    aux21: tuple[str, ...] = ()
    note: str = ""


def check_result_equivalence(
    res12: ApplicationResult,
    res21: ApplicationResult,
    base: SymbolicGraph,
    iso: Morphism,
    config: SolverConfig | None = None,
) -> EquivalenceCheck:
    """Existentially bind auxiliary variables on both sides, transport the
    first formula along the isomorphism, and ask the solver whether the two
    are equivalent."""
    g12, g21 = res12.result, res21.result
    if g12 is None or g21 is None:
        raise AnalysisError("equivalence check needs applied results")
    aux12 = sorted(auxiliary_vars(g12, base))
    aux21 = sorted(auxiliary_vars(g21, base))
    f12: Formula = F.Exists(tuple(aux12), g12.formula) if aux12 else g12.formula
    f21: Formula = F.Exists(tuple(aux21), g21.formula) if aux21 else g21.formula

    sigma_map: dict[Variable, Variable] = {}
    for obj, attr, v in g12.slot_items():
        w = g21.slots[iso.object_map[obj]][attr]
        if v.sort != w.sort:
            return EquivalenceCheck(Equivalence.NOT_EQUIVALENT, note="slot sorts differ under the isomorphism")
        if sigma_map.setdefault(v, w) != w:
            return EquivalenceCheck(
                Equivalence.NOT_EQUIVALENT,
                note=f"variable {v.id} cannot be mapped consistently under this isomorphism",
            )
    for v in sorted(F.free_vars(f12)):
        if v in sigma_map:
            continue
        if base.variables.get(v.id) == v:
            if g21.variables.get(v.id) != v:
                raise AnalysisError(f"base variable {v.id} missing from the second result")
            sigma_map[v] = v
        else:
            raise AnalysisError(f"variable {v.id} is neither slot-assigned, base, nor auxiliary")

    sigma = Substitution({v: w for v, w in sigma_map.items()})
    query = F.Eq(sigma(f12), f21)
    verdict = check_validity(query, config)
    mapping = {
        Validity.VALID: Equivalence.EQUIVALENT,
        Validity.INVALID: Equivalence.NOT_EQUIVALENT,
        Validity.UNKNOWN: Equivalence.UNKNOWN,
        Validity.TIMEOUT: Equivalence.UNKNOWN,
        Validity.ERROR: Equivalence.UNKNOWN,
    }
    return EquivalenceCheck(
        mapping[verdict.result],
        solver=verdict,
        query=query,
        sigma={v.id: w.id for v, w in sigma_map.items()},
        aux12=tuple(v.id for v in aux12),
        aux21=tuple(v.id for v in aux21),
    )


class ContextVerdict(Enum):
    NO_CONFLICT_HERE = "no-conflict-here"
    CONFLICT_HERE = "conflict-here"
    FILTERED_ILL_FORMED = "filtered-ill-formed"
    FILTERED_INVALID_APPLICATION = "filtered-invalid-application"
    FILTERED_INDEPENDENT = "filtered-independent"
    POTENTIAL_CONFLICT = "potential-conflict"  # cpa-only mode


class ConflictReason(Enum):
    NO_SECOND_MATCH = "no-second-match"
    NO_ISOMORPHIC_RESULT = "no-isomorphic-result"
    FORMULAS_NOT_EQUIVALENT = "formulas-not-equivalent"
    SOLVER_UNKNOWN = "solver-unknown"
    SOLVER_TIMEOUT = "solver-timeout"


@dataclass
class ContextTrace:
    index: int
    overlap: Overlap
    verdict: ContextVerdict
    reason: ConflictReason | None = None
    wf_violations: list[str] = field(default_factory=list)
    cpa: CpaResult | None = None
    first_status: dict[str, str] = field(default_factory=dict)
    dangling: list[str] = field(default_factory=list)
    m1_objects: dict[str, str] = field(default_factory=dict)
    m2_objects: dict[str, str] = field(default_factory=dict)
    second_m2: dict[str, str] | None = None
    second_m1: dict[str, str] | None = None
    iso_objects: dict[str, str] | None = None
    equivalence: EquivalenceCheck | None = None
    notes: list[str] = field(default_factory=list)


def check_direct_confluence(
    r1: SymbolicRule,
    r2: SymbolicRule,
    ctx: OverlapContext,
    config: SolverConfig | None = None,
    index: int = -1,
) -> ContextTrace:
    """Apply both rules in both orders on the context and search for second
    matches and an isomorphism making the results equivalent."""
    trace = ContextTrace(
        index=index,
        overlap=ctx.overlap,
        verdict=ContextVerdict.CONFLICT_HERE,
        m1_objects=dict(ctx.m1.object_map),
        m2_objects=dict(ctx.m2.object_map),
    )
    app1 = apply(r1, ctx.m1, ctx.ac, config)
    app2 = apply(r2, ctx.m2, ctx.ac, config)
    trace.first_status = {"r1@m1": app1.status.value, "r2@m2": app2.status.value}
    for app in (app1, app2):
        if app.status in (ApplyStatus.INVALID_DANGLING, ApplyStatus.INVALID_UNSAT):
            trace.verdict = ContextVerdict.FILTERED_INVALID_APPLICATION
            trace.dangling = app.dangling_links
            trace.notes.append("a first application is invalid; this context cannot occur")
            return trace
    for app in (app1, app2):
        if app.status is ApplyStatus.UNKNOWN_SAT:
            trace.verdict = ContextVerdict.CONFLICT_HERE
            trace.reason = _indecision_reason([app])
            trace.notes.append("validity of a first application is undecided; treated as a conflict")
            return trace

    ac1, ac2 = app1.result, app2.result
    second12 = [(mm, apply(r2, mm, ac1, config)) for mm in find_rule_matches(r2, ac1)]
    second21 = [(mm, apply(r1, mm, ac2, config)) for mm in find_rule_matches(r1, ac2)]
    applied12 = [(mm, rr) for mm, rr in second12 if rr.applied]
    applied21 = [(mm, rr) for mm, rr in second21 if rr.applied]

    if not applied12 or not applied21:
        undecided = [rr for _, rr in second12 + second21 if rr.status is ApplyStatus.UNKNOWN_SAT]
        if undecided and (not applied12 and _all_undecided(second12) or not applied21 and _all_undecided(second21)):
            trace.reason = _indecision_reason(undecided)
        else:
            trace.reason = ConflictReason.NO_SECOND_MATCH
        side = r2.name if not applied12 else r1.name
        trace.notes.append(f"no valid second application of {side}")
        return trace

    saw_iso = saw_noteq = saw_unknown = saw_timeout = False
    for m2p, res12 in applied12:
        for m1p, res21 in applied21:
            for iso in find_isomorphisms(res12.result, res21.result):
                saw_iso = True
                eq = check_result_equivalence(res12, res21, ctx.ac, iso, config)
                if eq.verdict is Equivalence.EQUIVALENT:
                    trace.verdict = ContextVerdict.NO_CONFLICT_HERE
                    trace.second_m2 = dict(m2p.object_map)
                    trace.second_m1 = dict(m1p.object_map)
                    trace.iso_objects = dict(iso.object_map)
                    trace.equivalence = eq
                    return trace
                if eq.verdict is Equivalence.NOT_EQUIVALENT:
                    saw_noteq = True
                else:
                    trace.equivalence = eq
                    if eq.solver is not None and eq.solver.result is Validity.TIMEOUT:
                        saw_timeout = True
                    else:
                        saw_unknown = True
    if not saw_iso:
        trace.reason = ConflictReason.NO_ISOMORPHIC_RESULT
    elif saw_noteq:
        trace.reason = ConflictReason.FORMULAS_NOT_EQUIVALENT
    elif saw_timeout:
        trace.reason = ConflictReason.SOLVER_TIMEOUT
    elif saw_unknown:
        trace.reason = ConflictReason.SOLVER_UNKNOWN
    else:
        trace.reason = ConflictReason.NO_ISOMORPHIC_RESULT
    return trace


def _all_undecided(results: list[tuple[Morphism, ApplicationResult]]) -> bool:
    statuses = [rr.status for _, rr in results]
    return bool(statuses) and all(
        s in (ApplyStatus.UNKNOWN_SAT, ApplyStatus.INVALID_DANGLING, ApplyStatus.INVALID_UNSAT)
        for s in statuses
    ) and any(s is ApplyStatus.UNKNOWN_SAT for s in statuses)


def _indecision_reason(results: list[ApplicationResult]) -> ConflictReason:
    for rr in results:
        if rr.sat_verdict is not None and rr.sat_verdict.result is SatResult.TIMEOUT:
            return ConflictReason.SOLVER_TIMEOUT
    return ConflictReason.SOLVER_UNKNOWN


class PairOutcome(Enum):
    NON_CONFLICTING = "non-conflicting"
    CONFLICTING = "conflicting"


@dataclass
class PairStats:
    enumerated: int = 0
    filtered_ill_formed: int = 0
    filtered_independent: int = 0
    filtered_invalid_application: int = 0
    proven: int = 0
    conflicts: int = 0


@dataclass
class PairVerdict:
    rule1: str
    rule2: str
    verdict: PairOutcome
    traces: list[ContextTrace]
    stats: PairStats


def analyze_pair(
    r1: SymbolicRule,
    r2: SymbolicRule,
    config: SolverConfig | None = None,
    cpa_only: bool = False,
) -> PairVerdict:
    """Full pipeline on one pair.  Every enumerated context is analyzed; the
    pair is non-conflicting iff no context ends in a conflict."""
    if r1.lhs.type_graph != r2.lhs.type_graph:
        raise AnalysisError("rules are typed over different type graphs")
    efm_typed = r1.lhs.type_graph == efm_type_graph()
    contexts = enumerate_overlaps(r1.lhs, r2.lhs)
    stats = PairStats(enumerated=len(contexts))
    traces: list[ContextTrace] = []
    for index, ctx in enumerate(contexts):
        if efm_typed:
            violations = check_wellformed(ctx.ac)
            if violations:
                stats.filtered_ill_formed += 1
                traces.append(
                    ContextTrace(
                        index=index,
                        overlap=ctx.overlap,
                        verdict=ContextVerdict.FILTERED_ILL_FORMED,
                        wf_violations=sorted({name for name, _ in violations}),
                        m1_objects=dict(ctx.m1.object_map),
                        m2_objects=dict(ctx.m2.object_map),
                    )
                )
                continue
        cpa = cpa_filter(r1, r2, ctx)
        if cpa.kind is CpaKind.INDEPENDENT:
            stats.filtered_independent += 1
            traces.append(
                ContextTrace(
                    index=index,
                    overlap=ctx.overlap,
                    verdict=ContextVerdict.FILTERED_INDEPENDENT,
                    cpa=cpa,
                    m1_objects=dict(ctx.m1.object_map),
                    m2_objects=dict(ctx.m2.object_map),
                )
            )
            continue
        if cpa_only:
            traces.append(
                ContextTrace(
                    index=index,
                    overlap=ctx.overlap,
                    verdict=ContextVerdict.POTENTIAL_CONFLICT,
                    cpa=cpa,
                    m1_objects=dict(ctx.m1.object_map),
                    m2_objects=dict(ctx.m2.object_map),
                )
            )
            continue
        trace = check_direct_confluence(r1, r2, ctx, config, index=index)
        trace.cpa = cpa
        traces.append(trace)
        if trace.verdict is ContextVerdict.FILTERED_INVALID_APPLICATION:
            stats.filtered_invalid_application += 1
        elif trace.verdict is ContextVerdict.NO_CONFLICT_HERE:
            stats.proven += 1
        elif trace.verdict is ContextVerdict.CONFLICT_HERE:
            stats.conflicts += 1
    if cpa_only:
        conflicting = any(t.verdict is ContextVerdict.POTENTIAL_CONFLICT for t in traces)
    else:
        conflicting = any(t.verdict is ContextVerdict.CONFLICT_HERE for t in traces)
    outcome = PairOutcome.CONFLICTING if conflicting else PairOutcome.NON_CONFLICTING
    return PairVerdict(r1.name, r2.name, outcome, traces, stats)


@dataclass
class RulesetMatrix:
    """Lower-triangular (including diagonal) matrix of pair verdicts."""

    rules: list[str]
    entries: dict[tuple[int, int], PairVerdict]

    def verdict(self, i: int, j: int) -> PairOutcome:
        key = (i, j) if i >= j else (j, i)
        return self.entries[key].verdict

    def non_conflicting_count(self) -> int:
        return sum(1 for v in self.entries.values() if v.verdict is PairOutcome.NON_CONFLICTING)

    def conflicting_count(self) -> int:
        return sum(1 for v in self.entries.values() if v.verdict is PairOutcome.CONFLICTING)


def analyze_ruleset(
    rules: list[SymbolicRule],
    config: SolverConfig | None = None,
    cpa_only: bool = False,
    pairs: list[tuple[int, int]] | None = None,
) -> RulesetMatrix:
    entries: dict[tuple[int, int], PairVerdict] = {}
    wanted = pairs if pairs is not None else [(i, j) for i in range(len(rules)) for j in range(i + 1)]
    for i, j in wanted:
        key = (i, j) if i >= j else (j, i)
        if key not in entries:
            entries[key] = analyze_pair(rules[key[0]], rules[key[1]], config, cpa_only=cpa_only)
    return RulesetMatrix([r.name for r in rules], entries)
