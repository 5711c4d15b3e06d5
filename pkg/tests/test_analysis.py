import itertools
import random

import pytest

from efmct import fixtures as FX
from efmct import formula as F
from efmct.analysis import (
    ConflictReason, ContextVerdict, CpaKind, Equivalence, OverlapContext, PairOutcome,
    analyze_pair, analyze_ruleset, auxiliary_vars, check_direct_confluence,
    check_result_equivalence, cpa_filter, enumerate_overlaps, filter_wellformed,
)
from efmct.efm import FEATURE, REAL_ATTR, REAL_ATTRS, efm_type_graph
from efmct.graph import Morphism, SymbolicGraph
from efmct.matching import find_isomorphisms, find_matches
from efmct.rules import ApplicationResult, ApplyStatus, SymbolicRule, apply, find_rule_matches
from efmct.smt import SolverConfig
from efmct.sorts import BOOLEAN, REAL, Variable

from test_rules import stub_solver


def overlap_signature(ctx: OverlapContext):
    return (ctx.overlap.object_pairs, ctx.overlap.link_pairs)


def test_five_contexts_for_hoist_raise(hoist, raise10):
    contexts = enumerate_overlaps(hoist.lhs, raise10.lhs)
    assert len(contexts) == 5
    signatures = {overlap_signature(c) for c in contexts}
    assert signatures == {
        ((("a2", "ax"), ("f2", "fx")), (("la", "lx"),)),  # feature+attribute+link glued
        ((("a2", "ax"), ("f1", "fx")), ()),  # attribute under the parent feature
        ((("a2", "ax"),), ()),  # attribute shared between two features
        ((("f1", "fx"),), ()),  # parent feature shared
        ((("f2", "fx"),), ()),  # child feature shared, attributes separate
    }
    for ctx in contexts:
        assert ctx.m1.check() == [] and ctx.m2.check() == []
        covered = ctx.m1.object_image() | ctx.m2.object_image()
        assert covered == set(ctx.ac.objects)
        assert ctx.ac.formula == F.TRUE


def test_single_object_patterns_give_one_context():
    p1 = FX.single_feature_pattern("f", "s")
    p2 = FX.single_feature_pattern("g", "t")
    contexts = enumerate_overlaps(p1, p2)
    assert len(contexts) == 1
    assert len(contexts[0].ac.objects) == 1


def test_wellformed_filter_drops_two(hoist, raise10):
    contexts = enumerate_overlaps(hoist.lhs, raise10.lhs)
    kept, dropped = filter_wellformed(contexts)
    assert len(kept) == 3 and len(dropped) == 2
    assert all(names == ["C-3"] for _, names in dropped)
    dropped_signatures = {overlap_signature(c) for c, _ in dropped}
    assert dropped_signatures == {
        ((("a2", "ax"), ("f1", "fx")), ()),
        ((("a2", "ax"),), ()),
    }


def test_cpa_flags_delete_use_and_reassign_use(hoist, raise10):
    contexts = enumerate_overlaps(hoist.lhs, raise10.lhs)
    by_sig = {overlap_signature(c): c for c in contexts}

    glued = by_sig[((("a2", "ax"), ("f2", "fx")), (("la", "lx"),))]
    res = cpa_filter(hoist, raise10, glued)
    assert res.kind is CpaKind.POTENTIAL_CONFLICT
    assert any("delete-use" in r for r in res.reasons)

    parent_shared = by_sig[((("f1", "fx"),), ())]
    res = cpa_filter(hoist, raise10, parent_shared)
    assert res.kind is CpaKind.POTENTIAL_CONFLICT
    assert any("reassign-use" in r for r in res.reasons)


def test_cpa_independent_when_nothing_is_deleted_or_reassigned():
    r1 = FX.identity_rule("noop-1")
    r2 = FX.identity_rule("noop-2")
    ctx = enumerate_overlaps(r1.lhs, r2.lhs)[0]
    assert cpa_filter(r1, r2, ctx).kind is CpaKind.INDEPENDENT


def test_independent_contexts_are_confluent_anyway(solver):
    # Spot check for the soundness of the independence filter.
    r1 = FX.add_nat_attribute_rule("add-a")
    r2 = FX.identity_rule("noop")
    for ctx in enumerate_overlaps(r1.lhs, r2.lhs):
        res = cpa_filter(r1, r2, ctx)
        if res.kind is CpaKind.INDEPENDENT:
            trace = check_direct_confluence(r1, r2, ctx, solver)
            assert trace.verdict is ContextVerdict.NO_CONFLICT_HERE


def test_direct_confluence_on_fully_glued_context(hoist, raise10, solver):
    contexts = enumerate_overlaps(hoist.lhs, raise10.lhs)
    glued = next(
        c for c in contexts
        if overlap_signature(c) == ((("a2", "ax"), ("f2", "fx")), (("la", "lx"),))
    )
    trace = check_direct_confluence(hoist, raise10, glued, solver)
    assert trace.verdict is ContextVerdict.NO_CONFLICT_HERE
    assert trace.first_status == {"r1@m1": "applied", "r2@m2": "applied"}
    # One auxiliary per order: the variable superseded by the other rule.
    assert len(trace.equivalence.aux12) == 1
    assert len(trace.equivalence.aux21) == 1
    assert trace.equivalence.verdict is Equivalence.EQUIVALENT
    assert trace.equivalence.solver.result.value == "valid"
    # The preserved parent feature maps to itself under the isomorphism.
    assert trace.iso_objects["f1"] == "f1"


def test_result_graphs_have_exactly_one_isomorphism(hoist, raise10, solver):
    contexts = enumerate_overlaps(hoist.lhs, raise10.lhs)
    glued = next(
        c for c in contexts
        if overlap_signature(c) == ((("a2", "ax"), ("f2", "fx")), (("la", "lx"),))
    )
    first = apply(hoist, glued.m1, glued.ac, solver)
    then = find_rule_matches(raise10, first.result)
    assert len(then) == 1
    res12 = apply(raise10, then[0], first.result, solver)

    other = apply(raise10, glued.m2, glued.ac, solver)
    back = find_rule_matches(hoist, other.result)
    assert len(back) == 1
    res21 = apply(hoist, back[0], other.result, solver)

    isos = find_isomorphisms(res12.result, res21.result)
    assert len(isos) == 1
    assert isos[0].object_map["f1"] == "f1"

    aux12 = auxiliary_vars(res12.result, glued.ac)
    aux21 = auxiliary_vars(res21.result, glued.ac)
    assert {v.id for v in aux12} == {"v_new@hoist-attribute"}
    assert {v.id for v in aux21} == {"v_x2@raise-by-10"}

    eq = check_result_equivalence(res12, res21, glued.ac, isos[0], solver)
    assert eq.verdict is Equivalence.EQUIVALENT


def test_dangling_context_is_filtered(hoist, raise10, solver):
    contexts = enumerate_overlaps(hoist.lhs, raise10.lhs)
    shared_child = next(c for c in contexts if overlap_signature(c) == ((("f2", "fx"),), ()))
    trace = check_direct_confluence(hoist, raise10, shared_child, solver)
    assert trace.verdict is ContextVerdict.FILTERED_INVALID_APPLICATION
    assert trace.dangling


def test_auxiliary_vars_empty_for_pure_additions(lock_excerpt):
    rule = FX.add_nat_attribute_rule()
    m = find_rule_matches(rule, lock_excerpt)[0]
    out = apply(rule, m, lock_excerpt, stub_solver())
    assert auxiliary_vars(out.result, lock_excerpt) == set()


def _applied_result(formula, slot_value_var):
    g = SymbolicGraph.build(
        efm_type_graph(),
        [("f", FEATURE), ("a", REAL_ATTR)],
        [("l", REAL_ATTRS, "f", "a")],
        slots={("f", "sel"): Variable("s", BOOLEAN), ("a", "val"): slot_value_var},
        extra_variables=[],
        formula=formula,
    )
    return ApplicationResult(ApplyStatus.APPLIED, g)


def test_equivalence_trivial_cases(solver):
    v = Variable("v", REAL)
    base = SymbolicGraph.build(
        efm_type_graph(),
        [("f", FEATURE), ("a", REAL_ATTR)],
        [("l", REAL_ATTRS, "f", "a")],
        slots={("f", "sel"): Variable("s", BOOLEAN), ("a", "val"): v},
    )
    same = _applied_result(F.Eq(F.Var(v), F.real(0)), v)
    iso = find_isomorphisms(same.result, same.result)[0]
    eq = check_result_equivalence(same, same, base, iso, solver)
    assert eq.verdict is Equivalence.EQUIVALENT

    zero = _applied_result(F.Eq(F.Var(v), F.real(0)), v)
    one = _applied_result(F.Eq(F.Var(v), F.real(1)), v)
    iso = find_isomorphisms(zero.result, one.result)[0]
    eq = check_result_equivalence(zero, one, base, iso, solver)
    assert eq.verdict is Equivalence.NOT_EQUIVALENT


def test_hoist_self_pair_conflicts_via_first_context(hoist, solver):
    verdict = analyze_pair(hoist, hoist, solver)
    assert verdict.verdict is PairOutcome.CONFLICTING
    first = verdict.traces[0]
    assert first.overlap.size() == 7  # full identification: 4 objects + 3 links
    assert first.verdict is ContextVerdict.CONFLICT_HERE
    assert first.reason is ConflictReason.NO_SECOND_MATCH


def test_hoist_raise_pair_is_non_conflicting(hoist, raise10, solver):
    verdict = analyze_pair(hoist, raise10, solver)
    assert verdict.verdict is PairOutcome.NON_CONFLICTING
    assert verdict.stats.enumerated == 5
    assert verdict.stats.filtered_ill_formed == 2
    assert verdict.stats.filtered_invalid_application == 1
    assert verdict.stats.proven == 2


def test_raise_scale_pair_conflicts(raise10, scale10, solver):
    verdict = analyze_pair(raise10, scale10, solver)
    assert verdict.verdict is PairOutcome.CONFLICTING
    reasons = {t.reason for t in verdict.traces if t.verdict is ContextVerdict.CONFLICT_HERE}
    assert ConflictReason.FORMULAS_NOT_EQUIVALENT in reasons


def test_identity_rule_never_conflicts(raise10, solver):
    verdict = analyze_pair(FX.identity_rule(), raise10, solver)
    assert verdict.verdict is PairOutcome.NON_CONFLICTING


def test_pair_verdicts_are_symmetric(fast_solver):
    rules = FX.edit_rules()
    for r1, r2 in itertools.combinations_with_replacement(rules, 2):
        a = analyze_pair(r1, r2, fast_solver).verdict
        b = analyze_pair(r2, r1, fast_solver).verdict
        assert a == b, (r1.name, r2.name)


def test_unknown_solver_never_flips_conflicts_to_clean():
    # Degrading every solver verdict to unknown must keep conflicting pairs
    # conflicting (it may only add false conflicts).
    unknown = stub_solver("unknown")
    rules = FX.edit_rules()
    hoist, raise10, scale10 = rules
    for r1, r2 in [(hoist, hoist), (raise10, scale10), (hoist, scale10)]:
        assert analyze_pair(r1, r2, unknown).verdict is PairOutcome.CONFLICTING


def test_no_conflict_traces_are_replayable(hoist, raise10, solver):
    verdict = analyze_pair(hoist, raise10, solver)
    replayed = 0
    for trace in verdict.traces:
        if trace.verdict is not ContextVerdict.NO_CONFLICT_HERE:
            continue
        contexts = enumerate_overlaps(hoist.lhs, raise10.lhs)
        ctx = contexts[trace.index]
        first = apply(hoist, ctx.m1, ctx.ac, solver)
        second_m2 = next(
            m for m in find_rule_matches(raise10, first.result)
            if m.object_map == trace.second_m2
        )
        res12 = apply(raise10, second_m2, first.result, solver)
        other = apply(raise10, ctx.m2, ctx.ac, solver)
        second_m1 = next(
            m for m in find_rule_matches(hoist, other.result)
            if m.object_map == trace.second_m1
        )
        res21 = apply(hoist, second_m1, other.result, solver)
        iso = next(
            i for i in find_isomorphisms(res12.result, res21.result)
            if i.object_map == trace.iso_objects
        )
        eq = check_result_equivalence(res12, res21, ctx.ac, iso, solver)
        assert eq.verdict is Equivalence.EQUIVALENT
        replayed += 1
    assert replayed == 2


def test_analyze_ruleset_matrix_shape(fast_solver):
    rules = [FX.identity_rule("noop-a"), FX.identity_rule("noop-b")]
    matrix = analyze_ruleset(rules, fast_solver)
    assert set(matrix.entries) == {(0, 0), (1, 0), (1, 1)}
    assert matrix.verdict(0, 1) is matrix.verdict(1, 0)
    assert matrix.non_conflicting_count() == 3


def test_cpa_only_flags_all_fixture_pairs():
    matrix = analyze_ruleset(FX.edit_rules(), cpa_only=True)
    assert len(matrix.entries) == 6
    assert all(v.verdict is PairOutcome.CONFLICTING for v in matrix.entries.values())


# --- overlap enumeration oracle ------------------------------------------------


def _merge_by_pairing(lhs1, lhs2, pairing):
    """Independent construction of a candidate context graph: merge paired
    objects, merge links that become shape-equal, rename the rest."""
    tg = lhs1.type_graph
    objects = dict(lhs1.objects)
    links = {lid: l for lid, l in lhs1.links.items()}
    slots = {o: dict(a) for o, a in lhs1.slots.items()}
    variables = dict(lhs1.variables)
    name_map = {}
    for o2 in sorted(lhs2.objects):
        if o2 in pairing:
            name_map[o2] = pairing[o2]
            continue
        new = o2
        while new in objects:
            new += "'"
        name_map[o2] = new
        objects[new] = lhs2.objects[o2]
        slots[new] = {}
        for attr, var in lhs2.slots.get(o2, {}).items():
            nv_id = var.id
            while nv_id in variables:
                nv_id += "'"
            nv = Variable(nv_id, var.sort)
            variables[nv_id] = nv
            slots[new][attr] = nv
    shapes = {(l.type, l.source, l.target) for l in links.values()}
    for l2 in sorted(lhs2.links):
        link = lhs2.links[l2]
        shape = (link.type, name_map[link.source], name_map[link.target])
        if shape in shapes:
            continue  # collapses onto an existing link
        shapes.add(shape)
        new = l2
        while new in links:
            new += "'"
        from efmct.graph import Link

        links[new] = Link(*shape)
    return SymbolicGraph(tg, objects, links, slots, variables.values())


def _jointly_surjective_pairs(lhs1, lhs2, g):
    for m1 in find_matches(lhs1, g):
        for m2 in find_matches(lhs2, g):
            objs = m1.object_image() | m2.object_image()
            lnks = m1.link_image() | m2.link_image()
            if objs == set(g.objects) and lnks == set(g.links):
                yield (g, m1, m2)


def _triple_isomorphic(t1, t2):
    """A commuting isomorphism is pointwise forced by joint surjectivity;
    build the only candidate and verify it generically."""
    g1, m1a, m1b = t1
    g2, m2a, m2b = t2
    if len(g1.objects) != len(g2.objects) or len(g1.links) != len(g2.links):
        return False
    phi_obj, phi_link = {}, {}
    for ours, theirs in ((m1a, m2a), (m1b, m2b)):
        for x, img in ours.object_map.items():
            want = theirs.object_map[x]
            if phi_obj.setdefault(img, want) != want:
                return False
        for x, img in ours.link_map.items():
            want = theirs.link_map[x]
            if phi_link.setdefault(img, want) != want:
                return False
    phi = Morphism(g1, g2, phi_obj, phi_link)
    if phi.check():
        return False
    return m1a.then(phi) == m2a and m1b.then(phi) == m2b


def test_forced_triple_iso_agrees_with_generic_search():
    # Guard for the construction above: on small patterns, the forced
    # candidate agrees with searching all isomorphisms.
    rng = random.Random(3)
    for _ in range(8):
        lhs1 = _random_pattern(rng, "p", max_objects=3)
        lhs2 = _random_pattern(rng, "q", max_objects=3)
        contexts = enumerate_overlaps(lhs1, lhs2)
        for c1, c2 in itertools.product(contexts, repeat=2):
            forced = _triple_isomorphic((c1.ac, c1.m1, c1.m2), (c2.ac, c2.m1, c2.m2))
            generic = any(
                c1.m1.then(phi) == c2.m1 and c1.m2.then(phi) == c2.m2
                for phi in find_isomorphisms(c1.ac, c2.ac)
            )
            assert forced == generic


def brute_force_overlaps(lhs1, lhs2):
    """Oracle: all jointly-surjective match pairs into merged copies of the
    two patterns, quotiented by isomorphism of the whole triple."""
    ids1 = sorted(lhs1.objects)
    ids2 = sorted(lhs2.objects)
    pairings = []

    def extend(k, current):
        if k == len(ids2):
            if current:
                pairings.append(dict(current))
            return
        o2 = ids2[k]
        extend(k + 1, current)
        for o1 in ids1:
            if lhs1.objects[o1] == lhs2.objects[o2] and o1 not in current.values():
                current[o2] = o1
                extend(k + 1, current)
                del current[o2]

    extend(0, {})
    classes = []
    for pairing in pairings:
        g = _merge_by_pairing(lhs1, lhs2, pairing)
        for triple in _jointly_surjective_pairs(lhs1, lhs2, g):
            if not any(_triple_isomorphic(triple, seen) for seen in classes):
                classes.append(triple)
    return classes


def _random_pattern(rng, tag, max_objects=4):
    from conftest import random_efm_graph

    g = random_efm_graph(rng, max_objects=max_objects, min_objects=1,
                         types=(FEATURE, REAL_ATTR), link_probability=0.6)
    # Re-key ids so the two patterns start from disjoint namespaces.
    objects = [(f"{tag}{oid}", t) for oid, t in sorted(g.objects.items())]
    links = [
        (f"{tag}{lid}", l.type, f"{tag}{l.source}", f"{tag}{l.target}")
        for lid, l in sorted(g.links.items())
    ]
    slots = {}
    for (oid, attr, var) in g.slot_items():
        slots[(f"{tag}{oid}", attr)] = Variable(f"{tag}{var.id}", var.sort)
    return SymbolicGraph.build(efm_type_graph(), objects, links, slots)


@pytest.mark.parametrize("seed", range(4))
def test_overlap_enumeration_matches_oracle(seed):
    rng = random.Random(seed)
    for _ in range(10):
        lhs1 = _random_pattern(rng, "p")
        lhs2 = _random_pattern(rng, "q")
        got = enumerate_overlaps(lhs1, lhs2)
        expected = brute_force_overlaps(lhs1, lhs2)
        assert len(got) == len(expected)
        # Every enumerated context corresponds to exactly one oracle class.
        for ctx in got:
            matching = [
                t for t in expected if _triple_isomorphic((ctx.ac, ctx.m1, ctx.m2), t)
            ]
            assert len(matching) == 1
