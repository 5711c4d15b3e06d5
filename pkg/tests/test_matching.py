import itertools
import random

import pytest

from conftest import random_efm_graph
from efmct import fixtures as FX
from efmct.efm import FEATURE, efm_type_graph
from efmct.graph import SymbolicGraph, TypeGraph, TypeGraphMismatch
from efmct.matching import (
    find_isomorphisms,
    find_isomorphisms_python,
    find_matches,
    find_matches_python,
    kernel_name,
)
from efmct.sorts import BOOLEAN, Variable


def single_feature(oid="p", vid="sp"):
    return SymbolicGraph.build(
        efm_type_graph(), [(oid, FEATURE)], slots={(oid, "sel"): Variable(vid, BOOLEAN)}
    )


def test_single_feature_pattern_counts(lock_excerpt):
    matches = find_matches(single_feature(), lock_excerpt)
    assert len(matches) == 4
    assert sorted(m.object_map["p"] for m in matches) == ["ameth", "lock", "low", "mSec"]


def test_identity_match():
    g = single_feature()
    matches = find_matches(g, g)
    assert len(matches) == 1
    assert matches[0].object_map == {"p": "p"}


def test_feature_with_real_attribute_matches(lock_excerpt, raise10):
    matches = find_matches(raise10.lhs, lock_excerpt)
    pairs = sorted((m.object_map["fx"], m.object_map["ax"]) for m in matches)
    assert pairs == [("ameth", "aLev"), ("low", "loLev")]


def test_matches_are_valid_morphisms(lock_excerpt, hoist):
    for m in find_matches(hoist.lhs, lock_excerpt):
        assert m.check() == []


def test_deterministic_lexicographic_order(lock_excerpt):
    matches = find_matches(single_feature(), lock_excerpt)
    images = [m.object_map["p"] for m in matches]
    assert images == sorted(images)


def test_type_graph_mismatch_raises():
    other = TypeGraph("other", {"Feature": {}}, {})
    g = SymbolicGraph(other, {"f": "Feature"}, {}, {}, [])
    with pytest.raises(TypeGraphMismatch):
        find_matches(g, FX.lock_excerpt())


def brute_force_matches(pattern: SymbolicGraph, host: SymbolicGraph):
    """Oracle: all injective object assignments filtered by type and incidence."""
    p_ids = sorted(pattern.objects)
    h_ids = sorted(host.objects)
    host_links = {(l.type, l.source, l.target) for l in host.links.values()}
    found = []
    for image in itertools.permutations(h_ids, len(p_ids)):
        mapping = dict(zip(p_ids, image))
        if any(pattern.objects[p] != host.objects[mapping[p]] for p in p_ids):
            continue
        ok = all(
            (l.type, mapping[l.source], mapping[l.target]) in host_links
            for l in pattern.links.values()
        )
        if ok:
            found.append(mapping)
    return sorted(found, key=lambda m: tuple(m[p] for p in p_ids))


@pytest.mark.parametrize("seed", range(6))
def test_match_enumeration_oracle(seed):
    rng = random.Random(seed)
    for _ in range(40):
        pattern = random_efm_graph(rng, max_objects=4)
        host = random_efm_graph(rng, max_objects=8)
        got = [m.object_map for m in find_matches(pattern, host)]
        assert got == brute_force_matches(pattern, host)


def test_kernel_parity_with_python_fallback():
    rng = random.Random(99)
    for _ in range(60):
        pattern = random_efm_graph(rng, max_objects=4)
        host = random_efm_graph(rng, max_objects=7)
        fast = [m.object_map for m in find_matches(pattern, host)]
        slow = [m.object_map for m in find_matches_python(pattern, host)]
        assert fast == slow
        iso_fast = [m.object_map for m in find_isomorphisms(pattern, host)]
        iso_slow = [m.object_map for m in find_isomorphisms_python(pattern, host)]
        assert iso_fast == iso_slow


def test_isomorphism_basics(lock_excerpt):
    isos = find_isomorphisms(lock_excerpt, lock_excerpt)
    assert any(m.object_map == {o: o for o in lock_excerpt.objects} for m in isos)
    small = single_feature()
    assert find_isomorphisms(small, lock_excerpt) == []


def test_isomorphism_count_is_symmetric():
    rng = random.Random(5)
    for _ in range(40):
        g1 = random_efm_graph(rng, max_objects=5)
        g2 = random_efm_graph(rng, max_objects=5)
        assert len(find_isomorphisms(g1, g2)) == len(find_isomorphisms(g2, g1))


def test_shared_slot_variables_constrain_matches():
    # A pattern whose two features share one selection variable only matches
    # hosts where the matched slots share a variable the same way.
    tg = efm_type_graph()
    shared = Variable("s", BOOLEAN)
    pattern = SymbolicGraph.build(
        tg, [("p1", FEATURE), ("p2", FEATURE)],
        slots={("p1", "sel"): shared, ("p2", "sel"): shared},
    )
    host_distinct = SymbolicGraph.build(
        tg, [("h1", FEATURE), ("h2", FEATURE)],
        slots={("h1", "sel"): Variable("a", BOOLEAN), ("h2", "sel"): Variable("b", BOOLEAN)},
    )
    host_shared = SymbolicGraph.build(
        tg, [("h1", FEATURE), ("h2", FEATURE)],
        slots={("h1", "sel"): Variable("c", BOOLEAN), ("h2", "sel"): Variable("c", BOOLEAN)},
    )
    assert find_matches(pattern, host_distinct) == []
    assert len(find_matches(pattern, host_shared)) == 2


def test_kernel_name_reports_backend():
    assert kernel_name() in ("cython", "python")
