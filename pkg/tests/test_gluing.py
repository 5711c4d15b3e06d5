import pytest

from efmct import formula as F
from efmct.efm import FEATURE, REAL_ATTR, REAL_ATTRS, efm_type_graph
from efmct.gluing import GlueError, Overlap, disjoint_union, glue
from efmct.graph import SymbolicGraph
from efmct.matching import find_isomorphisms
from efmct.sorts import BOOLEAN, REAL, Variable


def feature_with_attr(f="f", a="a", link="l", vf="s", va="v", formula=F.TRUE):
    return SymbolicGraph.build(
        efm_type_graph(),
        [(f, FEATURE), (a, REAL_ATTR)],
        [(link, REAL_ATTRS, f, a)],
        slots={(f, "sel"): Variable(vf, BOOLEAN), (a, "val"): Variable(va, REAL)},
        formula=formula,
    )


def test_disjoint_union_counts(hoist, raise10):
    g, e1, e2 = disjoint_union(hoist.lhs, raise10.lhs)
    assert len(g.objects) == len(hoist.lhs.objects) + len(raise10.lhs.objects)
    assert len(g.links) == len(hoist.lhs.links) + len(raise10.lhs.links)
    assert e1.check() == [] and e2.check() == []
    covered = e1.object_image() | e2.object_image()
    assert covered == set(g.objects)


def test_full_identification_collapses_to_g1(raise10):
    lhs = raise10.lhs
    overlap = Overlap.of([("fx", "fx"), ("ax", "ax")], [("lx", "lx")])
    g, e1, e2 = glue(lhs, lhs, overlap)
    assert find_isomorphisms(g, lhs)
    assert e1.object_map == e2.object_map == {"fx": "fx", "ax": "ax"}


def test_glued_context_shares_one_variable(hoist, raise10):
    overlap = Overlap.of([("f2", "fx"), ("a2", "ax")], [("la", "lx")])
    g, e1, e2 = glue(hoist.lhs, raise10.lhs, overlap)
    assert sorted(g.objects) == ["a2", "f1", "f2", "man"]
    # Merged slots share the first graph's variable.
    assert e2.variable_map().get(raise10.lhs.slot_var("ax", "val")) == g.slot_var("a2", "val")
    assert g.slot_var("a2", "val") == hoist.lhs.slot_var("a2", "val")


def test_attribute_only_identification_keeps_both_features(hoist, raise10):
    g, _, _ = glue(hoist.lhs, raise10.lhs, Overlap.of([("a2", "ax")]))
    assert len(g.objects) == 5
    owners = [l for l in g.links.values() if l.type == REAL_ATTRS and l.target == "a2"]
    assert len(owners) == 2


def test_formulas_are_conjoined():
    g1 = feature_with_attr(formula=F.Gt(F.Var(Variable("v", REAL)), F.real(0)))
    g2 = feature_with_attr(f="f2", a="a2", link="l2", vf="s2", va="v2",
                           formula=F.Lt(F.Var(Variable("v2", REAL)), F.real(9)))
    g, _, _ = disjoint_union(g1, g2)
    parts = F.conjuncts(g.formula)
    assert len(parts) == 2


def test_variable_renaming_on_disjoint_union():
    g1 = feature_with_attr()
    g2 = feature_with_attr()  # identical ids on purpose
    g, e1, e2 = disjoint_union(g1, g2)
    assert len(g.variables) == 4
    assert e2.object_map["f"] != "f"


def test_type_clash_rejected(hoist, raise10):
    with pytest.raises(GlueError):
        glue(hoist.lhs, raise10.lhs, Overlap.of([("man", "fx")]))


def test_incidence_clash_rejected(hoist, raise10):
    # Identifying the links without identifying their endpoints is inconsistent.
    with pytest.raises(GlueError):
        glue(hoist.lhs, raise10.lhs, Overlap.of([("f2", "fx")], [("la", "lx")]))


def test_non_injective_identification_rejected(hoist, raise10):
    with pytest.raises(GlueError):
        glue(hoist.lhs, raise10.lhs, Overlap.of([("f1", "fx"), ("f2", "fx")]))


def test_parallel_link_creation_rejected(hoist, raise10):
    # Both endpoints identified but the connecting links left separate.
    with pytest.raises(GlueError):
        glue(hoist.lhs, raise10.lhs, Overlap.of([("f2", "fx"), ("a2", "ax")]))
