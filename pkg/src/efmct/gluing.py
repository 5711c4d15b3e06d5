"""Pushout-style gluing of two graphs over a partial correspondence.

Identified elements are merged once (keeping the first graph's identifiers),
everything else is copied disjointly.  Merged slots share one variable; the
result formula is the conjunction of the embedded copies of both formulas.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import formula as F
from .formula import Substitution
from .graph import GraphError, Link, Morphism, SymbolicGraph, TypeGraphMismatch
from .sorts import Variable


class GlueError(GraphError):
    pass


@dataclass(frozen=True)
class Overlap:
    """Which elements of g2 are identified with which elements of g1."""

    object_pairs: tuple[tuple[str, str], ...]  # (g1 object, g2 object)
    link_pairs: tuple[tuple[str, str], ...]  # (g1 link, g2 link)

    def size(self) -> int:
        return len(self.object_pairs) + len(self.link_pairs)

    @classmethod
    def of(cls, object_pairs, link_pairs=()) -> "Overlap":
        return cls(tuple(sorted(tuple(p) for p in object_pairs)), tuple(sorted(tuple(p) for p in link_pairs)))


def _fresh_id(base: str, taken: set[str]) -> str:
    if base not in taken:
        return base
    k = 2
    while f"{base}~{k}" in taken:
        k += 1
    return f"{base}~{k}"


def glue(
    g1: SymbolicGraph,
    g2: SymbolicGraph,
    overlap: Overlap,
) -> tuple[SymbolicGraph, Morphism, Morphism]:
    """Glue g2 onto g1 along the overlap; returns (result, embedding of g1, embedding of g2)."""
    if g1.type_graph is not g2.type_graph and g1.type_graph != g2.type_graph:
        raise TypeGraphMismatch("cannot glue graphs over different type graphs")

    obj_2to1: dict[str, str] = {}
    for o1, o2 in overlap.object_pairs:
        if o1 not in g1.objects or o2 not in g2.objects:
            raise GlueError(f"identification ({o1!r}, {o2!r}) names a missing object")
        if g1.objects[o1] != g2.objects[o2]:
            raise GlueError(f"identified objects {o1!r} and {o2!r} differ in type")
        if o2 in obj_2to1 or o1 in obj_2to1.values():
            raise GlueError("object identification is not injective")
        obj_2to1[o2] = o1
    link_2to1: dict[str, str] = {}
    for l1, l2 in overlap.link_pairs:
        if l1 not in g1.links or l2 not in g2.links:
            raise GlueError(f"identification ({l1!r}, {l2!r}) names a missing link")
        a, b = g1.links[l1], g2.links[l2]
        if a.type != b.type:
            raise GlueError(f"identified links {l1!r} and {l2!r} differ in type")
        if obj_2to1.get(b.source) != a.source or obj_2to1.get(b.target) != a.target:
            raise GlueError(f"identified links {l1!r} and {l2!r} clash on incidence")
        if l2 in link_2to1 or l1 in link_2to1.values():
            raise GlueError("link identification is not injective")
        link_2to1[l2] = l1

    objects = dict(g1.objects)
    links = dict(g1.links)
    slots = {o: dict(attrs) for o, attrs in g1.slots.items()}
    variables = dict(g1.variables)
    e1 = Morphism(g1, None, {o: o for o in g1.objects}, {l: l for l in g1.links})  # type: ignore[arg-type]

    # Variables of g2: merged slots adopt g1's variable, everything else is
    # copied, renamed on id clash.
    var_2to1: dict[Variable, Variable] = {}
    for o2, attrs in g2.slots.items():
        if o2 in obj_2to1:
            for attr, v2 in attrs.items():
                v1 = g1.slots[obj_2to1[o2]][attr]
                if var_2to1.setdefault(v2, v1) != v1:
                    raise GlueError(f"variable {v2.id!r} of the second graph would merge inconsistently")
    for vid in sorted(g2.variables):
        v2 = g2.variables[vid]
        if v2 in var_2to1:
            continue
        new_id = _fresh_id(vid, set(variables))
        nv = v2 if new_id == vid else Variable(new_id, v2.sort)
        var_2to1[v2] = nv
        variables[new_id] = nv

    obj2_map: dict[str, str] = {}
    for o2 in sorted(g2.objects):
        if o2 in obj_2to1:
            obj2_map[o2] = obj_2to1[o2]
            continue
        new_id = _fresh_id(o2, set(objects))
        obj2_map[o2] = new_id
        objects[new_id] = g2.objects[o2]
        slots[new_id] = {attr: var_2to1[v] for attr, v in g2.slots.get(o2, {}).items()}

    shapes = {(l.type, l.source, l.target): lid for lid, l in links.items()}
    link2_map: dict[str, str] = {}
    for l2 in sorted(g2.links):
        if l2 in link_2to1:
            link2_map[l2] = link_2to1[l2]
            continue
        old = g2.links[l2]
        new_link = Link(old.type, obj2_map[old.source], obj2_map[old.target])
        shape = (new_link.type, new_link.source, new_link.target)
        if shape in shapes:
            raise GlueError(
                f"gluing would create parallel {old.type!r} links between "
                f"{new_link.source!r} and {new_link.target!r}"
            )
        new_id = _fresh_id(l2, set(links))
        link2_map[l2] = new_id
        links[new_id] = new_link
        shapes[shape] = new_id

    sigma2 = Substitution(var_2to1)
    formula = F.conj(g1.formula, sigma2(g2.formula))
    result = SymbolicGraph(g1.type_graph, objects, links, slots, variables.values(), formula)
    e1.target = result
    e2 = Morphism(g2, result, obj2_map, link2_map)
    return result, e1, e2


def disjoint_union(g1: SymbolicGraph, g2: SymbolicGraph) -> tuple[SymbolicGraph, Morphism, Morphism]:
    return glue(g1, g2, Overlap.of(()))
