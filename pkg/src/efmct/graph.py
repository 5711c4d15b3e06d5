"""Typed symbolic graphs: objects, links, attribute slots holding variables,
and a constraining formula.

Graphs are immutable by convention after construction; every operation in
the package returns fresh graphs.  Construction is permissive (an invalid
graph can be represented), validation is a separate step returning
violation descriptors.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

from . import formula as F
from .formula import Formula, Substitution
from .sorts import Sort, Variable


class GraphError(Exception):
    pass


class TypeGraphMismatch(GraphError):
    pass


@dataclass(frozen=True)
class TypeGraph:
    """Metamodel: node types with attribute declarations, edge types with endpoints."""

    name: str
    node_types: Mapping[str, Mapping[str, Sort]]
    edge_types: Mapping[str, tuple[str, str]]

    def __post_init__(self) -> None:
        for etype, (src, tgt) in self.edge_types.items():
            if src not in self.node_types or tgt not in self.node_types:
                raise GraphError(f"edge type {etype!r} references undeclared node types")

    def attributes(self, node_type: str) -> Mapping[str, Sort]:
        return self.node_types[node_type]


@dataclass(frozen=True)
class Link:
    type: str
    source: str
    target: str


@dataclass(frozen=True)
class Violation:
    kind: str
    element: str
    message: str

    def __str__(self) -> str:
        return f"{self.kind}({self.element}): {self.message}"


class SymbolicGraph:
    """A typed instance graph paired with a first-order formula.

    Attribute slots hold variables, never values.  The variable set may
    strictly contain the slot-assigned variables: deleting elements never
    deletes variables or formula clauses.
    """

    def __init__(
        self,
        type_graph: TypeGraph,
        objects: Mapping[str, str],
        links: Mapping[str, Link],
        slots: Mapping[str, Mapping[str, Variable]],
        variables: Iterable[Variable],
        formula: Formula = F.TRUE,
    ):
        self.type_graph = type_graph
        self.objects = dict(objects)
        self.links = dict(links)
        self.slots = {obj: dict(attrs) for obj, attrs in slots.items()}
        self.variables: dict[str, Variable] = {}
        for v in variables:
            existing = self.variables.get(v.id)
            if existing is not None and existing != v:
                raise GraphError(f"variable id {v.id!r} declared with two sorts")
            self.variables[v.id] = v
        self.formula = formula

    @classmethod
    def build(
        cls,
        type_graph: TypeGraph,
        objects: Iterable[tuple[str, str]],
        links: Iterable[tuple[str, str, str, str]] = (),
        slots: Mapping[tuple[str, str], Variable] | None = None,
        extra_variables: Iterable[Variable] = (),
        formula: Formula = F.TRUE,
    ) -> "SymbolicGraph":
        """Convenience constructor that also validates the result."""
        obj_map: dict[str, str] = {}
        for oid, otype in objects:
            if oid in obj_map:
                raise GraphError(f"duplicate object id {oid!r}")
            obj_map[oid] = otype
        link_map: dict[str, Link] = {}
        for lid, etype, src, tgt in links:
            if lid in link_map:
                raise GraphError(f"duplicate link id {lid!r}")
            link_map[lid] = Link(etype, src, tgt)
        slot_map: dict[str, dict[str, Variable]] = {}
        var_list: list[Variable] = []
        for (oid, attr), var in (slots or {}).items():
            slot_map.setdefault(oid, {})[attr] = var
            var_list.append(var)
        var_list.extend(extra_variables)
        g = cls(type_graph, obj_map, link_map, slot_map, var_list, formula)
        problems = validate_graph(g, type_graph)
        if problems:
            raise GraphError("invalid graph: " + "; ".join(str(p) for p in problems))
        return g

    def slot_var(self, obj: str, attr: str) -> Variable:
        return self.slots[obj][attr]

    def slot_items(self) -> list[tuple[str, str, Variable]]:
        out = []
        for obj in sorted(self.slots):
            for attr in sorted(self.slots[obj]):
                out.append((obj, attr, self.slots[obj][attr]))
        return out

    def slot_variables(self) -> dict[str, Variable]:
        return {v.id: v for _, _, v in self.slot_items()}

    def links_between(self) -> dict[tuple[str, str, str], str]:
        """(type, source, target) -> link id; parallel links are invalid anyway."""
        return {(l.type, l.source, l.target): lid for lid, l in self.links.items()}

    def __repr__(self) -> str:
        return (
            f"SymbolicGraph(objects={len(self.objects)}, links={len(self.links)}, "
            f"vars={len(self.variables)})"
        )


def validate_graph(g: SymbolicGraph, tg: TypeGraph | None = None) -> list[Violation]:
    """All structural invariant violations of g against its type graph."""
    tg = tg or g.type_graph
    out: list[Violation] = []
    if g.type_graph is not tg and g.type_graph != tg:
        out.append(Violation("type-graph", "-", "graph is typed over a different type graph"))
        return out
    for oid in sorted(g.objects):
        otype = g.objects[oid]
        if otype not in tg.node_types:
            out.append(Violation("unknown-node-type", oid, f"node type {otype!r} is not declared"))
            continue
        declared = tg.node_types[otype]
        have = g.slots.get(oid, {})
        for attr in sorted(declared):
            if attr not in have:
                out.append(Violation("missing-slot", oid, f"slot {attr!r} of {otype!r} is absent"))
            else:
                var = have[attr]
                if var.sort != declared[attr]:
                    out.append(
                        Violation(
                            "slot-sort", oid,
                            f"slot {attr!r} holds {var.sort.name}, declared {declared[attr].name}",
                        )
                    )
                if g.variables.get(var.id) != var:
                    out.append(
                        Violation("unhoused-variable", oid, f"slot variable {var.id!r} is not in the variable set")
                    )
        for attr in sorted(have):
            if attr not in declared:
                out.append(Violation("extra-slot", oid, f"slot {attr!r} is not declared on {otype!r}"))
    for oid in sorted(g.slots):
        if oid not in g.objects:
            out.append(Violation("orphan-slots", oid, "slots attached to a non-existent object"))
    seen_shape: dict[tuple[str, str, str], str] = {}
    for lid in sorted(g.links):
        link = g.links[lid]
        if link.type not in tg.edge_types:
            out.append(Violation("unknown-edge-type", lid, f"edge type {link.type!r} is not declared"))
            continue
        src_t, tgt_t = tg.edge_types[link.type]
        for endpoint, want in ((link.source, src_t), (link.target, tgt_t)):
            if endpoint not in g.objects:
                out.append(Violation("dangling-endpoint", lid, f"endpoint {endpoint!r} does not exist"))
            elif g.objects[endpoint] != want:
                out.append(
                    Violation("endpoint-type", lid, f"endpoint {endpoint!r} is not of type {want!r}")
                )
        shape = (link.type, link.source, link.target)
        if shape in seen_shape:
            out.append(
                Violation("parallel-links", lid, f"duplicates link {seen_shape[shape]!r} between the same objects")
            )
        else:
            seen_shape[shape] = lid
    try:
        F.check_boolean(g.formula)
    except F.FormulaError as exc:
        out.append(Violation("ill-sorted-formula", "-", str(exc)))
    else:
        for v in sorted(F.free_vars(g.formula)):
            if g.variables.get(v.id) != v:
                out.append(Violation("free-variable", v.id, "formula variable is not in the variable set"))
    return out


@dataclass
class Morphism:
    """Injective structure- and type-preserving map between graphs.

    The link map is determined by the object map because parallel links are
    forbidden.  A morphism induces a substitution on slot variables.
    """

    source: SymbolicGraph
    target: SymbolicGraph
    object_map: dict[str, str]
    link_map: dict[str, str] = field(default_factory=dict)

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, Morphism)
            and self.source is other.source
            and self.target is other.target
            and self.object_map == other.object_map
            and self.link_map == other.link_map
        )

    def check(self) -> list[Violation]:
        out: list[Violation] = []
        if len(set(self.object_map.values())) != len(self.object_map):
            out.append(Violation("not-injective", "-", "two objects share an image"))
        if len(set(self.link_map.values())) != len(self.link_map):
            out.append(Violation("not-injective", "-", "two links share an image"))
        for oid, img in sorted(self.object_map.items()):
            if oid not in self.source.objects or img not in self.target.objects:
                out.append(Violation("bad-object", oid, "object or image missing"))
            elif self.source.objects[oid] != self.target.objects[img]:
                out.append(Violation("type-mismatch", oid, f"{oid!r} and {img!r} differ in type"))
        for lid, img in sorted(self.link_map.items()):
            if lid not in self.source.links or img not in self.target.links:
                out.append(Violation("bad-link", lid, "link or image missing"))
                continue
            sl, tl = self.source.links[lid], self.target.links[img]
            if sl.type != tl.type:
                out.append(Violation("type-mismatch", lid, "link types differ"))
            if self.object_map.get(sl.source) != tl.source or self.object_map.get(sl.target) != tl.target:
                out.append(Violation("incidence", lid, "link images do not commute with endpoints"))
        for lid in sorted(self.source.links):
            if lid not in self.link_map:
                out.append(Violation("missing-link", lid, "link has no image"))
        for oid in sorted(self.source.objects):
            if oid not in self.object_map:
                out.append(Violation("missing-object", oid, "object has no image"))
        try:
            self.variable_map()
        except (GraphError, F.SortError) as exc:
            out.append(Violation("variable-clash", "-", str(exc)))
        return out

    def variable_map(self) -> Substitution:
        """Substitution sending each source slot variable to the mapped slot's variable."""
        mapping: dict[Variable, Variable] = {}
        for obj, attr, var in self.source.slot_items():
            try:
                img_obj = self.object_map[obj]
                img_var = self.target.slots[img_obj][attr]
            except KeyError as exc:
                raise GraphError(f"slot ({obj}, {attr}) has no image under the morphism") from exc
            if var in mapping and mapping[var] != img_var:
                raise GraphError(
                    f"slot variable {var.id!r} would map to both "
                    f"{mapping[var].id!r} and {img_var.id!r}"
                )
            mapping[var] = img_var
        return Substitution(mapping)

    def object_image(self) -> set[str]:
        return set(self.object_map.values())

    def link_image(self) -> set[str]:
        return set(self.link_map.values())

    def then(self, other: "Morphism") -> "Morphism":
        """Composition: first self, then other."""
        if self.target is not other.source:
            raise GraphError("morphisms do not compose")
        return Morphism(
            self.source,
            other.target,
            {o: other.object_map[i] for o, i in self.object_map.items()},
            {l: other.link_map[i] for l, i in self.link_map.items()},
        )

    @classmethod
    def identity(cls, g: SymbolicGraph) -> "Morphism":
        return cls(g, g, {o: o for o in g.objects}, {l: l for l in g.links})
