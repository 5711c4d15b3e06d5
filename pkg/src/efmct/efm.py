"""The extended-feature-model metamodel, its well-formedness constraints, and
the encoding of configuration semantics into formulas.

Group types are attribute slots constrained by the model formula, not static
labels, so group semantics are emitted guarded by the symbolic type.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Mapping

from . import formula as F
from .formula import Formula
from .graph import Morphism, SymbolicGraph, TypeGraph, TypeGraphMismatch
from .matching import find_matches
from .smt import SatResult, SolverConfig, check_sat
from .sorts import BOOLEAN, NATURAL, REAL, Sort, SortKind, Variable, enumeration

GROUP_TYPE = enumeration("GroupType", ("ALT", "OR", "OPT", "MAN"))

FEATURE = "Feature"
GROUP = "Group"
REAL_ATTR = "RealFeatureAttribute"
NAT_ATTR = "NatFeatureAttribute"
EXCLUDE = "ExcludeRelation"

GROUPS = "groups"  # Feature -> Group
FEATURES = "features"  # Group -> Feature
REAL_ATTRS = "realAttributes"  # Feature -> RealFeatureAttribute
NAT_ATTRS = "natAttributes"  # Feature -> NatFeatureAttribute
REQUIRES = "req"  # Feature -> Feature
EXCLUDES = "ex"  # ExcludeRelation -> Feature


class EfmStructureError(Exception):
    pass


@lru_cache(maxsize=1)
def efm_type_graph() -> TypeGraph:
    """The fixed metamodel for extended feature models."""
    return TypeGraph(
        name="efm",
        node_types={
            FEATURE: {"sel": BOOLEAN},
            GROUP: {"type": GROUP_TYPE},
            REAL_ATTR: {"val": REAL},
            NAT_ATTR: {"val": NATURAL},
            EXCLUDE: {},
        },
        edge_types={
            GROUPS: (FEATURE, GROUP),
            FEATURES: (GROUP, FEATURE),
            REAL_ATTRS: (FEATURE, REAL_ATTR),
            NAT_ATTRS: (FEATURE, NAT_ATTR),
            REQUIRES: (FEATURE, FEATURE),
            EXCLUDES: (EXCLUDE, FEATURE),
        },
    )


@dataclass(frozen=True)
class WellFormednessConstraint:
    """A named forbidden pattern; a graph satisfies it iff the pattern has no match."""

    name: str
    pattern: SymbolicGraph

    def violations(self, g: SymbolicGraph) -> list[Morphism]:
        return find_matches(self.pattern, g)


def _two_containers_pattern(name: str, container_type: str, edge_type: str, contained_type: str,
                            container_attrs: Mapping[str, Sort], contained_attrs: Mapping[str, Sort]) -> WellFormednessConstraint:
    slots: dict[tuple[str, str], Variable] = {}
    for i in (1, 2):
        for attr, sort in container_attrs.items():
            slots[(f"c{i}", attr)] = Variable(f"{attr}_c{i}", sort)
    for attr, sort in contained_attrs.items():
        slots[("x", attr)] = Variable(f"{attr}_x", sort)
    return WellFormednessConstraint(
        name,
        SymbolicGraph.build(
            efm_type_graph(),
            objects=[("c1", container_type), ("c2", container_type), ("x", contained_type)],
            links=[("e1", edge_type, "c1", "x"), ("e2", edge_type, "c2", "x")],
            slots=slots,
        ),
    )


@lru_cache(maxsize=1)
def builtin_constraints() -> tuple[WellFormednessConstraint, ...]:
    """The three structural constraints: no element contained twice."""
    tg = efm_type_graph()
    return (
        _two_containers_pattern("C-1", GROUP, FEATURES, FEATURE,
                                tg.attributes(GROUP), tg.attributes(FEATURE)),
        _two_containers_pattern("C-2", FEATURE, NAT_ATTRS, NAT_ATTR,
                                tg.attributes(FEATURE), tg.attributes(NAT_ATTR)),
        _two_containers_pattern("C-3", FEATURE, REAL_ATTRS, REAL_ATTR,
                                tg.attributes(FEATURE), tg.attributes(REAL_ATTR)),
    )


def check_wellformed(g: SymbolicGraph) -> list[tuple[str, Morphism]]:
    """Violations of the builtin constraints, deduplicated up to the symmetry
    of the two container roles."""
    if g.type_graph != efm_type_graph():
        raise TypeGraphMismatch("graph is not typed over the EFM metamodel")
    out: list[tuple[str, Morphism]] = []
    seen: set[tuple[str, frozenset[str]]] = set()
    for constraint in builtin_constraints():
        for m in constraint.violations(g):
            key = (constraint.name, frozenset(m.object_map.values()))
            if key in seen:
                continue
            seen.add(key)
            out.append((constraint.name, m))
    return out


def is_wellformed(g: SymbolicGraph) -> bool:
    return not check_wellformed(g)


def _group_literal(value: str) -> F.Const:
    return F.Const(value, GROUP_TYPE)


def _pinned_group_types(g: SymbolicGraph) -> dict[str, str]:
    """Group-type variables fixed to a literal by a top-level conjunct of the formula."""
    pinned: dict[str, str] = {}
    for clause in F.conjuncts(g.formula):
        if isinstance(clause, F.Eq):
            pairs = [(clause.lhs, clause.rhs), (clause.rhs, clause.lhs)]
            for a, b in pairs:
                if isinstance(a, F.Var) and isinstance(b, F.Const) and b.sort == GROUP_TYPE:
                    pinned[a.var.id] = b.value  # type: ignore[assignment]
    return pinned


def encode_config_semantics(g: SymbolicGraph) -> Formula:
    """Formula over g's slot variables expressing group, parent-child,
    require and exclude semantics.  The graph's own formula (cross-tree
    constraints) is not duplicated here."""
    if g.type_graph != efm_type_graph():
        raise TypeGraphMismatch("graph is not typed over the EFM metamodel")
    sel: dict[str, Formula] = {
        oid: F.Var(g.slot_var(oid, "sel")) for oid, t in g.objects.items() if t == FEATURE
    }
    parents: dict[str, list[str]] = {}
    children: dict[str, list[str]] = {}
    for lid in sorted(g.links):
        link = g.links[lid]
        if link.type == GROUPS:
            parents.setdefault(link.target, []).append(link.source)
        elif link.type == FEATURES:
            children.setdefault(link.source, []).append(link.target)

    pinned = _pinned_group_types(g)
    clauses: list[Formula] = []
    for gid in sorted(oid for oid, t in g.objects.items() if t == GROUP):
        who = parents.get(gid, [])
        kids = sorted(children.get(gid, []))
        if len(who) != 1:
            raise EfmStructureError(f"group {gid!r} must have exactly one parent feature, has {len(who)}")
        if not kids:
            raise EfmStructureError(f"group {gid!r} has no child features")
        type_var = g.slot_var(gid, "type")
        if pinned.get(type_var.id) in ("OPT", "MAN") and len(kids) != 1:
            raise EfmStructureError(
                f"group {gid!r} is fixed to {pinned[type_var.id]} but has {len(kids)} children"
            )
        parent = sel[who[0]]
        kid_sels = [sel[k] for k in kids]
        tv = F.Var(type_var)
        clauses.append(F.Implies(F.Eq(tv, _group_literal("ALT")), F.Eq(parent, F.exactly_one(kid_sels))))
        clauses.append(F.Implies(F.Eq(tv, _group_literal("OR")), F.Eq(parent, F.at_least_one(kid_sels))))
        clauses.append(F.Implies(F.Eq(tv, _group_literal("OPT")),
                                 F.conj(*[F.Implies(k, parent) for k in kid_sels])))
        clauses.append(F.Implies(F.Eq(tv, _group_literal("MAN")),
                                 F.conj(*[F.Eq(parent, k) for k in kid_sels])))
        for k in kid_sels:
            clauses.append(F.Implies(k, parent))
    for lid in sorted(g.links):
        link = g.links[lid]
        if link.type == REQUIRES:
            clauses.append(F.Implies(sel[link.source], sel[link.target]))
    for xid in sorted(oid for oid, t in g.objects.items() if t == EXCLUDE):
        targets = sorted(l.target for l in g.links.values() if l.type == EXCLUDES and l.source == xid)
        for i in range(len(targets)):
            for j in range(i + 1, len(targets)):
                clauses.append(F.Not(F.And((sel[targets[i]], sel[targets[j]]))))
    return F.conj(*clauses)


class ConfigurationAssignment:
    """Total map from a graph's slot variables to constants of matching sort."""

    def __init__(self, values: Mapping[Variable, object]):
        self.values: dict[Variable, object] = {}
        for var, value in values.items():
            self.values[var] = _coerce(var.sort, value)

    @classmethod
    def for_graph(cls, g: SymbolicGraph, by_id: Mapping[str, object]) -> "ConfigurationAssignment":
        slot_vars = g.slot_variables()
        missing = sorted(set(slot_vars) - set(by_id))
        if missing:
            raise ValueError(f"assignment misses slot variables: {', '.join(missing)}")
        return cls({slot_vars[vid]: by_id[vid] for vid in slot_vars})

    def check_total(self, g: SymbolicGraph) -> None:
        missing = [v.id for v in g.slot_variables().values() if v not in self.values]
        if missing:
            raise ValueError(f"assignment misses slot variables: {', '.join(sorted(missing))}")


def _coerce(sort: Sort, value: object) -> object:
    from fractions import Fraction

    if sort.kind is SortKind.BOOLEAN:
        if isinstance(value, bool):
            return value
    elif sort.kind is SortKind.NATURAL:
        if isinstance(value, int) and not isinstance(value, bool) and value >= 0:
            return value
    elif sort.kind is SortKind.REAL:
        if isinstance(value, (int, float, str, Fraction)) and not isinstance(value, bool):
            return Fraction(value)
    elif sort.kind is SortKind.ENUMERATION:
        if isinstance(value, str) and value in sort.enum_values:
            return value
    raise ValueError(f"value {value!r} does not fit sort {sort.name}")


def _const(sort: Sort, value: object) -> F.Const:
    return F.Const(value, sort)


def check_configuration(
    g: SymbolicGraph,
    assignment: ConfigurationAssignment,
    config: SolverConfig | None = None,
) -> bool:
    """True iff the assignment satisfies the configuration semantics and the
    graph's own formula.  Decided by constant folding; variables outside the
    slots (retained from deletions) are existentially closed and discharged
    via the solver only when folding is insufficient."""
    assignment.check_total(g)
    full = F.conj(encode_config_semantics(g), g.formula)
    env = dict(assignment.values)
    try:
        return bool(F.evaluate(full, env))
    except F.CannotEvaluate:
        pass
    closed = F.instantiate(full, {v: _const(v.sort, val) for v, val in env.items()})
    residual = sorted(F.free_vars(closed))
    if residual:
        closed = F.Exists(tuple(residual), closed)
    verdict = check_sat(closed, config)
    if verdict.result is SatResult.SAT:
        return True
    if verdict.result is SatResult.UNSAT:
        return False
    raise EfmStructureError(f"solver could not decide the configuration: {verdict.result.value}")


class ConfigSpace(Enum):
    YES = "yes"
    NO = "no"
    UNKNOWN = "unknown"


def has_valid_configuration(g: SymbolicGraph, config: SolverConfig | None = None) -> ConfigSpace:
    """Satisfiability of the configuration semantics conjoined with the model formula."""
    full = F.conj(encode_config_semantics(g), g.formula)
    verdict = check_sat(full, config, decls=g.variables.values())
    if verdict.result is SatResult.SAT:
        return ConfigSpace.YES
    if verdict.result is SatResult.UNSAT:
        return ConfigSpace.NO
    return ConfigSpace.UNKNOWN
